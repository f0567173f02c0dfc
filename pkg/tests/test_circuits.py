import json
from pathlib import Path

import numpy as np
import pytest

from magicfactory.circuits import (
    CCZ_ANCILLA_OUTPUTS,
    T_STATE,
    FactoryCircuit,
    build_c2t_simple,
    build_c2t_surgery,
    build_ccz_factory,
    build_fifteen_to_one,
    build_phase_catalysis,
    ccz_state,
    circuit_from_json,
    circuit_to_json,
    circuit_to_text,
    phase_plus,
    reference_state,
    t_cost,
)
from magicfactory.sim import (
    QuantumState,
    extract_pure_state,
    fidelity,
    iter_branches,
    phase_matrix,
    product_vector,
    run_circuit,
    subsystem_fidelity,
)

GOLDEN = Path(__file__).parent / "golden"
PLUS = np.array([1, 1]) / np.sqrt(2)
ZERO = np.array([1, 0])


def output_fidelity(c, result):
    return subsystem_fidelity(result.state, c.output_qubits, c.reference)


def test_reference_states():
    assert np.allclose(reference_state("T"), reference_state("PHASE_PLUS", 45))
    v = product_vector([PLUS] * 3)
    v[7] *= -1
    assert np.allclose(reference_state("CCZ"), v)
    with pytest.raises(ValueError):
        reference_state("PHASE_PLUS")
    with pytest.raises(ValueError):
        reference_state("W")


def test_ccz_labels_and_sites():
    c = build_ccz_factory()
    assert c.injection_sites == tuple("abcdefgh")
    assert [c.qubit_labels[i] for i in range(11)] == ["1", "2", "3", *"abcdefgh"]
    stabilizers = [op.key for op in c.ops if getattr(op, "key", "").startswith("X")]
    assert stabilizers == ["X1abcd", "Xabcdefgh", "X3aceg", "X2abef"]


def test_ccz_ancilla_parities_cover_the_cube():
    # Each output subset (as a bit pattern over 1,2,3) appears exactly once.
    patterns = {sum(1 << "123".index(o) for o in outs) for outs in CCZ_ANCILLA_OUTPUTS.values()}
    assert patterns == set(range(8))


def test_ccz_error_free_all_branches():
    c = build_ccz_factory()
    total = 0.0
    for p, r in iter_branches(c):
        assert r.accepted
        assert output_fidelity(c, r) == pytest.approx(1, abs=1e-9)
        total += p
    assert total == pytest.approx(1)


def test_ccz_single_errors_rejected_pairs_accepted():
    c = build_ccz_factory()
    for s in c.injection_sites:
        assert not run_circuit(c, seed=3, injected_errors={s}).accepted
    pairs = [(a, b) for i, a in enumerate("abcdefgh") for b in "abcdefgh"[i + 1:]]
    assert len(pairs) == 28
    for pair in pairs:
        r = run_circuit(c, seed=3, injected_errors=set(pair))
        assert r.accepted
        assert output_fidelity(c, r) < 0.5


def test_fifteen_to_one_basics():
    c = build_fifteen_to_one()
    assert len(c.injection_sites) == 15
    assert len(c.output_qubits) == 1
    r = run_circuit(c, seed=1)
    assert r.accepted and output_fidelity(c, r) == pytest.approx(1, abs=1e-9)
    for s in c.injection_sites[:5]:
        assert not run_circuit(c, seed=1, injected_errors={s}).accepted


def test_fifteen_to_one_line_triple_escapes():
    c = build_fifteen_to_one()
    # 1 ^ 2 ^ 3 == 0: a weight-3 codeword of the punctured code.
    r = run_circuit(c, seed=2, injected_errors={"1", "2", "3"})
    assert r.accepted
    assert output_fidelity(c, r) < 0.5
    r = run_circuit(c, seed=2, injected_errors={"1", "2", "4"})
    assert not r.accepted


def test_c2t_simple_outputs_t_states():
    c = build_c2t_simple()
    assert c.injection_sites == ("t",)
    r = run_circuit(c)
    for q in c.output_qubits:
        assert subsystem_fidelity(r.state, [q], T_STATE) == pytest.approx(1, abs=1e-9)


def test_c2t_simple_needs_the_ccz():
    c = build_c2t_simple().without_preparation()
    r = run_circuit(c, initial_state=QuantumState.product([PLUS] * 3))
    fids = [subsystem_fidelity(r.state, [q], T_STATE) for q in c.output_qubits]
    assert min(fids) < 1 - 1e-3


def test_c2t_catalyst_fed_from_previous_run():
    simple = build_c2t_simple()
    first = run_circuit(simple)
    catalyst = extract_pure_state(first.state, [2])
    cat = build_c2t_simple(catalyzed=True).without_preparation()
    init = QuantumState(np.kron(catalyst, ccz_state()))
    for p, r in iter_branches(cat, initial_state=init):
        assert p > 0.1
        assert fidelity(extract_pure_state(r.state, [0, 1, 2]), extract_pure_state(first.state, [0, 1, 2])) \
            == pytest.approx(1, abs=1e-9)


def test_c2t_surgery_every_branch():
    c = build_c2t_surgery()
    assert [c.qubit_labels[i] for i in range(7)] == ["1", "2", "3", "T", "B", "S", "A"]
    n = 0
    for p, r in iter_branches(c):
        n += 1
        assert output_fidelity(c, r) == pytest.approx(1, abs=1e-9)
        # The returned catalyst matches the consumed one.
        assert subsystem_fidelity(r.state, [c.catalyst_qubit], T_STATE) == pytest.approx(1, abs=1e-9)
    assert n == 384


def test_c2t_surgery_matches_simple_branchwise():
    simple = run_circuit(build_c2t_simple())
    target = extract_pure_state(simple.state, [0, 1, 2])
    c = build_c2t_surgery()
    for seed in range(30):
        r = run_circuit(c, seed=seed)
        assert fidelity(extract_pure_state(r.state, list(c.output_qubits)), target) == pytest.approx(1, abs=1e-9)


def test_ccz_then_c2t_composition():
    factory = run_circuit(build_ccz_factory(), seed=11)
    ccz = extract_pure_state(factory.state, [0, 1, 2])
    c = build_c2t_simple().without_preparation()
    r = run_circuit(c, initial_state=QuantumState(ccz))
    assert output_fidelity(c, r) == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("theta", [45, 22.5, 90, 1e-3])
def test_phase_catalysis_on_plus(theta):
    c = build_phase_catalysis(theta)
    for p, r in iter_branches(c):
        for q in range(3):
            assert subsystem_fidelity(r.state, [q], phase_plus(theta)) == pytest.approx(1, abs=1e-9)


def test_phase_catalysis_random_inputs():
    rng = np.random.default_rng(2024)
    for theta in rng.uniform(0, 90, size=20):
        theta = float(theta) or 45.0
        c = build_phase_catalysis(theta).without_preparation()
        x, y = (rng.normal(size=2) + 1j * rng.normal(size=2) for _ in range(2))
        x, y = x / np.linalg.norm(x), y / np.linalg.norm(y)
        init = QuantumState(product_vector([x, y, phase_plus(theta), ZERO]))
        expect = product_vector([phase_matrix(theta) @ x, phase_matrix(theta) @ y, phase_plus(theta)])
        for p, r in iter_branches(c, initial_state=init):
            got = extract_pure_state(r.state, [0, 1, 2])
            assert fidelity(got, expect) == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("theta", [0, -5, 90.5, 180])
def test_phase_catalysis_range(theta):
    with pytest.raises(ValueError):
        build_phase_catalysis(theta)


def test_t_costs():
    assert t_cost(build_phase_catalysis(22.5)) == 5
    assert t_cost(build_phase_catalysis(45)) == 4
    assert t_cost(build_ccz_factory()) == 8
    assert t_cost(build_fifteen_to_one()) == 15
    assert t_cost(build_c2t_simple()) == 1
    with pytest.raises(ValueError):
        t_cost(build_phase_catalysis(10))


def test_builders_are_deterministic():
    for build in (build_ccz_factory, build_fifteen_to_one, build_c2t_simple, build_c2t_surgery):
        assert circuit_to_json(build()) == circuit_to_json(build())


@pytest.mark.parametrize("name,build", [
    ("ccz8", build_ccz_factory),
    ("c2t-simple", build_c2t_simple),
    ("c2t-surgery", build_c2t_surgery),
    ("phase-22.5", lambda: build_phase_catalysis(22.5)),
])
def test_golden_text(name, build):
    assert circuit_to_text(build()) == (GOLDEN / f"{name}.txt").read_text()


def test_json_round_trip_runs_identically():
    for build in (build_ccz_factory, build_c2t_surgery):
        c = build()
        back = circuit_from_json(circuit_to_json(c))
        back.reference = c.reference
        assert back.ops == c.ops
        assert run_circuit(back, seed=4).record == run_circuit(c, seed=4).record
    with pytest.raises(ValueError):
        circuit_from_json(json.dumps({"version": 2}))


def test_without_preparation_drops_prefix():
    c = build_c2t_surgery()
    bare = c.without_preparation()
    assert isinstance(bare, FactoryCircuit)
    assert len(bare.ops) == len(c.ops) - c.prep_ops
    assert bare.injection_sites == ()
