import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magicfactory.sim import (
    Circuit,
    ClassicalCondition,
    Gate,
    Measure,
    Postselect,
    QuantumState,
    apply_gate,
    fidelity,
    iter_branches,
    measure_pauli_product,
    phase_matrix,
    postselect,
    reduced_density_matrix,
    run_circuit,
)

PLUS = np.array([1, 1]) / np.sqrt(2)
T_STATE = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)


def random_state(rng, n):
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return QuantumState(v / np.linalg.norm(v))


def test_phase_fixes_zero():
    s = apply_gate(QuantumState.zero(1), Gate("PHASE", (0,), theta=45))
    assert np.allclose(s.amplitudes, [1, 0])


def test_phase_on_plus_gives_t_state():
    s = apply_gate(QuantumState(PLUS), Gate("PHASE", (0,), theta=45))
    assert fidelity(s, T_STATE) == pytest.approx(1, abs=1e-12)
    assert np.allclose(s.amplitudes, T_STATE)


def test_named_phases():
    assert np.allclose(phase_matrix(45), Gate("T", (0,)).base_matrix)
    assert np.allclose(phase_matrix(90), Gate("S", (0,)).base_matrix)
    assert np.allclose(phase_matrix(22.5) @ phase_matrix(22.5), phase_matrix(45))


def test_sqrt_t_twice_is_t_on_random_states():
    rng = np.random.default_rng(5)
    for _ in range(10):
        s = random_state(rng, 3)
        twice = apply_gate(apply_gate(s, Gate("PHASE", (1,), theta=22.5)), Gate("PHASE", (1,), theta=22.5))
        once = apply_gate(s, Gate("T", (1,)))
        assert fidelity(twice, once) == pytest.approx(1, abs=1e-12)


def test_little_endian_cnot():
    # |1>_0 |0>_1 -> |1>_0 |1>_1
    s = QuantumState.product([np.array([0, 1]), np.array([1, 0])])
    s = apply_gate(s, Gate("CNOT", (1,), controls=((0, "Z", 1),)))
    assert np.allclose(s.amplitudes, [0, 0, 0, 1])


def test_anti_control_and_x_axis_control():
    s = QuantumState.zero(2)
    s = apply_gate(s, Gate("X", (1,), controls=((0, "Z", 0),)))
    assert np.allclose(s.amplitudes, [0, 0, 1, 0])
    # An X-axis control on |-> fires; on |+> it does not.
    minus = np.array([1, -1]) / np.sqrt(2)
    s = apply_gate(QuantumState.product([minus, [1, 0]]), Gate("X", (1,), controls=((0, "X", 1),)))
    assert fidelity(s, np.kron([0, 1], minus)) == pytest.approx(1)
    s = apply_gate(QuantumState.product([PLUS, [1, 0]]), Gate("X", (1,), controls=((0, "X", 1),)))
    assert fidelity(s, np.kron([1, 0], PLUS)) == pytest.approx(1)


def test_ccz_phase():
    s = QuantumState.product([PLUS] * 3)
    s = apply_gate(s, Gate("CCZ", (2,), controls=((0, "Z", 1), (1, "Z", 1))))
    expect = np.ones(8) / np.sqrt(8)
    expect[7] = -expect[7]
    assert np.allclose(s.amplitudes, expect)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("CNOT", (0,), controls=((0, "Z", 1),))
    with pytest.raises(ValueError):
        Gate("PHASE", (0,))
    with pytest.raises(ValueError):
        Gate("FOO", (0,))
    with pytest.raises(ValueError):
        Gate("CCZ", (0,), controls=((1, "Z", 1),))
    with pytest.raises(IndexError):
        apply_gate(QuantumState.zero(1), Gate("X", (3,)))


def test_measure_eigenstates():
    s, bit = measure_pauli_product(QuantumState.zero(2), [(0, "Z"), (1, "Z")], rng=0)
    assert bit == 0 and np.allclose(s.amplitudes, [1, 0, 0, 0])
    s, bit = measure_pauli_product(QuantumState(PLUS), [(0, "X")], rng=0)
    assert bit == 0 and np.allclose(s.amplitudes, PLUS)
    assert s.record == [0]


def test_measure_forced_projection():
    s = QuantumState(np.array([1, 0, 1, 0]) / np.sqrt(2))  # |00> + |0>_0|1>_1
    out, bit = measure_pauli_product(s, [(0, "Z"), (1, "Z")], forced=0)
    assert bit == 0
    assert np.allclose(out.amplitudes, [1, 0, 0, 0])


def test_measure_forced_impossible():
    with pytest.raises(ValueError):
        measure_pauli_product(QuantumState.zero(1), [(0, "Z")], forced=1)
    with pytest.raises(ValueError):
        measure_pauli_product(QuantumState.zero(1), [])


def test_y_measurement():
    y_plus = np.array([1, 1j]) / np.sqrt(2)
    _, bit = measure_pauli_product(QuantumState(y_plus), [(0, "Y")], rng=1)
    assert bit == 0


def test_postselect_semantics():
    s = QuantumState.zero(1)
    assert postselect(s, ClassicalCondition(frozenset())) is s
    s.record = [1, 1]
    assert postselect(s, ClassicalCondition({0, 1})) is s
    assert postselect(s, ClassicalCondition({0})) is None
    assert postselect(s, ClassicalCondition({0, 1}, negate=True)) is None


def test_condition_evaluation():
    assert ClassicalCondition({0, 2}).evaluate([1, 0, 0]) == 1
    assert ClassicalCondition({0, 2}, negate=True).evaluate([1, 0, 0]) == 0
    with pytest.raises(IndexError):
        ClassicalCondition({3}).evaluate([0])


def test_fidelity_basics():
    assert fidelity(QuantumState(PLUS), PLUS) == pytest.approx(1)
    assert fidelity(QuantumState.zero(1), np.array([0, 1])) == 0
    assert fidelity(QuantumState(PLUS), T_STATE) == pytest.approx(0.8535533905932737, abs=1e-12)
    with pytest.raises(ValueError):
        fidelity(QuantumState.zero(1), QuantumState.zero(2))


def test_state_length_check():
    with pytest.raises(ValueError):
        QuantumState(np.ones(3))


def test_reduced_density_matrix_of_product():
    s = QuantumState.product([PLUS, np.array([0, 1]), T_STATE])
    rho = reduced_density_matrix(s, [2, 0])
    assert np.allclose(rho, np.outer(np.kron(PLUS, T_STATE), np.kron(PLUS, T_STATE).conj()))


def _teleport_circuit():
    ops = [
        Gate("H", (0,)),
        Gate("T", (0,), site="t"),
        Gate("H", (1,)),
        Gate("CNOT", (2,), controls=((1, "Z", 1),)),
        Measure(((0, "X"), (1, "X"))),
        Measure(((0, "Z"), (1, "Z")), condition=(ClassicalCondition({0}),)),
        Measure(((2, "Z"),)),
        Postselect(ClassicalCondition(frozenset())),
    ]
    return Circuit("demo", 3, ops, output_qubits=(0,), reference=T_STATE)


def test_run_records_and_conditional_measurement():
    c = _teleport_circuit()
    for seed in range(10):
        r = run_circuit(c, seed=seed)
        assert len(r.record) == c.num_measurements
        if r.record[0] == 0:
            assert r.record[1] == 0
        assert r.accepted


def test_run_rejects_unknown_sites_and_bad_conditions():
    c = _teleport_circuit()
    with pytest.raises(ValueError):
        run_circuit(c, injected_errors={"nope"})
    bad = Circuit("bad", 1, [Gate("X", (0,), condition=(ClassicalCondition({0}),))])
    with pytest.raises(ValueError):
        run_circuit(bad)


def test_injected_error_is_z_after_site():
    c = Circuit("one", 1, [Gate("H", (0,)), Gate("T", (0,), site="t")], output_qubits=(0,), reference=T_STATE)
    r = run_circuit(c, injected_errors={"t"})
    minus_t = np.array([1, -np.exp(1j * np.pi / 4)]) / np.sqrt(2)
    assert fidelity(r.state, minus_t) == pytest.approx(1)


def test_iter_branches_probabilities_sum_to_one():
    c = _teleport_circuit()
    branches = list(iter_branches(c))
    assert sum(p for p, _ in branches) == pytest.approx(1)
    assert len({tuple(r.record) for _, r in branches}) == len(branches)


@st.composite
def gates(draw, n=3):
    kind = draw(st.sampled_from(["H", "X", "Y", "Z", "S", "S_DAG", "T", "T_DAG", "X_HALF",
                                 "X_NEG_HALF", "PHASE", "CNOT", "CZ", "CCZ", "MULTI_TARGET_CNOT"]))
    qs = draw(st.permutations(range(n)))
    axis = draw(st.sampled_from(["Z", "X"]))
    parity = draw(st.integers(0, 1))
    theta = draw(st.floats(-360, 360, allow_nan=False))
    if kind in ("CNOT", "CZ"):
        return Gate(kind, (qs[0],), controls=((qs[1], axis, parity),))
    if kind == "CCZ":
        return Gate(kind, (qs[0],), controls=((qs[1], "Z", 1), (qs[2], axis, parity)))
    if kind == "MULTI_TARGET_CNOT":
        return Gate(kind, (qs[0], qs[1]), controls=((qs[2], axis, parity),))
    return Gate(kind, (qs[0],), theta=theta if kind == "PHASE" else None)


@settings(max_examples=60, deadline=None)
@given(gates(), st.integers(0, 2 ** 32 - 1))
def test_unitary_gates_preserve_norm(gate, seed):
    s = random_state(np.random.default_rng(seed), 3)
    assert apply_gate(s, gate).norm() == pytest.approx(1, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(-720, 720, allow_nan=False), st.floats(-720, 720, allow_nan=False), st.integers(0, 2 ** 32 - 1))
def test_phase_composition(theta, phi, seed):
    s = random_state(np.random.default_rng(seed), 2)
    a = apply_gate(apply_gate(s, Gate("PHASE", (0,), theta=theta)), Gate("PHASE", (0,), theta=phi))
    b = apply_gate(s, Gate("PHASE", (0,), theta=theta + phi))
    assert np.allclose(a.amplitudes, b.amplitudes, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.sampled_from("XYZ")), min_size=1, max_size=3,
                unique_by=lambda p: p[0]), st.integers(0, 2 ** 32 - 1))
def test_repeated_measurement_is_stable(paulis, seed):
    s = random_state(np.random.default_rng(seed), 3)
    s1, b1 = measure_pauli_product(s, paulis, rng=seed)
    s2, b2 = measure_pauli_product(s1, paulis, rng=seed + 1)
    assert b1 == b2
    assert np.allclose(s1.amplitudes, s2.amplitudes)
    assert s2.norm() == pytest.approx(1, abs=1e-9)
    assert len(s2.record) == 2


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_deterministic_replay(seed):
    c = _teleport_circuit()
    assert run_circuit(c, seed=seed).record == run_circuit(c, seed=seed).record
