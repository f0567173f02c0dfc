import dataclasses
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from magicfactory.analysis import (
    DETECTED,
    HARMFUL,
    InjectionReport,
    SuppressionModel,
    analytic_rates,
    derive_suppression,
    enumerate_errors,
    monte_carlo_validate,
)
from magicfactory.circuits import build_c2t_simple, build_ccz_factory, build_fifteen_to_one, build_phase_catalysis
from magicfactory.frame import Frame, UnsupportedFrameError, propagate, reference_branch
from magicfactory.sim import Circuit, Gate


@pytest.fixture(scope="module")
def ccz_report():
    return enumerate_errors(build_ccz_factory(), 3, method="both", branches=2)


@pytest.fixture(scope="module")
def t15_report():
    return enumerate_errors(build_fifteen_to_one(), 3, method="frame", branches=3)


def test_ccz_counts(ccz_report):
    assert ccz_report.counts[0] == {"detected": 0, "undetected_benign": 1, "undetected_harmful": 0}
    assert ccz_report.counts[1] == {"detected": 8, "undetected_benign": 0, "undetected_harmful": 0}
    assert ccz_report.counts[2] == {"detected": 0, "undetected_benign": 0, "undetected_harmful": 28}
    assert ccz_report.counts[3][DETECTED] == 56
    assert ccz_report.disagreements == []
    assert ccz_report.branch_dependent == []
    assert derive_suppression(ccz_report) == SuppressionModel(28, 2)


def test_t15_counts(t15_report):
    c = t15_report.counts
    assert c[1][DETECTED] == 15 and c[2][DETECTED] == 105
    assert c[3][HARMFUL] == 35 and c[3][DETECTED] == 420
    assert derive_suppression(t15_report) == SuppressionModel(35, 3)
    # The escaping triples are exactly the lines x ^ y ^ z = 0 of the 4-bit projective space.
    triples = {tuple(sorted(int(s) for s in p)) for p in t15_report.harmful_patterns[3]}
    lines = {tuple(sorted((a, b, a ^ b))) for a, b in itertools.combinations(range(1, 16), 2)}
    assert triples == lines


def test_counts_sum_to_binomials(ccz_report, t15_report):
    for r in (ccz_report, t15_report):
        for w, c in r.counts.items():
            assert sum(c.values()) == math.comb(r.num_sites, w)


def test_weight_zero_only():
    r = enumerate_errors(build_ccz_factory(), 0)
    assert r.counts == {0: {"detected": 0, "undetected_benign": 1, "undetected_harmful": 0}}
    with pytest.raises(ValueError):
        derive_suppression(r)


def test_statevector_and_frame_agree_on_t15_low_weight():
    r = enumerate_errors(build_fifteen_to_one(), 2, method="both", branches=1)
    assert r.disagreements == []


def test_c2t_simple_single_error_is_harmful():
    r = enumerate_errors(build_c2t_simple(), 1, method="both")
    assert r.counts[1][HARMFUL] == 1
    assert r.disagreements == []


def test_derive_suppression_definition():
    r = InjectionReport("x", 4, tuple("abcd"), 1, 1e-6,
                        {0: {"detected": 0, "undetected_benign": 1, "undetected_harmful": 0},
                         1: {"detected": 1, "undetected_benign": 0, "undetected_harmful": 3}})
    assert derive_suppression(r) == SuppressionModel(3, 1)
    assert derive_suppression(r) == derive_suppression(InjectionReport.from_dict(r.to_dict()))


def test_report_json_round_trip(ccz_report):
    back = InjectionReport.from_dict(__import__("json").loads(ccz_report.to_json()))
    assert back == ccz_report
    assert "leading term: (28, 2)" in ccz_report.to_table()


def test_relabelled_sites_give_same_counts(ccz_report):
    c = build_ccz_factory()
    perm = dict(zip("abcdefgh", "hgfedcba"))
    ops = [dataclasses.replace(op, site=perm[op.site]) if isinstance(op, Gate) and op.site else op for op in c.ops]
    relabelled = dataclasses.replace(c, ops=ops)
    r = enumerate_errors(relabelled, 3, method="frame")
    assert r.counts == ccz_report.counts


def test_enumerate_rejects_bad_input():
    c = build_ccz_factory()
    with pytest.raises(ValueError):
        enumerate_errors(c, 9)
    with pytest.raises(ValueError):
        enumerate_errors(c, 1, harm_tolerance=0)
    with pytest.raises(ValueError):
        enumerate_errors(dataclasses.replace(c, reference=None), 1)
    with pytest.raises(ValueError):
        enumerate_errors(Circuit("empty", 1, [Gate("H", (0,))], output_qubits=(0,), reference=np.ones(2)), 0)


def test_frame_rejects_non_clifford_feedback():
    c = build_phase_catalysis(22.5)
    branch = reference_branch(c, 0)
    with pytest.raises(UnsupportedFrameError):
        propagate(c, branch, {"rot"})
    # The dense path still handles it.
    r = enumerate_errors(c, 1)
    assert r.counts[1][HARMFUL] == 1


def test_frame_conjugation():
    f = Frame(x=1)
    f.conjugate(Gate("H", (0,)))
    assert (f.x, f.z) == (0, 1)
    f = Frame(x=1)
    f.conjugate(Gate("CNOT", (1,), controls=((0, "Z", 1),)))
    assert (f.x, f.z) == (0b11, 0)
    f = Frame(z=0b10)
    f.conjugate(Gate("CNOT", (1,), controls=((0, "Z", 1),)))
    assert (f.x, f.z) == (0, 0b11)
    f = Frame(x=1)
    with pytest.raises(UnsupportedFrameError):
        f.conjugate(Gate("T", (0,)))
    f = Frame(z=1)
    f.conjugate(Gate("T", (0,)))
    assert (f.x, f.z) == (0, 1)


def test_analytic_rates_ccz():
    r = enumerate_errors(build_ccz_factory(), 2, method="frame")
    eps = 3.5e-8
    rates = analytic_rates(r, eps)
    assert rates["harmful_accept_rate"] == pytest.approx(28 * eps ** 2, rel=1e-5)
    assert rates["rejection_rate"] == pytest.approx(8 * eps, rel=1e-5)


def test_monte_carlo_matches_enumeration(t15_report):
    eps = 2e-3
    mc = monte_carlo_validate(build_fifteen_to_one(), eps, 40_000, seed=9)
    expect = analytic_rates(t15_report, eps)["rejection_rate"]
    assert abs(mc["rejection_rate"] - expect) <= 3 * mc["rejection_stderr"]
    assert abs(mc["rejection_rate"] - 15 * eps) <= 3 * mc["rejection_stderr"] + 15 * eps * 0.05


def test_monte_carlo_zero_eps_and_validation():
    c = build_ccz_factory()
    mc = monte_carlo_validate(c, 0.0, 10_000)
    assert mc["rejection_rate"] == 0 and mc["harmful_accept_rate"] == 0
    with pytest.raises(ValueError):
        monte_carlo_validate(c, 0.2, 10_000)
    with pytest.raises(ValueError):
        monte_carlo_validate(c, 0.01, 100)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 100), st.integers(1, 5), st.floats(1e-9, 0.1), st.floats(1e-9, 0.1))
def test_suppression_monotone(coef, degree, a, b):
    m = SuppressionModel(coef, degree)
    lo, hi = sorted((a, b))
    assert m.evaluate(lo) <= m.evaluate(hi)
