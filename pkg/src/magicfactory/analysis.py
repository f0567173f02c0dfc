"""Exhaustive and sampled Z-error injection over a circuit's noisy-T sites."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .frame import UnsupportedFrameError, propagate, reference_branch
from .sim import Circuit, run_circuit, subsystem_fidelity

DETECTED = "detected"
BENIGN = "undetected_benign"
HARMFUL = "undetected_harmful"
CLASSES = (DETECTED, BENIGN, HARMFUL)

DEFAULT_HARM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SuppressionModel:
    """Leading-order output error ``coefficient * eps**degree``."""

    coefficient: int
    degree: int

    def evaluate(self, eps: float) -> float:
        return self.coefficient * eps ** self.degree

    def __str__(self):
        return f"({self.coefficient}, {self.degree})"


@dataclass
class InjectionReport:
    circuit_name: str
    num_sites: int
    sites: tuple
    max_weight: int
    harm_tolerance: float
    counts: Dict[int, Dict[str, int]]
    harmful_patterns: Dict[int, List[tuple]] = field(default_factory=dict)
    # Patterns whose class changed between sampled measurement branches.
    branch_dependent: List[tuple] = field(default_factory=list)
    method: str = "statevector"
    disagreements: List[tuple] = field(default_factory=list)

    @property
    def leading_term(self) -> Optional[SuppressionModel]:
        for w in sorted(self.counts):
            h = self.counts[w][HARMFUL]
            if h:
                return SuppressionModel(h, w)
        return None

    def to_dict(self) -> dict:
        lead = self.leading_term
        return {
            "circuit": self.circuit_name,
            "num_sites": self.num_sites,
            "sites": list(self.sites),
            "max_weight": self.max_weight,
            "harm_tolerance": self.harm_tolerance,
            "method": self.method,
            "counts": {str(w): dict(c) for w, c in sorted(self.counts.items())},
            "harmful_patterns": {str(w): [list(p) for p in ps]
                                 for w, ps in sorted(self.harmful_patterns.items())},
            "branch_dependent": [list(p) for p in self.branch_dependent],
            "disagreements": [list(p) for p in self.disagreements],
            "leading_term": None if lead is None else [lead.coefficient, lead.degree],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "InjectionReport":
        return cls(
            circuit_name=d["circuit"],
            num_sites=d["num_sites"],
            sites=tuple(d["sites"]),
            max_weight=d["max_weight"],
            harm_tolerance=d["harm_tolerance"],
            counts={int(w): dict(c) for w, c in d["counts"].items()},
            harmful_patterns={int(w): [tuple(p) for p in ps]
                              for w, ps in d.get("harmful_patterns", {}).items()},
            branch_dependent=[tuple(p) for p in d.get("branch_dependent", [])],
            method=d.get("method", "statevector"),
            disagreements=[tuple(p) for p in d.get("disagreements", [])],
        )

    def to_table(self) -> str:
        rows = [f"{'weight':>6} {'patterns':>9} {'detected':>9} {'benign':>7} {'harmful':>8}"]
        for w in sorted(self.counts):
            c = self.counts[w]
            rows.append(f"{w:>6} {sum(c.values()):>9} {c[DETECTED]:>9} {c[BENIGN]:>7} {c[HARMFUL]:>8}")
        lead = self.leading_term
        rows.append("leading term: " + (str(lead) if lead else "none within scanned weights"))
        if self.branch_dependent:
            rows.append(f"branch-dependent patterns: {len(self.branch_dependent)}")
        if self.disagreements:
            rows.append(f"frame/statevector disagreements: {len(self.disagreements)}")
        return "\n".join(rows)


def _classify(accepted: bool, fid: float, tol: float) -> str:
    if not accepted:
        return DETECTED
    return BENIGN if fid >= 1 - tol else HARMFUL


class _Classifier:
    """Classifies error patterns over a fixed set of seeded measurement branches."""

    def __init__(self, circuit: Circuit, method: str, seeds: Sequence[int], tol: float):
        self.circuit = circuit
        self.method = method
        self.seeds = list(seeds)
        self.tol = tol
        self.branches = None
        if method in ("frame", "both"):
            self.branches = [reference_branch(circuit, s) for s in self.seeds]

    def statevector(self, pattern) -> List[str]:
        out = []
        for s in self.seeds:
            r = run_circuit(self.circuit, seed=s, injected_errors=pattern)
            fid = subsystem_fidelity(r.state, self.circuit.output_qubits, self.circuit.reference) \
                if r.accepted else 0.0
            out.append(_classify(r.accepted, fid, self.tol))
        return out

    def frame(self, pattern) -> List[str]:
        return [_classify(*propagate(self.circuit, b, pattern), self.tol) for b in self.branches]

    def __call__(self, pattern):
        """Return (class on the first branch, per-branch classes, disagreement flag)."""
        if self.method == "statevector":
            classes = self.statevector(pattern)
            return classes, False
        if self.method == "frame":
            return self.frame(pattern), False
        sv = self.statevector(pattern)
        fr = self.frame(pattern)
        return sv, sv != fr


def _check_circuit(circuit: Circuit):
    if not circuit.injection_sites:
        raise ValueError(f"{circuit.name} has no injection sites")
    if circuit.reference is None:
        raise ValueError(f"{circuit.name} has no reference state")


def enumerate_errors(circuit: Circuit, max_weight: int, harm_tolerance: float = DEFAULT_HARM_TOLERANCE,
                     method: str = "statevector", branches: int = 2, seed: int = 0) -> InjectionReport:
    """Classify every Z-error pattern of weight <= ``max_weight``.

    Each pattern is run on ``branches`` seeded measurement branches. ``method``
    picks the dense simulator, the Pauli-frame path, or ``"both"``, which
    classifies with the simulator and records every pattern where the frame
    path disagrees.
    """
    _check_circuit(circuit)
    sites = circuit.injection_sites
    if not 0 <= max_weight <= len(sites):
        raise ValueError(f"max_weight must lie in [0, {len(sites)}]")
    if not 0 < harm_tolerance < 1:
        raise ValueError("harm_tolerance must lie in (0, 1)")
    if method not in ("statevector", "frame", "both"):
        raise ValueError(f"unknown method {method!r}")
    if branches < 1:
        raise ValueError("need at least one branch")
    seeds = [seed + i for i in range(branches)]
    classify = _Classifier(circuit, method, seeds, harm_tolerance)
    counts = {}
    harmful = {}
    branch_dependent = []
    disagreements = []
    for w in range(max_weight + 1):
        c = dict.fromkeys(CLASSES, 0)
        for pattern in itertools.combinations(sites, w):
            classes, disagree = classify(pattern)
            if len(set(classes)) > 1:
                branch_dependent.append(pattern)
            if disagree:
                disagreements.append(pattern)
            cls = classes[0]
            c[cls] += 1
            if cls == HARMFUL:
                harmful.setdefault(w, []).append(pattern)
        counts[w] = c
    return InjectionReport(
        circuit_name=circuit.name,
        num_sites=len(sites),
        sites=sites,
        max_weight=max_weight,
        harm_tolerance=harm_tolerance,
        counts=counts,
        harmful_patterns=harmful,
        branch_dependent=branch_dependent,
        method=method,
        disagreements=disagreements,
    )


def derive_suppression(report: InjectionReport) -> SuppressionModel:
    lead = report.leading_term
    if lead is None:
        raise ValueError(f"no undetected harmful pattern up to weight {report.max_weight}")
    return lead


def analytic_rates(report: InjectionReport, eps: float) -> dict:
    """Rejection and harmful-acceptance probabilities implied by the counts, truncated at max_weight."""
    n = report.num_sites
    out = {"rejection_rate": 0.0, "harmful_accept_rate": 0.0}
    for w, c in report.counts.items():
        p = eps ** w * (1 - eps) ** (n - w)
        out["rejection_rate"] += c[DETECTED] * p
        out["harmful_accept_rate"] += c[HARMFUL] * p
    return out


def monte_carlo_validate(circuit: Circuit, eps: float, trials: int, seed: int = 0,
                         harm_tolerance: float = DEFAULT_HARM_TOLERANCE, method: str = "auto") -> dict:
    """Sample independent per-site Z errors and estimate rejection and harmful-accept rates.

    Identical error patterns are classified once. Standard errors are binomial.
    """
    _check_circuit(circuit)
    if not 0 <= eps <= 0.1:
        raise ValueError("eps must lie in [0, 0.1]")
    if trials < 10_000:
        raise ValueError("monte_carlo_validate needs at least 1e4 trials")
    sites = circuit.injection_sites
    rng = np.random.default_rng(seed)
    masks = rng.random((trials, len(sites))) < eps
    patterns, counts = np.unique(masks, axis=0, return_counts=True)
    if method == "auto":
        method = "frame"
        try:
            reference_branch(circuit, seed)
            probe = _Classifier(circuit, "frame", [seed], harm_tolerance)
            for row in patterns:
                probe(tuple(s for s, hit in zip(sites, row) if hit))
        except UnsupportedFrameError:
            method = "statevector"
    classify = _Classifier(circuit, method, [seed], harm_tolerance)
    rejected = harmful = 0
    for row, k in zip(patterns, counts):
        cls = classify(tuple(s for s, hit in zip(sites, row) if hit))[0][0]
        if cls == DETECTED:
            rejected += int(k)
        elif cls == HARMFUL:
            harmful += int(k)

    def rate(k):
        p = k / trials
        return p, math.sqrt(max(p * (1 - p), 0.0) / trials)

    rej, rej_se = rate(rejected)
    harm, harm_se = rate(harmful)
    return {
        "eps": eps,
        "trials": trials,
        "rejection_rate": rej,
        "rejection_stderr": rej_se,
        "harmful_accept_rate": harm,
        "harmful_accept_stderr": harm_se,
        "distinct_patterns": int(len(patterns)),
    }
