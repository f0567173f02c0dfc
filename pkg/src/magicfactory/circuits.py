"""Constructors for the distillation and catalysis circuits, plus serialization.

Qubit roles follow the factory figures: outputs ``1``..``3``, ancillae
``a``..``h``, the catalyst, and the lattice-surgery helpers ``S``, ``A``, ``B``.
Stabilizer "qubits" are realized as labelled Pauli-product measurements.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
from typing import Optional, Sequence

import numpy as np

from .sim import (
    Circuit,
    ClassicalCondition,
    Gate,
    Measure,
    Postselect,
    product_vector,
)

PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


def phase_plus(theta_degrees: float) -> np.ndarray:
    """Z^theta |+>, i.e. (|0> + e^{i theta}|1>)/sqrt(2)."""
    return np.array([1, np.exp(1j * np.deg2rad(theta_degrees))]) / np.sqrt(2)


T_STATE = phase_plus(45)


def ccz_state() -> np.ndarray:
    v = np.ones(8, dtype=complex) / np.sqrt(8)
    v[7] *= -1
    return v


def reference_state(kind: str, theta: Optional[float] = None) -> np.ndarray:
    if kind == "T":
        return T_STATE.copy()
    if kind == "CCZ":
        return ccz_state()
    if kind == "PHASE_PLUS":
        if theta is None:
            raise ValueError("PHASE_PLUS needs theta")
        return phase_plus(theta)
    raise ValueError(f"unknown reference state {kind!r}")


def _parity(*indices) -> ClassicalCondition:
    return ClassicalCondition(frozenset(indices))


class _Builder:
    def __init__(self, name: str, labels: Sequence[str]):
        self.name = name
        self.labels = dict(enumerate(labels))
        self.q = {label: i for i, label in enumerate(labels)}
        self.ops = []
        self.n_meas = 0
        self.prep_ops = 0

    def gate(self, kind, targets, controls=(), theta=None, when=(), site=""):
        q = self.q
        self.ops.append(Gate(
            kind,
            tuple(q[t] for t in targets),
            controls=tuple((q[c], axis, parity) for c, axis, parity in controls),
            theta=theta,
            condition=tuple(when),
            site=site,
        ))

    def measure(self, paulis, key, when=()) -> int:
        self.ops.append(Measure(tuple((self.q[t], axis) for t, axis in paulis), key=key,
                                condition=tuple(when)))
        self.n_meas += 1
        return self.n_meas - 1

    def postselect(self, indices, key):
        self.ops.append(Postselect(_parity(*indices), key=key))

    def end_preparation(self):
        self.prep_ops = len(self.ops)

    def build(self, outputs, reference) -> "FactoryCircuit":
        c = FactoryCircuit(
            name=self.name,
            num_qubits=len(self.labels),
            ops=self.ops,
            qubit_labels=self.labels,
            output_qubits=tuple(self.q[o] for o in outputs),
            reference=reference,
            prep_ops=self.prep_ops,
        )
        c.validate()
        return c


@dataclasses.dataclass
class FactoryCircuit(Circuit):
    """A circuit whose first ``prep_ops`` operations only prepare its ideal inputs."""

    prep_ops: int = 0
    catalyst_qubit: Optional[int] = None
    # Per-output single-qubit references when the ideal output is a product state.
    output_references: tuple = ()

    def without_preparation(self) -> "FactoryCircuit":
        return dataclasses.replace(self, ops=list(self.ops[self.prep_ops:]), prep_ops=0)


# Ancilla -> output qubits whose Z parity it carries, for the 8T->CCZ circuit.
CCZ_ANCILLA_OUTPUTS = {
    "a": "123", "b": "12", "c": "13", "d": "1",
    "e": "23", "f": "2", "g": "3", "h": "",
}

# Stabilizer measurements of the 8T->CCZ circuit, named after their support.
CCZ_STABILIZERS = ("1abcd", "abcdefgh", "3aceg", "2abef")


def build_ccz_factory() -> FactoryCircuit:
    """The 8T -> CCZ distillation circuit.

    Four X-type stabilizer measurements entangle outputs 1..3 with ancillae
    a..h, each ancilla gets a noisy T, and X-basis measurements of the
    ancillae move the phase polynomial onto the outputs. Only the
    ``abcdefgh`` stabilizer is a check; the others fix output Z frames.
    """
    b = _Builder("ccz8", ["1", "2", "3", *"abcdefgh"])
    stab = {s: b.measure([(c, "X") for c in s], key=f"X{s}") for s in CCZ_STABILIZERS}
    for a in "abcdefgh":
        b.gate("T", [a], site=a)
    m = {a: b.measure([(a, "X")], key=f"M{a}") for a in "abcdefgh"}
    for a, outs in CCZ_ANCILLA_OUTPUTS.items():
        if outs:
            b.gate("Z", list(outs), when=[_parity(m[a])])
    b.gate("Z", ["1"], when=[_parity(stab["1abcd"])])
    b.gate("Z", ["3"], when=[_parity(stab["3aceg"])])
    b.gate("Z", ["2"], when=[_parity(stab["2abef"])])
    b.gate("X", ["1", "2", "3"])
    b.postselect([stab["abcdefgh"], *m.values()], key="check")
    return b.build(["1", "2", "3"], ccz_state())


def _rm_vectors():
    return list(range(1, 16))


def build_fifteen_to_one() -> FactoryCircuit:
    """15-to-1 T distillation in the same measurement-based style.

    Ancilla ``v`` (v = 1..15, a nonzero vector of F_2^4) carries the value
    ``x_out + v.g`` for gauge bits g. Transversal T then leaves T^dagger on
    the output, fixed to T by a final S. Each gauge bit gives one check.
    """
    labels = ["out"] + [f"t{v}" for v in _rm_vectors()]
    b = _Builder("t15", labels)
    s_out = b.measure([("out", "X")] + [(f"t{v}", "X") for v in _rm_vectors()], key="Xout")
    gauge = []
    for k in range(4):
        support = [f"t{v}" for v in _rm_vectors() if v >> k & 1]
        gauge.append(b.measure([(t, "X") for t in support], key=f"G{k}"))
    for v in _rm_vectors():
        b.gate("T", [f"t{v}"], site=str(v))
    m = {v: b.measure([(f"t{v}", "X")], key=f"Mt{v}") for v in _rm_vectors()}
    b.gate("Z", ["out"], when=[_parity(s_out, *m.values())])
    b.gate("S", ["out"])
    for k in range(4):
        b.postselect([gauge[k]] + [m[v] for v in _rm_vectors() if v >> k & 1], key=f"check{k}")
    c = b.build(["out"], T_STATE.copy())
    c.output_references = (T_STATE.copy(),)
    return c


def _prepare_ccz(b: _Builder, qubits=("1", "2", "3")):
    for q in qubits:
        b.gate("H", [q])
    b.gate("CCZ", [qubits[2]], controls=[(qubits[0], "Z", 1), (qubits[1], "Z", 1)])


def build_c2t_simple(catalyzed: bool = False) -> FactoryCircuit:
    """CCZ -> three T states with Clifford gates and one T^dagger.

    With ``catalyzed`` the T^dagger is teleported in from a fourth qubit
    holding a |T> state (the catalyst), with an S^dagger fixup.
    """
    labels = ["1", "2", "3"] + (["cat"] if catalyzed else [])
    b = _Builder("c2t-simple" + ("-catalyzed" if catalyzed else ""), labels)
    _prepare_ccz(b)
    if catalyzed:
        b.gate("H", ["cat"])
        b.gate("T", ["cat"], site="cat")
    b.end_preparation()
    b.gate("X_NEG_HALF", ["3"])
    b.gate("MULTI_TARGET_CNOT", ["1", "2"], controls=[("3", "Z", 0)])
    b.gate("Z", ["1", "2"], controls=[("3", "X", 1)])
    if catalyzed:
        b.gate("CNOT", ["cat"], controls=[("3", "Z", 1)])
        m = b.measure([("cat", "Z")], key="Mcat")
        # Outcome 1 teleports T^dagger, outcome 0 teleports T.
        b.gate("S_DAG", ["3"], when=[ClassicalCondition({m}, negate=True)])
    else:
        b.gate("T_DAG", ["3"], site="t")
    b.gate("Z", ["1", "2"], controls=[("3", "X", 1)])
    c = b.build(["1", "2", "3"], product_vector([T_STATE] * 3))
    c.catalyst_qubit = c.output_qubits[2]
    c.output_references = (T_STATE.copy(),) * 3
    return c


# Classical wiring of the lattice-surgery C2T circuit. Record bits:
#   0 X3.XS   1 X1.X2.XA   2 Z1.Z2.Z3.ZT   3 XT   4 ZS   5 Z3.ZA   6 XA
#   7 Z1.Z2.Z3.ZB (only if e9)   8 XB
# with e9 = r2^r4^r0 and e5 = r4^r0.
C2T_SURGERY_FIXUPS = (
    ("Z", "123", ("e9", "r7")),
    ("Z", "123", ("e5", "e9")),
    ("Z", "123", ("r8", "e9")),
    ("Z", "3", ("r1",)),
    ("Z", "3", ("r6",)),
    ("Z", "123", ("r3",)),
    ("X", "12", ("r5",)),
    ("X", "123", ("e5",)),
    ("X", "3", ()),
)


def build_c2t_surgery() -> FactoryCircuit:
    """Measurement-based CCZ + |T> -> 3 |T> circuit suited to lattice surgery.

    The catalyst input ``T`` is consumed by teleportation; output ``3`` is
    the returned catalyst. ``S``, ``A`` and ``B`` are helper patches.
    """
    b = _Builder("c2t-surgery", ["1", "2", "3", "T", "B", "S", "A"])
    for q in ("1", "2", "3", "T"):
        b.gate("H", [q])
    b.gate("T", ["T"], site="catalyst")
    b.gate("CCZ", ["3"], controls=[("1", "Z", 1), ("2", "Z", 1)])
    b.end_preparation()
    r = [None] * 9
    r[0] = b.measure([("3", "X"), ("S", "X")], key="X3.XS")
    r[1] = b.measure([("1", "X"), ("2", "X"), ("A", "X")], key="X12A")
    b.gate("X_HALF", ["S"])
    r[2] = b.measure([(q, "Z") for q in "123T"], key="Z123T")
    r[3] = b.measure([("T", "X")], key="MT")
    r[4] = b.measure([("S", "Z")], key="MS")
    b.gate("X_NEG_HALF", ["B"])
    r[5] = b.measure([("3", "Z"), ("A", "Z")], key="Z3A")
    r[6] = b.measure([("A", "X")], key="MA")
    bits = {
        "e9": ClassicalCondition({r[2], r[4], r[0]}),
        "e5": ClassicalCondition({r[4], r[0]}),
    }
    r[7] = b.measure([(q, "Z") for q in "123B"], key="Z123B", when=[bits["e9"]])
    r[8] = b.measure([("B", "X")], key="MB")
    for i in range(9):
        bits[f"r{i}"] = ClassicalCondition({r[i]})
    for kind, targets, conds in C2T_SURGERY_FIXUPS:
        b.gate(kind, list(targets), when=[bits[c] for c in conds])
    c = b.build(["1", "2", "3"], product_vector([T_STATE] * 3))
    c.catalyst_qubit = c.output_qubits[2]
    c.output_references = (T_STATE.copy(),) * 3
    return c


def build_phase_catalysis(theta: float) -> FactoryCircuit:
    """Apply Z^theta to data qubits x and y using a Z^theta|+> catalyst.

    The catalyst is complemented, the majority of (x, y, catalyst) is computed
    into ``k`` with one AND, ``k`` gets Z^{2 theta}, the AND is uncomputed by
    measurement, and the catalyst is replaced by x^y^catalyst. Since
    x + y + c' = s + 2 maj, the phases leave Z^theta on each of x and y and
    hand back the catalyst unchanged. theta is in degrees.
    """
    theta = float(theta)
    if not 0 < theta <= 90:
        raise ValueError(f"theta must lie in (0, 90] degrees, got {theta}")
    b = _Builder(f"phase({theta:g})", ["x", "y", "cat", "k"])
    b.gate("H", ["x"])
    b.gate("H", ["y"])
    b.gate("H", ["cat"])
    b.gate("PHASE", ["cat"], theta=theta)
    b.end_preparation()
    b.gate("X", ["cat"])
    b.gate("MULTI_TARGET_CNOT", ["x", "y"], controls=[("cat", "Z", 1)])
    b.gate("X", ["k"], controls=[("x", "Z", 1), ("y", "Z", 1)])
    b.gate("CNOT", ["k"], controls=[("cat", "Z", 1)])
    b.gate("PHASE", ["k"], theta=2 * theta, site="rot")
    b.gate("CNOT", ["k"], controls=[("cat", "Z", 1)])
    m = b.measure([("k", "X")], key="Mk")
    b.gate("CZ", ["y"], controls=[("x", "Z", 1)], when=[_parity(m)])
    b.gate("MULTI_TARGET_CNOT", ["x", "y"], controls=[("cat", "Z", 1)])
    b.gate("CNOT", ["cat"], controls=[("x", "Z", 1)])
    b.gate("CNOT", ["cat"], controls=[("y", "Z", 1)])
    b.gate("X", ["cat"])
    ref = product_vector([phase_plus(theta)] * 3)
    c = b.build(["x", "y", "cat"], ref)
    c.catalyst_qubit = 2
    c.output_references = (phase_plus(theta),) * 3
    return c


CIRCUIT_BUILDERS = {
    "ccz8": build_ccz_factory,
    "t15": build_fifteen_to_one,
    "c2t-simple": build_c2t_simple,
    "c2t-surgery": build_c2t_surgery,
}


def t_cost(circuit: FactoryCircuit) -> int:
    """T-equivalents consumed, excluding input preparation.

    A doubly-controlled X or Z (Toffoli / AND / CCZ) counts 4.
    Raises ValueError for rotations that are not Clifford+T.
    """
    total = 0
    for op in circuit.ops[circuit.prep_ops:]:
        if not isinstance(op, Gate):
            continue
        if op.kind in ("T", "T_DAG"):
            total += len(op.targets)
        elif op.kind == "PHASE":
            angle = op.theta % 360
            if np.isclose(angle % 90, 0) or np.isclose(angle % 90, 90):
                pass
            elif np.isclose(angle % 45, 0) or np.isclose(angle % 45, 45):
                total += len(op.targets)
            else:
                raise ValueError(f"PHASE({op.theta}) has no exact Clifford+T cost")
        n_z_controls = len(op.controls)
        if n_z_controls == 2 and op.kind in ("X", "Z", "CCZ", "CNOT"):
            total += 4
        elif n_z_controls > 2:
            raise ValueError("gates with more than two controls are not costed")
    return total


def _cond_to_json(c: ClassicalCondition):
    return {"bits": sorted(c.record_indices), "negate": c.negate}


def _cond_from_json(d) -> ClassicalCondition:
    return ClassicalCondition(frozenset(d["bits"]), bool(d.get("negate", False)))


def op_to_dict(op) -> dict:
    if isinstance(op, Gate):
        d = {"op": "gate", "name": op.kind, "targets": list(op.targets)}
        if op.controls:
            d["controls"] = [list(c) for c in op.controls]
        if op.theta is not None:
            d["theta"] = op.theta
        if op.condition:
            d["condition"] = [_cond_to_json(c) for c in op.condition]
        if op.site:
            d["site"] = op.site
        return d
    if isinstance(op, Measure):
        d = {"op": "measure", "name": "".join(a for _, a in op.paulis),
             "targets": [q for q, _ in op.paulis], "key": op.key}
        if op.condition:
            d["condition"] = [_cond_to_json(c) for c in op.condition]
        return d
    if isinstance(op, Postselect):
        return {"op": "postselect", "name": "POSTSELECT", "targets": [],
                "condition": [_cond_to_json(op.check)], "key": op.key}
    raise TypeError(op)


def op_from_dict(d: dict):
    cond = tuple(_cond_from_json(c) for c in d.get("condition", ()))
    if d["op"] == "gate":
        return Gate(d["name"], tuple(d["targets"]),
                    controls=tuple(tuple(c) for c in d.get("controls", ())),
                    theta=d.get("theta"), condition=cond, site=d.get("site", ""))
    if d["op"] == "measure":
        return Measure(tuple(zip(d["targets"], d["name"])), key=d.get("key", ""), condition=cond)
    if d["op"] == "postselect":
        return Postselect(cond[0], key=d.get("key", ""))
    raise ValueError(f"unknown op {d['op']!r}")


def circuit_to_json(circuit: Circuit) -> str:
    """JSON form: header fields plus one dict per op (reference state omitted)."""
    doc = {
        "version": 1,
        "name": circuit.name,
        "num_qubits": circuit.num_qubits,
        "qubit_labels": {str(k): v for k, v in circuit.qubit_labels.items()},
        "output_qubits": list(circuit.output_qubits),
        "prep_ops": getattr(circuit, "prep_ops", 0),
        "ops": [op_to_dict(op) for op in circuit.ops],
    }
    return json.dumps(doc, indent=1)


def circuit_from_json(text: str) -> FactoryCircuit:
    doc = json.loads(text)
    if doc.get("version") != 1:
        raise ValueError("unsupported circuit document version")
    c = FactoryCircuit(
        name=doc["name"],
        num_qubits=doc["num_qubits"],
        ops=[op_from_dict(d) for d in doc["ops"]],
        qubit_labels={int(k): v for k, v in doc["qubit_labels"].items()},
        output_qubits=tuple(doc["output_qubits"]),
        prep_ops=doc.get("prep_ops", 0),
    )
    c.validate()
    return c


def circuit_to_text(circuit: Circuit) -> str:
    """One op per line: name, targets (by label), controls, condition, site.

    Measurements print as ``M <paulis> <qubits> -> key``; ``if=`` clauses are
    parities of record bits ``m<k>`` and all of them must hold.
    """
    lab = circuit.qubit_labels
    lines = [f"# {circuit.name}: {circuit.num_qubits} qubits, sites {','.join(circuit.injection_sites)}"]
    for op in circuit.ops:
        d = op_to_dict(op)
        parts = ["M", d["name"]] if d["op"] == "measure" else [d["name"]]
        if d["targets"]:
            parts.append(" ".join(lab.get(t, str(t)) for t in d["targets"]))
        for q, axis, parity in d.get("controls", ()):
            parts.append(f"ctrl={lab.get(q, str(q))}:{axis}{parity}")
        if "theta" in d:
            parts.append(f"theta={d['theta']:g}")
        for c in d.get("condition", ()):
            bits = "^".join(f"m{k}" for k in c["bits"]) or "0"
            word = "reject_if" if d["op"] == "postselect" else "if"
            parts.append(f"{word}={'!' if c['negate'] else ''}{bits}")
        if d.get("key"):
            parts.append(f"-> {d['key']}")
        if d.get("site"):
            parts.append(f"site={d['site']}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def all_patterns(sites: Sequence[str], max_weight: int):
    for w in range(max_weight + 1):
        for combo in itertools.combinations(sites, w):
            yield w, combo
