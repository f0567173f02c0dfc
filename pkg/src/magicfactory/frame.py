"""Pauli-frame propagation of injected Z errors through a circuit's Clifford tail.

An injected error pattern is tracked as a Pauli operator ``E`` (bit masks
``x``, ``z``) relative to an ideal reference branch that was simulated once
with the dense simulator. A Pauli error leaves every Born probability intact
and only flips measurement outcomes it anticommutes with, so the errored run
on the matching branch has final state ``E |ideal>`` and a record that differs
by a computable flip vector.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .sim import (
    Circuit,
    Gate,
    Measure,
    Postselect,
    QuantumState,
    _apply_gate_inplace,
    _conditions_hold,
    apply_pauli_product,
    run_circuit,
)


class UnsupportedFrameError(ValueError):
    """The pattern cannot be tracked as a Pauli frame (non-Clifford action on the frame)."""


def _local_unitary(gate: Gate, order: tuple) -> np.ndarray:
    k = len(order)
    remap = {q: i for i, q in enumerate(order)}
    local = Gate(gate.kind, tuple(remap[t] for t in gate.targets),
                 tuple((remap[q], a, p) for q, a, p in gate.controls), gate.theta)
    cols = []
    for j in range(2 ** k):
        s = QuantumState(np.eye(2 ** k, dtype=complex)[j])
        _apply_gate_inplace(s, local)
        cols.append(s.amplitudes)
    return np.array(cols).T


def _pauli_matrix(k: int, x: int, z: int) -> np.ndarray:
    amps = np.eye(2 ** k, dtype=complex)
    ops = [(q, "X") for q in range(k) if x >> q & 1 and not z >> q & 1]
    ops += [(q, "Z") for q in range(k) if z >> q & 1 and not x >> q & 1]
    ops += [(q, "Y") for q in range(k) if x >> q & 1 and z >> q & 1]
    return np.array([apply_pauli_product(amps[j], k, ops) for j in range(2 ** k)]).T


@functools.lru_cache(maxsize=None)
def _conjugation_table(kind, targets, controls, theta):
    """Images (x, z) of each local X_i and Z_i under U P U^dagger; None where the image is not a Pauli."""
    gate = Gate(kind, targets, controls, theta)
    order = tuple(gate.qubits)
    k = len(order)
    u = _local_unitary(gate, order)
    paulis = {(x, z): _pauli_matrix(k, x, z) for x in range(2 ** k) for z in range(2 ** k)}
    table = []
    for i in range(k):
        images = []
        for gen in ((1 << i, 0), (0, 1 << i)):
            m = u @ paulis[gen] @ u.conj().T
            hit = None
            for key, p in paulis.items():
                overlap = abs(np.vdot(p, m)) / 2 ** k
                if overlap > 1 - 1e-9:
                    hit = key
                    break
            images.append(hit)
        table.append(tuple(images))
    return order, tuple(table)


@dataclass
class Frame:
    x: int = 0
    z: int = 0

    def anticommutes(self, paulis) -> bool:
        s = 0
        for q, axis in paulis:
            fx, fz = self.x >> q & 1, self.z >> q & 1
            if axis == "X":
                s ^= fz
            elif axis == "Z":
                s ^= fx
            else:
                s ^= fx ^ fz
        return bool(s)

    def multiply(self, paulis):
        for q, axis in paulis:
            if axis in ("X", "Y"):
                self.x ^= 1 << q
            if axis in ("Z", "Y"):
                self.z ^= 1 << q

    def conjugate(self, gate: Gate):
        qubits = gate.qubits
        support = 0
        for q in qubits:
            support |= 1 << q
        if not (self.x | self.z) & support:
            return
        order, table = _conjugation_table(gate.kind, gate.targets, gate.controls, gate.theta)
        nx, nz = self.x & ~support, self.z & ~support
        for i, q in enumerate(order):
            for bit, image in zip((self.x >> q & 1, self.z >> q & 1), table[i]):
                if not bit:
                    continue
                if image is None:
                    raise UnsupportedFrameError(f"{gate.kind} does not map the active frame to a Pauli")
                ix, iz = image
                for j, qj in enumerate(order):
                    nx ^= (ix >> j & 1) << qj
                    nz ^= (iz >> j & 1) << qj
        self.x, self.z = nx, nz

    def as_paulis(self, qubits: Iterable[int]):
        out = []
        for i, q in enumerate(qubits):
            fx, fz = self.x >> q & 1, self.z >> q & 1
            if fx or fz:
                out.append((i, "Y" if fx and fz else ("X" if fx else "Z")))
        return out


@dataclass
class ReferenceBranch:
    """An ideal run whose outcomes the frame path replays."""

    record: list
    state: QuantumState
    output_reference: np.ndarray


def reference_branch(circuit: Circuit, seed: int = 0, initial_state=None) -> ReferenceBranch:
    res = run_circuit(circuit, seed=seed, initial_state=initial_state)
    if not res.accepted:
        raise ValueError(f"{circuit.name}: the error-free run was rejected")
    ref = np.asarray(circuit.reference, dtype=complex)
    return ReferenceBranch(res.record, res.state, ref / np.linalg.norm(ref))


def propagate(circuit: Circuit, branch: ReferenceBranch, errors: Iterable[str]):
    """Return ``(accepted, output_fidelity)`` for ``errors`` on ``branch``."""
    errors = set(errors)
    ideal = branch.record
    rec = []
    frame = Frame()
    accepted = True
    for op in circuit.ops:
        if isinstance(op, Gate):
            on_ideal = not op.condition or _conditions_hold(op.condition, ideal)
            on_err = not op.condition or _conditions_hold(op.condition, rec)
            if on_ideal and on_err:
                frame.conjugate(op)
            elif on_ideal != on_err:
                # One run applies the gate and the other does not: the frame gains the gate.
                if op.kind not in ("X", "Y", "Z") or op.controls:
                    raise UnsupportedFrameError(f"conditional {op.kind} differs between runs")
                frame.multiply([(t, op.kind) for t in op.targets])
            if op.site and op.site in errors:
                frame.multiply([(t, "Z") for t in op.targets])
        elif isinstance(op, Measure):
            k = len(rec)
            on_ideal = not op.condition or _conditions_hold(op.condition, ideal[:k])
            on_err = not op.condition or _conditions_hold(op.condition, rec)
            if on_ideal != on_err:
                raise UnsupportedFrameError("conditional measurement differs between runs")
            if not on_ideal:
                rec.append(0)
                continue
            rec.append(ideal[k] ^ int(frame.anticommutes(op.paulis)))
            if len(op.paulis) == 1:
                # The measured qubit is now an eigenstate of that Pauli; drop the matching part.
                q, axis = op.paulis[0]
                bit = 1 << q
                if axis == "X":
                    frame.x &= ~bit
                elif axis == "Z":
                    frame.z &= ~bit
                elif frame.x & frame.z & bit:
                    frame.x &= ~bit
                    frame.z &= ~bit
        elif isinstance(op, Postselect):
            if op.check.evaluate(rec):
                accepted = False
    out = branch.output_reference
    paulis = frame.as_paulis(circuit.output_qubits)
    if not paulis:
        return accepted, 1.0
    k = len(circuit.output_qubits)
    moved = apply_pauli_product(out, k, paulis)
    return accepted, float(abs(np.vdot(out, moved)) ** 2)


def frame_supported(circuit: Circuit, seed: int = 0, max_weight: int = 1) -> bool:
    """Whether every pattern up to ``max_weight`` can be propagated as a Pauli frame."""
    try:
        branch = reference_branch(circuit, seed)
        sites = circuit.injection_sites
        for w in range(max_weight + 1):
            for combo in itertools.combinations(sites, w):
                propagate(circuit, branch, combo)
    except UnsupportedFrameError:
        return False
    return True
