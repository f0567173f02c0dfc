"""Dense state-vector simulation with Pauli-product measurement and classical feedback.

Qubit ``q`` is bit ``q`` of the amplitude index (little-endian), so a product
state ``|a>_0 |b>_1`` has amplitude vector ``kron(b, a)``.
"""

from __future__ import annotations

import dataclasses
import functools
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

SQRT_HALF = 2 ** -0.5

_BASE_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * SQRT_HALF,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "S": np.diag([1, 1j]),
    "S_DAG": np.diag([1, -1j]),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "T_DAG": np.diag([1, np.exp(-1j * np.pi / 4)]),
    "X_HALF": np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2,
    "X_NEG_HALF": np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]]) / 2,
}

# Multi-qubit kinds act as a single-qubit base gate on each target, conditioned on controls.
_CONTROLLED_KINDS = {
    "CNOT": ("X", 1),
    "MULTI_TARGET_CNOT": ("X", 1),
    "CZ": ("Z", 1),
    "CCZ": ("Z", 2),
}

GATE_KINDS = frozenset(_BASE_MATRICES) | frozenset(_CONTROLLED_KINDS) | {"PHASE"}
CLIFFORD_KINDS = frozenset(
    {"H", "X", "Y", "Z", "S", "S_DAG", "X_HALF", "X_NEG_HALF", "CNOT", "MULTI_TARGET_CNOT", "CZ"})
PAULI_KINDS = frozenset({"X", "Y", "Z"})


def phase_matrix(theta_degrees: float) -> np.ndarray:
    """diag(1, e^{i theta}) with theta in degrees."""
    return np.diag([1, np.exp(1j * np.deg2rad(theta_degrees))])


@dataclasses.dataclass(frozen=True)
class ClassicalCondition:
    """Parity of some measurement-record bits, optionally negated."""

    record_indices: frozenset = frozenset()
    negate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "record_indices", frozenset(self.record_indices))

    def evaluate(self, record: Sequence[int]) -> int:
        for k in self.record_indices:
            if k < 0 or k >= len(record):
                raise IndexError(f"condition references record bit {k} but only {len(record)} exist")
        v = 0
        for k in self.record_indices:
            v ^= record[k]
        return v ^ int(self.negate)


def _conditions_hold(conditions: Sequence[ClassicalCondition], record: Sequence[int]) -> bool:
    return all(c.evaluate(record) for c in conditions)


@dataclasses.dataclass(frozen=True)
class Gate:
    """A unitary gate, optionally controlled (quantum) and conditioned (classical).

    ``controls`` entries are ``(qubit, axis, parity)``: axis ``"Z"`` with parity 1
    is an ordinary control, axis ``"X"`` with parity 1 conditions on ``|->``.
    ``condition`` is a tuple of classical conditions that must all be 1.
    A non-empty ``site`` marks a noisy-T entry point where Z errors get injected.
    """

    kind: str
    targets: tuple
    controls: tuple = ()
    theta: Optional[float] = None
    condition: tuple = ()
    site: str = ""

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "controls", tuple(tuple(c) for c in self.controls))
        object.__setattr__(self, "condition", tuple(self.condition))
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "PHASE" and self.theta is None:
            raise ValueError("PHASE gate needs theta (degrees)")
        if not self.targets:
            raise ValueError("gate needs at least one target")
        used = list(self.targets) + [c[0] for c in self.controls]
        if len(set(used)) != len(used):
            raise ValueError(f"targets and controls overlap: {self}")
        for q, axis, parity in self.controls:
            if axis not in ("Z", "X") or parity not in (0, 1):
                raise ValueError(f"bad control {(q, axis, parity)}")
        if self.kind in _CONTROLLED_KINDS:
            need = _CONTROLLED_KINDS[self.kind][1]
            if len(self.controls) < need:
                raise ValueError(f"{self.kind} needs {need} control(s)")
            if self.kind in ("CNOT", "CZ", "CCZ") and len(self.targets) != 1:
                raise ValueError(f"{self.kind} takes exactly one target")

    @property
    def base_matrix(self) -> np.ndarray:
        if self.kind == "PHASE":
            return phase_matrix(self.theta)
        if self.kind in _CONTROLLED_KINDS:
            return _BASE_MATRICES[_CONTROLLED_KINDS[self.kind][0]]
        return _BASE_MATRICES[self.kind]

    @property
    def qubits(self) -> tuple:
        return self.targets + tuple(c[0] for c in self.controls)


@dataclasses.dataclass(frozen=True)
class Measure:
    """Measurement of a Pauli product; outcome 0 means the +1 eigenspace.

    When ``condition`` is present and false, nothing is measured and a 0 is recorded.
    """

    paulis: tuple
    key: str = ""
    condition: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "paulis", tuple(tuple(p) for p in self.paulis))
        object.__setattr__(self, "condition", tuple(self.condition))
        if not self.paulis:
            raise ValueError("empty Pauli product")
        qs = [q for q, _ in self.paulis]
        if len(set(qs)) != len(qs):
            raise ValueError("repeated qubit in Pauli product")
        for _, axis in self.paulis:
            if axis not in ("X", "Y", "Z"):
                raise ValueError(f"bad Pauli axis {axis!r}")


@dataclasses.dataclass(frozen=True)
class Postselect:
    """Reject the run when the check parity is odd."""

    check: ClassicalCondition
    key: str = ""


Op = Union[Gate, Measure, Postselect]


class QuantumState:
    """Amplitudes over ``num_qubits`` qubits plus the measurement record so far."""

    def __init__(self, amplitudes: np.ndarray, record: Optional[list] = None):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        n = int(round(np.log2(len(amplitudes))))
        if 2 ** n != len(amplitudes) or amplitudes.ndim != 1:
            raise ValueError("amplitude vector length must be a power of two")
        self.num_qubits = n
        self.amplitudes = amplitudes
        self.record = list(record) if record is not None else []

    @classmethod
    def zero(cls, num_qubits: int) -> "QuantumState":
        a = np.zeros(2 ** num_qubits, dtype=complex)
        a[0] = 1
        return cls(a)

    @classmethod
    def product(cls, qubit_states: Sequence[np.ndarray]) -> "QuantumState":
        """Tensor product with ``qubit_states[0]`` on qubit 0."""
        return cls(product_vector(qubit_states))

    def copy(self) -> "QuantumState":
        return QuantumState(self.amplitudes.copy(), self.record)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self):
        return f"QuantumState(num_qubits={self.num_qubits}, record={self.record})"


def product_vector(qubit_states: Sequence[np.ndarray]) -> np.ndarray:
    v = np.ones(1, dtype=complex)
    for s in qubit_states:
        v = np.kron(np.asarray(s, dtype=complex), v)
    return v


@functools.lru_cache(maxsize=None)
def _indices(n: int) -> np.ndarray:
    return np.arange(2 ** n, dtype=np.int64)


def _bit(n: int, q: int) -> np.ndarray:
    return (_indices(n) >> q) & 1


def _check_qubits(state: QuantumState, qubits: Iterable[int]):
    for q in qubits:
        if not 0 <= q < state.num_qubits:
            raise IndexError(f"qubit {q} out of range for {state.num_qubits} qubits")


def _apply_single(amps: np.ndarray, n: int, q: int, m: np.ndarray, mask: Optional[np.ndarray]):
    sel = _bit(n, q) == 0
    if mask is not None:
        sel &= mask
    i0 = np.flatnonzero(sel)
    i1 = i0 | (1 << q)
    a0 = amps[i0]
    a1 = amps[i1]
    amps[i0] = m[0, 0] * a0 + m[0, 1] * a1
    amps[i1] = m[1, 0] * a0 + m[1, 1] * a1


def _apply_gate_inplace(state: QuantumState, gate: Gate):
    n = state.num_qubits
    amps = state.amplitudes
    h = _BASE_MATRICES["H"]
    x_controls = [q for q, axis, _ in gate.controls if axis == "X"]
    for q in x_controls:
        _apply_single(amps, n, q, h, None)
    mask = None
    for q, _, parity in gate.controls:
        cond = _bit(n, q) == parity
        mask = cond if mask is None else mask & cond
    m = gate.base_matrix
    for t in gate.targets:
        _apply_single(amps, n, t, m, mask)
    for q in x_controls:
        _apply_single(amps, n, q, h, None)


def apply_gate(state: QuantumState, gate: Gate) -> QuantumState:
    """Return a new state with ``gate`` applied (classical conditions are ignored here)."""
    _check_qubits(state, gate.qubits)
    out = state.copy()
    _apply_gate_inplace(out, gate)
    return out


def apply_pauli_product(amps: np.ndarray, n: int, paulis: Sequence) -> np.ndarray:
    """Return P|psi> for the Pauli product ``paulis`` = [(qubit, axis), ...]."""
    xmask = 0
    zmask = 0
    ny = 0
    for q, axis in paulis:
        if axis in ("X", "Y"):
            xmask |= 1 << q
        if axis in ("Z", "Y"):
            zmask |= 1 << q
        if axis == "Y":
            ny += 1
    idx = _indices(n)
    src = idx ^ xmask
    # (X^x Z^z psi)[j] = (-1)^{|src & z|} psi[src], and Y = i X Z.
    sign = 1 - 2 * (np.bitwise_count(src & zmask) & 1).astype(np.int64)
    return (1j ** ny) * sign * amps[src]


def _measure_inplace(state: QuantumState, paulis, forced: Optional[int], rng) -> int:
    amps = state.amplitudes
    p_amps = apply_pauli_product(amps, state.num_qubits, paulis)
    plus = (amps + p_amps) / 2
    minus = (amps - p_amps) / 2
    total = float(np.vdot(amps, amps).real)
    p0 = float(np.vdot(plus, plus).real) / total
    if forced is not None:
        bit = int(forced)
        if (p0 if bit == 0 else 1 - p0) < 1e-12:
            raise ValueError(f"forced outcome {bit} has zero probability")
    elif p0 > 1 - 1e-12:
        bit = 0
    elif p0 < 1e-12:
        bit = 1
    else:
        if rng is None:
            raise ValueError("random measurement needs a generator or a forced outcome")
        bit = int(rng.random() >= p0)
    kept = plus if bit == 0 else minus
    kept /= np.linalg.norm(kept)
    state.amplitudes = kept
    state.record.append(bit)
    return bit


def measure_pauli_product(state: QuantumState, paulis: Sequence, forced: Optional[int] = None,
                          rng: Union[np.random.Generator, int, None] = None) -> tuple:
    """Project onto an eigenspace of a Pauli product and record the outcome bit.

    Without ``forced`` the outcome is drawn with Born probabilities from ``rng``
    (a Generator or an integer seed). Returns ``(new_state, bit)``.
    """
    paulis = Measure(paulis).paulis
    _check_qubits(state, [q for q, _ in paulis])
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    out = state.copy()
    bit = _measure_inplace(out, paulis, forced, rng)
    return out, bit


def postselect(state: QuantumState, condition: ClassicalCondition) -> Optional[QuantumState]:
    """Return ``state`` if the check parity is even, ``None`` if the run is rejected."""
    if condition.evaluate(state.record):
        return None
    return state


def fidelity(state: Union[QuantumState, np.ndarray], reference: Union[QuantumState, np.ndarray]) -> float:
    a = state.amplitudes if isinstance(state, QuantumState) else np.asarray(state)
    b = reference.amplitudes if isinstance(reference, QuantumState) else np.asarray(reference)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    f = abs(np.vdot(b, a)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real)
    return float(min(max(f, 0.0), 1.0))


def reduced_density_matrix(state: QuantumState, qubits: Sequence[int]) -> np.ndarray:
    """Partial trace keeping ``qubits``; ``qubits[0]`` becomes bit 0 of the result."""
    _check_qubits(state, qubits)
    n = state.num_qubits
    # Tensor axis k holds qubit n-1-k.
    psi = state.amplitudes.reshape((2,) * n)
    keep_axes = [n - 1 - q for q in reversed(qubits)]
    rest = [a for a in range(n) if a not in keep_axes]
    psi = np.transpose(psi, keep_axes + rest).reshape(2 ** len(qubits), -1)
    rho = psi @ psi.conj().T
    return rho / np.trace(rho).real


def subsystem_fidelity(state: QuantumState, qubits: Sequence[int], reference: np.ndarray) -> float:
    """<ref| rho_qubits |ref> for a pure reference on the listed qubits."""
    rho = reduced_density_matrix(state, qubits)
    ref = np.asarray(reference, dtype=complex)
    ref = ref / np.linalg.norm(ref)
    return float(min(max(np.vdot(ref, rho @ ref).real, 0.0), 1.0))


def extract_pure_state(state: QuantumState, qubits: Sequence[int], tol: float = 1e-9) -> np.ndarray:
    """State vector of ``qubits`` when they are unentangled from the rest."""
    rho = reduced_density_matrix(state, qubits)
    vals, vecs = np.linalg.eigh(rho)
    if vals[-1] < 1 - tol:
        raise ValueError(f"subsystem is mixed (purity eigenvalue {vals[-1]:.3g})")
    return vecs[:, -1]


@dataclasses.dataclass
class Circuit:
    """Ordered operations with labelled qubits, noisy-T sites and an ideal output."""

    name: str
    num_qubits: int
    ops: list
    qubit_labels: dict = dataclasses.field(default_factory=dict)
    output_qubits: tuple = ()
    reference: Optional[np.ndarray] = None

    @property
    def injection_sites(self) -> tuple:
        return tuple(op.site for op in self.ops if isinstance(op, Gate) and op.site)

    @property
    def num_measurements(self) -> int:
        return sum(isinstance(op, Measure) for op in self.ops)

    def validate(self):
        n_meas = 0
        sites = self.injection_sites
        if len(set(sites)) != len(sites):
            raise ValueError(f"duplicate injection site labels in {self.name}")
        for op in self.ops:
            conds = op.condition if isinstance(op, (Gate, Measure)) else (op.check,)
            for c in conds:
                if any(k >= n_meas or k < 0 for k in c.record_indices):
                    raise ValueError(f"{self.name}: condition {c} refers to a later measurement")
            if isinstance(op, Gate):
                qs = op.qubits
            elif isinstance(op, Measure):
                qs = [q for q, _ in op.paulis]
                n_meas += 1
            else:
                qs = []
            for q in qs:
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"{self.name}: qubit {q} out of range")


@dataclasses.dataclass
class RunResult:
    state: QuantumState
    record: list
    accepted: bool


def run_circuit(circuit: Circuit, seed: Optional[int] = 0, injected_errors: Iterable[str] = (),
                forced: Union[Sequence[int], Mapping[int, int], None] = None,
                initial_state: Optional[QuantumState] = None) -> RunResult:
    """Execute ``circuit``, adding a Z error right after each listed injection site.

    Measurement outcomes come from ``forced`` (indexed by measurement number) when
    given there, otherwise from a generator seeded with ``seed``. A rejected
    post-selection does not stop execution; it only clears ``accepted``.
    """
    circuit.validate()
    errors = set(injected_errors)
    unknown = errors - set(circuit.injection_sites)
    if unknown:
        raise ValueError(f"not injection sites of {circuit.name}: {sorted(unknown)}")
    if initial_state is None:
        state = QuantumState.zero(circuit.num_qubits)
    else:
        if initial_state.num_qubits != circuit.num_qubits:
            raise ValueError("initial state has the wrong number of qubits")
        state = QuantumState(initial_state.amplitudes.copy())
    rng = np.random.default_rng(seed)
    if forced is not None and not isinstance(forced, Mapping):
        forced = dict(enumerate(forced))
    accepted = True
    z = _BASE_MATRICES["Z"]
    for op in circuit.ops:
        if isinstance(op, Gate):
            if op.condition and not _conditions_hold(op.condition, state.record):
                continue
            _apply_gate_inplace(state, op)
            if op.site and op.site in errors:
                for t in op.targets:
                    _apply_single(state.amplitudes, state.num_qubits, t, z, None)
        elif isinstance(op, Measure):
            k = len(state.record)
            if op.condition and not _conditions_hold(op.condition, state.record):
                state.record.append(0)
                continue
            f = forced.get(k) if forced is not None else None
            _measure_inplace(state, op.paulis, f, rng)
        elif isinstance(op, Postselect):
            if op.check.evaluate(state.record):
                accepted = False
        else:
            raise TypeError(f"malformed circuit op {op!r}")
    return RunResult(state=state, record=list(state.record), accepted=accepted)


def iter_branches(circuit: Circuit, injected_errors: Iterable[str] = (),
                  initial_state: Optional[QuantumState] = None, min_probability: float = 1e-12):
    """Yield ``(probability, RunResult)`` for every measurement branch of nonzero weight.

    Depth-first over measurement outcomes, sharing the simulated prefix between
    sibling branches.
    """
    circuit.validate()
    errors = set(injected_errors)
    unknown = errors - set(circuit.injection_sites)
    if unknown:
        raise ValueError(f"not injection sites of {circuit.name}: {sorted(unknown)}")
    if initial_state is None:
        start = QuantumState.zero(circuit.num_qubits)
    else:
        start = QuantumState(initial_state.amplitudes.copy())
    z = _BASE_MATRICES["Z"]
    ops = circuit.ops

    def walk(i, state, prob, accepted):
        while i < len(ops):
            op = ops[i]
            i += 1
            if isinstance(op, Gate):
                if op.condition and not _conditions_hold(op.condition, state.record):
                    continue
                _apply_gate_inplace(state, op)
                if op.site and op.site in errors:
                    for t in op.targets:
                        _apply_single(state.amplitudes, state.num_qubits, t, z, None)
            elif isinstance(op, Measure):
                if op.condition and not _conditions_hold(op.condition, state.record):
                    state.record.append(0)
                    continue
                amps = state.amplitudes
                p_amps = apply_pauli_product(amps, state.num_qubits, op.paulis)
                for bit, proj in ((0, amps + p_amps), (1, amps - p_amps)):
                    proj = proj / 2
                    p = float(np.vdot(proj, proj).real)
                    if p < min_probability:
                        continue
                    child = QuantumState(proj / np.sqrt(p), state.record + [bit])
                    yield from walk(i, child, prob * p, accepted)
                return
            elif isinstance(op, Postselect):
                if op.check.evaluate(state.record):
                    accepted = False
        yield prob, RunResult(state=state, record=list(state.record), accepted=accepted)

    yield from walk(0, start, 1.0, True)
