"""Exact complex-amplitude simulation of 1-3 qubits.

Pure states, the protocol's unitary operations, Born-rule measurement,
density operators and von Neumann entropy. Everything downstream builds
on this module; dimensions are hard-capped at 3 qubits (photon plus a
two-qubit eavesdropper ancilla).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError

# Tolerances: algebraic identities hold to ATOL_ALGEBRA; quantities that
# accumulate over long gate chains are only guaranteed to ATOL_CHAIN.
ATOL_ALGEBRA = 1e-12
ATOL_CHAIN = 1e-10
MAX_QUBITS = 3

_SQRT2_INV = 1.0 / math.sqrt(2.0)


def _num_qubits(dim: int) -> int:
    k = dim.bit_length() - 1
    if dim <= 0 or 2**k != dim:
        raise ContractError(f"amplitude vector length {dim} is not a power of two")
    return k


class PureState:
    """Unit vector of 2**k complex amplitudes for k qubits, k in 1..3.

    Instances are treated as immutable; every operation returns a new
    state. Qubit 0 is the most significant index bit (amps[b0 b1 ... ]).
    """

    __slots__ = ("amps",)

    def __init__(self, amps: Sequence[complex] | np.ndarray, *, _checked: bool = False):
        vec = np.asarray(amps, dtype=complex)
        if not _checked:
            if vec.ndim != 1:
                raise ContractError("amplitudes must be a flat vector")
            k = _num_qubits(vec.shape[0])
            if not 1 <= k <= MAX_QUBITS:
                raise ContractError(f"qubit count {k} outside supported range 1..{MAX_QUBITS}")
            if abs(float(np.vdot(vec, vec).real) - 1.0) > ATOL_CHAIN:
                raise ContractError("state vector is not normalized")
            vec = vec.copy()
        self.amps = vec

    @property
    def num_qubits(self) -> int:
        return self.amps.shape[0].bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amps, other.amps))

    def equals_up_to_phase(self, other: "PureState", tol: float = ATOL_CHAIN) -> bool:
        """Physical equality: |<self|other>| ~ 1, ignoring global phase."""
        if self.dim != other.dim:
            return False
        return abs(self.overlap(other)) > 1.0 - tol

    def probabilities(self) -> np.ndarray:
        """Born-rule outcome distribution over the computational basis."""
        return np.abs(self.amps) ** 2

    def __repr__(self) -> str:
        return f"PureState({np.array2string(self.amps, precision=6)})"


def _pure(vec: np.ndarray) -> PureState:
    return PureState(vec, _checked=True)


@dataclass(frozen=True)
class Gate:
    """A named unitary. Construction rejects non-unitary matrices."""

    name: str
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractError(f"gate {self.name}: matrix must be square")
        d = m.shape[0]
        _num_qubits(d)
        dev = np.max(np.abs(m.conj().T @ m - np.eye(d)))
        if dev > ATOL_ALGEBRA:
            raise ContractError(f"gate {self.name}: not unitary (deviation {dev:.2e})")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return self.matrix.shape[0].bit_length() - 1


# The two encoding operations, the decoy rotation and the two-qubit gate
# used by privacy amplification. U1 flips the basis value and carries a
# sign: U1 U1 = -U0 (a global phase only).
U0 = Gate("U0", np.eye(2))
U1 = Gate("U1", np.array([[0.0, 1.0], [-1.0, 0.0]]))
HADAMARD = Gate("H", np.array([[1.0, 1.0], [1.0, -1.0]]) * _SQRT2_INV)
# CNOT acts on targets (control, target) in that order.
CNOT = Gate(
    "CNOT",
    np.array(
        [
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 0, 1],
            [0, 0, 1, 0],
        ],
        dtype=complex,
    ),
)

KET0 = _pure(np.array([1.0, 0.0], dtype=complex))
KET1 = _pure(np.array([0.0, 1.0], dtype=complex))
PLUS_X = _pure(np.array([_SQRT2_INV, _SQRT2_INV], dtype=complex))
MINUS_X = _pure(np.array([_SQRT2_INV, -_SQRT2_INV], dtype=complex))
for _s in (KET0, KET1, PLUS_X, MINUS_X):
    _s.amps.flags.writeable = False


class MeasureBasis(Enum):
    SIGMA_Z = "sigma_z"
    SIGMA_X = "sigma_x"


def apply_gate(gate: Gate, state: PureState, targets: Sequence[int] = (0,)) -> PureState:
    """Apply `gate` to the given qubit indices of `state`.

    Raises ContractError on arity/dimension mismatch or repeated targets.
    """
    targets = tuple(targets)
    k = state.num_qubits
    a = gate.arity
    if len(targets) != a:
        raise ContractError(f"gate {gate.name} needs {a} target(s), got {len(targets)}")
    if len(set(targets)) != a:
        raise ContractError("target qubits must be distinct")
    if any(t < 0 or t >= k for t in targets):
        raise ContractError(f"target out of range for {k}-qubit state: {targets}")
    if gate.matrix.shape[0] == 2 and k == 1:
        return _pure(gate.matrix @ state.amps)
    psi = state.amps.reshape((2,) * k)
    op = gate.matrix.reshape((2,) * (2 * a))
    psi = np.tensordot(op, psi, axes=(tuple(range(a, 2 * a)), targets))
    # tensordot leaves gate output axes first; restore target positions.
    psi = np.moveaxis(psi, tuple(range(a)), targets)
    return _pure(np.ascontiguousarray(psi).reshape(-1))


def measure(
    state: PureState,
    basis: MeasureBasis,
    target: int,
    rng: np.random.Generator,
) -> tuple[int, PureState]:
    """Born-rule measurement of one qubit; returns (bit, collapsed state).

    In SIGMA_X the outcome bit 0 means the +x eigenstate and 1 means -x.
    """
    if basis is MeasureBasis.SIGMA_X:
        state = apply_gate(HADAMARD, state, (target,))
    k = state.num_qubits
    if target < 0 or target >= k:
        raise ContractError(f"target {target} out of range for {k}-qubit state")
    psi = state.amps.reshape((2,) * k)
    idx1 = [slice(None)] * k
    idx1[target] = 1
    p1 = float(np.sum(np.abs(psi[tuple(idx1)]) ** 2))
    outcome = 1 if rng.random() < p1 else 0
    collapsed = psi.copy()
    idx_other = [slice(None)] * k
    idx_other[target] = 1 - outcome
    collapsed[tuple(idx_other)] = 0.0
    norm = math.sqrt(p1 if outcome == 1 else 1.0 - p1)
    collapsed = collapsed.reshape(-1) / norm
    out_state = _pure(collapsed)
    if basis is MeasureBasis.SIGMA_X:
        out_state = apply_gate(HADAMARD, out_state, (target,))
    return outcome, out_state


class DensityOperator:
    """d x d Hermitian, unit-trace, positive-semidefinite operator (d in {2,4,8})."""

    __slots__ = ("entries",)

    def __init__(self, entries: np.ndarray, *, _checked: bool = False):
        m = np.asarray(entries, dtype=complex)
        if not _checked:
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ContractError("density operator must be a square matrix")
            k = _num_qubits(m.shape[0])
            if not 1 <= k <= MAX_QUBITS:
                raise ContractError(f"dimension {m.shape[0]} outside supported range")
            if np.max(np.abs(m - m.conj().T)) > ATOL_ALGEBRA:
                raise ContractError("density operator is not Hermitian")
            if abs(float(np.trace(m).real) - 1.0) > ATOL_ALGEBRA:
                raise ContractError("density operator trace differs from 1")
            m = m.copy()
        self.entries = m

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityOperator":
        return cls(np.outer(state.amps, state.amps.conj()), _checked=True)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    def conjugate_by(self, unitary: np.ndarray) -> "DensityOperator":
        """Return U rho U^dagger (U validated unitary)."""
        u = np.asarray(unitary, dtype=complex)
        if np.max(np.abs(u.conj().T @ u - np.eye(self.dim))) > ATOL_ALGEBRA:
            raise ContractError("conjugation matrix is not unitary")
        return DensityOperator(u @ self.entries @ u.conj().T, _checked=True)

    def __repr__(self) -> str:
        return f"DensityOperator(dim={self.dim})"


def tensor(s1: PureState, s2: PureState) -> PureState:
    """Kronecker product of two pure states (combined size capped at 3 qubits)."""
    k = s1.num_qubits + s2.num_qubits
    if k > MAX_QUBITS:
        raise ContractError(f"tensor product would need {k} qubits (cap {MAX_QUBITS})")
    return _pure(np.kron(s1.amps, s2.amps))


def partial_trace(rho: DensityOperator, trace_out: int | Iterable[int]) -> DensityOperator:
    """Trace out the given qubit index (or indices), 0-based."""
    if isinstance(trace_out, int):
        drop = (trace_out,)
    else:
        drop = tuple(sorted(set(trace_out)))
    k = rho.num_qubits
    if any(q < 0 or q >= k for q in drop):
        raise ContractError(f"trace_out {drop} out of range for {k} qubits")
    if len(drop) >= k:
        raise ContractError("cannot trace out every qubit")
    keep = [q for q in range(k) if q not in drop]
    t = rho.entries.reshape((2,) * (2 * k))
    for q in sorted(drop, reverse=True):
        t = np.trace(t, axis1=q, axis2=q + (t.ndim // 2))
    d = 2 ** len(keep)
    return DensityOperator(t.reshape(d, d), _checked=True)


def mix(states: Sequence[PureState], weights: Sequence[float]) -> DensityOperator:
    """Convex mixture sum_i w_i |s_i><s_i|; weights must sum to 1."""
    if len(states) != len(weights) or not states:
        raise ContractError("states and weights must be non-empty and equally long")
    w = np.asarray(weights, dtype=float)
    if np.any(w < -ATOL_ALGEBRA):
        raise ContractError("mixture weights must be nonnegative")
    if abs(float(w.sum()) - 1.0) > ATOL_ALGEBRA:
        raise ContractError("mixture weights must sum to 1")
    dim = states[0].dim
    if any(s.dim != dim for s in states):
        raise ContractError("all states in a mixture must share a dimension")
    acc = np.zeros((dim, dim), dtype=complex)
    for wi, s in zip(w, states):
        acc += wi * np.outer(s.amps, s.amps.conj())
    return DensityOperator(acc, _checked=True)


def hermitian_eigenvalues(matrix: np.ndarray, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Intended for the small dimensions used here (d <= 8). Returns the
    eigenvalues in ascending order.
    """
    a = np.array(matrix, dtype=complex)
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0].real])
    scale = max(float(np.max(np.abs(a))), 1.0)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(a[p, q]))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                r = abs(a[p, q])
                if r <= 1e-18 * scale:
                    continue
                phase = a[p, q] / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = 1.0 / (tau - math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s * phase
                rot[q, p] = -s * np.conj(phase)
                a = rot.conj().T @ a @ rot
    return np.sort(np.diag(a).real)


def von_neumann_entropy(rho: DensityOperator) -> float:
    """Entropy -sum(lambda log2 lambda) in bits, with 0 log 0 == 0."""
    lams = hermitian_eigenvalues(rho.entries)
    if lams[0] < -ATOL_CHAIN:
        raise ContractError(f"density operator has eigenvalue {lams[0]:.3e} < -1e-10")
    lams = np.clip(lams, 0.0, 1.0)
    total = 0.0
    for lam in lams:
        if lam > 0.0:
            total -= lam * math.log2(lam)
    return total
