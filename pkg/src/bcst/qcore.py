"""Dense statevector engine for registers of up to eight qubits.

Conventions used throughout the package:

* Basis ordering is big-endian: qubit 0 is the most significant bit, so the
  amplitude of |q0 q1 .. q_{n-1}> sits at index sum(q_k << (n-1-k)).
* Values are immutable once constructed; every operation returns a fresh
  object and is a pure function of its inputs (plus an explicit random
  sample where one is needed).
* Tolerances: 1e-12 for equality and normalization checks, -1e-10 as the
  eigenvalue floor for density matrices, and 1e-14 as the probability below
  which a measurement branch counts as impossible.

The public StateVector constructor validates shape, finiteness and norm;
operations inside this module skip re-validation of arrays they have just
computed (unitaries and projective collapses preserve the invariants by
construction, which the property tests exercise directly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    CapacityExceeded,
    DegenerateBranch,
    IndexOutOfRange,
    InvalidPermutation,
    NonUnitary,
)

MAX_QUBITS = 8
ATOL = 1e-12
EIG_FLOOR = -1e-10
BRANCH_EPS = 1e-14

_SQRT2_INV = 1.0 / math.sqrt(2.0)


class BellKind(Enum):
    """The four Bell states; definition order fixes all deterministic iteration."""

    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"

    def __str__(self) -> str:
        return self.value


# Amplitude tensors t[i, j] = <ij|bell>; psi carries even parity, phi odd.
BELL_TENSORS: dict[BellKind, np.ndarray] = {
    BellKind.PSI_PLUS: np.array([[1, 0], [0, 1]], dtype=complex) * _SQRT2_INV,
    BellKind.PSI_MINUS: np.array([[1, 0], [0, -1]], dtype=complex) * _SQRT2_INV,
    BellKind.PHI_PLUS: np.array([[0, 1], [1, 0]], dtype=complex) * _SQRT2_INV,
    BellKind.PHI_MINUS: np.array([[0, 1], [-1, 0]], dtype=complex) * _SQRT2_INV,
}
for _t in BELL_TENSORS.values():
    _t.flags.writeable = False

_BELL_KINDS = tuple(BellKind)
# Rows are the flattened Bell tensors in BellKind order, pre-conjugated.
_BELL_ROWS_CONJ = np.conj(np.stack([BELL_TENSORS[k].reshape(-1) for k in _BELL_KINDS]))
_BELL_ROWS_CONJ.flags.writeable = False


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state of `num_qubits` qubits, big-endian amplitudes."""

    num_qubits: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        if not isinstance(self.num_qubits, int) or self.num_qubits < 1:
            raise ValueError(f"num_qubits must be a positive integer, got {self.num_qubits!r}")
        if self.num_qubits > MAX_QUBITS:
            raise CapacityExceeded(f"{self.num_qubits} qubits exceed the {MAX_QUBITS}-qubit limit")
        amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != 2**self.num_qubits:
            raise ValueError(f"expected {2**self.num_qubits} amplitudes, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps.real)) or not np.all(np.isfinite(amps.imag)):
            raise ValueError("amplitudes must be finite")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > ATOL:
            raise ValueError(f"state is not normalized: sum |a|^2 = {norm2!r}")
        object.__setattr__(self, "amps", _freeze(amps))

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per qubit (axis k = qubit k)."""
        return self.amps.reshape([2] * self.num_qubits)


def _new_state(num_qubits: int, amps: np.ndarray) -> StateVector:
    """Wrap a freshly computed, already-normalized complex128 array."""
    s = object.__new__(StateVector)
    object.__setattr__(s, "num_qubits", num_qubits)
    amps.flags.writeable = False
    object.__setattr__(s, "amps", amps)
    return s


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix over `num_qubits` qubits."""

    num_qubits: int
    mat: np.ndarray

    def __post_init__(self) -> None:
        d = 2**self.num_qubits
        mat = np.array(self.mat, dtype=np.complex128)
        if mat.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got {mat.shape}")
        if np.max(np.abs(mat - mat.conj().T)) > ATOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > ATOL or abs(np.trace(mat).imag) > ATOL:
            raise ValueError("density matrix trace is not 1")
        if float(np.min(np.linalg.eigvalsh(mat))) < EIG_FLOOR:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "mat", _freeze(mat))


@dataclass(frozen=True)
class SingleQubitBasis:
    """Orthonormal measurement basis {|a>, |b>} for one qubit."""

    ket_a: np.ndarray
    ket_b: np.ndarray

    def __post_init__(self) -> None:
        ka = np.array(self.ket_a, dtype=np.complex128).reshape(-1)
        kb = np.array(self.ket_b, dtype=np.complex128).reshape(-1)
        if ka.shape != (2,) or kb.shape != (2,):
            raise ValueError("basis kets must have two components")
        for name, k in (("|a>", ka), ("|b>", kb)):
            if abs(np.vdot(k, k).real - 1.0) > ATOL:
                raise ValueError(f"{name} is not normalized")
        if abs(np.vdot(ka, kb)) > ATOL:
            raise ValueError("<a|b> != 0")
        object.__setattr__(self, "ket_a", _freeze(ka))
        object.__setattr__(self, "ket_b", _freeze(kb))
        # Pre-conjugated 2x2 projection rows, kept for the measurement kernels.
        object.__setattr__(self, "_rows_conj", _freeze(np.conj(np.stack([ka, kb]))))


@lru_cache(maxsize=None)
def computational_basis() -> SingleQubitBasis:
    return SingleQubitBasis(np.array([1.0, 0.0]), np.array([0.0, 1.0]))


@lru_cache(maxsize=None)
def plus_minus_basis() -> SingleQubitBasis:
    return SingleQubitBasis(
        np.array([_SQRT2_INV, _SQRT2_INV]), np.array([_SQRT2_INV, -_SQRT2_INV])
    )


def basis_from_angles(theta: float, phi: float) -> SingleQubitBasis:
    """|a> = cos(theta)|0> + e^{i phi} sin(theta)|1>, |b> its orthogonal complement."""
    e = np.exp(1j * phi)
    ket_a = np.array([math.cos(theta), e * math.sin(theta)], dtype=complex)
    ket_b = np.array([math.sin(theta), -e * math.cos(theta)], dtype=complex)
    return SingleQubitBasis(ket_a, ket_b)


def ket(bits: str) -> StateVector:
    """Computational basis state from a bit string, e.g. ket("01")."""
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"not a bit string: {bits!r}")
    return basis_state(len(bits), int(bits, 2))


def basis_state(num_qubits: int, index: int) -> StateVector:
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(num_qubits, amps)


def single_qubit(alpha: complex, beta: complex) -> StateVector:
    return StateVector(1, np.array([alpha, beta], dtype=complex))


def haar_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    d = 2**num_qubits
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return StateVector(num_qubits, z / np.linalg.norm(z))


class Branch(NamedTuple):
    """One measurement branch: outcome label, its probability, the collapsed state."""

    outcome: object
    probability: float
    state: StateVector


def _check_qubits(s: StateVector, *qubits: int) -> None:
    for q in qubits:
        if not isinstance(q, (int, np.integer)) or not 0 <= q < s.num_qubits:
            raise IndexOutOfRange(f"qubit {q!r} outside register of {s.num_qubits}")
    if len(set(qubits)) != len(qubits):
        raise IndexOutOfRange(f"duplicate qubit indices {qubits}")


_UNITARY_SEEN: set[bytes] = set()


def _check_unitary(u: np.ndarray, dim: int) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (dim, dim):
        raise NonUnitary(f"expected a {dim}x{dim} matrix, got {u.shape}")
    key = u.tobytes()
    if key not in _UNITARY_SEEN:
        if np.max(np.abs(u @ u.conj().T - np.eye(dim))) > ATOL:
            raise NonUnitary("matrix is not unitary within 1e-12")
        if len(_UNITARY_SEEN) > 512:
            _UNITARY_SEEN.clear()
        _UNITARY_SEEN.add(key)
    return u


def tensor(parts: Sequence[StateVector]) -> StateVector:
    """Kronecker product of states in argument order (left = most significant)."""
    if not parts:
        raise ValueError("tensor needs at least one factor")
    total = sum(p.num_qubits for p in parts)
    if total > MAX_QUBITS:
        raise CapacityExceeded(f"tensor of {total} qubits exceeds the {MAX_QUBITS}-qubit limit")
    amps = parts[0].amps
    for p in parts[1:]:
        amps = np.multiply.outer(amps, p.amps).reshape(-1)
    return _new_state(total, amps.copy() if len(parts) == 1 else amps)


def permute_qubits(s: StateVector, perm: Sequence[int]) -> StateVector:
    """Move qubit i to position perm[i]; amplitudes follow the relabeling."""
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(s.num_qubits)):
        raise InvalidPermutation(f"{perm} is not a permutation of 0..{s.num_qubits - 1}")
    inverse = [0] * s.num_qubits
    for src, dst in enumerate(perm):
        inverse[dst] = src
    out = np.ascontiguousarray(s.tensor_view().transpose(inverse)).reshape(-1)
    return _new_state(s.num_qubits, out)


def apply_1q(s: StateVector, q: int, u: np.ndarray) -> StateVector:
    u = _check_unitary(u, 2)
    _check_qubits(s, q)
    out = np.moveaxis(np.tensordot(u, s.tensor_view(), axes=([1], [q])), 0, q)
    return _new_state(s.num_qubits, np.ascontiguousarray(out).reshape(-1))


def apply_2q(s: StateVector, q1: int, q2: int, u: np.ndarray) -> StateVector:
    """Apply a 4x4 unitary; q1 indexes the first tensor factor of u, q2 the second."""
    u = _check_unitary(u, 4)
    _check_qubits(s, q1, q2)
    out = np.tensordot(u.reshape(2, 2, 2, 2), s.tensor_view(), axes=([2, 3], [q1, q2]))
    out = np.moveaxis(out, [0, 1], [q1, q2])
    return _new_state(s.num_qubits, np.ascontiguousarray(out).reshape(-1))


def _qubit_projections(
    s: StateVector, q: int, basis: SingleQubitBasis
) -> tuple[np.ndarray, np.ndarray]:
    """Residual amplitudes (2, 2^{n-1}) per outcome and the two probabilities."""
    m = np.moveaxis(s.tensor_view(), q, 0).reshape(2, -1)
    rest = basis._rows_conj @ m
    probs = np.einsum("ij,ij->i", rest, rest.conj()).real
    return rest, probs


def _reinsert_qubit(
    s: StateVector, q: int, vec: np.ndarray, rest_row: np.ndarray, prob: float
) -> StateVector:
    full = np.multiply.outer(vec, rest_row).reshape([2] * s.num_qubits)
    out = np.moveaxis(full, 0, q).reshape(-1) / math.sqrt(prob)
    return _new_state(s.num_qubits, out)


def measure_qubit_branches(s: StateVector, q: int, basis: SingleQubitBasis) -> list[Branch]:
    """All branches with probability >= 1e-14, in order ("a", "b")."""
    _check_qubits(s, q)
    rest, probs = _qubit_projections(s, q, basis)
    branches = []
    for i, (label, vec) in enumerate((("a", basis.ket_a), ("b", basis.ket_b))):
        prob = float(probs[i])
        if prob >= BRANCH_EPS:
            branches.append(Branch(label, prob, _reinsert_qubit(s, q, vec, rest[i], prob)))
    return branches


def measure_qubit(s: StateVector, q: int, basis: SingleQubitBasis, random: float) -> Branch:
    """Sampled projective measurement; outcome is "a" iff random < P(a)."""
    _check_qubits(s, q)
    if not 0.0 <= random < 1.0:
        raise ValueError(f"random sample must lie in [0, 1), got {random!r}")
    rest, probs = _qubit_projections(s, q, basis)
    i = 0 if random < probs[0] else 1
    prob = float(probs[i])
    if prob < BRANCH_EPS:
        raise DegenerateBranch(f"branch {'ab'[i]} has probability {prob!r}; cannot renormalize")
    vec = basis.ket_a if i == 0 else basis.ket_b
    return Branch("ab"[i], prob, _reinsert_qubit(s, q, vec, rest[i], prob))


def _pair_projections(s: StateVector, q1: int, q2: int) -> tuple[np.ndarray, np.ndarray]:
    """Residual amplitudes (4, 2^{n-2}) per Bell outcome and the four probabilities."""
    m = np.moveaxis(s.tensor_view(), (q1, q2), (0, 1)).reshape(4, -1)
    rest = _BELL_ROWS_CONJ @ m
    probs = np.einsum("ij,ij->i", rest, rest.conj()).real
    return rest, probs


def _reinsert_pair(
    s: StateVector, q1: int, q2: int, kind: BellKind, rest_row: np.ndarray, prob: float
) -> StateVector:
    full = np.multiply.outer(BELL_TENSORS[kind], rest_row.reshape([2] * (s.num_qubits - 2)))
    out = np.moveaxis(full, [0, 1], [q1, q2]).reshape(-1) / math.sqrt(prob)
    return _new_state(s.num_qubits, out)


def measure_bell_pair_branches(s: StateVector, q1: int, q2: int) -> list[Branch]:
    """All Bell-basis branches of the pair (q1, q2) with probability >= 1e-14."""
    _check_qubits(s, q1, q2)
    rest, probs = _pair_projections(s, q1, q2)
    branches = []
    for i, kind in enumerate(_BELL_KINDS):
        prob = float(probs[i])
        if prob >= BRANCH_EPS:
            branches.append(Branch(kind, prob, _reinsert_pair(s, q1, q2, kind, rest[i], prob)))
    return branches


def measure_bell_pair(s: StateVector, q1: int, q2: int, random: float) -> Branch:
    """Sampled Bell measurement of (q1, q2); cumulative sampling in BellKind order."""
    _check_qubits(s, q1, q2)
    if not 0.0 <= random < 1.0:
        raise ValueError(f"random sample must lie in [0, 1), got {random!r}")
    rest, probs = _pair_projections(s, q1, q2)
    cumulative = 0.0
    i = 3
    for j in range(4):
        cumulative += probs[j]
        if random < cumulative:
            i = j
            break
    prob = float(probs[i])
    if prob < BRANCH_EPS:
        raise DegenerateBranch(
            f"branch {_BELL_KINDS[i]} has probability {prob!r}; cannot renormalize"
        )
    return Branch(_BELL_KINDS[i], prob, _reinsert_pair(s, q1, q2, _BELL_KINDS[i], rest[i], prob))


def reduced_density(s: StateVector, keep: Iterable[int]) -> DensityMatrix:
    """Partial trace onto `keep` (row/column order: ascending qubit index)."""
    kept = sorted(set(int(q) for q in keep))
    if not kept:
        raise IndexOutOfRange("keep must be nonempty")
    _check_qubits(s, *kept)
    rest = [q for q in range(s.num_qubits) if q not in kept]
    m = s.tensor_view().transpose(kept + rest).reshape(2 ** len(kept), -1)
    return DensityMatrix(len(kept), m @ m.conj().T)


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2); 1 for pure states, 1/2^n for the maximally mixed state."""
    return float(np.vdot(rho.mat, rho.mat).real)


def fidelity_pure(s1: StateVector, s2: StateVector) -> float:
    """|<s1|s2>|^2 between pure states of equal size."""
    if s1.num_qubits != s2.num_qubits:
        raise ValueError("states have different qubit counts")
    return float(abs(np.vdot(s1.amps, s2.amps)) ** 2)


def equal_up_to_global_phase(s1: StateVector, s2: StateVector, tol: float = ATOL) -> bool:
    return fidelity_pure(s1, s2) >= 1.0 - tol


def factor_subsystem(s: StateVector, keep: Iterable[int]) -> StateVector:
    """Exact pure state of `keep` when it is in a product with the rest.

    Raises ValueError when the kept qubits are entangled with the remainder.
    The global phase of the result is arbitrary.
    """
    kept = sorted(set(int(q) for q in keep))
    if not kept:
        raise IndexOutOfRange("keep must be nonempty")
    _check_qubits(s, *kept)
    rest = [q for q in range(s.num_qubits) if q not in kept]
    if not rest:
        return _new_state(s.num_qubits, s.amps.copy())
    m = s.tensor_view().transpose(kept + rest).reshape(2 ** len(kept), -1)
    col_norms = np.einsum("ij,ij->j", m, m.conj()).real
    vec = m[:, int(np.argmax(col_norms))].copy()
    vec /= np.linalg.norm(vec)
    # Product iff m is rank one, i.e. m = vec (x) (vec^dagger m).
    if np.max(np.abs(m - np.multiply.outer(vec, vec.conj() @ m))) > 1e-9:
        raise ValueError(f"qubits {kept} are entangled with the rest")
    return _new_state(len(kept), vec)
