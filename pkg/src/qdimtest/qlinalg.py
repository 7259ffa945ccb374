"""Dense complex Hermitian linear algebra for small density matrices.

Density matrices are plain ``numpy`` complex arrays.  Bipartite states use
A-major tensor ordering: basis index ``a * dimB + b``.  Spectra come from a
cyclic Jacobi solver; each sweep is run as ``dim - 1`` rounds of disjoint
rotations (round-robin pairing), and each round is applied as a single
unitary so the work stays in vectorised numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

__all__ = [
    "BipartiteState",
    "MeasurementBasis",
    "NonPhysicalStateError",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "HADAMARD",
    "apply_channel_1q",
    "bit_flip",
    "complementarity",
    "conditional_entropy",
    "check_density_matrix",
    "dephasing",
    "depolarizing",
    "eigh_jacobi",
    "measure_A",
    "measured_conditional_entropy",
    "partial_trace",
    "pauli_basis",
    "tensor_basis",
    "unitary",
    "von_neumann_entropy",
]

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)


class NonPhysicalStateError(ValueError):
    """A matrix failed the density-matrix checks beyond tolerance."""


# -- eigen-solver ------------------------------------------------------------


def _round_robin(dim: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings covering every (p, q) once per sweep, each round disjoint."""
    m = dim + (dim % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < dim and b < dim:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0], players[-1], *players[1:-1]]
    return rounds


_ROUNDS_CACHE: dict[int, list] = {}


def eigh_jacobi(
    matrix: np.ndarray,
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    matrix : ndarray, shape (d, d)
        Hermitian matrix (only the Hermitian part is used).
    tol : float
        Sweeps stop once the off-diagonal Frobenius norm falls below
        ``tol * max(1, ||A||_F)``.
    max_sweeps : int
        Hard cap on the number of sweeps.

    Returns
    -------
    (w, V) : eigenvalues ascending and unitary ``V`` with ``A = V diag(w) V^H``.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    a = 0.5 * (a + a.conj().T)
    dim = a.shape[0]
    v = np.eye(dim, dtype=complex)
    if dim == 1:
        return a.real.diagonal().copy(), v
    rounds = _ROUNDS_CACHE.get(dim)
    if rounds is None:
        rounds = _ROUNDS_CACHE.setdefault(dim, _round_robin(dim))
    threshold = tol * max(1.0, float(np.linalg.norm(a)))
    offmask = ~np.eye(dim, dtype=bool)

    for _ in range(max_sweeps):
        if np.linalg.norm(a[offmask]) < threshold:
            break
        for ps, qs in rounds:
            apq = a[ps, qs]
            mag = np.abs(apq)
            active = mag > 1e-300
            if not active.any():
                continue
            app = a[ps, ps].real
            aqq = a[qs, qs].real
            safe = np.where(active, mag, 1.0)
            phase = np.where(active, apq / safe, 1.0)
            tau = (aqq - app) / (2.0 * safe)
            sign = np.where(tau >= 0.0, 1.0, -1.0)
            t = sign / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # G = diag(1, conj(phase)) @ [[c, s], [-s, c]] on each (p, q) block
            g = np.eye(dim, dtype=complex)
            g[ps, ps] = c
            g[ps, qs] = s
            g[qs, ps] = -s * phase.conj()
            g[qs, qs] = c * phase.conj()
            a = g.conj().T @ a @ g
            v = v @ g
        a = 0.5 * (a + a.conj().T)
    else:
        if np.linalg.norm(a[offmask]) >= threshold:
            raise RuntimeError(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = a.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


# -- states ------------------------------------------------------------------


def check_density_matrix(rho: np.ndarray, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Validate Hermiticity, unit trace and PSD; return the eigenvalues."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NonPhysicalStateError(f"not a square matrix: shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise NonPhysicalStateError("matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise NonPhysicalStateError(f"trace is {tr}, not 1")
    w, _ = eigh_jacobi(rho)
    if w[0] < -psd_tol:
        raise NonPhysicalStateError(f"eigenvalue {w[0]:.3e} below -{psd_tol:g}")
    return w


def _clean_spectrum(w: np.ndarray) -> np.ndarray:
    if w.size and w.min() < -PSD_TOL:
        raise NonPhysicalStateError(f"eigenvalue {w.min():.3e} below -{PSD_TOL:g}")
    w = np.clip(w, 0.0, 1.0)
    total = w.sum()
    if total <= 0.0:
        raise NonPhysicalStateError("spectrum has no positive mass")
    return w / total


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Von Neumann entropy -Tr[rho log2 rho] in bits.

    The spectrum is clipped to [0, 1] (negatives down to -1e-10 are treated as
    rounding) and renormalised before 0 log 0 := 0 is applied.
    """
    rho = np.asarray(rho, dtype=complex)
    if abs(np.trace(rho) - 1.0) > TRACE_TOL:
        raise NonPhysicalStateError(f"trace is {np.trace(rho)}, not 1")
    w, _ = eigh_jacobi(rho)
    w = _clean_spectrum(w)
    nz = w[w > 0.0]
    return float(max(0.0, -np.sum(nz * np.log2(nz))))


@dataclass(frozen=True)
class BipartiteState:
    """Joint state on H_A (x) H_B, A-major ordering."""

    dimA: int
    dimB: int
    state: np.ndarray

    def __post_init__(self):
        shape = (self.dimA * self.dimB,) * 2
        if np.shape(self.state) != shape:
            raise ValueError(f"state shape {np.shape(self.state)} != {shape}")

    def rho_A(self) -> np.ndarray:
        return partial_trace(self.state, self.dimA, self.dimB, keep="A")

    def rho_B(self) -> np.ndarray:
        return partial_trace(self.state, self.dimA, self.dimB, keep="B")


def partial_trace(rho: np.ndarray, dimA: int, dimB: int, keep: str = "B") -> np.ndarray:
    """Reduce an A-major bipartite matrix to the ``keep`` factor."""
    r = np.asarray(rho).reshape(dimA, dimB, dimA, dimB)
    if keep == "B":
        return np.einsum("abac->bc", r)
    if keep == "A":
        return np.einsum("abcb->ac", r)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def conditional_entropy(state: BipartiteState) -> float:
    """H(A|B) = H(rho_AB) - H(rho_B), in bits."""
    return von_neumann_entropy(state.state) - von_neumann_entropy(state.rho_B())


# -- measurements ------------------------------------------------------------


@dataclass(frozen=True)
class MeasurementBasis:
    """Orthonormal basis stored as the columns of a unitary matrix."""

    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("basis matrix must be square")
        gram = m.conj().T @ m
        if np.max(np.abs(gram - np.eye(m.shape[0]))) > 1e-12:
            raise ValueError("basis vectors are not orthonormal")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_vectors(cls, vectors, name: str = "") -> "MeasurementBasis":
        return cls(np.column_stack([np.asarray(v, dtype=complex) for v in vectors]), name)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def vectors(self) -> list[np.ndarray]:
        return [self.matrix[:, i] for i in range(self.dim)]

    def projectors(self) -> list[np.ndarray]:
        return [np.outer(v, v.conj()) for v in self.vectors]


_PAULI_EIGVECS = {
    "Z": np.eye(2, dtype=complex),
    "X": HADAMARD.copy(),
    "Y": np.array([[1, 1], [1j, -1j]], dtype=complex) / math.sqrt(2.0),
}


def pauli_basis(label: str) -> MeasurementBasis:
    """Single-qubit eigenbasis of X, Y or Z; outcome 0 is the +1 eigenvector."""
    return MeasurementBasis(_PAULI_EIGVECS[label], label)


def tensor_basis(labels) -> MeasurementBasis:
    """Product basis, e.g. ``tensor_basis("XZ")``; outcome index is A-major binary."""
    mats = [_PAULI_EIGVECS[c] for c in labels]
    return MeasurementBasis(reduce(np.kron, mats), "".join(labels))


def measure_A(state: BipartiteState, basis: MeasurementBasis) -> BipartiteState:
    """Pinch the A factor in ``basis``: sum_x (|x><x| (x) I) rho (|x><x| (x) I)."""
    if basis.dim != state.dimA:
        raise ValueError(f"basis dim {basis.dim} != dimA {state.dimA}")
    u = basis.matrix
    dA, dB = state.dimA, state.dimB
    # rotate A into the basis, drop A-offdiagonal blocks, rotate back
    big = np.kron(u, np.eye(dB))
    r = (big.conj().T @ state.state @ big).reshape(dA, dB, dA, dB)
    pinched = np.zeros_like(r)
    idx = np.arange(dA)
    pinched[idx, :, idx, :] = r[idx, :, idx, :]
    out = big @ pinched.reshape(dA * dB, dA * dB) @ big.conj().T
    return BipartiteState(dA, dB, out)


def complementarity(b1: MeasurementBasis, b2: MeasurementBasis) -> float:
    """c = max_{x,z} |<x|z>|^2."""
    if b1.dim != b2.dim:
        raise ValueError(f"dimension mismatch: {b1.dim} vs {b2.dim}")
    return float(np.max(np.abs(b1.matrix.conj().T @ b2.matrix) ** 2))


# -- single-qubit channels ---------------------------------------------------


@dataclass(frozen=True)
class _Channel:
    kind: str
    p: float = 0.0
    u: np.ndarray | None = None


def bit_flip(p: float) -> _Channel:
    return _Channel("bit_flip", p)


def depolarizing(p: float) -> _Channel:
    return _Channel("depolarizing", p)


def dephasing(p: float) -> _Channel:
    return _Channel("dephasing", p)


def unitary(u) -> _Channel:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or np.max(np.abs(u.conj().T @ u - np.eye(2))) > 1e-12:
        raise ValueError("unitary channel needs a 2x2 unitary")
    return _Channel("unitary", u=u)


def apply_channel_1q(rho: np.ndarray, kind: _Channel) -> np.ndarray:
    """Apply one of the four single-qubit maps to a 2x2 density matrix.

    bit_flip(p):     (1 - p) rho + p X rho X
    depolarizing(p): (1 - 4p/3) rho + (2p/3) I,   p <= 3/4
    dephasing(p):    (1 - p) rho + p Z rho Z
    unitary(U):      U rho U^H
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got {rho.shape}")
    if kind.kind == "unitary":
        return kind.u @ rho @ kind.u.conj().T
    p = kind.p
    limit = 0.75 if kind.kind == "depolarizing" else 1.0
    if not 0.0 <= p <= limit:
        raise ValueError(f"{kind.kind} rate {p!r} outside [0, {limit:g}]")
    if kind.kind == "bit_flip":
        return (1.0 - p) * rho + p * (PAULI_X @ rho @ PAULI_X)
    if kind.kind == "dephasing":
        return (1.0 - p) * rho + p * (PAULI_Z @ rho @ PAULI_Z)
    if kind.kind == "depolarizing":
        return (1.0 - 4.0 * p / 3.0) * rho + (2.0 * p / 3.0) * np.eye(2)
    raise ValueError(f"unknown channel {kind.kind!r}")


def measured_conditional_entropy(state: BipartiteState, basis: MeasurementBasis) -> float:
    """H(A|B) of ``measure_A(state, basis)``, computed block by block.

    After measuring A the joint state is block diagonal, so its entropy is
    H({p_x}) + sum_x p_x H(rho_B^x).
    """
    if basis.dim != state.dimA:
        raise ValueError(f"basis dim {basis.dim} != dimA {state.dimA}")
    dA, dB = state.dimA, state.dimB
    r = state.state.reshape(dA, dB, dA, dB)
    u = basis.matrix
    # block_x = (<x| (x) I) rho (|x> (x) I)
    blocks = np.einsum("ax,abcd,cx->xbd", u.conj(), r, u)
    total = 0.0
    for block in blocks:
        px = float(np.trace(block).real)
        if px <= 0.0:
            continue
        total += -px * math.log2(px) + px * von_neumann_entropy(block / px)
    return total - von_neumann_entropy(state.rho_B())
