"""Dense linear algebra used by both constructions.

Real symmetric eigendecomposition (cyclic Jacobi, with a LAPACK path for
large dimensions), Gram-Schmidt unitary completion and spectral truncation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ConvergenceError",
    "SpectralDecomposition",
    "symmetric_eigendecomposition",
    "complete_to_unitary",
    "low_rank_reconstruct",
    "unitarity_residual",
]

SYMMETRY_TOL = 1e-12
ORTHONORMAL_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
# Jacobi converges only linearly on the heavily degenerate disjointness
# matrices; above this size LAPACK is used instead (same ordering/contract).
JACOBI_MAX_DIM = 256


class ConvergenceError(RuntimeError):
    """Jacobi sweeps exhausted before the off-diagonal norm became small."""

    def __init__(self, residual: float, sweeps: int):
        super().__init__(
            f"Jacobi did not converge after {sweeps} sweeps; "
            f"off-diagonal Frobenius norm {residual:.3e}"
        )
        self.residual = residual
        self.sweeps = sweeps


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of a real symmetric matrix, ``A = Q diag(eigenvalues) Q^T``.

    Eigenvalues are sorted by descending squared magnitude; column ``i`` of
    ``eigenvectors`` belongs to ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0
    method: str = "jacobi"

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T

    def squared_mass(self) -> float:
        return float(np.sum(self.eigenvalues**2))


def _round_robin_schedule(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Circle-method pairings: m-1 rounds of m/2 disjoint index pairs."""
    ring = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p = np.array([min(ring[i], ring[m - 1 - i]) for i in range(m // 2)])
        q = np.array([max(ring[i], ring[m - 1 - i]) for i in range(m // 2)])
        rounds.append((p, q))
        ring = [ring[0], ring[-1]] + ring[1:-1]
    return rounds


def _offdiag_norm(A: np.ndarray) -> float:
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.sqrt(np.sum(off * off)))


def _jacobi(A: np.ndarray, tol: float, max_sweeps: int) -> tuple[np.ndarray, np.ndarray, int]:
    n = A.shape[0]
    V = np.eye(n)
    fro = float(np.linalg.norm(A))
    if n == 1 or fro == 0.0:
        return np.diag(A).copy(), V, 0
    m = n + (n % 2)
    schedule = []
    for p, q in _round_robin_schedule(m):
        keep = q < n  # drop the dummy index when n is odd
        schedule.append((p[keep], q[keep]))

    sweeps = 0
    while True:
        off = _offdiag_norm(A)
        if off < tol * fro:
            return np.diag(A).copy(), V, sweeps
        if sweeps >= max_sweeps:
            raise ConvergenceError(off, sweeps)
        sweeps += 1
        for p, q in schedule:
            apq = A[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            Ap, Aq = A[p, :], A[q, :]
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            Ap, Aq = A[:, p], A[:, q]
            A[:, p] = Ap * c - Aq * s
            A[:, q] = Ap * s + Aq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
            Vp, Vq = V[:, p], V[:, q]
            V[:, p] = Vp * c - Vq * s
            V[:, q] = Vp * s + Vq * c


def _order_by_squared_magnitude(values: np.ndarray) -> np.ndarray:
    """Descending |lambda|^2, ties (to 12 significant digits) by ascending index."""
    sq = values * values
    top = sq.max() if sq.size else 0.0
    if top == 0.0:
        return np.arange(values.size)
    key = np.round(sq / top * 1e12)
    return np.argsort(-key, kind="stable")


def symmetric_eigendecomposition(
    A,
    method: str = "auto",
    tol: float = JACOBI_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> SpectralDecomposition:
    """Eigendecomposition of a real symmetric matrix.

    Parameters
    ----------
    A : array_like, shape (d, d)
        Real matrix, symmetric to within 1e-12 elementwise.
    method : {"auto", "jacobi", "lapack"}
        ``auto`` runs cyclic Jacobi up to ``JACOBI_MAX_DIM`` and LAPACK above.
    tol : float
        Jacobi stops once the off-diagonal Frobenius norm is below
        ``tol * ||A||_F``.
    max_sweeps : int
        Sweep budget; exceeding it raises :class:`ConvergenceError`.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] == 0:
        raise ValueError("empty matrix")
    asym = float(np.max(np.abs(A - A.T)))
    if asym > SYMMETRY_TOL:
        i, j = np.unravel_index(np.argmax(np.abs(A - A.T)), A.shape)
        raise ValueError(f"matrix is not symmetric: |A[{i},{j}] - A[{j},{i}]| = {asym:.3e}")
    A = 0.5 * (A + A.T)

    if method == "auto":
        method = "jacobi" if A.shape[0] <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        values, vectors, sweeps = _jacobi(A.copy(), tol, max_sweeps)
    elif method == "lapack":
        values, vectors = np.linalg.eigh(A)
        sweeps = 0
    else:
        raise ValueError(f"unknown method {method!r}")

    order = _order_by_squared_magnitude(values)
    return SpectralDecomposition(
        eigenvalues=values[order],
        eigenvectors=np.ascontiguousarray(vectors[:, order]),
        sweeps=sweeps,
        method=method,
    )


def low_rank_reconstruct(decomp: SpectralDecomposition, keep: int) -> np.ndarray:
    """``Q D_r Q^T`` with only the first ``keep`` eigenvalues retained."""
    if not 1 <= keep <= decomp.dim:
        raise ValueError(f"keep must lie in [1, {decomp.dim}], got {keep}")
    Q = decomp.eigenvectors[:, :keep]
    return (Q * decomp.eigenvalues[:keep]) @ Q.T


def unitarity_residual(U: np.ndarray) -> float:
    """max |U^H U - I|."""
    U = np.asarray(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[1]))))


def complete_to_unitary(prescribed: Sequence[tuple[int, np.ndarray]], dim: int) -> np.ndarray:
    """Extend orthonormal columns at fixed positions to a full unitary.

    The free columns are filled, in ascending column order, by Gram-Schmidt
    over the standard basis e_0, e_1, ... (candidates whose residual norm is
    below 1e-10 are skipped). Prescribed columns are copied verbatim.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    positions = [int(i) for i, _ in prescribed]
    if len(set(positions)) != len(positions):
        raise ValueError(f"duplicate column indices in {positions}")
    for i in positions:
        if not 0 <= i < dim:
            raise ValueError(f"column index {i} outside [0, {dim})")
    vecs = [np.asarray(v, dtype=complex).reshape(-1) for _, v in prescribed]
    for i, v in zip(positions, vecs):
        if v.shape[0] != dim:
            raise ValueError(f"vector for column {i} has length {v.shape[0]}, expected {dim}")

    U = np.zeros((dim, dim), dtype=complex)
    basis = np.zeros((dim, dim), dtype=complex)
    count = len(vecs)
    if vecs:
        P = np.column_stack(vecs)
        gram = P.conj().T @ P
        dev = np.abs(gram - np.eye(count))
        if dev.max() > ORTHONORMAL_TOL:
            a, b = np.unravel_index(np.argmax(dev), dev.shape)
            raise ValueError(
                f"prescribed vectors are not orthonormal: <v{positions[a]}, v{positions[b]}> = "
                f"{complex(gram[a, b]):.3e}"
            )
        U[:, positions] = P
        basis[:, :count] = P

    taken = set(positions)
    free = [j for j in range(dim) if j not in taken]
    filled = []
    for k in range(dim):
        if len(filled) == len(free):
            break
        B = basis[:, :count]
        r = np.zeros(dim, dtype=complex)
        r[k] = 1.0
        for _ in range(2):  # second pass restores orthogonality lost to rounding
            r = r - B @ (B.conj().T @ r)
        norm = np.linalg.norm(r)
        if norm < ORTHONORMAL_TOL:
            continue
        r = r / norm
        basis[:, count] = r
        count += 1
        filled.append(r)
    if len(filled) != len(free):
        raise ValueError("standard basis exhausted before completion")  # pragma: no cover
    for j, r in zip(free, filled):
        U[:, j] = r
    return U
