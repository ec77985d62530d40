"""Disjointness construction: uniform distribution over disjoint weight-sqrt(n) pairs.

``P_u[x, y] = 1/(N1 N2)`` when ``|x| = |y| = sqrt(n)`` and ``x & y == 0``.
Its entrywise square root ``M_u`` is real symmetric; keeping the leading
K + 1 eigenpairs (by squared eigenvalue) gives a (K+1)-term Schmidt state
whose outcome distribution ``P_r`` is within L1 distance epsilon of ``P_u``.

Everything lives on the N2 weight-sqrt(n) strings: ``M_u`` vanishes elsewhere
and so do all eigenvectors with nonzero eigenvalue.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .bitstrings import binomial, enumerate_fixed_weight, isqrt_exact
from .correlations import JointDistribution, variational_distance
from .numerics import SpectralDecomposition, low_rank_reconstruct, symmetric_eigendecomposition
from .paradigm import ParadigmInstance, born_distribution, schmidt_qubit_count

__all__ = [
    "Thm2Construction",
    "Thm2Report",
    "disjointness_sizes",
    "build_pu",
    "build_mu",
    "mu_spectrum",
    "truncation_rank",
    "build_thm2",
    "with_truncation",
    "born_instance_distribution",
    "verify_thm2",
]

MASS_TOL = 1e-9
SLACK = 1e-12


def disjointness_sizes(n: int) -> tuple[int, int, int]:
    """``(sqrt(n), N1, N2)`` with N1 = C(n - sqrt n, sqrt n), N2 = C(n, sqrt n)."""
    s = isqrt_exact(n)
    if 2 * s > n:
        raise ValueError(f"n = {n}: no two disjoint strings of weight {s} exist")
    return s, binomial(n - s, s), binomial(n, s)


def build_pu(n: int) -> JointDistribution:
    s, N1, N2 = disjointness_sizes(n)
    index = np.array([x.value for x in enumerate_fixed_weight(n, s)], dtype=np.int64)
    disjoint = (index[:, None] & index[None, :]) == 0
    block = np.where(disjoint, 1.0 / (N1 * N2), 0.0)
    return JointDistribution(n, block, index, index)


def build_mu(pu: JointDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise square root of ``pu`` on its block.

    Returns ``(matrix, index)``: the N2 x N2 symmetric matrix and the
    outcome labels of its rows/columns.
    """
    if not np.array_equal(pu.rows, pu.cols):
        raise ValueError("P_u must be supported on a square block (same row and column labels)")
    return np.sqrt(pu.block), pu.rows.copy()


@functools.lru_cache(maxsize=8)
def mu_spectrum(n: int, method: str = "auto") -> SpectralDecomposition:
    """Cached spectral decomposition of ``M_u`` on the weight-sqrt(n) block."""
    matrix, _ = build_mu(build_pu(n))
    decomp = symmetric_eigendecomposition(matrix, method=method)
    for arr in (decomp.eigenvalues, decomp.eigenvectors):
        arr.setflags(write=False)
    return decomp


def _kept_mass(eigenvalues: np.ndarray, K: int) -> float:
    return math.fsum(eigenvalues[: K + 1] ** 2)


def truncation_rank(spectrum: SpectralDecomposition, epsilon: float) -> int:
    """Smallest K with sum_{i <= K} lambda_i^2 >= 1 - epsilon^2 / 8."""
    if not 0.0 < epsilon < 2.0:
        raise ValueError(f"epsilon must lie in (0, 2), got {epsilon}")
    threshold = 1.0 - epsilon * epsilon / 8.0
    if threshold <= 0.0:
        return 0
    cumulative = np.cumsum(spectrum.eigenvalues**2)
    hits = np.nonzero(cumulative >= threshold)[0]
    if hits.size:
        K = int(hits[0])
        # cumsum and fsum can disagree in the last bit right at the threshold
        while K + 1 < spectrum.dim and _kept_mass(spectrum.eigenvalues, K) < threshold:
            K += 1
        while K > 0 and _kept_mass(spectrum.eigenvalues, K - 1) >= threshold:
            K -= 1
        return K
    return spectrum.dim - 1


@dataclass(frozen=True)
class Thm2Construction:
    n: int
    epsilon: float
    N1: int
    N2: int
    index: np.ndarray
    P_u: JointDistribution
    M_u: np.ndarray
    spectrum: SpectralDecomposition
    K: int
    normalization: float
    instance: ParadigmInstance
    P_r: JointDistribution

    @property
    def Q(self) -> int:
        return schmidt_qubit_count(self.K + 1)

    @property
    def support_size(self) -> int:
        return self.N1 * self.N2


def _assemble(n, epsilon, N1, N2, pu, mu, index, spectrum, K) -> Thm2Construction:
    normalization = math.sqrt(_kept_mass(spectrum.eigenvalues, K))
    truncated = low_rank_reconstruct(spectrum, K + 1)
    pr = JointDistribution(n, truncated**2 / normalization**2, index, index)
    vectors = spectrum.eigenvectors[:, : K + 1]
    instance = ParadigmInstance(
        n=n,
        coefficients=spectrum.eigenvalues[: K + 1].copy(),
        normalization=normalization,
        alice_columns=np.arange(K + 1),
        bob_columns=np.arange(K + 1),
        alice_vectors=vectors,
        bob_vectors=np.conj(vectors),
        alice_rows=index,
        bob_rows=index,
    )
    return Thm2Construction(n, float(epsilon), N1, N2, index, pu, mu, spectrum, K,
                            normalization, instance, pr)


def build_thm2(n: int, epsilon: float, method: str = "auto") -> Thm2Construction:
    """Materialize the truncated-spectrum construction for ``n`` in {4, 9, 16, ...}.

    ``U = U1`` (eigenvectors of M_u) and ``V = conj(U1)``; Schmidt term i
    pairs column i on both sides with weight ``lambda_i / N'``.
    """
    _, N1, N2 = disjointness_sizes(n)
    pu = build_pu(n)
    mu, index = build_mu(pu)
    spectrum = mu_spectrum(n, method)
    K = truncation_rank(spectrum, epsilon)
    return _assemble(n, epsilon, N1, N2, pu, mu, index, spectrum, K)


def with_truncation(con: Thm2Construction, K: int) -> Thm2Construction:
    """Same construction with a forced truncation rank (perturbation testing)."""
    if not 0 <= K < con.spectrum.dim:
        raise ValueError(f"K must lie in [0, {con.spectrum.dim})")
    return _assemble(con.n, con.epsilon, con.N1, con.N2, con.P_u, con.M_u, con.index, con.spectrum, K)


def born_instance_distribution(con: Thm2Construction) -> JointDistribution:
    return born_distribution(con.instance)


@dataclass
class Thm2Report:
    n: int
    epsilon: float
    N1: int
    N2: int
    support_size: int
    spectral_mass: float
    K: int
    Q: int
    rank: int
    normalization: float
    kept_mass: float
    tail_mass: float
    truncation_error_sq: float
    distance: float
    classical_target: float
    failures: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def verify_thm2(con: Thm2Construction, epsilon: float | None = None) -> Thm2Report:
    """Measure every construction invariant; ``failures`` lists the broken ones.

    ``classical_target`` is 2 epsilon: with ||P_u - P_r||_1 <= epsilon, any
    classical P_c within epsilon of P_r must be within 2 epsilon of P_u.
    """
    eps = con.epsilon if epsilon is None else float(epsilon)
    lam = con.spectrum.eigenvalues
    threshold = 1.0 - eps * eps / 8.0
    mass = math.fsum(lam**2)
    kept = _kept_mass(lam, con.K)
    tail = math.fsum(lam[con.K + 1:] ** 2)
    truncated = low_rank_reconstruct(con.spectrum, con.K + 1)
    trunc_err = math.fsum(((con.M_u - truncated) ** 2).ravel())
    rank = int(np.count_nonzero(np.abs(lam) > 1e-12 * max(np.abs(lam).max(), 1e-300)))
    distance = variational_distance(con.P_u, con.P_r)

    report = Thm2Report(
        n=con.n, epsilon=eps, N1=con.N1, N2=con.N2,
        support_size=int(np.count_nonzero(con.P_u.block)),
        spectral_mass=mass, K=con.K, Q=con.Q, rank=rank,
        normalization=con.normalization, kept_mass=kept, tail_mass=tail,
        truncation_error_sq=trunc_err, distance=distance,
        classical_target=2.0 * eps, failures=[],
    )
    f = report.failures
    nonzero = con.P_u.block[con.P_u.block > 0]
    if report.support_size != con.N1 * con.N2:
        f.append(f"P_u support {report.support_size} != N1*N2 = {con.N1 * con.N2}")
    if nonzero.size and np.max(np.abs(nonzero - 1.0 / (con.N1 * con.N2))) > 1e-15:
        f.append("P_u is not uniform on its support")
    if abs(mass - 1.0) > MASS_TOL:
        f.append(f"spectral mass {mass!r} != 1")
    if threshold > 0.0:
        if kept < threshold:
            f.append(f"kept spectral mass {kept!r} below 1 - eps^2/8 = {threshold!r}")
        elif con.K > 0 and _kept_mass(lam, con.K - 1) >= threshold:
            f.append(f"K = {con.K} is not minimal")
    elif con.K != 0:
        f.append("1 - eps^2/8 <= 0 forces K = 0")
    if threshold > 0.0 and not (math.sqrt(threshold) - SLACK <= con.normalization <= 1.0 + SLACK):
        f.append(f"N' = {con.normalization!r} outside [sqrt(1 - eps^2/8), 1]")
    if tail > eps * eps / 8.0 + SLACK:
        f.append(f"dropped spectral mass {tail!r} exceeds eps^2/8")
    if abs(trunc_err - tail) > MASS_TOL:
        f.append(f"||M_u - M_K||_F^2 = {trunc_err!r} disagrees with dropped mass {tail!r}")
    if distance > eps:
        f.append(f"||P_u - P_r||_1 = {distance!r} exceeds epsilon = {eps}")
    if report.Q != schmidt_qubit_count(con.K + 1):
        f.append("Q != ceil(log2(K + 1))")
    if rank and report.Q > schmidt_qubit_count(rank):
        f.append(f"Q = {report.Q} exceeds ceil(log2(rank M_u)) = {schmidt_qubit_count(rank)}")
    if np.max(np.abs(con.P_r.block - con.P_r.block.T)) > 1e-12:
        f.append("P_r is not symmetric")
    return report

