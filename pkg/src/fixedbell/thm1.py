"""Bell-state construction with a zero-diagonal outcome matrix.

A Bell pair (one qubit per side, padded with |0> ancillas) and unitaries
whose active columns are

    u0(x) = a + i b c_x,    u1(x) = a - i b c_x,
    v0 = conj(u0),          v1 = -conj(u1),

with a = 1/sqrt(2N), b = sqrt(N) and distinct, zero-sum reals c_x scaled so
that sum_{x<y} (c_y - c_x)^2 = 1/2. Then P[x, y] = (c_y - c_x)^2: zero on the
diagonal, positive everywhere else.

Why: u0(x) conj(u0(y)) - u1(x) conj(u1(y)) = 2iab (c_x - c_y) and 2 a^2 b^2 = 1.
Unit norm needs N a^2 + b^2 sum c^2 = 1 and <u0, u1> = N a^2 - b^2 sum c^2
- 2iab sum c = 0, both of which hold once N sum c^2 = 1/2 and sum c = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correlations import JointDistribution
from .numerics import complete_to_unitary, unitarity_residual
from .paradigm import ParadigmInstance, born_distribution

__all__ = ["Thm1Construction", "Thm1Report", "make_c_values", "build_thm1", "verify_thm1", "MAX_N"]

MAX_N = 10
CLOSED_FORM_TOL = 1e-10
UNITARY_TOL = 1e-10


def make_c_values(n: int, max_n: int = MAX_N) -> np.ndarray:
    """Centred arithmetic progression rescaled so the pairwise gaps square-sum to 1/2."""
    if not 1 <= n <= max_n:
        raise ValueError(f"n must lie in [1, {max_n}], got {n}")
    N = 1 << n
    c = np.arange(N, dtype=float) - (N - 1) / 2.0
    return c / math.sqrt(2.0 * N * float(np.sum(c * c)))


@dataclass(frozen=True)
class Thm1Construction:
    n: int
    c_values: np.ndarray
    a: float
    b: float
    u0: np.ndarray
    u1: np.ndarray
    v0: np.ndarray
    v1: np.ndarray
    instance: ParadigmInstance
    P_r: JointDistribution
    U: np.ndarray | None = field(default=None, repr=False)
    V: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return 1 << self.n

    def closed_form(self) -> np.ndarray:
        c = self.c_values
        return (c[None, :] - c[:, None]) ** 2


def _instance(n, u0, u1, v0, v1, U=None, V=None) -> ParadigmInstance:
    half = 1.0 / math.sqrt(2.0)
    return ParadigmInstance(
        n=n,
        coefficients=np.array([half, half]),
        normalization=1.0,
        alice_columns=[0, 1],
        bob_columns=[0, (1 << n) // 2],
        alice_vectors=np.column_stack([u0, u1]),
        bob_vectors=np.column_stack([v0, v1]),
        U=U,
        V=V,
    )


def build_thm1(n: int, max_n: int = MAX_N, unitaries: bool = True) -> Thm1Construction:
    """Materialize the construction for ``n`` qubits per side.

    The Bell pair sits on Alice's last qubit and Bob's first, so Alice's
    active columns are 0 and 1 while Bob's are 0 and 2^(n-1).
    ``unitaries=False`` skips completing U and V (only their active columns
    matter for the outcome distribution).
    """
    c = make_c_values(n, max_n)
    N = 1 << n
    a = 1.0 / math.sqrt(2.0 * N)
    b = math.sqrt(N)
    im = b * c
    u0 = a + 1j * im
    u1 = a - 1j * im
    v0 = np.conj(u0)
    v1 = -np.conj(u1)

    U = V = None
    if unitaries:
        U = complete_to_unitary([(0, u0), (1, u1)], N)
        V = complete_to_unitary([(0, v0), (N // 2, v1)], N)
    inst = _instance(n, u0, u1, v0, v1, U, V)
    return Thm1Construction(n, c, a, b, u0, u1, v0, v1, inst, born_distribution(inst), U, V)


def from_vectors(n: int, c_values, u0, u1, v0, v1) -> Thm1Construction:
    """Rebuild a construction from stored vectors (used when verifying files)."""
    N = 1 << n
    c = np.asarray(c_values, dtype=float)
    u0, u1, v0, v1 = (np.asarray(v, dtype=complex) for v in (u0, u1, v0, v1))
    try:
        U = complete_to_unitary([(0, u0), (1, u1)], N)
        V = complete_to_unitary([(0, v0), (N // 2, v1)], N)
    except ValueError:
        U = V = None
    inst = _instance(n, u0, u1, v0, v1, U, V)
    return Thm1Construction(n, c, 1.0 / math.sqrt(2.0 * N), math.sqrt(N), u0, u1, v0, v1,
                            inst, born_distribution(inst), U, V)


@dataclass
class Thm1Report:
    n: int
    closed_form_error: float
    unitarity_U: float | None
    unitarity_V: float | None
    diagonal_max: float
    offdiagonal_min: float
    total_mass: float
    c_sum: float
    pair_gap_sum: float
    failures: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def verify_thm1(con: Thm1Construction) -> Thm1Report:
    P = con.P_r.dense()
    closed = con.closed_form()
    N = con.size
    off = ~np.eye(N, dtype=bool)
    c = con.c_values
    gaps = (c[None, :] - c[:, None]) ** 2
    pair_gap_sum = math.fsum(gaps[np.triu_indices(N, 1)])

    report = Thm1Report(
        n=con.n,
        closed_form_error=float(np.max(np.abs(P - closed))),
        unitarity_U=None if con.U is None else unitarity_residual(con.U),
        unitarity_V=None if con.V is None else unitarity_residual(con.V),
        diagonal_max=float(np.max(np.diag(P))),
        offdiagonal_min=float(P[off].min()) if N > 1 else math.inf,
        total_mass=con.P_r.total(),
        c_sum=math.fsum(c),
        pair_gap_sum=pair_gap_sum,
        failures=[],
    )
    f = report.failures
    if report.closed_form_error > CLOSED_FORM_TOL:
        f.append(f"P_r deviates from (c_y - c_x)^2 by {report.closed_form_error:.3e}")
    if con.U is None or con.V is None:
        f.append("U or V could not be completed to a unitary")
    else:
        if report.unitarity_U > UNITARY_TOL:
            f.append(f"U unitarity residual {report.unitarity_U:.3e}")
        if report.unitarity_V > UNITARY_TOL:
            f.append(f"V unitarity residual {report.unitarity_V:.3e}")
        if not (np.array_equal(con.U[:, 0], con.u0) and np.array_equal(con.U[:, 1], con.u1)
                and np.array_equal(con.V[:, 0], con.v0) and np.array_equal(con.V[:, N // 2], con.v1)):
            f.append("active columns of U, V differ from u0, u1, v0, v1")
    if report.diagonal_max != 0.0:
        f.append(f"diagonal not exactly zero (max {report.diagonal_max:.3e})")
    if not report.offdiagonal_min > 0.0:
        f.append("an off-diagonal entry is zero")
    if abs(report.total_mass - 1.0) > 1e-9:
        f.append(f"total mass {report.total_mass!r}")
    if len(np.unique(c)) != c.size:
        f.append("c values are not distinct")
    if abs(report.c_sum) > CLOSED_FORM_TOL:
        f.append(f"c values sum to {report.c_sum:.3e}, not 0")
    if abs(pair_gap_sum - 0.5) > CLOSED_FORM_TOL:
        f.append(f"pairwise gap sum {pair_gap_sum!r}, not 1/2")
    return report
