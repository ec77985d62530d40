"""Classical side: mixtures of product distributions.

A local hidden variable model with shared variable Z over a set S produces
``P_c = sum_z w_z (p_z outer q_z)``. Private coins are folded into the
marginals: with unlimited private randomness each party can realise any
conditional distribution given z, so an arbitrary product per component is
fully general. ``|S|`` is the component count and ``log2 |S|`` the number of
shared random bits.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .correlations import SUPPORT_TOL, JointDistribution, variational_distance

__all__ = [
    "LhvModel",
    "FitResult",
    "RectangleCover",
    "evaluate",
    "fit",
    "maximal_rectangles",
    "min_rectangle_cover",
    "exact_min_components",
    "randomness_curve",
    "CurveRow",
    "MULTIPLICATIVE_MAX_N",
    "ADDITIVE_MAX_CELLS",
]

MODEL_TOL = 1e-9
EXACT_FIT_TOL = 1e-12
DEFAULT_RESTARTS = 32
DEFAULT_SWEEPS = 500
DEFAULT_IMPROVEMENT_TOL = 1e-10

MULTIPLICATIVE_MAX_N = 8
ADDITIVE_MAX_CELLS = 16
ADDITIVE_GRID = 16


@dataclass(frozen=True)
class LhvModel:
    """``sum_z weights[z] * outer(alice[z], bob[z])`` on the ``rows x cols`` block.

    ``alice[z]`` is a probability vector over ``rows`` (default: all 2^n
    outcomes), likewise ``bob[z]`` over ``cols``.
    """

    n: int
    weights: np.ndarray
    alice: np.ndarray
    bob: np.ndarray
    rows: np.ndarray | None = None
    cols: np.ndarray | None = None

    def __post_init__(self):
        size = 1 << self.n
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        a = np.atleast_2d(np.asarray(self.alice, dtype=float))
        b = np.atleast_2d(np.asarray(self.bob, dtype=float))
        rows = np.arange(size) if self.rows is None else np.asarray(self.rows, dtype=np.int64)
        cols = np.arange(size) if self.cols is None else np.asarray(self.cols, dtype=np.int64)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "alice", a)
        object.__setattr__(self, "bob", b)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        if a.shape != (w.size, rows.size) or b.shape != (w.size, cols.size):
            raise ValueError(f"marginal shapes {a.shape}, {b.shape} do not match {w.size} "
                             f"components on a {rows.size}x{cols.size} block")
        if w.size == 0:
            raise ValueError("a model needs at least one component")
        if w.min() < 0 or abs(math.fsum(w) - 1.0) > MODEL_TOL:
            raise ValueError(f"weights must be nonnegative and sum to 1 (sum = {math.fsum(w)!r})")
        for name, m in (("alice", a), ("bob", b)):
            if m.min() < 0:
                raise ValueError(f"negative entry in {name} marginal")
            sums = m.sum(axis=1)
            if np.max(np.abs(sums - 1.0)) > MODEL_TOL:
                z = int(np.argmax(np.abs(sums - 1.0)))
                raise ValueError(f"{name} marginal of component {z} sums to {sums[z]!r}")

    @property
    def components(self) -> int:
        """|S|, the support size of the shared variable."""
        return int(self.weights.size)

    @property
    def shared_bits(self) -> float:
        return math.log2(self.components)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "weights": self.weights.tolist(),
            "rows": self.rows.tolist(),
            "cols": self.cols.tolist(),
            "alice": self.alice.tolist(),
            "bob": self.bob.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LhvModel":
        return cls(int(data["n"]), data["weights"], data["alice"], data["bob"],
                   data.get("rows"), data.get("cols"))


def evaluate(model: LhvModel) -> JointDistribution:
    """Mixture distribution ``P_c``."""
    block = (model.alice.T * model.weights) @ model.bob
    block = np.maximum(block, 0.0)
    return JointDistribution(model.n, block, model.rows, model.cols)


# fitting ---------------------------------------------------------------


@dataclass
class FitResult:
    model: LhvModel
    distance: float
    restart: int
    objective_history: list[float] = field(default_factory=list)
    distances: list[float] = field(default_factory=list)


def _objective(T, W, H) -> float:
    R = T - W @ H
    return float(np.sum(R * R))


def _hals(T, W, H, max_sweeps, tol):
    """Hierarchical ALS on ||T - W H||_F^2 with W, H >= 0.

    Each column of W (row of H) is replaced by its exact constrained
    minimiser given the others, so the objective never increases.
    """
    history = [_objective(T, W, H)]
    k = W.shape[1]
    for _ in range(max_sweeps):
        HHt = H @ H.T
        THt = T @ H.T
        for z in range(k):
            if HHt[z, z] <= 0:
                continue
            W[:, z] = np.maximum(0.0, W[:, z] + (THt[:, z] - W @ HHt[:, z]) / HHt[z, z])
        WtW = W.T @ W
        WtT = W.T @ T
        for z in range(k):
            if WtW[z, z] <= 0:
                continue
            H[z, :] = np.maximum(0.0, H[z, :] + (WtT[z, :] - WtW[z, :] @ H) / WtW[z, z])
        history.append(_objective(T, W, H))
        if history[-2] - history[-1] < tol:
            break
    return W, H, history


def _to_model(n, W, H, rows, cols, T) -> LhvModel:
    wsum = W.sum(axis=0)
    hsum = H.sum(axis=1)
    mass = wsum * hsum
    live = mass > 0
    if not live.any():
        # everything collapsed: fall back to the product of the target marginals
        p = T.sum(axis=1)
        q = T.sum(axis=0)
        return LhvModel(n, [1.0], [p / p.sum()], [q / q.sum()], rows, cols)
    weights = mass[live] / mass[live].sum()
    alice = (W[:, live] / wsum[live]).T
    bob = H[live, :] / hsum[live][:, None]
    alice /= alice.sum(axis=1, keepdims=True)
    bob /= bob.sum(axis=1, keepdims=True)
    return LhvModel(n, weights, alice, bob, rows, cols)


def _column_init(T, k):
    """Exact when k covers every nonzero column: component z is column z."""
    r, c = T.shape
    W = np.zeros((r, k))
    H = np.zeros((k, c))
    order = np.argsort(-T.sum(axis=0), kind="stable")
    order = order[T[:, order].sum(axis=0) > 0][:k]
    for z, j in enumerate(order):
        W[:, z] = T[:, j]
        H[z, j] = 1.0
    return W, H


def _random_init(T, k, rng):
    r, c = T.shape
    W = rng.random((r, k))
    H = rng.random((k, c))
    scale = math.sqrt(T.sum() / (W.sum(axis=0) @ H.sum(axis=1)))
    return W * scale, H * scale


def _model_init(model: LhvModel, target: JointDistribution, k: int):
    """Embed an existing model into the target block as a starting point."""
    a = np.zeros((model.components, target.rows.size))
    b = np.zeros((model.components, target.cols.size))
    ri = np.searchsorted(target.rows, model.rows)
    ci = np.searchsorted(target.cols, model.cols)
    rin = (ri < target.rows.size) & (target.rows[ri.clip(max=target.rows.size - 1)] == model.rows)
    cin = (ci < target.cols.size) & (target.cols[ci.clip(max=target.cols.size - 1)] == model.cols)
    a[:, ri[rin]] = model.alice[:, rin]
    b[:, ci[cin]] = model.bob[:, cin]
    W = np.zeros((target.rows.size, k))
    H = np.zeros((k, target.cols.size))
    m = min(k, model.components)
    W[:, :m] = (a[:m] * model.weights[:m, None]).T
    H[:m] = b[:m]
    return W, H


def _run_restart(target, T, k, index, seed_seq, max_sweeps, tol, init):
    if index == 0 and init is not None:
        W, H = _model_init(init, target, k)
    elif index == 0:
        W, H = _column_init(T, k)
    else:
        W, H = _random_init(T, k, np.random.default_rng(seed_seq))
    W, H, history = _hals(T, W, H, max_sweeps, tol)
    model = _to_model(target.n, W, H, target.rows, target.cols, T)
    return model, variational_distance(evaluate(model), target), history


def fit(
    target: JointDistribution,
    k: int,
    seed: int,
    restarts: int = DEFAULT_RESTARTS,
    max_sweeps: int = DEFAULT_SWEEPS,
    tol: float = DEFAULT_IMPROVEMENT_TOL,
    init: LhvModel | None = None,
    workers: int = 1,
) -> FitResult:
    """Best-of-restarts fit of a ``k``-component mixture to ``target``.

    Inner updates minimise squared error (HALS); restarts are ranked by the
    L1 distance of the normalised model. Restart 0 starts from ``init`` if
    given, else from the target's heaviest columns (exact whenever ``k`` is
    at least the number of nonzero columns); restart ``i >= 1`` is seeded
    with ``SeedSequence(seed).spawn(restarts)[i]``. The winner is the first
    restart within 1e-12 of the target, otherwise the smallest distance with
    ties going to the lower index, so the result does not depend on
    ``workers``.

    Components live on the target's block; mass placed elsewhere can only
    increase the distance.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    T = np.array(target.block, dtype=float)
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    args = [(target, T, k, i, seeds[i], max_sweeps, tol, init) for i in range(restarts)]

    results = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda a: _run_restart(*a), args))
    else:
        for a in args:
            results.append(_run_restart(*a))
            if results[-1][1] <= EXACT_FIT_TOL:
                break

    distances = [r[1] for r in results]
    exact = [i for i, d in enumerate(distances) if d <= EXACT_FIT_TOL]
    best = exact[0] if exact else int(np.argmin(distances))
    model, distance, history = results[best]
    return FitResult(model, distance, best, history, distances[: best + 1] if exact else distances)


# certificates ------------------------------------------------------------


@dataclass(frozen=True)
class RectangleCover:
    """Rectangles ``A x B`` (row labels, column labels) covering a support."""

    rectangles: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __len__(self) -> int:
        return len(self.rectangles)

    def cells(self) -> set[tuple[int, int]]:
        return {(x, y) for A, B in self.rectangles for x in A for y in B}

    def is_cross_free(self, allowed: set[tuple[int, int]]) -> bool:
        """Every rectangle lies inside ``allowed`` (avoids the forbidden cells)."""
        return all((x, y) in allowed for A, B in self.rectangles for x in A for y in B)

    def to_dict(self) -> dict:
        return {"rectangles": [[list(A), list(B)] for A, B in self.rectangles]}


def _support_grid(target: JointDistribution, tol: float):
    mask = target.block > tol
    rows = target.rows[mask.any(axis=1)]
    cols = target.cols[mask.any(axis=0)]
    mask = mask[np.ix_(mask.any(axis=1), mask.any(axis=0))]
    return mask, rows, cols


def maximal_rectangles(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusion-maximal all-True rectangles of a boolean matrix as (rowbits, colbits)."""
    r, c = mask.shape
    row_sets = [sum(1 << j for j in range(c) if mask[i, j]) for i in range(r)]
    found = set()
    for A in range(1, 1 << r):
        B = (1 << c) - 1
        for i in range(r):
            if A >> i & 1:
                B &= row_sets[i]
        if not B:
            continue
        closure = sum(1 << i for i in range(r) if row_sets[i] & B == B)
        if closure == A:
            found.add((A, B))
    return sorted(found)


def _bits(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def min_rectangle_cover(target: JointDistribution, tol: float = SUPPORT_TOL) -> RectangleCover:
    """Fewest rectangles inside ``support(target)`` whose union is the support.

    A beta-close classical model (beta < 1) must reproduce the support exactly;
    each mixture component's support is a rectangle inside it, so this count
    lower-bounds |S|. Exhaustive (iterative deepening with memoised failures),
    limited to N <= 8.
    """
    if target.size > MULTIPLICATIVE_MAX_N:
        raise ValueError(f"multiplicative certificate is limited to N <= {MULTIPLICATIVE_MAX_N} "
                         f"outcomes per side; got N = {target.size}")
    mask, rows, cols = _support_grid(target, tol)
    r, c = mask.shape
    cell_id = {}
    for i in range(r):
        for j in range(c):
            if mask[i, j]:
                cell_id[(i, j)] = len(cell_id)
    full = (1 << len(cell_id)) - 1

    rects = []
    for A, B in maximal_rectangles(mask):
        cm = 0
        for i in _bits(A):
            for j in _bits(B):
                cm |= 1 << cell_id[(i, j)]
        rects.append((cm, A, B))
    covering = {cid: [rc for rc in rects if rc[0] >> cid & 1] for cid in range(len(cell_id))}
    failed: dict[int, int] = {}

    def search(uncovered: int, depth: int):
        if not uncovered:
            return []
        if depth == 0 or failed.get(uncovered, -1) >= depth:
            return None
        best_gain = max((rc[0] & uncovered).bit_count() for rc in rects)
        if best_gain * depth < uncovered.bit_count():
            failed[uncovered] = depth
            return None
        cells = _bits(uncovered)
        pivot = min(cells, key=lambda cid: len(covering[cid]))
        for rc in sorted(covering[pivot], key=lambda rc: -(rc[0] & uncovered).bit_count()):
            rest = search(uncovered & ~rc[0], depth - 1)
            if rest is not None:
                return [rc] + rest
        failed[uncovered] = max(failed.get(uncovered, -1), depth)
        return None

    for depth in range(1, len(cell_id) + 1):
        found = search(full, depth)
        if found is not None:
            return RectangleCover(tuple(
                (tuple(int(rows[i]) for i in _bits(A)), tuple(int(cols[j]) for j in _bits(B)))
                for _, A, B in found
            ))
    raise AssertionError("unreachable: single cells always cover")  # pragma: no cover


def _simplex_grid(dim: int, g: int) -> np.ndarray:
    """All probability vectors of length ``dim`` with entries in (1/g) Z."""
    pts = []
    for bars in itertools.combinations(range(g + dim - 1), dim - 1):
        prev = -1
        v = []
        for bar in bars:
            v.append(bar - prev - 1)
            prev = bar
        v.append(g + dim - 2 - prev)
        pts.append(v)
    return np.array(pts, dtype=float) / g


def _additive_search(P: np.ndarray, k: int, tolerance: float, grid: int, max_nodes: int) -> bool:
    """Does some k-mixture with weights and marginals on the 1/grid lattice come within tolerance?

    Depth-first over components in canonical (non-increasing index) order.
    Pruning: the final mixture and P both have unit mass, so its L1 error is
    twice its total overshoot, and overshoot can only grow as components
    are added.
    """
    N = P.shape[0]
    simplex = _simplex_grid(N, grid)
    prods = np.einsum("ai,bj->abij", simplex, simplex).reshape(-1, N * N)
    target = P.ravel()
    budget = [max_nodes]

    def dfs(acc, remaining_weight, comps_left, start):
        budget[0] -= 1
        if budget[0] < 0:
            raise RuntimeError(f"additive search exceeded {max_nodes} nodes; "
                               "reduce the grid or the tolerance")
        if comps_left == 1:
            w = remaining_weight / grid
            cand = acc + w * prods[start:]
            err = np.abs(cand - target).sum(axis=1)
            return bool(err.size and err.min() <= tolerance + 1e-12)
        for units in range(remaining_weight - (comps_left - 1), 0, -1):
            w = units / grid
            cand = acc + w * prods[start:]
            over = np.maximum(cand - target, 0.0).sum(axis=1)
            for idx in np.nonzero(2.0 * over <= tolerance + 1e-12)[0]:
                if dfs(cand[idx], remaining_weight - units, comps_left - 1, start + idx):
                    return True
        return False

    return dfs(np.zeros(N * N), grid, k, 0)


def exact_min_components(
    target: JointDistribution,
    mode: str = "multiplicative",
    tolerance: float = 0.0,
    grid: int = ADDITIVE_GRID,
    max_nodes: int = 200_000,
) -> int:
    """Smallest number of mixture components able to match ``target``.

    ``multiplicative``: exact minimum rectangle cover of the support
    (N <= 8). ``additive``: smallest k for which a mixture with weights and
    marginals on the 1/``grid`` lattice lies within L1 ``tolerance``; only
    for N*N <= 16 cells. The lattice restriction makes the additive value a
    heuristic certificate, not an exact bound over the continuum.
    """
    if mode == "multiplicative":
        return len(min_rectangle_cover(target))
    if mode != "additive":
        raise ValueError(f"unknown mode {mode!r}")
    if target.size * target.size > ADDITIVE_MAX_CELLS:
        raise ValueError(f"additive certificate is limited to N*N <= {ADDITIVE_MAX_CELLS} cells; "
                         f"got N = {target.size}")
    if tolerance < 0:
        raise ValueError("tolerance must be nonnegative")
    P = target.dense()
    for k in range(1, grid + 1):
        if _additive_search(P, k, tolerance, grid, max_nodes):
            return k
    raise ValueError(f"no mixture on the 1/{grid} lattice is within {tolerance} of the target")


# budget curve -------------------------------------------------------------


@dataclass(frozen=True)
class CurveRow:
    n: int
    k: int
    distance: float
    passed: bool

    def as_csv_row(self) -> list:
        return [self.n, self.k, repr(self.distance), int(self.passed)]


def randomness_curve(
    n_values: Sequence[int],
    epsilon: float,
    budgets: Sequence[int],
    seed: int,
    restarts: int = 8,
    max_sweeps: int = DEFAULT_SWEEPS,
) -> list[CurveRow]:
    """Best L1 distance to ``P_u`` reachable with at most k components, per (n, k).

    Budgets are processed in increasing order and each fit is warm-started
    from the best smaller model (extra components start empty), and the
    reported distance is the running minimum, since a model with fewer
    components is also a valid k-component model. ``passed`` means the
    distance is at most 2 epsilon. Restart seeds for (n, k) are derived from
    ``SeedSequence([seed, n, k])``.
    """
    from .thm2 import build_pu

    rows = []
    for n in n_values:
        pu = build_pu(n)
        best_model = None
        best = math.inf
        for k in sorted(set(int(k) for k in budgets)):
            if k < 1:
                raise ValueError("budgets must be positive")
            sub_seed = int(np.random.SeedSequence([seed, n, k]).generate_state(1)[0])
            result = fit(pu, k, sub_seed, restarts=restarts, max_sweeps=max_sweeps)
            if best_model is not None:
                warm = fit(pu, k, sub_seed, restarts=1, max_sweeps=max_sweeps, init=best_model)
                if warm.distance < result.distance:
                    result = warm
            if result.distance < best:
                best = result.distance
                best_model = result.model
            rows.append(CurveRow(n, k, best, best <= 2.0 * epsilon))
    return rows
