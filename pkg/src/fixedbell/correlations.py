"""Joint distributions over {0,1}^n x {0,1}^n.

A :class:`JointDistribution` stores a dense block ``block[i, j] =
Prob{X = rows[i], Y = cols[j]}``; every cell outside ``rows x cols`` is
exactly zero. A distribution whose block covers all 2^n x 2^n cells is the
ordinary dense matrix; the disjointness constructions use a much smaller block.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, NamedTuple

import numpy as np

from .bitstrings import BitString

__all__ = [
    "JointDistribution",
    "BetaCheck",
    "variational_distance",
    "is_beta_close",
    "sample",
    "empirical_distribution",
    "support",
    "MASS_TOL",
    "SUPPORT_TOL",
]

MASS_TOL = 1e-9
SUPPORT_TOL = 1e-12
MAX_DENSE_BITS = 10


class JointDistribution:
    """Probability matrix over pairs of n-bit outcomes.

    Parameters
    ----------
    n : int
        Bits per side; outcomes range over ``0 .. 2**n - 1``.
    block : array_like, shape (len(rows), len(cols))
        Probabilities of the cells ``rows x cols``.
    rows, cols : array_like of int, optional
        Strictly increasing outcome indices. Default: all ``2**n`` outcomes.
    """

    __slots__ = ("n", "rows", "cols", "block")

    def __init__(self, n: int, block, rows=None, cols=None):
        if n < 0:
            raise ValueError(f"negative n: {n}")
        size = 1 << n
        self.n = int(n)
        self.rows = np.arange(size, dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
        self.cols = np.arange(size, dtype=np.int64) if cols is None else np.asarray(cols, dtype=np.int64)
        self.block = np.array(block, dtype=float)
        self.block.setflags(write=False)
        self.rows.setflags(write=False)
        self.cols.setflags(write=False)

        if self.block.shape != (self.rows.size, self.cols.size):
            raise ValueError(f"block shape {self.block.shape} does not match index sets "
                             f"({self.rows.size}, {self.cols.size})")
        for name, idx in (("rows", self.rows), ("cols", self.cols)):
            if idx.size and (idx[0] < 0 or idx[-1] >= size):
                raise ValueError(f"{name} outside [0, {size})")
            if np.any(np.diff(idx) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
        if not np.all(np.isfinite(self.block)):
            raise ValueError("non-finite probability")
        if self.block.size and self.block.min() < 0:
            i, j = np.unravel_index(np.argmin(self.block), self.block.shape)
            raise ValueError(f"negative probability {self.block[i, j]:.3e} at cell "
                             f"({self.rows[i]}, {self.cols[j]})")
        total = self.total()
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {total!r} differs from 1 by more than {MASS_TOL}")

    # construction ------------------------------------------------------

    @classmethod
    def from_dense(cls, matrix) -> "JointDistribution":
        matrix = np.asarray(matrix, dtype=float)
        size = matrix.shape[0]
        if matrix.ndim != 2 or matrix.shape[1] != size or size & (size - 1) or size == 0:
            raise ValueError(f"dense distribution must be 2^n x 2^n, got {matrix.shape}")
        return cls(size.bit_length() - 1, matrix)

    @classmethod
    def from_cells(cls, n: int, cells: Iterable[tuple[int, int, float]]) -> "JointDistribution":
        """Build from ``(x, y, p)`` triples; unlisted cells are zero."""
        cells = list(cells)
        if not cells:
            raise ValueError("no cells given")
        xs = np.array([c[0] for c in cells], dtype=np.int64)
        ys = np.array([c[1] for c in cells], dtype=np.int64)
        ps = np.array([c[2] for c in cells], dtype=float)
        rows, ri = np.unique(xs, return_inverse=True)
        cols, ci = np.unique(ys, return_inverse=True)
        block = np.zeros((rows.size, cols.size))
        np.add.at(block, (ri, ci), ps)
        return cls(n, block, rows, cols)

    @classmethod
    def point_mass(cls, n: int, x: int, y: int) -> "JointDistribution":
        return cls(n, [[1.0]], [int(x)], [int(y)])

    # access ------------------------------------------------------------

    @property
    def size(self) -> int:
        """N = 2^n outcomes per side."""
        return 1 << self.n

    @property
    def is_full(self) -> bool:
        return self.rows.size == self.size and self.cols.size == self.size

    def total(self) -> float:
        return math.fsum(self.block.ravel())

    def dense(self) -> np.ndarray:
        """Full N x N matrix (refused beyond n = 10 to avoid huge allocations)."""
        if self.n > MAX_DENSE_BITS:
            raise ValueError(f"n = {self.n} is too large for a dense matrix; use the block form")
        out = np.zeros((self.size, self.size))
        out[np.ix_(self.rows, self.cols)] = self.block
        return out

    def prob(self, x, y) -> float:
        x, y = int(x), int(y)
        i = np.searchsorted(self.rows, x)
        j = np.searchsorted(self.cols, y)
        if i < self.rows.size and self.rows[i] == x and j < self.cols.size and self.cols[j] == y:
            return float(self.block[i, j])
        return 0.0

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        """Length-N marginal distributions of X and Y."""
        px = np.zeros(self.size)
        py = np.zeros(self.size)
        px[self.rows] = self.block.sum(axis=1)
        py[self.cols] = self.block.sum(axis=0)
        return px, py

    def restrict(self, rows, cols) -> np.ndarray:
        """Probabilities on an arbitrary ``rows x cols`` grid (zeros off-block)."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        out = np.zeros((rows.size, cols.size))
        ri = np.searchsorted(self.rows, rows).clip(max=max(self.rows.size - 1, 0))
        ci = np.searchsorted(self.cols, cols).clip(max=max(self.cols.size - 1, 0))
        rmask = self.rows[ri] == rows
        cmask = self.cols[ci] == cols
        out[np.ix_(rmask, cmask)] = self.block[np.ix_(ri[rmask], ci[cmask])]
        return out

    def cells(self, tol: float = 0.0) -> list[tuple[int, int, float]]:
        """Nonzero (above ``tol``) cells in row-major order."""
        i, j = np.nonzero(self.block > tol)
        return [(int(self.rows[a]), int(self.cols[b]), float(self.block[a, b])) for a, b in zip(i, j)]

    def transpose(self) -> "JointDistribution":
        return JointDistribution(self.n, self.block.T, self.cols, self.rows)

    # serialization -------------------------------------------------------

    def to_dict(self, fmt: str | None = None) -> dict:
        """JSON-ready dict ``{n, format, cells}``.

        ``dense`` cells are the full N x N nested list; ``sparse`` cells are
        ``[x, y, p]`` triples for every nonzero cell, row-major.
        """
        if fmt is None:
            fmt = "dense" if self.is_full and self.n <= MAX_DENSE_BITS else "sparse"
        if fmt == "dense":
            cells = self.dense().tolist()
        elif fmt == "sparse":
            cells = [[x, y, p] for x, y, p in self.cells()]
        else:
            raise ValueError(f"unknown format {fmt!r}")
        return {"n": self.n, "format": fmt, "cells": cells}

    @classmethod
    def from_dict(cls, data: dict) -> "JointDistribution":
        n = int(data["n"])
        fmt = data.get("format", "dense")
        if fmt == "dense":
            dist = cls.from_dense(data["cells"])
            if dist.n != n:
                raise ValueError(f"dense cells are {dist.size}x{dist.size} but n = {n}")
            return dist
        if fmt == "sparse":
            return cls.from_cells(n, (tuple(c) for c in data["cells"]))
        raise ValueError(f"unknown format {fmt!r}")

    def to_json(self, fmt: str | None = None) -> str:
        return json.dumps(self.to_dict(fmt))

    @classmethod
    def from_json(cls, text: str) -> "JointDistribution":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        return (f"JointDistribution(n={self.n}, block={self.rows.size}x{self.cols.size}, "
                f"nonzero={int(np.count_nonzero(self.block))})")


def _union_grid(d1: JointDistribution, d2: JointDistribution):
    if d1.n != d2.n:
        raise ValueError(f"size mismatch: n = {d1.n} vs n = {d2.n}")
    if np.array_equal(d1.rows, d2.rows) and np.array_equal(d1.cols, d2.cols):
        return d1.block, d2.block, d1.rows, d1.cols
    rows = np.union1d(d1.rows, d2.rows)
    cols = np.union1d(d1.cols, d2.cols)
    return d1.restrict(rows, cols), d2.restrict(rows, cols), rows, cols


def variational_distance(d1: JointDistribution, d2: JointDistribution) -> float:
    """L1 distance ``sum_s |D1(s) - D2(s)|``, in [0, 2]."""
    a, b, _, _ = _union_grid(d1, d2)
    return math.fsum(np.abs(a - b).ravel())


class BetaCheck(NamedTuple):
    close: bool
    worst_cell: tuple[int, int] | None
    worst_violation: float


def is_beta_close(pc: JointDistribution, pr: JointDistribution, beta: float) -> BetaCheck:
    """Multiplicative closeness ``(1-b) Pr <= Pc <= (1+b) Pr`` on every cell.

    Returns the verdict together with the cell of largest violation (``None``
    when there is none).
    """
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    c, r, rows, cols = _union_grid(pc, pr)
    violation = np.maximum((1.0 - beta) * r - c, c - (1.0 + beta) * r)
    violation = np.maximum(violation, 0.0)
    if not violation.size or violation.max() == 0.0:
        return BetaCheck(True, None, 0.0)
    i, j = np.unravel_index(np.argmax(violation), violation.shape)
    return BetaCheck(False, (int(rows[i]), int(cols[j])), float(violation[i, j]))


def support(d: JointDistribution, tol: float = SUPPORT_TOL) -> set[tuple[int, int]]:
    """Cells with probability strictly above ``tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    i, j = np.nonzero(d.block > tol)
    return set(zip(d.rows[i].tolist(), d.cols[j].tolist()))


def sample(d: JointDistribution, seed: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``count`` i.i.d. outcome pairs by CDF inversion.

    Cells are ordered row-major (by x, then y); uniforms come from a PCG64
    generator seeded with ``seed``, so the output is a pure function of
    ``(d, seed, count)``.

    Returns
    -------
    xs, ys : ndarray of int64
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    rng = np.random.Generator(np.random.PCG64(seed))
    flat = d.block.ravel()
    cdf = np.cumsum(flat)
    u = rng.random(count) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right").clip(max=flat.size - 1)
    # rounding at the top end may land on a trailing zero cell
    while True:
        bad = flat[idx] == 0.0
        if not bad.any():
            break
        idx[bad] -= 1
    i, j = np.divmod(idx, d.cols.size)
    return d.rows[i].copy(), d.cols[j].copy()


def empirical_distribution(samples, n: int) -> JointDistribution:
    """Normalized frequency matrix of observed pairs.

    ``samples`` is either an ``(xs, ys)`` pair of integer arrays, as returned
    by :func:`sample`, or an iterable of ``(x, y)`` pairs (ints or BitStrings).
    """
    if isinstance(samples, tuple) and len(samples) == 2 and isinstance(samples[0], np.ndarray):
        xs, ys = samples
    else:
        pairs = [(int(x), int(y)) for x, y in samples]
        xs = np.array([p[0] for p in pairs], dtype=np.int64)
        ys = np.array([p[1] for p in pairs], dtype=np.int64)
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    if xs.size == 0:
        raise ValueError("no samples")
    if xs.shape != ys.shape:
        raise ValueError("xs and ys differ in length")
    rows, ri = np.unique(xs, return_inverse=True)
    cols, ci = np.unique(ys, return_inverse=True)
    counts = np.zeros((rows.size, cols.size))
    np.add.at(counts, (ri, ci), 1.0)
    return JointDistribution(n, counts / xs.size, rows, cols)


def as_bitstring_pairs(xs: np.ndarray, ys: np.ndarray, n: int) -> list[tuple[BitString, BitString]]:
    return [(BitString(n, int(x)), BitString(n, int(y))) for x, y in zip(xs, ys)]
