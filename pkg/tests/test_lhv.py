import math

import numpy as np
import pytest

from conftest import brute_force_cover_number
from fixedbell.correlations import JointDistribution, variational_distance
from fixedbell.lhv import (
    LhvModel,
    evaluate,
    exact_min_components,
    fit,
    maximal_rectangles,
    min_rectangle_cover,
    randomness_curve,
)
from fixedbell.thm1 import build_thm1
from fixedbell.thm2 import build_pu

# Frozen regression anchor: smallest passing budget per n at epsilon = 0.5,
# seed 0, 4 restarts, budgets CURVE_BUDGETS.
CURVE_BUDGETS = [1, 2, 3, 4, 5, 6, 8, 12, 16, 24, 32, 48, 64, 84]
MIN_PASSING_K = {4: 3, 9: 12}


def test_evaluate_examples():
    m = LhvModel(2, [1.0], [[0, 0, 1, 0]], [[0, 1, 0, 0]])
    assert evaluate(m).cells() == [(2, 1, 1.0)]
    swap = LhvModel(1, [0.5, 0.5], [[1, 0], [0, 1]], [[0, 1], [1, 0]])
    np.testing.assert_array_equal(evaluate(swap).dense(), [[0, 0.5], [0.5, 0]])
    np.testing.assert_allclose(evaluate(swap).dense(), build_thm1(1).P_r.dense(), atol=1e-15)
    uni = LhvModel(2, [0.2, 0.8], np.full((2, 4), 0.25), np.full((2, 4), 0.25))
    np.testing.assert_allclose(evaluate(uni).dense(), np.full((4, 4), 1 / 16))


def test_model_validation():
    with pytest.raises(ValueError, match="weights"):
        LhvModel(1, [0.7, 0.7], [[1, 0], [0, 1]], [[1, 0], [0, 1]])
    with pytest.raises(ValueError, match="marginal"):
        LhvModel(1, [1.0], [[0.5, 0.4]], [[1, 0]])
    m = LhvModel(1, [0.25, 0.75], [[1, 0], [0.5, 0.5]], [[0, 1], [1, 0]])
    assert m.components == 2 and m.shared_bits == 1.0
    back = LhvModel.from_dict(m.to_dict())
    np.testing.assert_array_equal(evaluate(back).dense(), evaluate(m).dense())


@pytest.mark.parametrize("n", [4, 9])
def test_fit_exact_at_support_size(n):
    pu = build_pu(n)
    k = int(np.count_nonzero(pu.block))
    res = fit(pu, k, seed=1, restarts=2)
    assert res.distance <= 1e-6


def test_fit_rank_one_bracket(k1_oracle):
    res = fit(build_pu(4), 1, seed=0, restarts=16)
    assert res.distance > 0
    assert res.distance >= k1_oracle - 1e-3
    assert k1_oracle == pytest.approx(4 / 3 - 2 * (1 - 2 / math.sqrt(6)) ** 2, abs=1e-9)


def test_fit_monotone_and_not_worse_than_init():
    target = build_thm1(2).P_r
    init = LhvModel(2, np.full(3, 1 / 3), np.full((3, 4), 0.25), np.full((3, 4), 0.25))
    res = fit(target, 3, seed=5, restarts=1, init=init)
    h = res.objective_history
    assert all(b <= a + 1e-15 for a, b in zip(h, h[1:]))
    assert res.distance <= variational_distance(evaluate(init), target) + 1e-12


def test_fit_is_deterministic():
    target = build_thm1(3).P_r
    a = fit(target, 4, seed=3, restarts=4)
    b = fit(target, 4, seed=3, restarts=4)
    assert a.distance == b.distance and a.restart == b.restart
    np.testing.assert_array_equal(a.model.alice, b.model.alice)
    c = fit(target, 4, seed=3, restarts=4, workers=2)
    assert c.distance == a.distance


def test_fit_rejects_bad_k():
    with pytest.raises(ValueError):
        fit(build_pu(4), 0, seed=0)


def test_maximal_rectangles_are_maximal():
    mask = ~np.eye(3, dtype=bool)
    for r, c in maximal_rectangles(mask):
        rows = [i for i in range(3) if r >> i & 1]
        cols = [j for j in range(3) if c >> j & 1]
        assert all(mask[i, j] for i in rows for j in cols)


@pytest.mark.parametrize("n,expected", [(1, 2), (2, 4), (3, 5)])
def test_multiplicative_certificate_thm1(n, expected):
    target = build_thm1(n, unitaries=False).P_r
    cover = min_rectangle_cover(target)
    assert len(cover) == expected
    allowed = {(x, y) for x, y, _ in target.cells()}
    assert cover.cells() == allowed and cover.is_cross_free(allowed)
    assert len(cover) >= math.ceil(math.log2(target.size))


@pytest.mark.parametrize("n", [1, 2])
def test_certificate_matches_brute_force(n):
    target = build_thm1(n, unitaries=False).P_r
    assert exact_min_components(target) == brute_force_cover_number(target.dense() > 0)


def test_certificate_sperner_bound_n3():
    # off-diagonal N x N needs the least k with C(k, floor(k/2)) >= N
    for N, k in ((2, 2), (4, 4), (8, 5)):
        assert min(j for j in range(1, 10) if math.comb(j, j // 2) >= N) == k


def test_certificate_simple_targets():
    uniform = JointDistribution.from_dense(np.full((4, 4), 1 / 16))
    assert exact_min_components(uniform) == 1
    assert exact_min_components(build_thm1(2).P_r.transpose()) == 4
    with pytest.raises(ValueError):
        exact_min_components(JointDistribution.from_dense(np.full((16, 16), 1 / 256)))


def test_additive_certificate():
    bell_off = build_thm1(1).P_r
    assert exact_min_components(bell_off, "additive", 0.01) == 2
    assert exact_min_components(bell_off, "additive", 1.0) == 1
    uniform = JointDistribution.from_dense(np.full((2, 2), 0.25))
    assert exact_min_components(uniform, "additive", 0.0) == 1
    with pytest.raises(ValueError):
        exact_min_components(build_thm1(3).P_r, "additive", 0.1)
    with pytest.raises(ValueError):
        exact_min_components(uniform, "bogus")


def test_randomness_curve_anchor():
    rows = randomness_curve([4, 9], 0.5, CURVE_BUDGETS, seed=0, restarts=4)
    for n in (4, 9):
        mine = [r for r in rows if r.n == n]
        ds = [r.distance for r in mine]
        assert all(b <= a for a, b in zip(ds, ds[1:]))
        assert all(r.passed == (r.distance <= 1.0) for r in mine)
        assert min(r.k for r in mine if r.passed) == MIN_PASSING_K[n]
    assert MIN_PASSING_K[9] > MIN_PASSING_K[4]
    full = randomness_curve([4], 0.5, [6], seed=0, restarts=1)
    assert full[0].passed and full[0].distance <= 1e-6
