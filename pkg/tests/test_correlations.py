import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixedbell.correlations import (
    JointDistribution,
    as_bitstring_pairs,
    empirical_distribution,
    is_beta_close,
    sample,
    support,
    variational_distance,
)
from fixedbell.thm1 import build_thm1

BELL = JointDistribution.from_dense([[0.5, 0.0], [0.0, 0.5]])


def random_dist(rng, n, zeros=0.3):
    N = 1 << n
    m = rng.random((N, N)) * (rng.random((N, N)) > zeros)
    m[0, 0] += 1e-3
    return JointDistribution.from_dense(m / m.sum())


def test_validation():
    with pytest.raises(ValueError, match="negative"):
        JointDistribution.from_dense([[1.1, -0.1], [0, 0]])
    with pytest.raises(ValueError, match="mass"):
        JointDistribution.from_dense([[0.5, 0], [0, 0.4]])
    with pytest.raises(ValueError):
        JointDistribution.from_dense(np.ones((3, 3)) / 9)


def test_distance_examples():
    assert variational_distance(BELL, BELL) == 0.0
    a = JointDistribution.point_mass(1, 0, 0)
    b = JointDistribution.point_mass(1, 1, 1)
    assert variational_distance(a, b) == 2.0
    four = JointDistribution.from_dense(np.full((2, 2), 0.25))
    two = JointDistribution.from_dense([[0.5, 0.5], [0, 0]])
    assert variational_distance(four, two) == pytest.approx(1.0, abs=1e-15)


def test_distance_metric_properties():
    rng = np.random.default_rng(5)
    for _ in range(50):
        a, b, c = (random_dist(rng, 2) for _ in range(3))
        ab = variational_distance(a, b)
        assert ab == variational_distance(b, a)
        assert 0 <= ab <= 2
        assert ab <= variational_distance(a, c) + variational_distance(c, b) + 1e-15


def test_distance_across_blocks():
    sparse = JointDistribution(2, [[0.5, 0.5]], [1], [0, 3])
    dense = JointDistribution.from_dense(sparse.dense())
    assert variational_distance(sparse, dense) == 0.0
    with pytest.raises(ValueError):
        variational_distance(sparse, BELL)


def test_beta_examples():
    assert is_beta_close(BELL, BELL, 0.0).close
    pr = JointDistribution.from_dense([[0, 0.5], [0.5, 0]])
    pc = JointDistribution.from_dense([[0, 0.6], [0.4, 0]])
    assert is_beta_close(pc, pr, 0.2).close
    res = is_beta_close(pc, pr, 0.1)
    assert not res.close
    leak = JointDistribution.from_dense([[0.01, 0.49], [0.5, 0]])
    res = is_beta_close(leak, pr, 0.5)
    assert not res.close and res.worst_cell == (0, 0)
    with pytest.raises(ValueError):
        is_beta_close(pc, pr, 1.0)


def beta_trials(pr, beta, rng, count=100):
    """Random perturbations of ``pr``: in-support mixtures and zero-cell leaks."""
    base = pr.dense()
    on = base > 0
    for i in range(count):
        q = rng.random(base.shape) * on
        t = rng.uniform(0, beta)
        m = (1 - t) * base + t * q / q.sum()
        if i % 3 == 0:
            m = m + (rng.random(base.shape) < 0.2) * ~on * 1e-4
            m = m / m.sum()
        yield JointDistribution.from_dense(m)


@pytest.mark.parametrize("beta", [0.0, 0.5, 0.9])
def test_beta_closeness_forces_equal_support(beta):
    rng = np.random.default_rng(int(beta * 10) + 8)
    pr = build_thm1(2).P_r
    close = 0
    for pc in beta_trials(pr, beta, rng):
        if is_beta_close(pc, pr, beta).close:
            close += 1
            assert support(pc) == support(pr)
    assert close > 0


def test_sampling_examples():
    pm = JointDistribution.point_mass(3, 5, 2)
    xs, ys = sample(pm, 0, 100)
    assert set(xs.tolist()) == {5} and set(ys.tolist()) == {2}
    xs, ys = sample(BELL, 123, 1_000_000)
    freq = float(np.mean((xs == 0) & (ys == 0)))
    assert abs(freq - 0.5) <= 0.002
    assert np.all(xs == ys)
    x2, y2 = sample(BELL, 123, 1_000_000)
    assert np.array_equal(xs, x2) and np.array_equal(ys, y2)
    x3, _ = sample(BELL, 124, 1000)
    assert not np.array_equal(xs[:1000], x3)


def test_empirical_examples():
    e = empirical_distribution([(3, 1)], 2)
    assert e.cells() == [(3, 1, 1.0)]
    pr = build_thm1(2).P_r
    xs, ys = sample(pr, 9, 200_000)
    emp = empirical_distribution((xs, ys), 2)
    assert variational_distance(emp, pr) < 0.05
    assert support(emp) <= support(pr)
    pairs = as_bitstring_pairs(xs[:3], ys[:3], 2)
    assert empirical_distribution(pairs, 2).total() == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3), st.integers(0, 2**31), st.sampled_from(["dense", "sparse"]))
def test_json_round_trip(n, seed, fmt):
    d = random_dist(np.random.default_rng(seed), n)
    back = JointDistribution.from_json(d.to_json(fmt))
    assert variational_distance(back, d) == 0.0
    assert json.loads(d.to_json(fmt))["format"] == fmt


def test_accessors():
    d = JointDistribution(2, [[0.25, 0.75]], [2], [0, 1])
    assert d.prob(2, 1) == 0.75 and d.prob(0, 0) == 0.0
    px, py = d.marginals()
    assert px.tolist() == [0, 0, 1, 0] and py.tolist() == [0.25, 0.75, 0, 0]
    assert d.transpose().prob(1, 2) == 0.75
    assert support(d) == {(2, 0), (2, 1)}
    assert math.isclose(d.dense().sum(), 1.0)
