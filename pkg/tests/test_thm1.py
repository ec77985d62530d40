import math

import numpy as np
import pytest

from fixedbell.thm1 import build_thm1, from_vectors, make_c_values, verify_thm1


def test_c_values_n1():
    c = make_c_values(1)
    np.testing.assert_allclose(c, [-1 / (2 * math.sqrt(2)), 1 / (2 * math.sqrt(2))], atol=1e-16)


@pytest.mark.parametrize("n", range(1, 8))
def test_c_value_constraints(n):
    c = make_c_values(n)
    N = c.size
    assert abs(math.fsum(c)) < 1e-12
    gaps = [(c[y] - c[x]) ** 2 for x in range(N) for y in range(x + 1, N)]
    assert math.fsum(gaps) == pytest.approx(0.5, abs=1e-10)
    assert len(set(c.tolist())) == N


def test_n1_distribution():
    con = build_thm1(1)
    np.testing.assert_allclose(con.P_r.dense(), [[0, 0.5], [0.5, 0]], atol=1e-15)
    rep = verify_thm1(con)
    assert rep.passed
    assert rep.offdiagonal_min == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_zero_diagonal_and_closed_form(n):
    con = build_thm1(n)
    P = con.P_r.dense()
    assert np.all(np.diag(P) == 0.0)
    assert np.all(P[~np.eye(P.shape[0], dtype=bool)] > 0)
    assert np.max(np.abs(P - con.closed_form())) <= 1e-10
    assert verify_thm1(con).passed


def test_active_columns():
    con = build_thm1(3)
    np.testing.assert_array_equal(con.U[:, 0], con.u0)
    np.testing.assert_array_equal(con.U[:, 1], con.u1)
    np.testing.assert_array_equal(con.V[:, 0], con.v0)
    np.testing.assert_array_equal(con.V[:, 4], con.v1)


def test_sign_flip_is_caught():
    con = build_thm1(2)
    bad = from_vectors(2, con.c_values, con.u0, -con.u1, con.v0, con.v1)
    rep = verify_thm1(bad)
    assert not rep.passed
    assert any("deviates" in f for f in rep.failures)


def test_bounds():
    with pytest.raises(ValueError):
        build_thm1(0)
    with pytest.raises(ValueError):
        build_thm1(11)
    assert build_thm1(11, max_n=11, unitaries=False).size == 2048
