"""Independent reference implementations used across the test modules."""

import itertools
import math

import numpy as np
import pytest
from scipy.optimize import minimize


def full_state_distribution(U, V, alice_columns, bob_columns, amplitudes):
    """Apply ``U (x) V`` to the Schmidt state on the full 2^n * 2^n space and square.

    Independent of the library's term-by-term evaluation: the initial state is
    materialised as a vector and multiplied by the Kronecker product.
    """
    N = U.shape[0]
    phi = np.zeros(N * N, dtype=complex)
    for lam, a, b in zip(amplitudes, alice_columns, bob_columns):
        phi[a * N + b] += lam
    psi = np.kron(U, V) @ phi
    return (np.abs(psi) ** 2).reshape(N, N)


def kneser_spectrum(n, k):
    """Eigenvalues of the Kneser graph K(n, k) with multiplicities (closed form)."""
    out = []
    for j in range(k + 1):
        lam = (-1) ** j * math.comb(n - k - j, k - j)
        mult = math.comb(n, j) - (math.comb(n, j - 1) if j else 0)
        out.extend([lam] * mult)
    return np.array(out, dtype=float)


def rank_one_pu4_optimum():
    """Best L1 distance from a single product distribution to the n=4 disjointness target.

    The target puts 1/6 on (x, complement(x)) for the six weight-2 strings.
    Mass outside those cells only adds to the distance, so the product lives on
    the 6 x 6 block; for fixed Alice marginal p the distance is
    2 - 2 sum_x min(p_x q_c(x), 1/6), and the best q is a greedy fill.
    """
    def best_given_p(p):
        # maximise sum_x min(p_x q_x, 1/6) subject to sum q = 1
        order = np.argsort(-p)
        budget, gain = 1.0, 0.0
        for i in order:
            if p[i] <= 0 or budget <= 0:
                break
            need = (1.0 / 6.0) / p[i]
            take = min(need, budget)
            gain += p[i] * take
            budget -= take
        return 2.0 - 2.0 * gain

    def objective(z):
        p = np.exp(z - z.max())
        return best_given_p(p / p.sum())

    best = 2.0
    for m in range(1, 7):
        p = np.zeros(6)
        p[:m] = 1.0 / m
        best = min(best, best_given_p(p))
    rng = np.random.default_rng(7)
    for _ in range(40):
        res = minimize(objective, rng.normal(size=6), method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        best = min(best, float(res.fun))
    return best


@pytest.fixture(scope="session")
def k1_oracle():
    return rank_one_pu4_optimum()


def brute_force_cover_number(support_mask):
    """Smallest number of all-ones rectangles covering a 0/1 matrix (tiny sizes only)."""
    N, M = support_mask.shape
    rects = []
    for r in range(1, 1 << N):
        rows = [i for i in range(N) if r >> i & 1]
        cols = [j for j in range(M) if all(support_mask[i, j] for i in rows)]
        if cols:
            rects.append(frozenset((i, j) for i in rows for j in cols))
    target = frozenset(zip(*np.nonzero(support_mask)))
    for k in range(1, len(target) + 1):
        for combo in itertools.combinations(rects, k):
            if frozenset().union(*combo) >= target:
                return k
    return 0


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
