import math

import numpy as np
import pytest
import scipy.optimize

from boxlike import derivative as D
from boxlike import pressure as P
from boxlike.closed_form import gamma_prime_at_1
from boxlike.errors import InputError
from boxlike.presets import equal_squares

from conftest import fd, random_ifs


def test_equal_squares_derivative():
    ifs = equal_squares(4, 3)
    ctx = P.context_for(ifs)
    slope = math.log(4) / math.log(1 / 3)
    for k in (1, 2, 5):
        for q in (0.0, 1.0, 2.5):
            assert abs(D.gamma_k_prime(ctx, k, q) - slope) < 1e-10
    est = D.hausdorff_bounds(ctx)
    assert abs(est.dimension_bound - math.log(4) / math.log(3)) < 1e-10
    assert est.ladder[0] == (1, pytest.approx(slope, abs=1e-12))


def test_example1_fifth_iterate(ex1):
    ctx = P.context_for(ex1)
    assert abs(-D.gamma_k_prime(ctx, 5, 1.0) - 0.9473061825) < 1e-6
    assert abs(-D.gamma_k_prime(ctx, 1, 1.0) - 1.042785026) < 1e-6


def test_example1_bounds(ex1):
    est = D.hausdorff_bounds(P.context_for(ex1), k_budget=16)
    assert est.regime == "super" and est.side == "LowerBoundOnLeft" and est.dimension_side == "upper"
    vals = [v for _, v in est.ladder]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
    assert est.dimension_bound < 0.9473061825


def test_matches_finite_differences():
    rng = np.random.default_rng(30)
    for sep in (True, None, False):
        for _ in range(4):
            ifs = random_ifs(rng, separated=sep, dyadic=False)
            ctx = P.PressureContext(ifs)
            for k in (1, 3):
                for q in (0.4, 1.0, 2.5):
                    num = fd(lambda x: P.gamma_k(ctx, k, x, tol=1e-13), q)
                    assert abs(D.gamma_k_prime(ctx, k, q) - num) < 1e-5


def test_hat_root_identity():
    rng = np.random.default_rng(31)
    for _ in range(8):
        ifs = random_ifs(rng, separated=None, dyadic=False)
        ctx = P.PressureContext(ifs)
        for k in (1, 2, 4):
            for q in (0.0, 1.0, 3.0):
                d = D.gamma_k_prime(ctx, k, q)
                assert abs(D.hat_big_psi(ctx, k, d, q)) < 1e-10
                root = scipy.optimize.brentq(lambda s: D.hat_big_psi(ctx, k, s, q), d - 5, d + 5, xtol=1e-14)
                assert abs(root - d) < 1e-10


def test_hat_decreasing_in_s(ex1):
    ctx = P.context_for(ex1)
    vals = [D.hat_big_psi(ctx, 3, s, 0.7) for s in np.linspace(-3, 3, 25)]
    assert np.all(np.diff(vals) < 0)


def test_hat_subadditive_at_one():
    rng = np.random.default_rng(32)
    for sep in (True, None, False):
        for _ in range(4):
            ifs = random_ifs(rng, separated=sep, dyadic=False)
            ctx = P.PressureContext(ifs)
            d1, d2 = ctx.dtaus(1.0)
            for k, l in ((1, 1), (1, 2), (2, 3)):
                for s in (d1 + d2, d1 + d2 - 0.5, d1 + d2 - 2.0):
                    lhs = D.hat_big_psi(ctx, k + l, s, 1.0)
                    rhs = D.hat_big_psi(ctx, k, s, 1.0) + D.hat_big_psi(ctx, l, s, 1.0)
                    assert lhs <= rhs + 1e-10


def test_limit_precondition(ex1):
    with pytest.raises(InputError, match="limit theory applies only where gamma = tau1\\+tau2"):
        D.limit_gamma_k_prime(P.context_for(ex1), 0.0)


def test_ladder_monotone_per_regime():
    rng = np.random.default_rng(33)
    for _ in range(8):
        ifs = random_ifs(rng, separated=False, dyadic=False)
        est = D.limit_gamma_k_prime(P.PressureContext(ifs), 1.0, k_budget=16)
        vals = [v for _, v in est.ladder]
        if est.regime == "sub":
            assert all(b <= a + 1e-10 for a, b in zip(vals, vals[1:]))
        else:
            assert all(b >= a - 1e-10 for a, b in zip(vals, vals[1:]))


def test_separated_bound_matches_closed_form(nu):
    est = D.hausdorff_bounds(P.context_for(nu), tol=1e-10, k_budget=64)
    assert abs(est.value - gamma_prime_at_1(nu)) < 1e-8
    rng = np.random.default_rng(34)
    checked = 0
    for _ in range(20):
        ifs = random_ifs(rng, separated=True)
        cx, cy, _, _ = ifs.arrays()
        if not (np.all(cx >= cy) or np.all(cy >= cx)):
            continue
        checked += 1
        est = D.hausdorff_bounds(P.PressureContext(ifs), tol=1e-10)
        assert abs(est.value - gamma_prime_at_1(ifs)) < 1e-8
    assert checked >= 3


def test_many_matches_scalar(ex1):
    ctx = P.context_for(ex1)
    arr = D.gamma_k_prime_many(ctx, [1, 2, 3], 1.0)
    assert np.array_equal(arr, [D.gamma_k_prime(ctx, k, 1.0) for k in (1, 2, 3)])
