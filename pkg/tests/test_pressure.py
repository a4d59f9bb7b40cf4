import math

import numpy as np
import pytest

from boxlike import pressure as P
from boxlike.closed_form import closed_gamma, gamma_A, gamma_B
from boxlike.errors import BudgetExceededError
from boxlike.ifs import AffineMap, BoxLikeIFS, word_data
from boxlike.presets import equal_squares

from conftest import random_ifs


def _brute_big_psi(ifs, k, s, q):
    import itertools

    ctx = P.PressureContext(ifs)
    return math.fsum(
        P.psi(word_data(ifs, w), s, q, ctx) for w in itertools.product(range(len(ifs)), repeat=k)
    )


def test_aggregate_counts(ex1):
    for k in range(1, 8):
        agg = P.aggregate_words(ex1, k)
        assert agg.total_words == 3**k
        assert len(agg) < 3**k or k == 1


def test_aggregated_matches_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(6):
        ifs = random_ifs(rng, n=3, separated=None)
        ctx = P.PressureContext(ifs)
        for k in range(1, 7):
            plain = P.aggregate_words(ifs, k, dedup=False)
            assert len(plain) == 3**k
            for s, q in ((0.7, 0.0), (1.3, 2.0), (0.2, 0.5)):
                tau = ctx.tau_per_word(plain, q)
                ref = math.fsum(plain.mult * np.exp(q * plain.logp + tau * plain.loga1 + (s - tau) * plain.loga2))
                assert math.isclose(P.big_psi(ctx, k, s, q), ref, rel_tol=1e-12)
            if k <= 4:
                assert math.isclose(P.big_psi(ctx, k, 0.9, 1.5), _brute_big_psi(ifs, k, 0.9, 1.5), rel_tol=1e-12)


def test_psi_examples(nu):
    ctx = P.context_for(nu)
    t1, t2 = ctx.taus(2.0)
    m = nu.maps[0]  # square, class A
    w = word_data(nu, [0])
    assert math.isclose(P.psi(w, 1.1, 2.0, ctx), float(m.p) ** 2 * 0.5**1.1, rel_tol=1e-12)
    w = word_data(nu, [1])  # 1/4 wide, 1/2 tall: vertical projection
    s = t1 + t2
    expected = float(nu.maps[1].p) ** 2 * 0.5**t2 * 0.25 ** (s - t2)
    assert math.isclose(P.psi(w, s, 2.0, ctx), expected, rel_tol=1e-12)
    # q = 0 gives the singular value function
    assert math.isclose(P.psi(w, 1.3, 0.0, ctx), 0.5 * 0.25**0.3, rel_tol=1e-12)


def test_psi_separated_at_sigma_is_product():
    rng = np.random.default_rng(8)
    ifs = random_ifs(rng, n=3, separated=True)
    ctx = P.PressureContext(ifs)
    q = 1.7
    t1, t2 = ctx.taus(q)
    for i, m in enumerate(ifs.maps):
        if m.cx >= m.cy:
            val = P.psi(word_data(ifs, [i]), t1 + t2, q, ctx)
            assert math.isclose(val, float(m.p) ** q * float(m.cx) ** t1 * float(m.cy) ** t2, rel_tol=1e-12)


def test_equal_squares_closed_solutions():
    n, r = 3, 0.5
    ifs = equal_squares(n, 2)
    ctx = P.PressureContext(ifs)
    for q in (0.0, 0.5, 2.0):
        s = 0.8
        for k in (1, 2, 5):
            assert math.isclose(P.big_psi(ctx, k, s, q), (n * (1 / n) ** q * r**s) ** k, rel_tol=1e-12)
            assert math.isclose(P.gamma_k(ctx, k, q), (q - 1) * math.log(n) / math.log(r), abs_tol=1e-10)
        est = P.gamma(ctx, q)
        assert math.isclose(est.value, (q - 1) * math.log(n) / math.log(r), abs_tol=1e-10)
        assert est.ladder[0][1] == pytest.approx(est.value, abs=1e-12)
        assert est.uncertainty <= 1e-12
        pe = [P.pressure_estimate(ctx, 0.4, q, k).value for k in (1, 2, 4)]
        assert np.allclose(pe, pe[0], rtol=1e-12)


def test_gamma_at_one(ex1, nu):
    for ifs in (ex1, nu):
        ctx = P.context_for(ifs)
        for k in (1, 3, 6):
            assert P.gamma_k(ctx, k, 1.0) == 0.0
        est = P.gamma(ctx, 1.0)
        assert est.value == 0.0 and est.uncertainty == 0.0


def test_example1_gamma10(ex1):
    ctx = P.context_for(ex1)
    assert abs(P.gamma_k(ctx, 10, 0.0) - 1.226824523) < 1e-6
    assert abs(P.big_psi(ctx, 10, 1.226824523, 0.0) - 1) < 1e-6


def test_example1_ladder_matches_table(ex1):
    table = [1.357018637, 1.283827783, 1.261864208, 1.249667061, 1.242219041, 1.237158515]
    ctx = P.context_for(ex1)
    for k, v in enumerate(table, start=1):
        assert abs(P.gamma_k(ctx, k, 0.0) - v) < 1e-8


def test_pressure_regimes(ex1):
    ctx = P.context_for(ex1)
    q = 0.5
    sig = ctx.sigma(q)
    exact = P.pressure_estimate(ctx, sig, q, 4)
    assert exact.regime == "multiplicative" and exact.k == 1
    assert exact.value == pytest.approx(P.big_psi(ctx, 1, sig, q), rel=1e-14)
    below = [P.pressure_estimate(ctx, sig - 0.3, q, k) for k in (1, 2, 4, 8)]
    assert all(e.bound == "upper" for e in below)
    assert all(a.value >= b.value * (1 - 1e-12) for a, b in zip(below, below[1:]))
    above = [P.pressure_estimate(ctx, sig + 0.3, q, k) for k in (1, 2, 4, 8)]
    assert all(e.bound == "lower" for e in above)
    assert all(a.value <= b.value * (1 + 1e-12) for a, b in zip(above, above[1:]))


def _sub_super_check(ifs, rng):
    ctx = P.PressureContext(ifs)
    for q in (0.0, 0.5, 2.0, 3.5):
        sig = ctx.sigma(q)
        for _ in range(3):
            k, l = (int(x) for x in rng.integers(1, 5, 2))
            lo = P.log_big_psi
            s_sub = sig - rng.uniform(1e-6 + 1e-9, 1.0)
            s_sup = sig + rng.uniform(1e-6 + 1e-9, 1.0)
            assert lo(ctx, k + l, s_sub, q) <= lo(ctx, k, s_sub, q) + lo(ctx, l, s_sub, q) + 1e-10
            assert lo(ctx, k + l, s_sup, q) >= lo(ctx, k, s_sup, q) + lo(ctx, l, s_sup, q) - 1e-10
            if ifs.separated:
                lhs = P.big_psi(ctx, k + l, sig, q)
                rhs = P.big_psi(ctx, k, sig, q) * P.big_psi(ctx, l, sig, q)
                assert math.isclose(lhs, rhs, rel_tol=1e-10)


def test_sub_and_super_multiplicativity():
    rng = np.random.default_rng(9)
    for sep in (True, None, False):
        for _ in range(4):
            _sub_super_check(random_ifs(rng, separated=sep, dyadic=False), rng)


def test_big_psi_decreasing_in_s():
    rng = np.random.default_rng(10)
    ifs = random_ifs(rng, separated=None)
    ctx = P.PressureContext(ifs)
    for k in (1, 3):
        for q in (0.0, 1.0, 2.5):
            vals = [P.big_psi(ctx, k, s, q) for s in np.linspace(-1, 3, 21)]
            assert np.all(np.diff(vals) < 0)


def test_gamma_k_decreasing_convex_in_q():
    rng = np.random.default_rng(12)
    qs = np.linspace(0, 4, 17)
    for sep in (True, False):
        ifs = random_ifs(rng, separated=sep)
        ctx = P.PressureContext(ifs)
        for k in (1, 2, 4):
            vals = np.array([P.gamma_k(ctx, k, q) for q in qs])
            assert np.all(np.diff(vals) < 0)
            assert np.all(np.diff(vals, 2) >= -1e-8)


def test_min_case_sandwich():
    rng = np.random.default_rng(13)
    found = 0
    for _ in range(40):
        ifs = random_ifs(rng, separated=True)
        for q in (1.5, 2.0, 3.0):
            res = closed_gamma(ifs, q)
            if res.case.value != "MinCase":
                continue
            found += 1
            ctx = P.context_for(ifs)
            sig = ctx.sigma(q)
            upper = min(gamma_A(ifs, q), gamma_B(ifs, q))
            for k in (1, 2, 4, 8):
                g = P.gamma_k(ctx, k, q)
                assert sig - 1e-10 <= g <= upper + 1e-10
    assert found >= 5


def test_deterministic_across_workers():
    rng = np.random.default_rng(14)
    expo = rng.normal(-3, 4, 100_003)
    mult = rng.integers(1, 50, expo.size).astype(float)
    x, y = rng.normal(size=expo.size), rng.normal(size=expo.size)
    ifs = random_ifs(rng, n=4, separated=False, dyadic=False)
    results = []
    for workers in (1, 2, 8):
        ctx = P.PressureContext(ifs, workers=workers)
        parts = ctx.chunk_sums(expo, mult, x, y)
        assert parts.shape[0] > 8
        results.append((P.combine_chunks(parts), P.log_big_psi(ctx, 8, 1.1, 0.7), P.gamma_k(ctx, 8, 2.0)))
    assert results[0] == results[1] == results[2]


def test_budget_exceeded(ex1):
    ctx = P.PressureContext(ex1, budget=100)
    with pytest.raises(BudgetExceededError, match="smaller k"):
        P.gamma_k(ctx, 10, 0.0)
    est = P.gamma(ctx, 0.0, k_budget=64)
    assert est.k_used < 64 and est.uncertainty > 0


def test_ladder_direction(ex1):
    est = P.gamma(P.context_for(ex1), 0.0, k_budget=16)
    assert est.direction == "decreasing"
    vals = [v for _, v in est.ladder]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    est = P.gamma(P.context_for(ex1), 2.0, k_budget=16)
    assert est.direction == "increasing"
    vals = [v for _, v in est.ladder]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_ladder_uncertainty_model():
    # exact (a log k + b)/k tails are extrapolated to the limit
    ladder = [(k, 1.0 + (0.3 * math.log(k) + 0.2) / k) for k in (1, 2, 4, 8, 16)]
    unc = P.ladder_uncertainty(ladder)
    assert unc >= abs(ladder[-1][1] - 1.0) - 1e-12
    assert P.ladder_uncertainty(ladder[:2]) == abs(ladder[1][1] - ladder[0][1])
    assert P.ladder_uncertainty(ladder[:1]) == math.inf


def test_non_exact_input_floats():
    ifs = BoxLikeIFS((AffineMap(0.3, 0.6, 0.25), AffineMap(0.45, 0.2, 0.75, tx=0.5)))
    ctx = P.PressureContext(ifs)
    assert math.isfinite(P.gamma_k(ctx, 5, 0.3))
