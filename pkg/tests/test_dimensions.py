import math

import numpy as np
import pytest

from boxlike import closed_form as C
from boxlike import derivative as D
from boxlike.dimensions import dimension_report, gamma_samples, legendre_spectrum, numerical_slope
from boxlike.errors import InputError
from boxlike.output import csv_text, svg_plot
from boxlike.presets import equal_squares
from boxlike.pressure import context_for

from conftest import random_ifs


def test_nu_report(nu):
    rep = dimension_report(nu)
    assert rep.method == "ClosedForm" and rep.rosc_verified and not rep.candidate
    assert abs(rep.box_packing_dim_F - 1.357018637) < 1e-6
    assert abs(rep.dim_measure - 1.042785026) < 1e-6
    d = rep.to_dict()
    assert d["label"] == "verified" and d["dim_measure"]["lower"] == d["dim_measure"]["upper"]


def test_example1_report(ex1):
    rep = dimension_report(ex1, k_budget=16, tol=1e-6)
    assert rep.method == "BoundsOnly" and rep.rosc_verified
    lo, hi = rep.measure_interval
    assert lo == 0.0 and 0.9 < hi < 0.9473061825
    assert 1.2 < rep.box_packing_dim_F < 1.237158515
    assert rep.box_uncertainty > 0


def test_equal_squares_report():
    rep = dimension_report(equal_squares(3, 2))
    assert math.isclose(rep.box_packing_dim_F, math.log2(3), abs_tol=1e-10)
    assert math.isclose(rep.dim_measure, math.log2(3), abs_tol=1e-10)


def test_unverified_rosc_is_candidate():
    from boxlike.ifs import AffineMap, BoxLikeIFS

    ifs = BoxLikeIFS((AffineMap(0.5, 0.5, 0.5), AffineMap(0.5, 0.5, 0.5, tx=0.3, ty=0.2)))
    rep = dimension_report(ifs)
    assert rep.candidate and rep.to_dict()["label"] == "candidate"


def test_separated_measure_dim_within_derivative_interval():
    rng = np.random.default_rng(40)
    for _ in range(10):
        ifs = random_ifs(rng, separated=True)
        rep = dimension_report(ifs)
        est = D.hausdorff_bounds(context_for(ifs), tol=1e-10)
        # derivative limit and closed form both bound the same one-sided derivative
        if est.dimension_side == "lower":
            assert rep.dim_measure >= est.dimension_bound - 1e-8
        else:
            assert rep.dim_measure <= est.dimension_bound + 1e-8
        assert rep.dim_measure <= rep.box_packing_dim_F + 1e-12


def test_legendre_anchors(nu):
    qs = np.linspace(0, 10, 1001)
    samples = gamma_samples(nu, qs)
    spec = legendre_spectrum(samples, n_alpha=2001)
    fmax = max(f for _, f in spec)
    g0 = samples[0][1]
    slope0 = -(samples[1][1] - samples[0][1]) / (qs[1] - qs[0])
    assert g0 - 1e-12 <= fmax + 1e-12 and fmax <= g0 + 1e-9
    assert max(a for a, _ in spec) == pytest.approx(slope0)
    a1 = -C.gamma_prime_at_1(nu)
    (_, f1), = legendre_spectrum(samples, alpha_grid=[a1])
    assert abs(f1 - a1) < 1e-6


def test_legendre_increasing_part(ex2):
    samples = gamma_samples(ex2, np.linspace(0, 6, 121))
    spec = legendre_spectrum(samples)
    f = np.array([v for _, v in spec])
    assert np.all(np.diff(f) >= -1e-12)


def test_legendre_linear_gamma():
    samples = [(q, 2.0 * (1 - q)) for q in np.linspace(0, 3, 7)]
    ((a, f),) = legendre_spectrum(samples)
    assert a == pytest.approx(2.0) and f == pytest.approx(2.0)


def test_legendre_rejects_nonconvex():
    samples = [(0.0, 1.0), (1.0, 0.0), (2.0, -0.5), (3.0, -2.0)]
    with pytest.raises(InputError, match="not convex"):
        legendre_spectrum(samples)
    with pytest.raises(InputError):
        legendre_spectrum([(0.0, 1.0)])


def test_numerical_slope(nu):
    samples = gamma_samples(nu, np.linspace(0, 2, 201))
    assert abs(numerical_slope(samples, 1.0) - C.gamma_prime_at_1(nu)) < 1e-4
    with pytest.raises(InputError):
        numerical_slope(samples, 0.0)


def test_nonseparated_samples_match_pressure(ex1):
    samples = gamma_samples(ex1, [1.0, 2.0], tol=1e-6, k_budget=8)
    assert samples[0] == (1.0, 0.0)
    assert samples[1][1] < 0


def test_output_formats(ex2):
    samples = gamma_samples(ex2, np.linspace(0, 2, 5))
    text = csv_text(["q", "gamma"], samples)
    lines = text.strip().splitlines()
    assert lines[0] == "q,gamma" and len(lines) == 6
    xs, ys = zip(*samples)
    svg = svg_plot([("gamma", xs, ys)], "title", "q", "gamma")
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>") and "<path" in svg
