import math

import numpy as np
import pytest
import scipy.linalg
import scipy.optimize

from boxlike.errors import ConsistencyError, InputError
from boxlike.ifs import AffineMap, BoxLikeIFS
from boxlike.projection import (
    Atom,
    Edge,
    GraphDirectedSystem1D,
    OSCStatus,
    SelfSimilarSystem1D,
    SpectrumForm,
    SpectrumFunction,
    adjacency_matrix,
    beta,
    coalesce,
    perron_vectors,
    project_ifs,
    projection_spectra,
    spectral_radius,
    tau_closed,
    tau_derivative,
)

from conftest import random_ifs

QS = np.linspace(0, 10, 41)


def _ex1_matrix(q, t):
    return np.array([
        [(1 / 5) ** q * (1 / 2) ** t, (16 / 25) ** q * (1 / 4) ** t + (4 / 25) ** q * (1 / 4) ** t],
        [(4 / 5) ** q * (1 / 2) ** t, (1 / 5) ** q * (1 / 2) ** t],
    ])


def test_example1_graph_directed(ex1):
    s1, s2 = project_ifs(ex1)
    assert s1 is s2 and isinstance(s1, GraphDirectedSystem1D)
    gd = coalesce(s1)
    assert np.array_equal(adjacency_matrix(gd, 0, 0), [[1, 2], [1, 1]])
    rng = np.random.default_rng(0)
    for q, t in rng.uniform([0, -2], [5, 3], size=(20, 2)):
        assert np.allclose(adjacency_matrix(gd, q, t), _ex1_matrix(q, t), rtol=1e-13)


def test_row_stochastic_at_q1(ex1):
    a = adjacency_matrix(project_ifs(ex1)[0], 1.0, 0.0)
    assert np.allclose(a.sum(axis=1), 1.0, atol=1e-12)


def test_separated_projection(nu):
    s1, s2 = project_ifs(nu)
    assert isinstance(s1, SelfSimilarSystem1D) and isinstance(s2, SelfSimilarSystem1D)
    assert [a.ratio for a in s1.atoms] == [0.5, 0.25, 0.25]
    assert [a.ratio for a in s2.atoms] == [0.5, 0.5, 0.5]
    merged = coalesce(s2)
    assert sorted((a.translation, round(a.weight, 12)) for a in merged.atoms) == [(0.0, 0.8), (0.5, 0.2)]


def test_coalesce_examples():
    sys_ = SelfSimilarSystem1D((Atom(0.5, 0.0, 4 / 25), Atom(0.5, 0.0, 16 / 25), Atom(0.5, 0.5, 1 / 5)))
    merged = coalesce(sys_)
    assert [(a.ratio, a.translation) for a in merged.atoms] == [(0.5, 0.0), (0.5, 0.5)]
    assert np.allclose([a.weight for a in merged.atoms], [0.8, 0.2])
    distinct = SelfSimilarSystem1D((Atom(0.5, 0.0, 0.5), Atom(0.5, 0.5, 0.5)))
    assert coalesce(distinct).atoms == distinct.atoms
    same = SelfSimilarSystem1D((Atom(0.3, 0.1, 0.25),) * 4)
    assert len(coalesce(same).atoms) == 1 and math.isclose(coalesce(same).atoms[0].weight, 1.0)


def test_tau_closed_examples():
    n, r = 5, 1 / 3
    eq = SelfSimilarSystem1D(tuple(Atom(r, j / 5, 1 / n) for j in range(n)))
    assert math.isclose(tau_closed(eq, 0), math.log(n) / -math.log(r), abs_tol=1e-11)
    assert abs(tau_closed(eq, 1)) < 1e-11
    two = SelfSimilarSystem1D((Atom(0.5, 0, 1 / 5), Atom(0.5, 0.5, 4 / 5)))
    assert math.isclose(tau_closed(two, 2), math.log2(17 / 25), abs_tol=1e-11)
    assert math.isclose(tau_closed(two, 2), -0.55639, abs_tol=1e-5)


def test_tau_closed_against_brentq():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        r = rng.uniform(0.05, 0.6, n)
        p = rng.dirichlet(np.ones(n))
        sys_ = SelfSimilarSystem1D(tuple(Atom(r[j], j / n, p[j]) for j in range(n)))
        for q in (0.0, 0.3, 2.5, 7.0):
            ref = scipy.optimize.brentq(lambda t: np.sum(p**q * r**t) - 1, -50, 50, xtol=1e-14)
            assert abs(tau_closed(sys_, q) - ref) < 1e-10


def test_empty_system_rejected():
    with pytest.raises(InputError):
        SelfSimilarSystem1D(())


def test_beta_examples(ex1):
    gd = coalesce(project_ifs(ex1)[0])
    assert beta(gd, 1.0) == 0.0 or abs(beta(gd, 1.0)) < 1e-12
    b0 = beta(gd, 0.0)
    assert abs(max(abs(scipy.linalg.eigvals(adjacency_matrix(gd, 0.0, b0)))) - 1) < 1e-10


def test_spectral_radius_vs_eig():
    rng = np.random.default_rng(2)
    for _ in range(50):
        a = rng.uniform(0, 2, (2, 2))
        assert math.isclose(spectral_radius(a), max(abs(np.linalg.eigvals(a))), rel_tol=1e-12)
        u, v = perron_vectors(a)
        rho = spectral_radius(a)
        assert np.allclose(a @ v, rho * v, atol=1e-10) and np.allclose(u @ a, rho * u, atol=1e-10)


def test_decoupled_graph_matches_loop_formula():
    loop = [(0.5, 0.0, 0.3), (0.25, 0.5, 0.7)]
    edges = tuple(Edge(r, t, w, False, v, v) for v in (0, 1) for r, t, w in loop)
    gd = GraphDirectedSystem1D(edges)
    single = SelfSimilarSystem1D(tuple(Atom(r, t, w) for r, t, w in loop))
    diag = []
    for q in (0.0, 0.5, 2.0, 5.0):
        assert abs(beta(gd, q, diagnostics=diag) - tau_closed(single, q)) < 1e-10
    assert diag  # reducible matrix was reported


def test_graph_directed_rows_must_be_stochastic():
    with pytest.raises(InputError):
        GraphDirectedSystem1D((Edge(0.5, 0, 0.5, False, 0, 1), Edge(0.5, 0, 1.0, False, 1, 0)))


def test_tau_derivative_examples():
    n, r = 4, 1 / 5
    eq = SpectrumFunction(SelfSimilarSystem1D(tuple(Atom(r, j / 4, 1 / n) for j in range(n))))
    for q in (0.5, 1.0, 3.0):
        assert math.isclose(tau_derivative(eq, q), math.log(n) / math.log(r), rel_tol=1e-9)
    two = SpectrumFunction(SelfSimilarSystem1D((Atom(0.5, 0, 1 / 5), Atom(0.5, 0.5, 4 / 5))))
    expected = -((1 / 5) * math.log(1 / 5) + (4 / 5) * math.log(4 / 5)) / math.log(2)
    assert math.isclose(tau_derivative(two, 1.0), -expected, rel_tol=1e-9)
    assert math.isclose(expected, 0.72193, abs_tol=1e-5)
    with pytest.raises(InputError):
        tau_derivative(two, 0.0)


def test_spectral_radius_derivative_vs_fd(ex1):
    sf = projection_spectra(ex1)[0]
    assert sf.form is SpectrumForm.SPECTRAL_RADIUS
    for q in (0.3, 1.0, 2.0, 6.0):
        d = sf.derivative(q)
        fd = (sf(q + 1e-5) - sf(q - 1e-5)) / 2e-5
        assert abs(d - fd) < 1e-6


def test_derivative_disagreement_raises(ex1, monkeypatch):
    sf = projection_spectra(ex1)[0]
    monkeypatch.setattr(sf, "analytic_derivative", lambda q: 123.0)
    with pytest.raises(ConsistencyError):
        sf.derivative(0.77)


def test_spectrum_invariants():
    rng = np.random.default_rng(4)
    for _ in range(12):
        ifs = random_ifs(rng, separated=None, dyadic=False)
        t1, t2 = projection_spectra(ifs)
        for sf in (t1, t2):
            assert abs(sf(1.0)) <= 1e-10
            vals = np.array([sf(q) for q in QS])
            assert np.all(np.diff(vals) < 0)
            assert np.all(np.diff(vals, 2) >= -1e-8)
        if not ifs.separated:
            assert np.array_equal([t1(q) for q in QS], [t2(q) for q in QS])


def test_osc_status():
    assert projection_spectra(BoxLikeIFS((
        AffineMap(0.5, 0.5, 0.5), AffineMap(0.5, 0.5, 0.5, tx=0.5)
    )))[0].osc_status is OSCStatus.VERIFIED
    overlapping = BoxLikeIFS((AffineMap(0.5, 0.5, 0.5), AffineMap(0.5, 0.5, 0.5, tx=0.3, ty=0.5)))
    t1, t2 = projection_spectra(overlapping)
    assert t1.osc_status is OSCStatus.UNKNOWN and t2.osc_status is OSCStatus.VERIFIED


def test_flip_recorded_on_swapping_edges(ex1):
    gd = project_ifs(ex1)[0]
    v_to_h = [e for e in gd.edges if e.source == 1 and e.target == 0]
    assert sorted(e.flip for e in v_to_h) == [False, True]
    assert len(coalesce(gd).edges) == len(gd.edges) - 1


def test_negative_q_rejected(ex1):
    with pytest.raises(InputError):
        projection_spectra(ex1)[0](-0.5)


def test_values_vectorised_matches_scalar(nu):
    t1, _ = projection_spectra(nu)
    qs = np.linspace(0, 5, 11)
    assert np.allclose(t1.values(qs), [t1(q) for q in qs], atol=1e-12)
