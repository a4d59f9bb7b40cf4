"""Projected one-dimensional systems and their L^q-spectrum candidates.

Separated IFSs project onto each axis as a self-similar system; as soon as
one map swaps the axes the two projections become a pair of graph-directed
self-similar measures sharing a single spectrum. The candidate spectrum is
the root of ``sum p^q r^t = 1`` in the first case and of
``rho(A(q, t)) = 1`` in the second.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._roots import bisect_decreasing, bisect_decreasing_vec
from .errors import ConsistencyError, InputError
from .ifs import BoxLikeIFS

H, V = 0, 1
VERTEX_NAMES = ("H", "V")
MATCH_TOL = 1e-12
FD_STEP = 1e-5
FD_TOL = 1e-6
ROOT_TOL = 1e-12


class OSCStatus(Enum):
    VERIFIED = "verified"
    UNKNOWN = "unknown"


class SpectrumForm(Enum):
    CLOSED_FORMULA = "closed-formula"
    SPECTRAL_RADIUS = "spectral-radius"


@dataclass(frozen=True)
class Atom:
    """A similarity ``x -> translation + ratio * (1 - x if flip else x)``.

    ``translation`` is the left end of the image of ``[0, 1]``.
    """

    ratio: float
    translation: float
    weight: float
    flip: bool = False

    @property
    def interval(self):
        return self.translation, self.translation + self.ratio

    @property
    def affine(self):
        """``(a, b)`` with the map written as ``x -> a + b x``."""
        if self.flip:
            return self.translation + self.ratio, -self.ratio
        return self.translation, self.ratio


@dataclass(frozen=True)
class Edge(Atom):
    source: int = H
    target: int = H


def _intervals_disjoint(intervals) -> bool:
    ivs = sorted(intervals)
    return all(a[1] <= b[0] + MATCH_TOL for a, b in zip(ivs, ivs[1:]))


@dataclass(frozen=True)
class SelfSimilarSystem1D:
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise InputError("empty system", "atoms")
        for a in self.atoms:
            if not 0 < a.ratio < 1:
                raise InputError(f"ratio {a.ratio} not in (0, 1)", "atoms")
        total = math.fsum(a.weight for a in self.atoms)
        if abs(total - 1.0) > MATCH_TOL:
            raise InputError(f"weights sum to {total}", "atoms")

    @property
    def osc_status(self) -> OSCStatus:
        ok = _intervals_disjoint([a.interval for a in coalesce(self).atoms])
        return OSCStatus.VERIFIED if ok else OSCStatus.UNKNOWN

    def arrays(self):
        r = np.array([a.ratio for a in self.atoms])
        p = np.array([a.weight for a in self.atoms])
        return r, p


@dataclass(frozen=True)
class GraphDirectedSystem1D:
    edges: tuple[Edge, ...]
    n_vertices: int = 2

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        for v in range(self.n_vertices):
            total = math.fsum(e.weight for e in self.edges if e.source == v)
            if abs(total - 1.0) > MATCH_TOL:
                raise InputError(
                    f"outgoing weights of vertex {VERTEX_NAMES[v] if v < 2 else v} sum to {total}",
                    "edges",
                )

    @property
    def osc_status(self) -> OSCStatus:
        merged = coalesce(self)
        for v in range(self.n_vertices):
            if not _intervals_disjoint([e.interval for e in merged.edges if e.source == v]):
                return OSCStatus.UNKNOWN
        return OSCStatus.VERIFIED

    def out_edges(self, v):
        return [e for e in self.edges if e.source == v]


def project_ifs(ifs: BoxLikeIFS):
    """Horizontal and vertical projected systems (uncoalesced).

    Returns two :class:`SelfSimilarSystem1D` for separated IFSs and the same
    :class:`GraphDirectedSystem1D` twice otherwise: vertex H carries the
    horizontal projection, V the vertical one.
    """
    if ifs.separated:
        ax1, ax2 = [], []
        for m in ifs.maps:
            mat = m.isometry.matrix
            ax1.append(Atom(float(m.cx), float(m.tx), float(m.p), mat[0][0] < 0))
            ax2.append(Atom(float(m.cy), float(m.ty), float(m.p), mat[1][1] < 0))
        return SelfSimilarSystem1D(tuple(ax1)), SelfSimilarSystem1D(tuple(ax2))
    edges = []
    for m in ifs.maps:
        (a, b), (c, d) = m.isometry.matrix
        cx, cy, tx, ty, p = float(m.cx), float(m.cy), float(m.tx), float(m.ty), float(m.p)
        if m.swaps_axes:
            edges.append(Edge(cx, tx, p, b < 0, H, V))
            edges.append(Edge(cy, ty, p, c < 0, V, H))
        else:
            edges.append(Edge(cx, tx, p, a < 0, H, H))
            edges.append(Edge(cy, ty, p, d < 0, V, V))
    gd = GraphDirectedSystem1D(tuple(edges))
    return gd, gd


def _same(x, y):
    return abs(x - y) <= MATCH_TOL


def coalesce(system):
    """Merge atoms (edges) with the same image interval and endpoints.

    Orientation is not part of the key: two maps onto the same interval
    contribute one atom whose weight is the sum of theirs.
    """
    if isinstance(system, GraphDirectedSystem1D):
        merged: list[Edge] = []
        for e in system.edges:
            for k, f in enumerate(merged):
                if (f.source, f.target) == (e.source, e.target) and _same(f.ratio, e.ratio) and _same(
                    f.translation, e.translation
                ):
                    merged[k] = Edge(f.ratio, f.translation, f.weight + e.weight, f.flip, f.source, f.target)
                    break
            else:
                merged.append(e)
        return GraphDirectedSystem1D(tuple(merged), system.n_vertices)
    merged_atoms: list[Atom] = []
    for a in system.atoms:
        for k, f in enumerate(merged_atoms):
            if _same(f.ratio, a.ratio) and _same(f.translation, a.translation):
                merged_atoms[k] = Atom(f.ratio, f.translation, f.weight + a.weight, f.flip)
                break
        else:
            merged_atoms.append(a)
    return SelfSimilarSystem1D(tuple(merged_atoms))


# ---------------------------------------------------------------------------
# closed formula
# ---------------------------------------------------------------------------


def tau_closed(system: SelfSimilarSystem1D, q: float, tol: float = ROOT_TOL) -> float:
    """Unique ``t`` with ``sum p_i^q r_i^t = 1``."""
    if not system.atoms:
        raise InputError("empty system", "atoms")
    r, p = system.arrays()
    lr, lp = np.log(r), np.log(p)
    a = q * lp

    def f(t):
        e = a + t * lr
        m = e.max()
        return m + math.log(math.fsum(np.exp(e - m)))

    return bisect_decreasing(f, -4.0, 4.0, tol)


def tau_closed_many(system: SelfSimilarSystem1D, qs, tol: float = ROOT_TOL) -> np.ndarray:
    qs = np.asarray(qs, float)
    r, p = system.arrays()
    lr, lp = np.log(r), np.log(p)

    def f(t):
        e = qs[:, None] * lp[None, :] + t[:, None] * lr[None, :]
        m = e.max(axis=1)
        return m + np.log(np.exp(e - m[:, None]).sum(axis=1))

    return bisect_decreasing_vec(f, len(qs), -4.0, 4.0, tol)


def _closed_derivative(system, q, t):
    r, p = system.arrays()
    w = p**q * r**t
    return -float(np.dot(w, np.log(p)) / np.dot(w, np.log(r)))


# ---------------------------------------------------------------------------
# spectral radius
# ---------------------------------------------------------------------------


def adjacency_matrix(gd: GraphDirectedSystem1D, q: float, t: float) -> np.ndarray:
    """Entry ``(i, j)``: sum over edges ``i -> j`` of ``p_e^q r_e^t``."""
    n = gd.n_vertices
    a = np.zeros((n, n))
    for e in gd.edges:
        a[e.source, e.target] += e.weight**q * e.ratio**t
    return a


def _adjacency_parts(gd, q, t):
    n = gd.n_vertices
    a = np.zeros((n, n))
    aq = np.zeros((n, n))
    at = np.zeros((n, n))
    for e in gd.edges:
        w = e.weight**q * e.ratio**t
        a[e.source, e.target] += w
        aq[e.source, e.target] += w * math.log(e.weight)
        at[e.source, e.target] += w * math.log(e.ratio)
    return a, aq, at


def spectral_radius(a: np.ndarray) -> float:
    if a.shape == (2, 2):
        tr = a[0, 0] + a[1, 1]
        disc = (a[0, 0] - a[1, 1]) ** 2 + 4.0 * a[0, 1] * a[1, 0]
        return 0.5 * (tr + math.sqrt(disc))
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def perron_vectors(a: np.ndarray, tol: float = 1e-14, max_iter: int = 100_000):
    """Left and right Perron vectors by power iteration on ``A + I``.

    The shift keeps the Perron root strictly dominant for irreducible
    periodic matrices such as ``[[0, a], [b, 0]]``.
    """
    n = a.shape[0]
    b = a + np.eye(n)

    def iterate(m):
        x = np.full(n, 1.0 / n)
        for _ in range(max_iter):
            y = m @ x
            y /= y.sum()
            if np.max(np.abs(y - x)) <= tol * np.max(np.abs(y)):
                return y
            x = y
        return x

    return iterate(b.T), iterate(b)


def beta(gd: GraphDirectedSystem1D, q: float, tol: float = ROOT_TOL, diagnostics: list | None = None) -> float:
    """Unique ``t`` with ``rho(A(q, t)) = 1``."""
    a0 = adjacency_matrix(gd, q, 0.0)
    if gd.n_vertices == 2 and (a0[0, 1] == 0.0 or a0[1, 0] == 0.0):
        # reducible: rho is the larger diagonal entry, i.e. the larger of the
        # per-vertex loop spectra
        if diagnostics is not None:
            diagnostics.append("reducible adjacency matrix: per-vertex closed formula")
        vals = []
        for v in range(2):
            loops = [e for e in gd.edges if e.source == v and e.target == v]
            if loops:
                r = np.array([e.ratio for e in loops])
                p = np.array([e.weight for e in loops])
                vals.append(bisect_decreasing(lambda t: math.log(float(np.sum(p**q * r**t))), -4.0, 4.0, tol))
        return max(vals)

    def f(t):
        return math.log(spectral_radius(adjacency_matrix(gd, q, t)))

    return bisect_decreasing(f, -4.0, 4.0, tol)


def _radius_derivative(gd, q, t):
    a, aq, at = _adjacency_parts(gd, q, t)
    u, v = perron_vectors(a)
    return -float(u @ aq @ v) / float(u @ at @ v)


# ---------------------------------------------------------------------------
# spectrum function
# ---------------------------------------------------------------------------


class SpectrumFunction:
    """Evaluable candidate spectrum ``tau(q)`` of a projected measure.

    The system is coalesced on construction. Values are cached per ``q``;
    the cache is guarded by a lock so instances can be shared by threads.
    """

    def __init__(self, system, tol: float = ROOT_TOL):
        self.raw = system
        self.system = coalesce(system)
        self.tol = tol
        if isinstance(self.system, GraphDirectedSystem1D):
            self.form = SpectrumForm.SPECTRAL_RADIUS
        else:
            self.form = SpectrumForm.CLOSED_FORMULA
        self.osc_status = self.system.osc_status
        self.diagnostics: list[str] = []
        self._cache: dict[float, float] = {}
        self._dcache: dict[float, float] = {}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"SpectrumFunction(form={self.form.value}, osc={self.osc_status.value})"

    def _compute(self, q: float) -> float:
        if q == 1.0:
            return 0.0  # weights sum to one
        if self.form is SpectrumForm.CLOSED_FORMULA:
            return tau_closed(self.system, q, self.tol)
        return beta(self.system, q, self.tol, self.diagnostics)

    def __call__(self, q: float) -> float:
        q = float(q)
        if q < 0:
            raise InputError(f"q must be >= 0, got {q}", "q")
        with self._lock:
            hit = self._cache.get(q)
        if hit is not None:
            return hit
        val = self._compute(q)
        with self._lock:
            self._cache.setdefault(q, val)
        return val

    def values(self, qs) -> np.ndarray:
        qs = np.asarray(qs, float)
        if self.form is SpectrumForm.CLOSED_FORMULA:
            out = tau_closed_many(self.system, qs, self.tol)
            out[qs == 1.0] = 0.0
            return out
        return np.array([self(q) for q in qs])

    def analytic_derivative(self, q: float) -> float:
        t = self(q)
        if self.form is SpectrumForm.CLOSED_FORMULA:
            return _closed_derivative(self.system, q, t)
        return _radius_derivative(self.system, q, t)

    def fd_derivative(self, q: float, h: float = FD_STEP) -> float:
        if q >= h:
            return (self(q + h) - self(q - h)) / (2 * h)
        # one-sided, second order
        return (-3 * self(q) + 4 * self(q + h) - self(q + 2 * h)) / (2 * h)

    def derivative(self, q: float, check: bool = True) -> float:
        q = float(q)
        with self._lock:
            hit = self._dcache.get(q)
        if hit is not None:
            return hit
        d = self.analytic_derivative(q)
        if check:
            fd = self.fd_derivative(q)
            if abs(d - fd) > FD_TOL:
                raise ConsistencyError(
                    f"tau'({q}): analytic {d!r} vs finite difference {fd!r} differ by {abs(d - fd):.3g}"
                )
        with self._lock:
            self._dcache.setdefault(q, d)
        return d


def tau_derivative(sf: SpectrumFunction, q: float) -> float:
    """``tau'(q)`` by implicit differentiation, cross-checked by finite differences."""
    if q <= 0:
        raise InputError(f"derivative needs q > 0, got {q}", "q")
    return sf.derivative(q, check=True)


def projection_spectra(ifs: BoxLikeIFS):
    """``(tau1, tau2)`` spectrum functions; identical objects when non-separated."""
    s1, s2 = project_ifs(ifs)
    if s1 is s2:
        sf = SpectrumFunction(s1)
        return sf, sf
    return SpectrumFunction(s1), SpectrumFunction(s2)


def describe_system(system) -> dict:
    """JSON-friendly summary used by the CLI."""
    merged = coalesce(system)
    if isinstance(system, GraphDirectedSystem1D):
        return {
            "kind": "graph-directed",
            "edges": [
                {
                    "from": VERTEX_NAMES[e.source],
                    "to": VERTEX_NAMES[e.target],
                    "ratio": e.ratio,
                    "translation": e.translation,
                    "weight": e.weight,
                }
                for e in merged.edges
            ],
            "osc": system.osc_status.value,
        }
    return {
        "kind": "self-similar",
        "atoms": [{"ratio": a.ratio, "translation": a.translation, "weight": a.weight} for a in merged.atoms],
        "osc": system.osc_status.value,
    }
