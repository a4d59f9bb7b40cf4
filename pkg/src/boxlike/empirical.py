"""Box-counting oracle, independent of the pressure machinery.

Covers are built directly from the affine maps: a word stops as soon as its
shorter side drops below ``delta``. Its rectangle carries the word's
probability. Dyadic moment sums assign each cell to the grid square holding
its centre, so the cells used there must be a few times smaller than the
grid in both directions. Moment tables therefore stop on the longer side;
shorter-side cells of elongated words can straddle many grid squares.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BudgetExceededError, InputError
from .ifs import BoxLikeIFS
from .projection import GraphDirectedSystem1D, SelfSimilarSystem1D

COVER_BUDGET = 10**7
GRID_FACTOR = 4
MAX_GRID_LEVEL = 30
MIN_FIT_LEVEL = 4  # coarser levels are dominated by the first-level layout


@dataclass(frozen=True)
class MeasureCellCover:
    """Cells of a delta-stopping cover.

    ``rects`` rows are ``(x0, y0, x1, y1)``. ``size`` is the side the
    stopping rule looked at (the shorter one unless ``side == "long"``) and
    ``parent_size`` the same quantity for the parent word.
    """

    delta: float
    rects: np.ndarray
    mass: np.ndarray
    size: np.ndarray
    parent_size: np.ndarray
    side: str = "short"

    def __len__(self):
        return len(self.mass)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.mass)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.rects[:, :2] + self.rects[:, 2:])

    @property
    def alpha1(self) -> np.ndarray:
        return np.maximum(self.rects[:, 2] - self.rects[:, 0], self.rects[:, 3] - self.rects[:, 1])

    @property
    def alpha2(self) -> np.ndarray:
        return np.minimum(self.rects[:, 2] - self.rects[:, 0], self.rects[:, 3] - self.rects[:, 1])


def _max_depth(alpha_max: float, delta: float) -> int:
    return int(math.ceil(math.log(delta) / math.log(alpha_max))) + 1


@functools.lru_cache(maxsize=4)
def _cover_cached(ifs: BoxLikeIFS, delta: float, budget: int, side: str) -> MeasureCellCover:
    lin, off = ifs.affine_arrays()
    probs = ifs.arrays()[2]
    depth = _max_depth(ifs.alpha_max, delta)
    out, cnt = _kernels.cover_2d(lin, off, probs, float(delta), int(budget), depth, side == "long")
    if cnt < 0:
        raise BudgetExceededError(f"delta-stopping cover at delta={delta:g} exceeds {budget} cells; use a larger delta")
    out = out[:cnt]
    return MeasureCellCover(float(delta), out[:, :4], out[:, 4], out[:, 5], out[:, 6], side)


def delta_stopping_cover(ifs: BoxLikeIFS, delta: float, budget: int = COVER_BUDGET,
                         side: str = "short") -> MeasureCellCover:
    """Words whose shorter side first drops below ``delta``, with their rectangles and masses.

    With ``side="long"`` words stop once their longer side drops below
    ``delta`` instead, so every cell fits inside a ``delta`` square.
    """
    delta = float(delta)
    if not 0.0 < delta <= 1.0:
        raise InputError(f"delta must lie in (0, 1], got {delta}", "delta")
    if side not in ("short", "long"):
        raise InputError(f"side must be 'short' or 'long', got {side!r}", "side")
    return _cover_cached(ifs, delta, int(budget), side)


def _grid_keys(points: np.ndarray, n: int) -> np.ndarray:
    side = 1 << n
    idx = np.clip(np.floor(points * side).astype(np.int64), 0, side - 1)
    if idx.ndim == 1:
        return idx
    return idx[:, 0] * side + idx[:, 1]


def dyadic_moments(cover: MeasureCellCover, n: int, q: float) -> float:
    """``sum over occupied level-n dyadic squares of mu(Q)^q``."""
    if not 0 <= n <= MAX_GRID_LEVEL:
        raise InputError(f"grid level must be in [0, {MAX_GRID_LEVEL}]", "n")
    limit = 2.0**-n / GRID_FACTOR
    if cover.delta > limit * (1 + 1e-12) or (len(cover) and float(np.max(cover.alpha1)) > limit * (1 + 1e-12)):
        raise InputError(
            f"cover cells are too coarse for level {n}; need both sides <= {limit:g} (stop deeper, on the longer side)",
            "delta",
        )
    return float(_kernels.group_powers(_grid_keys(cover.centers, n), cover.mass, float(q)))


@dataclass(frozen=True)
class MomentTable:
    q: float
    levels: np.ndarray
    log2_moments: np.ndarray

    def fit(self):
        """Least-squares slope of ``log2 D_n`` against ``n`` and its ``r^2``."""
        x = self.levels.astype(float)
        y = self.log2_moments
        slope, icpt = np.polyfit(x, y, 1)
        resid = y - (slope * x + icpt)
        ss = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 if ss == 0.0 else 1.0 - float(np.sum(resid**2)) / ss
        return float(slope), r2


def moment_table(ifs: BoxLikeIFS, q: float, n_min: int = 6, n_max: int = 12, budget: int = COVER_BUDGET) -> MomentTable:
    if n_min < MIN_FIT_LEVEL or n_max <= n_min:
        raise InputError(f"need {MIN_FIT_LEVEL} <= n_min < n_max", "n_min")
    cover = delta_stopping_cover(ifs, 2.0**-n_max / GRID_FACTOR, budget, side="long")
    levels = np.arange(n_min, n_max + 1)
    vals = np.array([math.log2(dyadic_moments(cover, int(n), q)) for n in levels])
    return MomentTable(float(q), levels, vals)


def estimate_tau(ifs: BoxLikeIFS, q: float, n_min: int = 6, n_max: int = 12, budget: int = COVER_BUDGET):
    """Box-counting estimate of the L^q-spectrum at ``q``.

    Returns
    -------
    slope : float
        Least-squares slope of ``log D_n`` against ``n log 2``.
    r_squared : float
    """
    return moment_table(ifs, q, n_min, n_max, budget).fit()


# ---------------------------------------------------------------------------
# 1-D graph-directed measures
# ---------------------------------------------------------------------------


def _edge_arrays(system):
    if isinstance(system, SelfSimilarSystem1D):
        items = [(0, 0, a) for a in system.atoms]
    elif isinstance(system, GraphDirectedSystem1D):
        items = [(e.source, e.target, e) for e in system.edges]
    else:
        raise InputError("expected a 1-D self-similar or graph-directed system", "system")
    src = np.array([s for s, _, _ in items], np.int64)
    dst = np.array([t for _, t, _ in items], np.int64)
    aff = np.array([a.affine for _, _, a in items], float)
    w = np.array([float(a.weight) for _, _, a in items])
    return src, dst, aff[:, 0], aff[:, 1], w


def line_cover(system, r: float, vertex: int = 0, budget: int = COVER_BUDGET):
    """Intervals ``(left, right, mass)`` of paths from ``vertex`` whose length first drops to ``r``."""
    src, dst, a, b, w = _edge_arrays(system)
    rmax = float(np.max(np.abs(b)))
    depth = int(math.ceil(math.log(r) / math.log(rmax))) + 1
    out, cnt = _kernels.cover_1d(src, dst, a, b, w, int(vertex), float(r), int(budget), depth)
    if cnt < 0:
        raise BudgetExceededError(f"1-D cover at r={r:g} exceeds {budget} intervals")
    return out[:cnt]


def line_moments(cells: np.ndarray, n: int, q: float) -> float:
    centers = 0.5 * (cells[:, 0] + cells[:, 1])
    return float(_kernels.group_powers(_grid_keys(centers, n), cells[:, 2], float(q)))


@dataclass(frozen=True)
class SubmultiplicativityReport:
    q: float
    m: int
    n: int
    vertex: int
    d_m: float
    d_n: float
    d_mn: float

    @property
    def ratio(self) -> float:
        return self.d_mn / (self.d_m * self.d_n)


def moment_submultiplicativity_check(system, q: float, m: int, n: int, vertex: int = 0,
                                     budget: int = COVER_BUDGET) -> SubmultiplicativityReport:
    """``D_{m+n} / (D_m D_n)`` for the measure at ``vertex`` of a 1-D system.

    The measure is realised by expanding paths until their intervals are
    four times finer than the level ``m + n`` grid. Pass the uncoalesced
    system so that orientation-reversing edges act as they do in the plane.
    """
    if q < 1:
        raise InputError(f"submultiplicativity check needs q >= 1, got {q}", "q")
    cells = line_cover(system, 2.0 ** -(m + n) / GRID_FACTOR, vertex, budget)
    d = {j: line_moments(cells, j, q) for j in {m, n, m + n}}
    return SubmultiplicativityReport(float(q), m, n, vertex, d[m], d[n], d[m + n])


def power_sum_bounds(values, q: float):
    """Jensen sandwich for ``k`` nonnegative reals.

    Returns ``((sum a)^q, sum a^q, k^|1-q|)``; each of the first two is at
    most the constant times the other.
    """
    a = np.asarray(values, float)
    if np.any(a < 0):
        raise InputError("values must be nonnegative", "values")
    return math.fsum(a) ** q, math.fsum(a**q), float(len(a)) ** abs(1 - q)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

MAX_RESOLUTION = 8192


def word_cells(ifs: BoxLikeIFS, depth: int, budget: int = COVER_BUDGET):
    """Rectangles and masses of all words of length ``depth``."""
    n = len(ifs)
    if depth < 1:
        raise InputError("depth must be >= 1", "depth")
    if n**depth > budget:
        raise BudgetExceededError(f"{n}^{depth} cells exceed the budget {budget}; lower the depth")
    lin, off = ifs.affine_arrays()
    probs = ifs.arrays()[2]
    M, U, P = lin.copy(), off.copy(), probs.copy()
    for _ in range(depth - 1):
        U = (U[:, None, :] + np.einsum("iab,jb->ija", M, off)).reshape(-1, 2)
        M = np.einsum("iab,jbc->ijac", M, lin).reshape(-1, 2, 2)
        P = (P[:, None] * probs[None, :]).reshape(-1)
    w = np.abs(M[:, 0, 0]) + np.abs(M[:, 0, 1])
    h = np.abs(M[:, 1, 0]) + np.abs(M[:, 1, 1])
    x0 = U[:, 0] + np.minimum(0, M[:, 0, 0]) + np.minimum(0, M[:, 0, 1])
    y0 = U[:, 1] + np.minimum(0, M[:, 1, 0]) + np.minimum(0, M[:, 1, 1])
    return np.column_stack([x0, y0, x0 + w, y0 + h]), P


def render_attractor(ifs: BoxLikeIFS, depth: int, resolution: int, budget: int = COVER_BUDGET) -> np.ndarray:
    """Mass of the level-``depth`` cells accumulated on a ``resolution`` square raster.

    The image is indexed ``[row, column]`` with row 0 at ``y = 0``.
    """
    if not 1 <= resolution <= MAX_RESOLUTION:
        raise InputError(f"resolution must be in [1, {MAX_RESOLUTION}]", "resolution")
    rects, mass = word_cells(ifs, depth, budget)
    return _kernels.raster(np.ascontiguousarray(rects), mass, int(resolution))
