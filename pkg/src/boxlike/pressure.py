"""q-modified singular value function, level sums, pressure and gamma.

Level sums over ``I^k`` are evaluated on a multiset compression of the
words: words with equal ``(log p, log b, log h, class)`` (quantised at
``1e-12``) extend identically, so only distinct states and their
multiplicities are kept. For dyadic data this collapses ``|I|^k`` words
into polynomially many states.
"""

from __future__ import annotations

import functools
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._roots import bisect_decreasing
from .errors import BudgetExceededError
from .ifs import BoxLikeIFS, Projection, WordData, projection_choice
from .projection import SpectrumFunction, projection_spectra

QUANTUM = 1e-12
DEFAULT_BUDGET = 10**8
ROOT_TOL = 1e-12
EQUAL_TOL = 1e-12


def _quantise(x):
    return np.rint(x / QUANTUM).astype(np.int64)


@dataclass(frozen=True)
class WordStates:
    """Distinct extension states at one level with multiplicities."""

    level: int
    logp: np.ndarray
    logb: np.ndarray
    logh: np.ndarray
    cls_b: np.ndarray
    mult: np.ndarray

    def __len__(self):
        return len(self.mult)


@dataclass(frozen=True)
class WordAggregate:
    """Level-``k`` words keyed by ``(log p, log alpha1, log alpha2, proj)``.

    ``proj`` is 0 for the horizontal and 1 for the vertical projection.
    """

    level: int
    logp: np.ndarray
    loga1: np.ndarray
    loga2: np.ndarray
    proj: np.ndarray
    mult: np.ndarray

    def __len__(self):
        return len(self.mult)

    @property
    def total_words(self) -> float:
        return math.fsum(self.mult)


def _dedup(cols_float, col_bool, mult):
    keys = np.column_stack([_quantise(c) for c in cols_float] + [col_bool.astype(np.int64)])
    _, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    new_mult = np.bincount(inv.ravel(), weights=mult)
    order = np.argsort(first, kind="stable")
    first = first[order]
    return [c[first] for c in cols_float], col_bool[first], new_mult[order]


def _letters(ifs: BoxLikeIFS):
    cx, cy, p, sw = ifs.arrays()
    return np.log(cx), np.log(cy), np.log(p), sw


def extend_states(ifs: BoxLikeIFS, states: WordStates, budget: int = DEFAULT_BUDGET, dedup: bool = True) -> WordStates:
    lc, ld, lp, sw = _letters(ifs)
    n = len(states)
    if n * len(lp) > budget:
        raise BudgetExceededError(
            f"level {states.level + 1} needs {n * len(lp)} candidate keys (budget {budget}); use a smaller k"
        )
    cls = states.cls_b[:, None]
    logp = (states.logp[:, None] + lp[None, :]).ravel()
    logb = (states.logb[:, None] + np.where(cls, ld[None, :], lc[None, :])).ravel()
    logh = (states.logh[:, None] + np.where(cls, lc[None, :], ld[None, :])).ravel()
    cls_b = (cls ^ sw[None, :]).ravel()
    mult = np.repeat(states.mult, len(lp))
    if dedup:
        (logp, logb, logh), cls_b, mult = _dedup([logp, logb, logh], cls_b, mult)
    return WordStates(states.level + 1, logp, logb, logh, cls_b, mult)


def _empty_states():
    z = np.zeros(1)
    return WordStates(0, z, z.copy(), z.copy(), np.zeros(1, bool), np.ones(1))


def enumerate_states(ifs: BoxLikeIFS, k: int, budget: int = DEFAULT_BUDGET, dedup: bool = True) -> WordStates:
    st = _empty_states()
    for _ in range(k):
        st = extend_states(ifs, st, budget, dedup)
    return st


def aggregate_states(states: WordStates, dedup: bool = True) -> WordAggregate:
    loga1 = np.maximum(states.logb, states.logh)
    loga2 = np.minimum(states.logb, states.logh)
    wide = states.logb >= states.logh
    # horizontal iff (class A and wide) or (class B and not wide)
    vertical = wide == states.cls_b
    mult = states.mult
    logp = states.logp
    if dedup:
        (logp, loga1, loga2), vertical, mult = _dedup([logp, loga1, loga2], vertical, mult)
    return WordAggregate(states.level, logp, loga1, loga2, vertical.astype(np.int8), mult)


def aggregate_words(ifs: BoxLikeIFS, k: int, budget: int = DEFAULT_BUDGET, dedup: bool = True) -> WordAggregate:
    """Multiset compression of ``I^k``; ``dedup=False`` keeps every word."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return aggregate_states(enumerate_states(ifs, k, budget, dedup), dedup)


class PressureContext:
    """An IFS paired with its projection spectra and cached word aggregates."""

    def __init__(self, ifs: BoxLikeIFS, tau1: SpectrumFunction | None = None, tau2: SpectrumFunction | None = None,
                 budget: int = DEFAULT_BUDGET, workers: int = 1):
        self.ifs = ifs
        if tau1 is None or tau2 is None:
            tau1, tau2 = projection_spectra(ifs)
        self.tau1, self.tau2 = tau1, tau2
        self.budget = budget
        self.workers = max(1, int(workers))
        self._states = {0: _empty_states()}
        self._aggs: dict[int, WordAggregate] = {}
        self._lock = threading.RLock()

    def taus(self, q):
        return self.tau1(q), self.tau2(q)

    def sigma(self, q) -> float:
        t1, t2 = self.taus(q)
        return t1 + t2

    def dtaus(self, q, check=True):
        return self.tau1.derivative(q, check), self.tau2.derivative(q, check)

    def states(self, k: int) -> WordStates:
        with self._lock:
            top = max(j for j in self._states if j <= k)
            st = self._states[top]
            for j in range(top + 1, k + 1):
                st = extend_states(self.ifs, st, self.budget)
                self._states[j] = st
            return st

    def aggregate(self, k: int) -> WordAggregate:
        with self._lock:
            agg = self._aggs.get(k)
            if agg is None:
                agg = aggregate_states(self.states(k))
                self._aggs[k] = agg
            return agg

    def tau_per_word(self, agg: WordAggregate, q) -> np.ndarray:
        t1, t2 = self.taus(q)
        return np.where(agg.proj == 0, t1, t2)

    def dtau_per_word(self, agg: WordAggregate, q, check=True) -> np.ndarray:
        d1, d2 = self.dtaus(q, check)
        return np.where(agg.proj == 0, d1, d2)

    # -- deterministic chunked reduction ---------------------------------
    def chunk_sums(self, expo, mult, x=None, y=None):
        with_xy = x is not None
        if x is None:
            x = y = expo
        chunk = _kernels.CHUNK
        n = len(expo)
        nchunks = (n + chunk - 1) // chunk
        if self.workers == 1 or nchunks < 2:
            return _kernels.chunk_sums(expo, mult, x, y, chunk, with_xy)
        per = -(-nchunks // self.workers)
        bounds = [(i * per * chunk, min(n, (i + 1) * per * chunk)) for i in range(self.workers)]
        bounds = [b for b in bounds if b[0] < b[1]]
        with ThreadPoolExecutor(len(bounds)) as pool:
            parts = list(pool.map(
                lambda b: _kernels.chunk_sums(expo[b[0]:b[1]], mult[b[0]:b[1]], x[b[0]:b[1]], y[b[0]:b[1]],
                                              chunk, with_xy),
                bounds,
            ))
        return np.concatenate(parts)


def combine_chunks(parts):
    """Merge per-chunk ``(max, S, X, Y)`` rows into ``(M, S, X, Y)``."""
    m = float(np.max(parts[:, 0]))
    scale = np.exp(parts[:, 0] - m)
    return (
        m,
        math.fsum(parts[:, 1] * scale),
        math.fsum(parts[:, 2] * scale),
        math.fsum(parts[:, 3] * scale),
    )


@functools.lru_cache(maxsize=32)
def context_for(ifs: BoxLikeIFS) -> PressureContext:
    """Shared default context per IFS (spectra and aggregates are cached)."""
    return PressureContext(ifs)


def as_context(obj) -> PressureContext:
    return obj if isinstance(obj, PressureContext) else context_for(obj)


# ---------------------------------------------------------------------------
# single words
# ---------------------------------------------------------------------------


def log_psi(w: WordData, s: float, q: float, ctx) -> float:
    ctx = as_context(ctx)
    t1, t2 = ctx.taus(q)
    tau = t1 if projection_choice(w) is Projection.HORIZONTAL else t2
    return q * w.logp + tau * w.log_alpha1 + (s - tau) * w.log_alpha2


def psi(w: WordData, s: float, q: float, ctx) -> float:
    """``p^q alpha1^tau alpha2^(s - tau)`` with ``tau`` chosen by the word's projection."""
    return math.exp(log_psi(w, s, q, ctx))


# ---------------------------------------------------------------------------
# level sums
# ---------------------------------------------------------------------------


def _exponent_parts(ctx: PressureContext, agg: WordAggregate, q: float):
    tau = ctx.tau_per_word(agg, q)
    base = q * agg.logp + tau * (agg.loga1 - agg.loga2)
    return base, agg.loga2


def log_big_psi(ctx, k: int, s: float, q: float) -> float:
    ctx = as_context(ctx)
    agg = ctx.aggregate(k)
    base, slope = _exponent_parts(ctx, agg, q)
    m, total, _, _ = combine_chunks(ctx.chunk_sums(base + s * slope, agg.mult))
    return m + math.log(total)


def big_psi(ctx, k: int, s: float, q: float) -> float:
    """``Psi_k^{s,q}``: sum of the q-modified singular value function over ``I^k``."""
    return math.exp(log_big_psi(ctx, k, s, q))


def _root_bracket(ctx, q):
    sig = ctx.sigma(q)
    return sig - 5.0, sig + 5.0


def gamma_k(ctx, k: int, q: float, tol: float = ROOT_TOL) -> float:
    """Unique ``s`` with ``Psi_k^{s,q} = 1``."""
    ctx = as_context(ctx)
    if q == 1.0:
        return 0.0
    agg = ctx.aggregate(k)
    base, slope = _exponent_parts(ctx, agg, q)
    mult = agg.mult

    def f(s):
        m, total, _, _ = combine_chunks(ctx.chunk_sums(base + s * slope, mult))
        return m + math.log(total)

    lo, hi = _root_bracket(ctx, q)
    return bisect_decreasing(f, lo, hi, tol)


def regime_of(s: float, sigma: float, tol: float = EQUAL_TOL) -> str:
    """``'sub'`` below ``tau1 + tau2``, ``'super'`` above, ``'multiplicative'`` at it."""
    if abs(s - sigma) <= tol:
        return "multiplicative"
    return "sub" if s < sigma else "super"


@dataclass(frozen=True)
class PressureEstimate:
    value: float
    k: int
    regime: str

    @property
    def bound(self) -> str:
        return {"sub": "upper", "super": "lower", "multiplicative": "exact"}[self.regime]


def pressure_estimate(ctx, s: float, q: float, k: int) -> PressureEstimate:
    """``Psi_k^{1/k}`` and what it says about ``P(s, q)``.

    Below ``tau1 + tau2`` the level sums are submultiplicative and the value
    bounds ``P`` from above; above it they bound ``P`` from below; at it the
    first level is exact.
    """
    ctx = as_context(ctx)
    regime = regime_of(s, ctx.sigma(q))
    if regime == "multiplicative":
        return PressureEstimate(big_psi(ctx, 1, s, q), 1, regime)
    return PressureEstimate(math.exp(log_big_psi(ctx, k, s, q) / k), k, regime)


@dataclass(frozen=True)
class GammaEstimate:
    """``gamma(q)`` from the doubling ladder of ``gamma_k``.

    ``value`` is the last rung ``gamma_K``. ``successive_difference`` is
    ``|gamma_K - gamma_{K/2}|``. ``uncertainty`` is the larger of that and
    a tail estimate (see :func:`ladder_uncertainty`); both are heuristics,
    not rigorous enclosures. ``direction`` is ``'decreasing'`` when the
    iterates are upper bounds and ``'increasing'`` when they are lower bounds.
    """

    q: float
    value: float
    uncertainty: float
    k_used: int
    regime: str
    ladder: tuple = field(default=())
    successive_difference: float = 0.0

    @property
    def direction(self) -> str:
        return {"sub": "decreasing", "super": "increasing", "multiplicative": "exact"}[self.regime]


def _tail_limit(rungs) -> float:
    ks = np.array([k for k, _ in rungs], float)
    g = np.array([v for _, v in rungs])
    a = np.column_stack([np.ones(3), np.log(ks) / ks, 1.0 / ks])
    return float(np.linalg.solve(a, g)[0])


def ladder_uncertainty(ladder) -> float:
    """Error estimate for the last rung of a doubling ladder ``((k, gamma_k), ...)``.

    Near phase transitions and where the orientation drift vanishes,
    ``gamma_k`` approaches its limit like ``(a log k + b) / k``; the plain
    successive difference then underestimates the error. The model is
    fitted through the last three rungs and again through the three before;
    the estimate is the distance to the newer extrapolated limit plus the
    change between the two extrapolations, and never less than the
    successive difference.
    """
    if len(ladder) < 2:
        return math.inf
    diff = abs(ladder[-1][1] - ladder[-2][1])
    if len(ladder) < 4:
        return diff
    e_new = _tail_limit(ladder[-3:])
    e_old = _tail_limit(ladder[-4:-1])
    return max(diff, abs(ladder[-1][1] - e_new) + abs(e_new - e_old))


def gamma(ctx, q: float, tol: float = 1e-9, k_budget: int = 64) -> GammaEstimate:
    """``gamma(q)`` at the largest affordable level of the ladder ``1, 2, 4, ...``.

    Stops early once the uncertainty drops below ``tol``. If the word budget
    runs out the estimate reports the uncertainty reached so far.
    """
    ctx = as_context(ctx)
    if q == 1.0:
        return GammaEstimate(1.0, 0.0, 0.0, 1, "multiplicative", ((1, 0.0),))
    g1 = gamma_k(ctx, 1, q)
    sig = ctx.sigma(q)
    # gamma_1 and gamma lie on the same side of tau1 + tau2
    regime = regime_of(g1, sig, 1e-12)
    ladder = [(1, g1)]
    if regime == "multiplicative":
        return GammaEstimate(q, g1, 0.0, 1, regime, tuple(ladder))
    k = 1
    unc = math.inf
    while 2 * k <= k_budget:
        try:
            g = gamma_k(ctx, 2 * k, q)
        except BudgetExceededError:
            break
        k *= 2
        ladder.append((k, g))
        unc = ladder_uncertainty(ladder)
        if unc < tol:
            break
    diff = abs(ladder[-1][1] - ladder[-2][1]) if len(ladder) > 1 else math.inf
    return GammaEstimate(q, ladder[-1][1], unc, k, regime, tuple(ladder), diff)
