"""Closed-form branches ``gamma_A``, ``gamma_B`` for separated systems.

For a separated IFS the level-one sum at ``s = tau1 + tau2`` is exactly
multiplicative, and ``gamma`` is given by one of two explicit branches:

* ``gamma_A(q)`` solves ``sum p^q c^tau1 d^(s - tau1) = 1``;
* ``gamma_B(q)`` solves ``sum p^q d^tau2 c^(s - tau2) = 1``.

Both branches sit on the same side of ``tau1 + tau2``. Below it (max case)
``gamma`` is their maximum; above it (min case) ``gamma`` is bounded by
their minimum, with equality under a sign condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._roots import bisect_decreasing, bisect_decreasing_vec
from .errors import ConsistencyError, InputError
from .ifs import BoxLikeIFS
from .pressure import as_context

ROOT_TOL = 1e-12
CASE_SLACK = 1e-9
FD_STEP = 1e-5
FD_TOL = 1e-6
SLOPE_TOL = 1e-6
REFINE_TOL = 1e-8


class Branch(Enum):
    A = "A"
    B = "B"


class Status(Enum):
    EXACT = "Exact"
    UPPER_BOUND_ONLY = "UpperBoundOnly"


class Case(Enum):
    MAX = "MaxCase"
    MIN = "MinCase"


@dataclass(frozen=True)
class CaseInfo:
    """Which side of ``tau1 + tau2`` the branches are on, with the min-case conditions."""

    case: Case
    cond1: float
    cond2: float


@dataclass(frozen=True)
class ClosedFormResult:
    q: float
    value: float
    branch: Branch
    status: Status
    case: Case
    cond1: float
    cond2: float
    gamma_A: float
    gamma_B: float

    @property
    def exact(self) -> bool:
        return self.status is Status.EXACT


def _require_separated(ifs: BoxLikeIFS):
    if not ifs.separated:
        raise InputError("closed-form branches need a separated IFS (no axis-swapping maps)", "maps")


def _logs(ifs: BoxLikeIFS):
    cx, cy, p, _ = ifs.arrays()
    return np.log(cx), np.log(cy), np.log(p)


def _lse(x) -> float:
    m = float(np.max(x))
    return m + math.log(math.fsum(np.exp(x - m)))


def _branch_exponents(ifs, q, branch: Branch):
    """``(base, slope)`` with the branch sum equal to ``sum exp(base + s*slope)``."""
    ctx = as_context(ifs)
    lc, ld, lp = _logs(ifs)
    t1, t2 = ctx.taus(q)
    if branch is Branch.A:
        return q * lp + t1 * (lc - ld), ld
    return q * lp + t2 * (ld - lc), lc


def _branch_value(ifs, q, branch: Branch, tol=ROOT_TOL) -> float:
    _require_separated(ifs)
    q = float(q)
    if q < 0:
        raise InputError(f"q must be >= 0, got {q}", "q")
    if q == 1.0:
        return 0.0
    base, slope = _branch_exponents(ifs, q, branch)
    sig = as_context(ifs).sigma(q)
    return bisect_decreasing(lambda s: _lse(base + s * slope), sig - 5.0, sig + 5.0, tol)


def gamma_A(ifs: BoxLikeIFS, q: float, tol: float = ROOT_TOL) -> float:
    """Root ``s`` of ``sum p^q c^tau1 d^(s - tau1) = 1``."""
    return _branch_value(ifs, q, Branch.A, tol)


def gamma_B(ifs: BoxLikeIFS, q: float, tol: float = ROOT_TOL) -> float:
    """Root ``s`` of ``sum p^q d^tau2 c^(s - tau2) = 1``."""
    return _branch_value(ifs, q, Branch.B, tol)


def _fd(f, q, h=FD_STEP):
    if q >= h:
        return (f(q + h) - f(q - h)) / (2 * h)
    return (-3 * f(q) + 4 * f(q + h) - f(q + 2 * h)) / (2 * h)


def _branch_prime(ifs, q, branch: Branch, check=True) -> float:
    _require_separated(ifs)
    q = float(q)
    ctx = as_context(ifs)
    lc, ld, lp = _logs(ifs)
    s = _branch_value(ifs, q, branch)
    t1, t2 = ctx.taus(q)
    d1, d2 = ctx.dtaus(q, check)
    if branch is Branch.A:
        expo = q * lp + t1 * lc + (s - t1) * ld
        num_terms = lp + d1 * (lc - ld)
        den_terms = ld
    else:
        expo = q * lp + t2 * ld + (s - t2) * lc
        num_terms = lp + d2 * (ld - lc)
        den_terms = lc
    w = np.exp(expo - expo.max())
    val = -math.fsum(w * num_terms) / math.fsum(w * den_terms)
    if check:
        fd = _fd(lambda x: _branch_value(ifs, x, branch), q)
        if abs(fd - val) > FD_TOL:
            raise ConsistencyError(
                f"gamma_{branch.value}'({q}): formula {val!r} vs finite difference {fd!r}"
            )
    return val


def gamma_A_prime(ifs: BoxLikeIFS, q: float, check: bool = True) -> float:
    """``gamma_A'(q)`` by implicit differentiation, cross-checked by central differences."""
    return _branch_prime(ifs, q, Branch.A, check)


def gamma_B_prime(ifs: BoxLikeIFS, q: float, check: bool = True) -> float:
    """``gamma_B'(q)`` by implicit differentiation, cross-checked by central differences."""
    return _branch_prime(ifs, q, Branch.B, check)


def _conditions(ifs, q, ga, gb):
    ctx = as_context(ifs)
    lc, ld, lp = _logs(ifs)
    t1, t2 = ctx.taus(q)
    wa = np.exp(q * lp + t1 * lc + (ga - t1) * ld)
    wb = np.exp(q * lp + t2 * ld + (gb - t2) * lc)
    return math.fsum(wa * (lc - ld)), math.fsum(wb * (ld - lc))


def _case_from(ga, gb, sig, q):
    if max(ga, gb) <= sig + CASE_SLACK:
        return Case.MAX
    if min(ga, gb) >= sig - CASE_SLACK:
        return Case.MIN
    raise ConsistencyError(
        f"branches straddle tau1+tau2 at q={q}: gamma_A={ga!r}, gamma_B={gb!r}, tau1+tau2={sig!r}"
    )


def classify_case(ifs: BoxLikeIFS, q: float) -> CaseInfo:
    """Max case when both branches are at most ``tau1 + tau2``, min case when at least."""
    _require_separated(ifs)
    ga, gb = gamma_A(ifs, q), gamma_B(ifs, q)
    case = _case_from(ga, gb, as_context(ifs).sigma(q), q)
    c1, c2 = _conditions(ifs, float(q), ga, gb)
    return CaseInfo(case, c1, c2)


def uniform_orientation(ifs: BoxLikeIFS) -> Branch | None:
    """``A`` if every map is at least as wide as tall, ``B`` if every map is at least as tall."""
    cx, cy, _, _ = ifs.arrays()
    if np.all(cx >= cy):
        return Branch.A
    if np.all(cy >= cx):
        return Branch.B
    return None


def _decide(ga, gb, case, c1, c2, uniform):
    if uniform is not None:
        return (ga if uniform is Branch.A else gb), uniform, Status.EXACT
    if case is Case.MAX:
        return (ga, Branch.A, Status.EXACT) if ga >= gb else (gb, Branch.B, Status.EXACT)
    status = Status.EXACT if (c1 >= 0 or c2 >= 0) else Status.UPPER_BOUND_ONLY
    return (ga, Branch.A, status) if ga <= gb else (gb, Branch.B, status)


def closed_gamma(ifs: BoxLikeIFS, q: float) -> ClosedFormResult:
    """``gamma(q)`` from the branches, with the status of the identification."""
    info = classify_case(ifs, q)
    ga, gb = gamma_A(ifs, q), gamma_B(ifs, q)
    value, branch, status = _decide(ga, gb, info.case, info.cond1, info.cond2, uniform_orientation(ifs))
    return ClosedFormResult(float(q), value, branch, status, info.case, info.cond1, info.cond2, ga, gb)


def gamma_prime_at_1(ifs: BoxLikeIFS) -> float:
    """``gamma'(1)``: the min of the branch slopes if it is above ``tau1'(1) + tau2'(1)``, else the max."""
    _require_separated(ifs)
    ctx = as_context(ifs)
    da, db = gamma_A_prime(ifs, 1.0), gamma_B_prime(ifs, 1.0)
    d1, d2 = ctx.dtaus(1.0)
    dsig = d1 + d2
    if min(da, db) >= dsig - CASE_SLACK:
        return min(da, db)
    if max(da, db) <= dsig + CASE_SLACK:
        return max(da, db)
    raise ConsistencyError(
        f"branch slopes straddle tau1'(1)+tau2'(1): {da!r}, {db!r} vs {dsig!r}"
    )


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BranchGrid:
    """Branch values and min-case conditions on a grid of ``q``."""

    q: np.ndarray
    tau1: np.ndarray
    tau2: np.ndarray
    gamma_A: np.ndarray
    gamma_B: np.ndarray
    cond1: np.ndarray
    cond2: np.ndarray

    def results(self, ifs: BoxLikeIFS) -> list[ClosedFormResult]:
        uniform = uniform_orientation(ifs)
        out = []
        for j, q in enumerate(self.q):
            ga, gb = float(self.gamma_A[j]), float(self.gamma_B[j])
            case = _case_from(ga, gb, float(self.tau1[j] + self.tau2[j]), q)
            c1, c2 = float(self.cond1[j]), float(self.cond2[j])
            value, branch, status = _decide(ga, gb, case, c1, c2, uniform)
            out.append(ClosedFormResult(float(q), value, branch, status, case, c1, c2, ga, gb))
        return out


def branch_grid(ifs: BoxLikeIFS, qs) -> BranchGrid:
    """Vectorised branches over many ``q`` at once."""
    _require_separated(ifs)
    qs = np.asarray(qs, float)
    if np.any(qs < 0):
        raise InputError("q must be >= 0", "q")
    ctx = as_context(ifs)
    t1 = ctx.tau1.values(qs)
    t2 = ctx.tau2.values(qs)
    lc, ld, lp = _logs(ifs)
    sig = t1 + t2
    base_a = qs[:, None] * lp + t1[:, None] * (lc - ld)
    base_b = qs[:, None] * lp + t2[:, None] * (ld - lc)

    def solve(base, slope):
        def f(s):
            x = base + s[:, None] * slope
            m = x.max(axis=1)
            return m + np.log(np.exp(x - m[:, None]).sum(axis=1))

        return bisect_decreasing_vec(lambda s: f(s + sig), len(qs), -5.0, 5.0, ROOT_TOL) + sig

    ga = solve(base_a, ld)
    gb = solve(base_b, lc)
    ga[qs == 1.0] = 0.0
    gb[qs == 1.0] = 0.0
    wa = np.exp(base_a + ga[:, None] * ld)
    wb = np.exp(base_b + gb[:, None] * lc)
    c1 = wa @ (lc - ld)
    c2 = wb @ (ld - lc)
    return BranchGrid(qs, t1, t2, ga, gb, c1, c2)


@dataclass(frozen=True)
class PhaseTransition:
    q0: float
    left_slope: float
    right_slope: float
    left_branch: Branch
    right_branch: Branch

    def to_dict(self) -> dict:
        return {
            "q0": self.q0,
            "left_slope": self.left_slope,
            "right_slope": self.right_slope,
            "left_branch": self.left_branch.value,
            "right_branch": self.right_branch.value,
        }


def find_phase_transitions(ifs: BoxLikeIFS, q_range=(0.0, 10.0), step: float = 1e-3) -> list[PhaseTransition]:
    """Points where ``gamma`` switches branch with a jump in slope.

    Sign changes of ``gamma_A - gamma_B`` on the grid are refined by
    bisection and reported with the one-sided slopes of the branches active
    on either side. Crossings closer together than ``step`` can be missed.
    """
    _require_separated(ifs)
    q_lo, q_hi = map(float, q_range)
    if step <= 0 or q_hi <= q_lo:
        raise InputError("need q_max > q_min and step > 0", "q_range")
    n = int(math.floor((q_hi - q_lo) / step + 1e-9)) + 1
    qs = q_lo + step * np.arange(n)
    grid = branch_grid(ifs, qs)
    diff = grid.gamma_A - grid.gamma_B
    sign = np.where(np.abs(diff) <= 1e-12, 0, np.sign(diff))
    nz = np.flatnonzero(sign)
    results = []
    chosen = grid.results(ifs)
    for i, j in zip(nz[:-1], nz[1:]):
        if sign[i] == sign[j]:
            continue
        left, right = chosen[i].branch, chosen[j].branch
        if left is right:
            continue

        def g(q, s0=sign[i]):
            return s0 * (gamma_A(ifs, q) - gamma_B(ifs, q))

        q0 = bisect_decreasing(g, qs[i], qs[j], REFINE_TOL)
        lslope = _branch_prime(ifs, q0, left)
        rslope = _branch_prime(ifs, q0, right)
        if abs(lslope - rslope) > SLOPE_TOL:
            results.append(PhaseTransition(q0, lslope, rslope, left, right))
    return results
