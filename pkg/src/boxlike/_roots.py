"""Bisection root finders for strictly decreasing functions.

Every root in this package is the crossing of a strictly decreasing
function (pressure-type sums in an exponent), so a single robust routine
covers all of them. Brackets are grown by doubling until they straddle the
root; iteration counts are capped.
"""

import math

import numpy as np

from .errors import ConsistencyError

MAX_ITER = 200


def _expand(f, lo, hi):
    flo, fhi = f(lo), f(hi)
    for _ in range(MAX_ITER):
        if flo >= 0.0 and fhi <= 0.0:
            return lo, hi, flo, fhi
        width = hi - lo
        if flo < 0.0:
            hi, fhi = lo, flo
            lo = lo - 2.0 * width
            flo = f(lo)
        else:
            lo, flo = hi, fhi
            hi = hi + 2.0 * width
            fhi = f(hi)
    raise ConsistencyError(f"could not bracket root starting from [{lo}, {hi}]")


def bisect_decreasing(f, lo=-4.0, hi=4.0, tol=1e-12):
    """Root of a strictly decreasing function ``f`` by bisection.

    The bracket ``[lo, hi]`` is expanded geometrically when it does not
    straddle the root. Returns the midpoint of the final bracket, whose
    width is at most ``tol`` unless floating point resolution stops first.
    """
    lo, hi, flo, fhi = _expand(f, float(lo), float(hi))
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    for _ in range(MAX_ITER):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if math.isnan(fm):
            raise ConsistencyError(f"objective returned NaN at {mid}")
        if fm > 0.0:
            lo = mid
        elif fm < 0.0:
            hi = mid
        else:
            return mid
    return 0.5 * (lo + hi)


def bisect_decreasing_vec(f, n, lo=-4.0, hi=4.0, tol=1e-12):
    """Vectorised :func:`bisect_decreasing` for ``n`` independent problems.

    ``f`` maps an array of ``n`` abscissae to ``n`` function values, entry
    ``j`` belonging to problem ``j``.
    """
    lo = np.full(n, float(lo))
    hi = np.full(n, float(hi))
    flo, fhi = f(lo), f(hi)
    for _ in range(MAX_ITER):
        bad_lo = flo < 0.0
        bad_hi = fhi > 0.0
        if not (bad_lo.any() or bad_hi.any()):
            break
        width = hi - lo
        hi = np.where(bad_lo, lo, hi)
        fhi = np.where(bad_lo, flo, fhi)
        lo = np.where(bad_lo, lo - 2.0 * width, lo)
        lo = np.where(bad_hi, hi, lo)
        flo = np.where(bad_hi, fhi, flo)
        hi = np.where(bad_hi, hi + 2.0 * width, hi)
        flo, fhi = f(lo), f(hi)
    else:
        raise ConsistencyError("could not bracket all roots")
    for _ in range(MAX_ITER):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        go_right = fm > 0.0
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)
