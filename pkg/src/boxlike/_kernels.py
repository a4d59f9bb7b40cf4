"""Hot numeric kernels: numba implementations with pure-numpy fallbacks.

Set ``BOXLIKE_DISABLE_NUMBA=1`` (or run without numba installed) to use the
numpy path. Both paths are importable as ``nb_*`` / ``np_*`` so they can be
compared directly; the unprefixed names are the active selection.

Kernels
-------
chunk_sums      shifted, compensated sums of ``mult * exp(exponent)``
                over fixed-size chunks (pressure sums, derivative sums)
cover_2d        delta-stopping cover of a box-like IFS (rectangles, masses),
                stopping on the shorter or the longer side
cover_1d        ratio-stopping cover of a 1-D graph-directed system
group_powers    sum of (grouped mass)^q over occupied grid cells
raster          mass accumulation into a pixel grid
"""

import math
import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("BOXLIKE_DISABLE_NUMBA", "").lower() not in ("1", "true", "yes")

CHUNK = 8192


def _njit(*args, **kwargs):
    if not HAVE_NUMBA:
        return lambda f: f
    return numba.njit(*args, cache=True, nogil=True, **kwargs)


# ---------------------------------------------------------------------------
# chunked shifted sums
# ---------------------------------------------------------------------------
# For exponents e_j and multiplicities m_j, each chunk c returns its maximum
# exponent M_c and the Neumaier-compensated sums
#     S_c = sum m_j exp(e_j - M_c),
#     X_c = sum m_j exp(e_j - M_c) x_j,   Y_c = sum m_j exp(e_j - M_c) y_j.
# Chunk boundaries are fixed, so combining partials in chunk order gives the
# same bits regardless of how chunks are scheduled across threads.


@_njit()
def _neumaier_add(s, c, v):
    t = s + v
    if abs(s) >= abs(v):
        c += (s - t) + v
    else:
        c += (v - t) + s
    return t, c


@_njit()
def nb_chunk_sums(expo, mult, x, y, chunk, with_xy):
    n = expo.shape[0]
    nc = (n + chunk - 1) // chunk
    out = np.empty((nc, 4))
    for ci in range(nc):
        lo = ci * chunk
        hi = min(n, lo + chunk)
        m = -np.inf
        for j in range(lo, hi):
            if expo[j] > m:
                m = expo[j]
        s = 0.0
        cs = 0.0
        sx = 0.0
        cx = 0.0
        sy = 0.0
        cy = 0.0
        for j in range(lo, hi):
            w = mult[j] * math.exp(expo[j] - m)
            s, cs = _neumaier_add(s, cs, w)
            if with_xy:
                sx, cx = _neumaier_add(sx, cx, w * x[j])
                sy, cy = _neumaier_add(sy, cy, w * y[j])
        out[ci, 0] = m
        out[ci, 1] = s + cs
        out[ci, 2] = sx + cx
        out[ci, 3] = sy + cy
    return out


def np_chunk_sums(expo, mult, x, y, chunk, with_xy):
    n = expo.shape[0]
    starts = np.arange(0, n, chunk)
    out = np.empty((len(starts), 4))
    out[:, 0] = np.maximum.reduceat(expo, starts)
    shift = np.repeat(out[:, 0], np.diff(np.append(starts, n)))
    w = mult * np.exp(expo - shift)
    bounds = list(starts) + [n]
    for ci in range(len(starts)):
        sl = slice(bounds[ci], bounds[ci + 1])
        out[ci, 1] = math.fsum(w[sl])
        if with_xy:
            out[ci, 2] = math.fsum(w[sl] * x[sl])
            out[ci, 3] = math.fsum(w[sl] * y[sl])
        else:
            out[ci, 2] = out[ci, 3] = 0.0
    return out


# ---------------------------------------------------------------------------
# delta-stopping cover in the plane
# ---------------------------------------------------------------------------
# Maps are given as lin (n, 2, 2) and off (n, 2); a word's map is
# x -> M x + u. Output rows: x0, y0, x1, y1, mass, alpha2(word),
# alpha2(parent). Returns (rows, count); count == -1 signals the budget
# was exceeded.


@_njit()
def _grow(out, budget):
    new = np.empty((min(budget, 2 * out.shape[0]), out.shape[1]))
    new[: out.shape[0]] = out
    return new


@_njit()
def nb_cover_2d(lin, off, probs, delta, budget, max_depth, longer=False):
    n = probs.shape[0]
    size = (max_depth + 2) * n
    st = np.empty((size, 8))  # M00 M01 M10 M11 u0 u1 mass parent_size
    out = np.empty((min(budget, 65536), 7))
    top = 0
    for j in range(n - 1, -1, -1):
        st[top, 0] = lin[j, 0, 0]
        st[top, 1] = lin[j, 0, 1]
        st[top, 2] = lin[j, 1, 0]
        st[top, 3] = lin[j, 1, 1]
        st[top, 4] = off[j, 0]
        st[top, 5] = off[j, 1]
        st[top, 6] = probs[j]
        st[top, 7] = 1.0
        top += 1
    cnt = 0
    while top > 0:
        top -= 1
        a, b, c, d = st[top, 0], st[top, 1], st[top, 2], st[top, 3]
        u0, u1, mass, pa = st[top, 4], st[top, 5], st[top, 6], st[top, 7]
        w = abs(a) + abs(b)
        h = abs(c) + abs(d)
        a2 = max(w, h) if longer else min(w, h)
        if a2 < delta:
            if cnt >= out.shape[0]:
                if cnt >= budget:
                    return out, -1
                out = _grow(out, budget)
            out[cnt, 0] = u0 + min(0.0, a) + min(0.0, b)
            out[cnt, 1] = u1 + min(0.0, c) + min(0.0, d)
            out[cnt, 2] = out[cnt, 0] + w
            out[cnt, 3] = out[cnt, 1] + h
            out[cnt, 4] = mass
            out[cnt, 5] = a2
            out[cnt, 6] = pa
            cnt += 1
            continue
        for j in range(n - 1, -1, -1):
            e, f, g, k = lin[j, 0, 0], lin[j, 0, 1], lin[j, 1, 0], lin[j, 1, 1]
            st[top, 0] = a * e + b * g
            st[top, 1] = a * f + b * k
            st[top, 2] = c * e + d * g
            st[top, 3] = c * f + d * k
            st[top, 4] = u0 + a * off[j, 0] + b * off[j, 1]
            st[top, 5] = u1 + c * off[j, 0] + d * off[j, 1]
            st[top, 6] = mass * probs[j]
            st[top, 7] = a2
            top += 1
    return out, cnt


def np_cover_2d(lin, off, probs, delta, budget, max_depth, longer=False):
    n = probs.shape[0]
    M = lin.copy()
    U = off.copy()
    P = probs.copy()
    PA = np.ones(n)
    done = []
    cnt = 0
    while len(P):
        w = np.abs(M[:, 0, 0]) + np.abs(M[:, 0, 1])
        h = np.abs(M[:, 1, 0]) + np.abs(M[:, 1, 1])
        a2 = np.maximum(w, h) if longer else np.minimum(w, h)
        stop = a2 < delta
        if stop.any():
            Ms, Us = M[stop], U[stop]
            x0 = Us[:, 0] + np.minimum(0, Ms[:, 0, 0]) + np.minimum(0, Ms[:, 0, 1])
            y0 = Us[:, 1] + np.minimum(0, Ms[:, 1, 0]) + np.minimum(0, Ms[:, 1, 1])
            rows = np.column_stack([x0, y0, x0 + w[stop], y0 + h[stop], P[stop], a2[stop], PA[stop]])
            cnt += len(rows)
            if cnt > budget:
                return np.empty((0, 7)), -1
            done.append(rows)
        keep = ~stop
        M, U, P, a2 = M[keep], U[keep], P[keep], a2[keep]
        if not len(P):
            break
        if len(P) * n > 4 * budget:
            return np.empty((0, 7)), -1
        # children: word i followed by letter j, M_ij = M_i L_j, u_ij = u_i + M_i o_j
        M_new = np.einsum("iab,jbc->ijac", M, lin).reshape(-1, 2, 2)
        U_new = (U[:, None, :] + np.einsum("iab,jb->ija", M, off)).reshape(-1, 2)
        P = (P[:, None] * probs[None, :]).reshape(-1)
        PA = np.repeat(a2, n)
        M, U = M_new, U_new
    out = np.concatenate(done) if done else np.empty((0, 7))
    return out, len(out)


# ---------------------------------------------------------------------------
# 1-D graph-directed cover
# ---------------------------------------------------------------------------
# Edges: src, dst (int), a, b, w with edge map x -> a + b x (b signed).
# Starting at vertex v0, a path stops the first time its |scale| <= r.
# Output rows: left, right, mass.


@_njit()
def nb_cover_1d(src, dst, ea, eb, ew, v0, r, budget, max_depth):
    ne = src.shape[0]
    st = np.empty(((max_depth + 2) * ne, 4))  # u v mass vertex
    out = np.empty((min(budget, 65536), 3))
    top = 0
    st[0, 0] = 0.0
    st[0, 1] = 1.0
    st[0, 2] = 1.0
    st[0, 3] = v0
    top = 1
    cnt = 0
    while top > 0:
        top -= 1
        u, v, mass, vert = st[top, 0], st[top, 1], st[top, 2], int(st[top, 3])
        if abs(v) <= r:
            if cnt >= out.shape[0]:
                if cnt >= budget:
                    return out, -1
                out = _grow(out, budget)
            out[cnt, 0] = min(u, u + v)
            out[cnt, 1] = max(u, u + v)
            out[cnt, 2] = mass
            cnt += 1
            continue
        for e in range(ne - 1, -1, -1):
            if src[e] != vert:
                continue
            st[top, 0] = u + v * ea[e]
            st[top, 1] = v * eb[e]
            st[top, 2] = mass * ew[e]
            st[top, 3] = dst[e]
            top += 1
    return out, cnt


def np_cover_1d(src, dst, ea, eb, ew, v0, r, budget, max_depth):
    U = np.zeros(1)
    V = np.ones(1)
    P = np.ones(1)
    X = np.array([v0])
    done = []
    cnt = 0
    while len(P):
        stop = np.abs(V) <= r
        if stop.any():
            lo = np.minimum(U[stop], U[stop] + V[stop])
            hi = np.maximum(U[stop], U[stop] + V[stop])
            done.append(np.column_stack([lo, hi, P[stop]]))
            cnt += int(stop.sum())
            if cnt > budget:
                return np.empty((0, 3)), -1
        keep = ~stop
        U, V, P, X = U[keep], V[keep], P[keep], X[keep]
        if not len(P):
            break
        # all (path, edge) pairs whose edge leaves the path's end vertex
        pi, ei = np.nonzero(X[:, None] == src[None, :])
        U = U[pi] + V[pi] * ea[ei]
        V = V[pi] * eb[ei]
        P = P[pi] * ew[ei]
        X = dst[ei]
    out = np.concatenate(done) if done else np.empty((0, 3))
    return out, len(out)


# ---------------------------------------------------------------------------
# grouped moment sums
# ---------------------------------------------------------------------------


@_njit()
def _nb_group_reduce(keys, mass, q):
    total = 0.0
    comp = 0.0
    cur = keys[0]
    acc = 0.0
    for j in range(keys.shape[0]):
        if keys[j] != cur:
            if acc > 0.0:
                total, comp = _neumaier_add(total, comp, 1.0 if q == 0.0 else acc ** q)
            cur = keys[j]
            acc = 0.0
        acc += mass[j]
    if acc > 0.0:
        total, comp = _neumaier_add(total, comp, 1.0 if q == 0.0 else acc ** q)
    return total + comp


def nb_group_powers(keys, mass, q):
    if len(keys) == 0:
        return 0.0
    # numpy's sort outperforms the jitted one; the reduction is compiled
    order = np.argsort(keys)
    return _nb_group_reduce(keys[order], mass[order], float(q))


def np_group_powers(keys, mass, q):
    if len(keys) == 0:
        return 0.0
    _, inv = np.unique(keys, return_inverse=True)
    sums = np.bincount(inv.ravel(), weights=mass)
    sums = sums[sums > 0]
    if q == 0.0:
        return float(len(sums))
    return math.fsum(sums ** q)


# ---------------------------------------------------------------------------
# rasterisation
# ---------------------------------------------------------------------------
# Each cell's mass is spread evenly over the pixels its rectangle touches.


@_njit()
def nb_raster(rects, mass, res):
    img = np.zeros((res, res))
    for k in range(rects.shape[0]):
        i0 = min(res - 1, max(0, int(math.floor(rects[k, 0] * res))))
        j0 = min(res - 1, max(0, int(math.floor(rects[k, 1] * res))))
        i1 = min(res, max(i0 + 1, int(math.ceil(rects[k, 2] * res))))
        j1 = min(res, max(j0 + 1, int(math.ceil(rects[k, 3] * res))))
        share = mass[k] / ((i1 - i0) * (j1 - j0))
        for j in range(j0, j1):
            for i in range(i0, i1):
                img[j, i] += share
    return img


def np_raster(rects, mass, res):
    img = np.zeros((res, res))
    i0 = np.clip(np.floor(rects[:, 0] * res).astype(np.int64), 0, res - 1)
    j0 = np.clip(np.floor(rects[:, 1] * res).astype(np.int64), 0, res - 1)
    i1 = np.clip(np.ceil(rects[:, 2] * res).astype(np.int64), i0 + 1, res)
    j1 = np.clip(np.ceil(rects[:, 3] * res).astype(np.int64), j0 + 1, res)
    single = (i1 - i0 == 1) & (j1 - j0 == 1)
    np.add.at(img, (j0[single], i0[single]), mass[single])
    for k in np.nonzero(~single)[0]:
        img[j0[k]:j1[k], i0[k]:i1[k]] += mass[k] / ((i1[k] - i0[k]) * (j1[k] - j0[k]))
    return img


if USE_NUMBA:
    chunk_sums = nb_chunk_sums
    cover_2d = nb_cover_2d
    cover_1d = nb_cover_1d
    group_powers = nb_group_powers
    raster = nb_raster
else:
    chunk_sums = np_chunk_sums
    cover_2d = np_cover_2d
    cover_1d = np_cover_1d
    group_powers = np_group_powers
    raster = np_raster

BACKEND = "numba" if USE_NUMBA else "numpy"
