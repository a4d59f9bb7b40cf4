"""Reference systems used by the tests, the benchmarks and the CLI."""

from __future__ import annotations

from fractions import Fraction as Fr

from .ifs import AffineMap, BoxLikeIFS, Isometry


def example1() -> BoxLikeIFS:
    """Three maps on a 1/4, 1/2, 1/4 by 1/2, 1/2 grid, two of them rotated.

    Top middle: half-size square reflected in the vertical axis. Bottom
    right and bottom left: 1/4 by 1/2 rectangles rotated by 90 and 270
    degrees. Non-separated.
    """
    return BoxLikeIFS((
        AffineMap(Fr(1, 2), Fr(1, 2), Fr(1, 5), Isometry.REFLECT_V, Fr(1, 4), Fr(1, 2)),
        AffineMap(Fr(1, 4), Fr(1, 2), Fr(4, 25), Isometry.ROT90, Fr(3, 4), Fr(0)),
        AffineMap(Fr(1, 4), Fr(1, 2), Fr(16, 25), Isometry.ROT270, Fr(0), Fr(0)),
    ))


def example1_trivial() -> BoxLikeIFS:
    """:func:`example1` with every isometry replaced by the identity."""
    return BoxLikeIFS(tuple(
        AffineMap(m.cx, m.cy, m.p, Isometry.IDENTITY, m.tx, m.ty) for m in example1().maps
    ))


def example2() -> BoxLikeIFS:
    """Separated system with a phase transition near ``q = 0.237``.

    Grid columns of widths 1/4, 1/2, 1/4 and rows of heights 1/2, 3/10,
    2/10. The outer columns hold 1/4 by 1/2 rectangles in the bottom row and
    the middle column a 1/2 by 2/10 rectangle in the top row. This is the
    only placement of the weights 3/5, 1/5, 1/5 on that grid, one map per
    column, that reproduces the reference constants.
    """
    return BoxLikeIFS((
        AffineMap(Fr(1, 4), Fr(1, 2), Fr(1, 5), Isometry.IDENTITY, Fr(0), Fr(0)),
        AffineMap(Fr(1, 2), Fr(2, 10), Fr(3, 5), Isometry.IDENTITY, Fr(1, 4), Fr(8, 10)),
        AffineMap(Fr(1, 4), Fr(1, 2), Fr(1, 5), Isometry.IDENTITY, Fr(3, 4), Fr(0)),
    ))


def equal_squares(n: int = 4, k: int = 2) -> BoxLikeIFS:
    """``n`` equally weighted squares of side ``1/k`` in the first cells of a ``k``-grid."""
    if not 2 <= n <= k * k:
        raise ValueError("need 2 <= n <= k*k")
    r = Fr(1, k)
    maps = tuple(
        AffineMap(r, r, Fr(1, n), Isometry.IDENTITY, (j % k) * r, (j // k) * r) for j in range(n)
    )
    return BoxLikeIFS(maps)


PRESETS = {
    "example1": example1,
    "example1-trivial": example1_trivial,
    "example2": example2,
    "equal-squares": equal_squares,
}
