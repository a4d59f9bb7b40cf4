import math
from fractions import Fraction as Fr

import numpy as np
import pytest

from boxlike.ifs import AffineMap, BoxLikeIFS, Isometry
from boxlike.presets import equal_squares, example1, example1_trivial, example2

ACCEPTANCE_LINES: list[str] = []

DYADIC = (Fr(1, 2), Fr(1, 4), Fr(1, 8))


def random_ifs(rng, n=None, separated=True, dyadic=True):
    """Random box-like IFS; images are staggered along the diagonal.

    ``separated=None`` draws isometries from the whole group.
    """
    n = int(rng.integers(2, 5)) if n is None else n
    w = rng.integers(1, 20, n)
    tot = int(w.sum())
    isos = list(Isometry)
    maps = []
    for j in range(n):
        if dyadic:
            cx, cy = DYADIC[rng.integers(3)], DYADIC[rng.integers(3)]
        else:
            cx, cy = Fr(int(rng.integers(5, 60)), 100), Fr(int(rng.integers(5, 60)), 100)
        if separated:
            iso = isos[int(rng.choice([0, 2, 4, 5]))]  # identity, rot180, both reflections
        else:
            iso = isos[int(rng.integers(8))]
        maps.append(AffineMap(cx, cy, Fr(int(w[j]), tot), iso, Fr(j, n) * (1 - cx), Fr(n - 1 - j, n) * (1 - cy)))
    if separated is None or not separated:
        # make sure at least one map swaps the axes when asked for a general system
        if separated is False and not any(m.swaps_axes for m in maps):
            m = maps[0]
            maps[0] = AffineMap(m.cx, m.cy, m.p, Isometry.ROT90, m.tx, m.ty)
    return BoxLikeIFS(tuple(maps))


def fd(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2 * h)


@pytest.fixture
def ex1():
    return example1()


@pytest.fixture
def nu():
    return example1_trivial()


@pytest.fixture
def ex2():
    return example2()


@pytest.fixture
def squares():
    return equal_squares(3, 2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


__all__ = ["random_ifs", "fd", "ACCEPTANCE_LINES", "math", "np"]
