"""Box-like iterated function systems, word algebra and the ROSC check.

A box-like map sends the unit square onto an axis-parallel rectangle::

    S(x) = o + T (L (x - c) + c),   T = diag(cx, cy),   c = (1/2, 1/2)

where ``L`` is one of the eight symmetries of the square (acting about its
centre) and ``o = (tx, ty)`` is the lower-left corner of the image
rectangle ``[tx, tx + cx] x [ty, ty + cy]``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from numbers import Rational, Real
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

PROB_TOL = 1e-12


class Isometry(Enum):
    """The dihedral group of the square.

    Rotations are clockwise, matching the orientation convention used for
    carpet figures; ``reflect_v`` is reflection in the vertical axis
    (``x -> -x``).
    """

    IDENTITY = "identity"
    ROT90 = "rot90"
    ROT180 = "rot180"
    ROT270 = "rot270"
    REFLECT_V = "reflect_v"
    REFLECT_H = "reflect_h"
    REFLECT_DIAG = "reflect_diag"
    REFLECT_ANTIDIAG = "reflect_antidiag"

    @property
    def matrix(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return _MATRICES[self]

    @property
    def swaps_axes(self) -> bool:
        return self.matrix[0][0] == 0

    @classmethod
    def from_matrix(cls, m) -> "Isometry":
        key = ((int(m[0][0]), int(m[0][1])), (int(m[1][0]), int(m[1][1])))
        try:
            return _BY_MATRIX[key]
        except KeyError:
            raise ValueError(f"{key} is not a symmetry of the square") from None


_MATRICES = {
    Isometry.IDENTITY: ((1, 0), (0, 1)),
    Isometry.ROT90: ((0, 1), (-1, 0)),
    Isometry.ROT180: ((-1, 0), (0, -1)),
    Isometry.ROT270: ((0, -1), (1, 0)),
    Isometry.REFLECT_V: ((-1, 0), (0, 1)),
    Isometry.REFLECT_H: ((1, 0), (0, -1)),
    Isometry.REFLECT_DIAG: ((0, 1), (1, 0)),
    Isometry.REFLECT_ANTIDIAG: ((0, -1), (-1, 0)),
}
_BY_MATRIX = {m: g for g, m in _MATRICES.items()}


def compose_isometry(g: Isometry, h: Isometry) -> Isometry:
    """Return ``g o h`` (apply ``h`` first)."""
    a, b = g.matrix, h.matrix
    prod = tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(2)) for j in range(2))
        for i in range(2)
    )
    return _BY_MATRIX[prod]


Number = Real  # float or Fraction


def parse_number(value, path: str = "") -> Number:
    """Accept a JSON number or a ``"num/den"`` string (exact rational)."""
    if isinstance(value, bool):
        raise InputError(f"expected a number, got {value!r}", path)
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InputError(f"non-finite number {value!r}", path)
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"cannot parse number {value!r}", path) from None
    raise InputError(f"expected a number, got {type(value).__name__}", path)


def _format_number(x: Number):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return float(x)


@dataclass(frozen=True)
class AffineMap:
    """One box-like map with its probability weight."""

    cx: Number
    cy: Number
    p: Number
    isometry: Isometry = Isometry.IDENTITY
    tx: Number = 0
    ty: Number = 0

    def __post_init__(self):
        for name in ("cx", "cy", "p"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise InputError(f"must lie in (0, 1), got {v}", name)
        if not isinstance(self.isometry, Isometry):
            object.__setattr__(self, "isometry", Isometry(self.isometry))

    @property
    def swaps_axes(self) -> bool:
        return self.isometry.swaps_axes

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Rational) for v in (self.cx, self.cy, self.tx, self.ty))

    def linear_part(self) -> np.ndarray:
        return np.diag([float(self.cx), float(self.cy)]) @ np.array(self.isometry.matrix, float)

    def offset(self) -> np.ndarray:
        """Translation ``u`` with ``S(x) = linear_part() @ x + u``."""
        c = np.array([0.5, 0.5])
        lin = np.array(self.isometry.matrix, float)
        t = np.diag([float(self.cx), float(self.cy)])
        return np.array([float(self.tx), float(self.ty)]) + t @ (c - lin @ c)

    def apply(self, x, y):
        """Image of the point ``(x, y)``; exact for rational inputs."""
        m = self.isometry.matrix
        half = Fraction(1, 2) if self.is_exact else 0.5
        u, v = x - half, y - half
        lx = m[0][0] * u + m[0][1] * v + half
        ly = m[1][0] * u + m[1][1] * v + half
        return self.tx + self.cx * lx, self.ty + self.cy * ly

    def image_rect(self, rect=(0, 0, 1, 1)):
        """Image of the rectangle ``(x0, y0, x1, y1)`` as ``(x0, y0, x1, y1)``."""
        x0, y0, x1, y1 = rect
        pts = [self.apply(x, y) for x in (x0, x1) for y in (y0, y1)]
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        return min(xs), min(ys), max(xs), max(ys)

    def to_dict(self) -> dict:
        return {
            "cx": _format_number(self.cx),
            "cy": _format_number(self.cy),
            "isometry": self.isometry.value,
            "tx": _format_number(self.tx),
            "ty": _format_number(self.ty),
            "p": _format_number(self.p),
        }


@dataclass(frozen=True)
class BoxLikeIFS:
    """A box-like IFS together with its Bernoulli probability vector."""

    maps: tuple[AffineMap, ...]
    rosc_rect: tuple | None = None

    def __post_init__(self):
        maps = tuple(self.maps)
        object.__setattr__(self, "maps", maps)
        if len(maps) < 2:
            raise InputError("|I| >= 2 required", "maps")
        total = sum(m.p for m in maps)
        if all(isinstance(m.p, Rational) for m in maps):
            ok = total == 1
        else:
            ok = abs(float(total) - 1.0) <= PROB_TOL
        if not ok:
            raise InputError(f"probabilities must sum to 1, got {float(total)!r}", "maps[*].p")
        if self.rosc_rect is not None:
            object.__setattr__(self, "rosc_rect", tuple(self.rosc_rect))

    def __len__(self):
        return len(self.maps)

    @property
    def separated(self) -> bool:
        return not any(m.swaps_axes for m in self.maps)

    @property
    def type_flag(self) -> str:
        return "separated" if self.separated else "non-separated"

    @property
    def alpha_min(self) -> float:
        return min(float(min(m.cx, m.cy)) for m in self.maps)

    @property
    def alpha_max(self) -> float:
        return max(float(max(m.cx, m.cy)) for m in self.maps)

    @property
    def p_min(self) -> float:
        return min(float(m.p) for m in self.maps)

    @property
    def p_max(self) -> float:
        return max(float(m.p) for m in self.maps)

    def arrays(self):
        """``(cx, cy, p, swaps)`` as float/bool arrays."""
        cx = np.array([float(m.cx) for m in self.maps])
        cy = np.array([float(m.cy) for m in self.maps])
        p = np.array([float(m.p) for m in self.maps])
        sw = np.array([m.swaps_axes for m in self.maps])
        return cx, cy, p, sw

    def affine_arrays(self):
        """Linear parts ``(n, 2, 2)`` and offsets ``(n, 2)`` of all maps."""
        lin = np.stack([m.linear_part() for m in self.maps])
        off = np.stack([m.offset() for m in self.maps])
        return lin, off

    # -- serialisation -------------------------------------------------
    def to_dict(self) -> dict:
        d = {"maps": [m.to_dict() for m in self.maps]}
        if self.rosc_rect is not None:
            d["rosc_rect"] = [_format_number(v) for v in self.rosc_rect]
        return d

    @classmethod
    def from_dict(cls, data) -> "BoxLikeIFS":
        if isinstance(data, dict) and "ifs" in data and "maps" not in data:
            data = data["ifs"]
        if not isinstance(data, dict) or "maps" not in data:
            raise InputError("expected an object with a 'maps' list", "$")
        raw = data["maps"]
        if not isinstance(raw, list):
            raise InputError("must be a list", "maps")
        if len(raw) < 2:
            raise InputError("|I| >= 2 required", "maps")
        maps = []
        for i, entry in enumerate(raw):
            path = f"maps[{i}]"
            if not isinstance(entry, dict):
                raise InputError("must be an object", path)
            unknown = set(entry) - {"cx", "cy", "isometry", "tx", "ty", "p"}
            if unknown:
                raise InputError(f"unknown keys {sorted(unknown)}", path)
            try:
                iso = Isometry(entry.get("isometry", "identity"))
            except ValueError:
                raise InputError(f"unknown isometry {entry.get('isometry')!r}", f"{path}.isometry") from None
            vals = {}
            for key in ("cx", "cy", "p"):
                if key not in entry:
                    raise InputError("missing", f"{path}.{key}")
                vals[key] = parse_number(entry[key], f"{path}.{key}")
            for key in ("tx", "ty"):
                vals[key] = parse_number(entry.get(key, 0), f"{path}.{key}")
            try:
                maps.append(AffineMap(isometry=iso, **vals))
            except InputError as exc:
                raise InputError(str(exc).split(": ", 1)[-1], f"{path}.{exc.path}") from None
        rect = data.get("rosc_rect")
        if rect is not None:
            if not isinstance(rect, list) or len(rect) != 4:
                raise InputError("must be [x0, y0, x1, y1]", "rosc_rect")
            rect = tuple(parse_number(v, f"rosc_rect[{j}]") for j, v in enumerate(rect))
        return cls(tuple(maps), rect)

    @classmethod
    def from_json(cls, text: str) -> "BoxLikeIFS":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed JSON: {exc}", "$") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "BoxLikeIFS":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


class Projection(Enum):
    HORIZONTAL = 1
    VERTICAL = 2


@dataclass(frozen=True)
class WordData:
    """Spectral data of a word, accumulated in log space.

    ``cls_b`` is True when the composed isometry swaps the axes (class B).
    """

    logp: float
    logb: float
    logh: float
    cls_b: bool = False
    length: int = 0

    @property
    def p(self) -> float:
        return math.exp(self.logp)

    @property
    def b(self) -> float:
        return math.exp(self.logb)

    @property
    def h(self) -> float:
        return math.exp(self.logh)

    @property
    def cls(self) -> str:
        return "B" if self.cls_b else "A"

    @property
    def log_alpha1(self) -> float:
        return max(self.logb, self.logh)

    @property
    def log_alpha2(self) -> float:
        return min(self.logb, self.logh)

    @property
    def alpha1(self) -> float:
        return math.exp(self.log_alpha1)

    @property
    def alpha2(self) -> float:
        return math.exp(self.log_alpha2)

    @property
    def proj(self) -> Projection:
        return projection_choice(self)


EMPTY_WORD = WordData(0.0, 0.0, 0.0, False, 0)


def extend_word(w: WordData, m: AffineMap) -> WordData:
    """Data of ``S_w o S_m``.

    The linear part of ``S_w`` is ``diag(b, h)`` times an isometry; when
    that isometry swaps the axes the new map's horizontal and vertical
    contractions trade places.
    """
    lc, ld = math.log(float(m.cx)), math.log(float(m.cy))
    if w.cls_b:
        lc, ld = ld, lc
    return WordData(
        w.logp + math.log(float(m.p)),
        w.logb + lc,
        w.logh + ld,
        w.cls_b ^ m.swaps_axes,
        w.length + 1,
    )


def word_data(ifs: BoxLikeIFS, word: Iterable[int]) -> WordData:
    w = EMPTY_WORD
    for i in word:
        w = extend_word(w, ifs.maps[i])
    return w


def projection_choice(w: WordData) -> Projection:
    """Projection onto the longest side of the word's rectangle, per class.

    Class A: horizontal iff ``b >= h``. Class B: horizontal iff ``b < h``.
    """
    wide = w.logb >= w.logh
    if not w.cls_b:
        return Projection.HORIZONTAL if wide else Projection.VERTICAL
    return Projection.VERTICAL if wide else Projection.HORIZONTAL


@dataclass
class RoscResult:
    ok: bool
    rect: tuple
    exact: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _open_overlap(a, b) -> bool:
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def check_rosc(ifs: BoxLikeIFS, rect: Sequence | None = None) -> RoscResult:
    """Rectangular open set condition for the open rectangle ``rect``.

    ``rect`` is ``(x0, y0, x1, y1)``; defaults to ``ifs.rosc_rect`` or the
    unit square. Images may share boundary points but not interior points.
    Rational data is compared exactly.
    """
    if rect is None:
        rect = ifs.rosc_rect if ifs.rosc_rect is not None else (0, 0, 1, 1)
    x0, y0, x1, y1 = rect
    if not (x1 > x0 and y1 > y0):
        raise InputError(f"degenerate rectangle {tuple(rect)}", "rosc_rect")
    exact = all(isinstance(v, Rational) for v in rect) and all(m.is_exact for m in ifs.maps)
    if exact:
        rect = tuple(Fraction(v) for v in rect)
    else:
        rect = tuple(float(v) for v in rect)
    images = [m.image_rect(rect) for m in ifs.maps]
    violations = []
    for i, im in enumerate(images):
        if im[0] < rect[0] or im[1] < rect[1] or im[2] > rect[2] or im[3] > rect[3]:
            violations.append(("outside", i))
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            if _open_overlap(images[i], images[j]):
                violations.append(("overlap", i, j))
    return RoscResult(not violations, tuple(rect), exact, violations)
