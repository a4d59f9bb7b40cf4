"""Box, packing and measure dimensions, and the Legendre upper spectrum."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import closed_form
from .derivative import hausdorff_bounds
from .errors import ConsistencyError, InputError
from .ifs import BoxLikeIFS, check_rosc
from .pressure import as_context, gamma

CONVEXITY_TOL = 1e-8


@dataclass(frozen=True)
class DimensionReport:
    """Dimension summary of an IFS and its measure.

    ``dim_measure`` is a float for the closed-form path and a ``(lower,
    upper)`` pair otherwise. ``candidate`` is set when the rectangular open
    set condition could not be verified, in which case the values are the
    natural candidates only.
    """

    box_packing_dim_F: float
    dim_measure: float | tuple
    method: str
    rosc_verified: bool
    box_uncertainty: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def candidate(self) -> bool:
        return not self.rosc_verified

    @property
    def measure_interval(self) -> tuple:
        if isinstance(self.dim_measure, tuple):
            return self.dim_measure
        return (self.dim_measure, self.dim_measure)

    def to_dict(self) -> dict:
        lo, hi = self.measure_interval
        return {
            "box_packing_dim_F": self.box_packing_dim_F,
            "box_uncertainty": self.box_uncertainty,
            "dim_measure": {"lower": lo, "upper": hi},
            "method": self.method,
            "rosc_verified": self.rosc_verified,
            "label": "candidate" if self.candidate else "verified",
            "details": self.details,
        }


def _separated_report(ifs, rosc, k_budget):
    box = closed_form.closed_gamma(ifs, 0.0)
    try:
        dim = -closed_form.gamma_prime_at_1(ifs)
        method = "ClosedForm"
    except ConsistencyError:
        est = hausdorff_bounds(ifs, k_budget=k_budget)
        dim = -est.value
        method = "LimitAtOne"
    details = {"branch": box.branch.value, "status": box.status.value}
    return DimensionReport(box.value, dim, method, rosc, 0.0, details)


def dimension_report(ifs: BoxLikeIFS, k_budget: int = 64, tol: float = 1e-9) -> DimensionReport:
    """Dimensions from ``gamma(0)`` and the behaviour of ``gamma`` at 1.

    Separated systems use the closed form. Otherwise ``gamma(0)`` comes from
    the pressure ladder and the measure dimension is the interval implied by
    the limit of ``gamma_k'(1)``, closed off by 0 or by the box dimension.
    """
    rosc = bool(check_rosc(ifs).ok)
    if ifs.separated:
        return _separated_report(ifs, rosc, k_budget)
    ctx = as_context(ifs)
    g0 = gamma(ctx, 0.0, tol, k_budget)
    est = hausdorff_bounds(ctx, tol, k_budget)
    bound = -est.value
    if est.dimension_side == "upper":
        interval = (0.0, min(bound, g0.value))
    else:
        interval = (bound, g0.value)
    details = {
        "gamma0_k": g0.k_used,
        "gamma0_direction": g0.direction,
        "derivative_k": est.k_used,
        "derivative_side": est.side,
        "derivative_uncertainty": est.uncertainty,
    }
    return DimensionReport(g0.value, interval, "BoundsOnly", rosc, g0.uncertainty, details)


# ---------------------------------------------------------------------------
# Legendre transform
# ---------------------------------------------------------------------------


def gamma_samples(ifs: BoxLikeIFS, qs, tol: float = 1e-9, k_budget: int = 64):
    """``(q, gamma(q))`` pairs through the cheapest available path."""
    qs = np.asarray(qs, float)
    if ifs.separated:
        vals = [r.value for r in closed_form.branch_grid(ifs, qs).results(ifs)]
    else:
        ctx = as_context(ifs)
        vals = [gamma(ctx, q, tol, k_budget).value for q in qs]
    return list(zip(qs.tolist(), vals))


def _slopes(q, g):
    return np.diff(g) / np.diff(q)


def legendre_spectrum(gamma_samples, alpha_grid=None, n_alpha: int = 201):
    """``gamma*(alpha) = min over sampled q >= 0 of (alpha q + gamma(q))``.

    Only the increasing part is returned: ``alpha`` runs from minus the
    steepest sampled slope up to minus the slope at ``q = 0``.

    Parameters
    ----------
    gamma_samples : sequence of (q, gamma) pairs
        Must be convex in ``q`` up to ``1e-8``.
    alpha_grid : array_like, optional
        Evaluation points; defaults to ``n_alpha`` evenly spaced values
        over the increasing range.

    Returns
    -------
    list of (alpha, f_upper)
    """
    arr = np.asarray(sorted(gamma_samples), float)
    if arr.ndim != 2 or len(arr) < 2:
        raise InputError("need at least two (q, gamma) samples", "gamma_samples")
    q, g = arr[:, 0], arr[:, 1]
    if np.any(q < 0):
        raise InputError("samples must have q >= 0", "gamma_samples")
    sl = _slopes(q, g)
    if len(sl) > 1 and np.min(np.diff(sl)) < -CONVEXITY_TOL * max(1.0, np.max(np.abs(sl))):
        j = int(np.argmin(np.diff(sl)))
        raise InputError(f"gamma samples are not convex near q={q[j + 1]:.6g}", "gamma_samples")
    if alpha_grid is None:
        lo, hi = -sl[-1], -sl[0]
        alpha_grid = np.linspace(lo, hi, n_alpha) if hi > lo else np.array([lo])
    alpha = np.asarray(alpha_grid, float)
    f = np.min(alpha[:, None] * q[None, :] + g[None, :], axis=1)
    return list(zip(alpha.tolist(), f.tolist()))


def numerical_slope(gamma_samples, at: float) -> float:
    """Central slope of sampled ``gamma`` at a sample point."""
    arr = np.asarray(sorted(gamma_samples), float)
    j = int(np.argmin(np.abs(arr[:, 0] - at)))
    if not math.isclose(arr[j, 0], at, abs_tol=1e-12) or j == 0 or j == len(arr) - 1:
        raise InputError(f"{at} is not an interior sample point", "at")
    return (arr[j + 1, 1] - arr[j - 1, 1]) / (arr[j + 1, 0] - arr[j - 1, 0])
