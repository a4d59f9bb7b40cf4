"""Level-``k`` derivatives ``gamma_k'(q)`` and Hausdorff dimension bounds.

Differentiating ``Psi_k^{gamma_k(q), q} = 1`` implicitly gives ``gamma_k'``
as a quotient of two sums weighted by the singular value function at
``s = gamma_k(q)``. Since those weights sum to one, the same data defines
the alternative sum ``hat_big_psi`` whose root in ``s`` is ``gamma_k'(q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, ConsistencyError, InputError
from .pressure import PressureContext, as_context, combine_chunks, gamma_k

DEN_FLOOR = 1e-14
PRECONDITION_TOL = 1e-8


def _weighted_sums(ctx: PressureContext, k: int, q: float):
    """``(log scale, sum w, sum w*A, sum w*log alpha2)`` with ``log psi_hat = A + s*log alpha2``."""
    agg = ctx.aggregate(k)
    g = gamma_k(ctx, k, q)
    tau = ctx.tau_per_word(agg, q)
    dtau = ctx.dtau_per_word(agg, q)
    expo = q * agg.logp + tau * agg.loga1 + (g - tau) * agg.loga2
    a = agg.logp + dtau * (agg.loga1 - agg.loga2)
    return combine_chunks(ctx.chunk_sums(expo, agg.mult, a, agg.loga2))


def gamma_k_prime(ctx, k: int, q: float) -> float:
    """``gamma_k'(q)`` from one weighted pass over the level-``k`` aggregate."""
    ctx = as_context(ctx)
    _, _, x, y = _weighted_sums(ctx, k, float(q))
    if abs(y) < DEN_FLOOR:
        raise ConsistencyError(f"vanishing denominator in gamma_{k}'({q})")
    return -x / y


def hat_big_psi(ctx, k: int, s: float, q: float) -> float:
    """``sum psi^{gamma_k(q), q}(i) * log(p(i) alpha1^tau' alpha2^(s - tau'))`` over ``I^k``."""
    ctx = as_context(ctx)
    m, _, x, y = _weighted_sums(ctx, k, float(q))
    return math.exp(m) * (x + s * y)


@dataclass(frozen=True)
class LimitEstimate:
    """Doubling ladder of ``gamma_k'(q)`` with its last successive difference."""

    q: float
    value: float
    uncertainty: float
    k_used: int
    regime: str
    ladder: tuple


def _regime(g1p: float, dsig: float) -> str:
    return "sub" if g1p <= dsig else "super"


def limit_gamma_k_prime(ctx, q: float = 1.0, tol: float = 1e-9, k_budget: int = 64) -> LimitEstimate:
    """``lim gamma_k'(q)`` where ``gamma(q) = tau1(q) + tau2(q)``.

    In the sub regime the limit is the infimum of the iterates, in the
    super regime the supremum.
    """
    ctx = as_context(ctx)
    q = float(q)
    g1 = gamma_k(ctx, 1, q)
    sig = ctx.sigma(q)
    if abs(g1 - sig) > PRECONDITION_TOL:
        raise InputError(
            f"limit theory applies only where gamma = tau1+tau2 (q={q}: gamma_1={g1!r}, tau1+tau2={sig!r})", "q"
        )
    d1, d2 = ctx.dtaus(q)
    first = gamma_k_prime(ctx, 1, q)
    regime = _regime(first, d1 + d2)
    ladder = [(1, first)]
    unc = math.inf
    k = 1
    while 2 * k <= k_budget and unc >= tol:
        try:
            v = gamma_k_prime(ctx, 2 * k, q)
        except BudgetExceededError:
            break
        k *= 2
        unc = abs(v - ladder[-1][1])
        ladder.append((k, v))
    return LimitEstimate(q, ladder[-1][1], unc, k, regime, tuple(ladder))


@dataclass(frozen=True)
class DerivativeEstimate:
    """Bound on a one-sided derivative of ``gamma`` at 1 and what it says about ``dim_H``.

    ``side`` is ``'UpperBoundOnRight'`` (sub regime: ``value >= gamma'_+(1)``,
    so ``-value`` bounds ``dim_H`` from below) or ``'LowerBoundOnLeft'``
    (super regime: ``value <= gamma'_-(1)``, so ``-value`` bounds ``dim_H``
    from above).
    """

    value: float
    side: str
    k_used: int
    regime: str
    uncertainty: float
    ladder: tuple

    @property
    def dimension_bound(self) -> float:
        return -self.value

    @property
    def dimension_side(self) -> str:
        return "lower" if self.side == "UpperBoundOnRight" else "upper"


def hausdorff_bounds(ctx, tol: float = 1e-9, k_budget: int = 64) -> DerivativeEstimate:
    """Bound on ``dim_H mu`` from the limit of ``gamma_k'(1)``."""
    est = limit_gamma_k_prime(ctx, 1.0, tol, k_budget)
    side = "UpperBoundOnRight" if est.regime == "sub" else "LowerBoundOnLeft"
    return DerivativeEstimate(est.value, side, est.k_used, est.regime, est.uncertainty, est.ladder)


def gamma_k_prime_many(ctx, ks, q: float) -> np.ndarray:
    """``gamma_k'(q)`` for several levels."""
    return np.array([gamma_k_prime(ctx, k, q) for k in ks])
