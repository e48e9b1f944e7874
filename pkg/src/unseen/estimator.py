"""Lower-bound estimate of the number of unobserved classes.

Order selection -> recurrence -> quadrature -> ``n_0 = n_1 * sum(w_i / x_i)``,
stepping down in order until a usable rule is found. Order 1 is Chao's
lower bound ``n_1^2 / (2 n_2)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .histogram import CountHistogram
from .moments import MAX_ORDER_CAP, MomentError, default_max_order, estimate_moments, select_order
from .quadrature import (
    DEFAULT_FLOOR,
    QuadratureError,
    QuadratureRule,
    golub_welsch,
    chebyshev_recurrence,
    validate_rule,
)

logger = logging.getLogger(__name__)


class EstimationError(ValueError):
    pass


class InsufficientRareClasses(EstimationError):
    pass


@dataclass(frozen=True)
class RichnessEstimate:
    n0_hat: float
    S_hat: float
    order_used: int
    rule: QuadratureRule
    fallback: bool
    D: int

    @property
    def f0_hat(self) -> float:
        """Estimated unobserved fraction ``n0_hat / S_hat``."""
        return self.n0_hat / self.S_hat if self.S_hat > 0 else 0.0

    @property
    def variance_given_D(self) -> float:
        """Binomial variance ``S f0 (1 - f0)`` at the plug-in values."""
        f0 = self.f0_hat
        return self.S_hat * f0 * (1.0 - f0)


def _check_rare(h: CountHistogram) -> None:
    if h[1] <= 0 or h[2] <= 0:
        raise InsufficientRareClasses(
            f"insufficient rare-class information: n_1 = {h[1]}, n_2 = {h[2]} (both must be > 0)"
        )


def _from_rule(h: CountHistogram, rule: QuadratureRule) -> RichnessEstimate:
    n0 = h[1] * rule.integrate_reciprocal()
    D = h.D
    return RichnessEstimate(
        n0_hat=n0,
        S_hat=D + n0,
        order_used=rule.order,
        rule=rule,
        fallback=rule.order == 1,
        D=D,
    )


def chao_estimate(h: CountHistogram) -> RichnessEstimate:
    """Chao's lower bound, computed as the one-point quadrature rule."""
    if h[1] <= 0 or h[2] <= 0:
        raise InsufficientRareClasses(f"Chao undefined: n_1 = {h[1]}, n_2 = {h[2]}")
    nu = estimate_moments(h, 1)
    return _from_rule(h, golub_welsch(chebyshev_recurrence(nu, 1)))


def estimate(
    h: CountHistogram,
    max_order: int = MAX_ORDER_CAP,
    floor: float = DEFAULT_FLOOR,
) -> RichnessEstimate:
    """Estimate ``n_0`` with the highest usable quadrature order.

    The starting order is the largest P <= ``max_order`` with ``n_{2P}``
    observed. Any failure at order P (Hankel check, recurrence breakdown,
    rule outside the admissible region) drops to P - 1; order 1 always
    succeeds once ``n_1, n_2 > 0``.
    """
    _check_rare(h)
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    P = default_max_order(h, max_order)
    if P == 1:
        return chao_estimate(h)

    while P > 1:
        try:
            nu = estimate_moments(h, 2 * P - 1)
            break
        except MomentError:
            P -= 1
    else:
        return chao_estimate(h)

    P = select_order(nu, P)
    while P > 1:
        try:
            rule = golub_welsch(chebyshev_recurrence(nu, P))
        except QuadratureError as exc:
            logger.debug("order %d rejected: %s", P, exc)
            P -= 1
            continue
        verdict = validate_rule(rule, floor)
        if verdict:
            return _from_rule(h, rule)
        logger.debug("order %d rejected: %s", P, verdict.reason)
        P -= 1
    return chao_estimate(h)
