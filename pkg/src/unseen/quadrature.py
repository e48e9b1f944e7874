"""Gaussian quadrature rules from a sequence of moments.

Moments -> three-term recurrence (unmodified Chebyshev algorithm) ->
Jacobi matrix eigensystem (Golub-Welsch), tracking only the first
component of each eigenvector.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .moments import MomentSequence

EPS = sys.float_info.epsilon
BREAKDOWN_RTOL = 1e-12
DEFAULT_FLOOR = 1e-8


class QuadratureError(ArithmeticError):
    pass


class RecurrenceBreakdown(QuadratureError):
    def __init__(self, k: int):
        super().__init__(f"recurrence breakdown at order {k}")
        self.k = k


class InvalidRecurrence(QuadratureError):
    pass


class EigensolveFailed(QuadratureError):
    pass


@dataclass(frozen=True)
class ThreeTermRecurrence:
    """Monic recurrence ``p_{k+1}(x) = (x - alpha_k) p_k(x) - beta_k p_{k-1}(x)``.

    ``beta[0]`` is the total mass of the measure.
    """

    alpha: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self):
        if len(self.alpha) != len(self.beta) or not self.alpha:
            raise ValueError("alpha and beta must be non-empty and of equal length")

    @property
    def order(self) -> int:
        return len(self.alpha)


@dataclass(frozen=True)
class QuadratureRule:
    points: tuple[float, ...]
    weights: tuple[float, ...]

    @property
    def order(self) -> int:
        return len(self.points)

    def moments(self, count: int) -> np.ndarray:
        x = np.asarray(self.points)
        w = np.asarray(self.weights)
        return np.array([np.sum(w * x**m) for m in range(count)])

    def integrate_reciprocal(self) -> float:
        return math.fsum(w / x for w, x in zip(self.weights, self.points))


class Verdict(NamedTuple):
    valid: bool
    reason: str

    def __bool__(self):
        return self.valid


def chebyshev_recurrence(nu: MomentSequence | Sequence[float], order: int) -> ThreeTermRecurrence:
    """Unmodified Chebyshev algorithm on moments ``nu_0 .. nu_{2P-1}``.

    Mixed moments ``sigma[k][l]`` are built row by row; each row only needs
    the previous two. Raises :class:`RecurrenceBreakdown` when a pivot
    ``sigma[k][k]`` cancels to (numerically) zero.
    """
    mu = list(nu.values if isinstance(nu, MomentSequence) else nu)
    P = int(order)
    if P < 1:
        raise ValueError("order must be >= 1")
    if len(mu) < 2 * P:
        raise ValueError(f"order {P} needs {2 * P} moments, got {len(mu)}")
    if mu[0] <= 0:
        raise RecurrenceBreakdown(0)
    mu = [float(m) for m in mu[: 2 * P]]

    alpha = [mu[1] / mu[0]]
    beta = [mu[0]]
    prev2 = [0.0] * (2 * P)  # sigma_{k-2, .}
    prev = mu  # sigma_{k-1, .}
    for k in range(1, P):
        cur = [0.0] * (2 * P)
        for l in range(k, 2 * P - k):
            a = prev[l + 1]
            b = alpha[k - 1] * prev[l]
            c = beta[k - 1] * prev2[l]
            cur[l] = a - b - c
            if l == k and abs(cur[l]) <= BREAKDOWN_RTOL * (abs(a) + abs(b) + abs(c)):
                raise RecurrenceBreakdown(k)
        alpha.append(cur[k + 1] / cur[k] - prev[k] / prev[k - 1])
        beta.append(cur[k] / prev[k - 1])
        prev2, prev = prev, cur
    return ThreeTermRecurrence(tuple(alpha), tuple(beta))


def golub_welsch(rec: ThreeTermRecurrence) -> QuadratureRule:
    """Points and weights of the Gauss rule for a recurrence.

    Implicit QL with Wilkinson shifts on the symmetric tridiagonal Jacobi
    matrix. Only the first row of the eigenvector matrix is rotated, so the
    work space is O(P).
    """
    P = rec.order
    if rec.beta[0] <= 0:
        raise InvalidRecurrence("invalid recurrence: beta_0 must be positive")
    for k in range(1, P):
        if not rec.beta[k] > 0:
            raise InvalidRecurrence(f"invalid recurrence: beta_{k} = {rec.beta[k]!r} is not positive")
    d = [float(a) for a in rec.alpha]
    e = [math.sqrt(b) for b in rec.beta[1:]] + [0.0]
    z = [1.0] + [0.0] * (P - 1)

    max_sweeps = 30 * P
    sweeps = 0
    for l in range(P):
        while True:
            m = l
            while m < P - 1:
                if abs(e[m]) <= EPS * (abs(d[m]) + abs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise EigensolveFailed(f"eigensolve failed: no convergence after {max_sweeps} sweeps")
            # Wilkinson shift from the leading 2x2 of the unreduced block
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                # rotate the tracked eigenvector row
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    mass = rec.beta[0]
    order = sorted(range(P), key=lambda i: d[i])
    points = tuple(d[i] for i in order)
    weights = tuple(mass * z[i] * z[i] for i in order)
    return QuadratureRule(points, weights)


def validate_rule(rule: QuadratureRule, floor: float = DEFAULT_FLOOR) -> Verdict:
    """Check that a rule is usable for the reciprocal-moment plug-in.

    A one-point rule carries all the mass, so weight 1 is accepted there.
    """
    x = rule.points
    w = rule.weights
    if not all(math.isfinite(v) for v in (*x, *w)):
        return Verdict(False, "non-finite point or weight")
    if any(b <= a for a, b in zip(x, x[1:])):
        return Verdict(False, "points not distinct")
    if x[0] < floor:
        return Verdict(False, f"point below floor: {x[0]!r} < {floor!r}")
    upper_ok = (lambda v: v <= 1.0) if len(w) == 1 else (lambda v: v < 1.0)
    if not all(v > 0 and upper_ok(v) for v in w):
        return Verdict(False, "weight outside (0, 1)")
    total = math.fsum(w)
    if abs(total - 1.0) > 1e-6:
        return Verdict(False, f"weights sum to {total!r}, not 1")
    return Verdict(True, "ok")


def quadrature_rule(nu: MomentSequence | Sequence[float], order: int) -> QuadratureRule:
    return golub_welsch(chebyshev_recurrence(nu, order))
