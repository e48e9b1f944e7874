"""Moments of the size-biased measure and Hankel-based order selection.

The transformed measure has moments ``nu_m = (m+1)! E(n_{m+1}) / E(n_1)``,
estimated by plugging in the observed frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .histogram import CountHistogram

# relative positivity threshold for Hankel minors
DET_RTOL = 1e-12
MAX_ORDER_CAP = 10


class MomentError(ValueError):
    pass


class NoSingletonsError(MomentError):
    pass


class OrderTooLargeError(MomentError):
    pass


@dataclass(frozen=True)
class MomentSequence:
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise MomentError("empty moment sequence")
        if not all(math.isfinite(v) and v >= 0 for v in vals):
            raise MomentError("moments must be finite and non-negative")
        object.__setattr__(self, "values", vals)

    @property
    def order(self) -> int:
        return len(self.values) - 1

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, m):
        return self.values[m]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


def estimate_moments(h: CountHistogram, order: int) -> MomentSequence:
    """Estimated moments ``nu_0 .. nu_order`` from a histogram.

    Absent frequencies count as zero. The factorial is folded into the
    running ratio ``(m+1)!/n_1`` so it does not overflow on its own.
    """
    if order < 1:
        raise MomentError("order must be >= 1")
    n1 = h[1]
    if n1 <= 0:
        raise NoSingletonsError("no singletons: n_1 = 0, estimator undefined")
    values = [1.0]
    scale = 1.0 / n1  # (m+1)!/n_1
    for m in range(1, order + 1):
        scale *= m + 1
        if not math.isfinite(scale):
            raise OrderTooLargeError(f"order too large: moment {m} overflows")
        n = h[m + 1]
        v = scale * n if n else 0.0
        if not math.isfinite(v):
            raise OrderTooLargeError(f"order too large: moment {m} overflows")
        values.append(v)
    return MomentSequence(tuple(values))


def default_max_order(h: CountHistogram, cap: int = MAX_ORDER_CAP) -> int:
    """Largest P with ``n_{2P}`` observed, capped; at least 1."""
    best = 1
    for p in range(1, cap + 1):
        if h[2 * p] > 0:
            best = p
    return best


def hankel_determinants(nu: MomentSequence | Sequence[float]) -> tuple[list[float], list[float]]:
    """Determinants of ``H_P = (nu_{i+j})`` and ``H'_P = (nu_{i+j+1})``.

    Both are (P+1)x(P+1), P = 0, 1, ... as far as the moments allow, so
    ``H_P`` needs ``nu_{2P}`` and ``H'_P`` needs ``nu_{2P+1}``.
    """
    v = np.asarray(nu.values if isinstance(nu, MomentSequence) else nu, dtype=float)
    M = len(v) - 1
    dets = [float(np.linalg.det(_hankel(v, p, 0))) for p in range(M // 2 + 1)]
    shifted = [float(np.linalg.det(_hankel(v, p, 1))) for p in range((M - 1) // 2 + 1)]
    return dets, shifted


def _hankel(v: np.ndarray, p: int, shift: int) -> np.ndarray:
    idx = np.add.outer(np.arange(p + 1), np.arange(p + 1)) + shift
    return v[idx]


def _positive(dets: list[float], v: np.ndarray, p: int, shift: int) -> bool:
    """``det > tau * det(previous minor) * |new diagonal entry|``.

    With the smaller minors already positive this bounds the newest
    Cholesky pivot relative to its diagonal entry.
    """
    prev = dets[p - 1] if p > 0 else 1.0
    return dets[p] > DET_RTOL * prev * abs(v[2 * p + shift])


def select_order(nu: MomentSequence | Sequence[float], max_order: int) -> int:
    """Largest quadrature order whose Hankel minors are all positive.

    An order-P rule uses ``nu_0 .. nu_{2P-1}`` and needs ``H_k`` and ``H'_k``
    positive definite for ``k < P`` (Sylvester). Never returns less than 1.
    """
    v = np.asarray(nu.values if isinstance(nu, MomentSequence) else nu, dtype=float)
    dets, shifted = hankel_determinants(v)
    limit = min(max_order, (len(v)) // 2)
    P = 1
    for p in range(1, limit):
        # order p+1 additionally needs H_p and H'_p
        if p >= len(dets) or p >= len(shifted):
            break
        if not (_positive(dets, v, p, 0) and _positive(shifted, v, p, 1)):
            break
        P = p + 1
    return P
