"""Multinomial bootstrap, median bagging and total-variance estimate."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .estimator import estimate
from .histogram import CountHistogram
from .moments import MAX_ORDER_CAP
from .quadrature import DEFAULT_FLOOR
from .simulate import make_rng

logger = logging.getLogger(__name__)


class BootstrapExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class BootstrapSummary:
    bagged_n0: float
    variance: float
    var_within: float  # median of S f0 (1 - f0), estimates E(Var(n0 | D))
    var_between: float  # sample variance of replicate n0, estimates Var(E(n0 | D))
    ci_lower: float
    ci_upper: float
    replicates: int
    n_failed: int
    seed: int
    D: int
    estimates: tuple[float, ...]

    @property
    def bagged_S(self) -> float:
        return self.D + self.bagged_n0


def resample(h: CountHistogram, seed) -> CountHistogram:
    """Multinomial(D, n_j / D) redraw of the frequencies over observed multiplicities."""
    rng = make_rng(seed)
    n = h.frequencies
    D = int(n.sum())
    m = rng.multinomial(D, n / D)
    keep = m > 0
    return CountHistogram(h.multiplicities[keep], m[keep])


def _replicate(h, seed, b, max_order, floor):
    try:
        est = estimate(resample(h, make_rng(seed, b)), max_order, floor)
    except (ArithmeticError, ValueError) as exc:
        logger.debug("replicate %d failed: %s", b, exc)
        return None
    return est.n0_hat, est.variance_given_D


def bagged_estimate(
    h: CountHistogram,
    replicates: int = 1000,
    max_order: int = MAX_ORDER_CAP,
    floor: float = DEFAULT_FLOOR,
    seed: int = 0,
    ci: tuple[float, float] = (2.5, 97.5),
    threads: int = 1,
) -> BootstrapSummary:
    """Median-bagged ``n_0`` over ``replicates`` multinomial resamples.

    Replicate ``b`` draws from the stream ``(seed, b)``, so results do not
    depend on ``threads``. Failed replicates are excluded and counted.
    """
    if replicates < 2:
        raise ValueError("need at least 2 replicates")
    args = [(h, seed, b, max_order, floor) for b in range(replicates)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda a: _replicate(*a), args))
    else:
        results = [_replicate(*a) for a in args]

    ok = [r for r in results if r is not None]
    n_failed = replicates - len(ok)
    if not ok:
        raise BootstrapExhausted(f"bootstrap exhausted: all {replicates} replicates failed")
    n0 = np.array([r[0] for r in ok])
    within = float(np.median([r[1] for r in ok]))
    between = float(np.var(n0, ddof=1)) if len(n0) > 1 else 0.0
    lo, hi = np.percentile(n0, ci)
    return BootstrapSummary(
        bagged_n0=float(np.median(n0)),
        variance=within + between,
        var_within=within,
        var_between=between,
        ci_lower=float(lo),
        ci_upper=float(hi),
        replicates=replicates,
        n_failed=n_failed,
        seed=int(seed),
        D=h.D,
        estimates=tuple(n0.tolist()),
    )
