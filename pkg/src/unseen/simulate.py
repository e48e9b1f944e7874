"""Synthetic populations with known ground truth.

Three families: discrete Poisson mixtures, power-law abundances, and a
log-normal-Poisson single-cell expression model with logistic dropout.
Every sampler takes a seed and is deterministic given it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from .histogram import CountHistogram, HistogramError, from_counts


def make_rng(seed, *key: int) -> np.random.Generator:
    """Independent stream for ``(seed, *key)``, stable across thread counts."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


@dataclass(frozen=True)
class MixtureSpec:
    lambdas: tuple[float, ...]
    weights: tuple[float, ...]
    S: int

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lambdas)
        w = tuple(float(v) for v in self.weights)
        if len(lam) != len(w) or not lam:
            raise ValueError("lambdas and weights must be non-empty and equal length")
        if any(v <= 0 for v in lam):
            raise ValueError("rates must be positive")
        if len(set(lam)) != len(lam):
            raise ValueError("rates must be distinct")
        if any(v <= 0 for v in w) or abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError("weights must be positive and sum to 1")
        if self.S < 0:
            raise ValueError("S must be non-negative")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "weights", w)

    @property
    def expected_n0(self) -> float:
        return self.S * math.fsum(w * math.exp(-lam) for lam, w in zip(self.lambdas, self.weights))


# two- and three-component cases used for the mixture benchmarks
TWO_COMPONENT_CASES = {
    1: ((1.0, 0.1), (0.9, 0.1)),
    2: ((1.0, 0.1), (0.5, 0.5)),
    3: ((1.0, 0.1), (0.1, 0.9)),
}
THREE_COMPONENT_CASES = {
    1: ((10.0, 1.0, 0.1), (0.1, 0.3, 0.6)),
    2: ((10.0, 1.0, 0.1), (0.3, 0.1, 0.6)),
    3: ((10.0, 1.0, 0.1), (0.1, 0.6, 0.3)),
}


@dataclass(frozen=True)
class SampleResult:
    histogram: CountHistogram
    S: int
    n0: int


def sample_mixture(spec: MixtureSpec, seed) -> SampleResult:
    """Assign each class a rate from the mixture, then draw Poisson counts."""
    rng = make_rng(seed)
    sizes = rng.multinomial(spec.S, spec.weights)
    counts = np.concatenate([rng.poisson(lam, size=k) for lam, k in zip(spec.lambdas, sizes)])
    n0 = int(np.count_nonzero(counts == 0))
    return SampleResult(from_counts(counts), spec.S, n0)


def expected_frequencies(spec: MixtureSpec, j_max: int) -> np.ndarray:
    """``E n_j`` for ``j = 1..j_max`` (index 0 of the result is ``j = 1``)."""
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    j = np.arange(1, j_max + 1)
    out = np.zeros(j_max)
    for lam, w in zip(spec.lambdas, spec.weights):
        out += w * np.exp(-lam + j * math.log(lam) - special.gammaln(j + 1))
    return spec.S * out


def expected_histogram(spec: MixtureSpec, j_max: int, scale: float = 1e6) -> CountHistogram:
    """Expected frequencies times ``scale``, rounded to integers.

    Noise-free estimator input; the estimator is scale-equivariant, so
    divide ``n0_hat`` by ``scale`` to compare with ``spec.expected_n0``.
    """
    freqs = np.rint(expected_frequencies(spec, j_max) * scale)
    if freqs.max() >= 2**62:
        raise OverflowError("scale too large for int64 frequencies")
    return CountHistogram.from_mapping({j: int(n) for j, n in enumerate(freqs, start=1)})


@dataclass(frozen=True)
class PowerLawSpec:
    S: int
    alpha: float
    total: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.total <= 0:
            raise ValueError("total must be positive")
        if self.S < 1:
            raise ValueError("S must be >= 1")

    def rates(self) -> np.ndarray:
        i = np.arange(1, self.S + 1, dtype=float)
        raw = i ** (-self.alpha)
        return raw * (self.total / math.fsum(raw))


def sample_power_law(spec: PowerLawSpec, seed) -> SampleResult:
    rng = make_rng(seed)
    counts = rng.poisson(spec.rates())
    return SampleResult(from_counts(counts), spec.S, int(np.count_nonzero(counts == 0)))


@dataclass(frozen=True)
class ScrnaSpec:
    n_cells: int = 1000
    n_genes: int = 10000
    subpop_fracs: tuple[float, float] = (0.8, 0.2)
    de_frac: float = 0.2
    de_fold: float = 5.0
    d: float = 0.25
    theta_logsd: float = 2.0
    ln_sigma: float = 1.0 / 3.0
    gamma_shape: float = 0.25
    gamma_rate: float = 0.1
    beta_params: tuple[tuple[float, float], tuple[float, float]] = ((2.0, 8.0), (2.0, 38.0))
    dropout_slope: float = 0.5
    # fixed baseline dropout probability, replaces the Beta draws when set
    baseline_p: Optional[float] = None
    dropout: bool = True

    def __post_init__(self):
        if self.n_cells < 1 or self.n_genes < 1:
            raise ValueError("n_cells and n_genes must be positive")
        if not all(0 < f < 1 for f in self.subpop_fracs) or abs(sum(self.subpop_fracs) - 1) > 1e-12:
            raise ValueError("subpopulation fractions must lie in (0,1) and sum to 1")
        if not 0 < self.de_frac < 1:
            raise ValueError("de_frac must lie in (0,1)")
        for name in ("de_fold", "d", "theta_logsd", "ln_sigma", "gamma_shape", "gamma_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.baseline_p is not None and not 0 <= self.baseline_p <= 1:
            raise ValueError("baseline_p must lie in [0,1]")


@dataclass
class ScrnaSample:
    counts: np.ndarray  # cells x genes, after dropout
    true_dropout: np.ndarray  # per cell
    observed_dropout: np.ndarray  # per cell
    subpop: np.ndarray
    batch: np.ndarray
    theta: np.ndarray

    def triplets(self):
        cells, genes = np.nonzero(self.counts)
        return cells, genes, self.counts[cells, genes]


def sample_scrna(spec: ScrnaSpec, seed) -> ScrnaSample:
    """Log-normal-Poisson expression with batch-specific logistic dropout.

    Gene baselines ``lambda_0 ~ Gamma(shape, rate)``; cell depth
    ``theta ~ LN(0, theta_logsd^2)``; the second subpopulation scales a
    ``de_frac`` share of genes by ``de_fold``. The logistic dropout is
    centred on the grand mean of ``theta * lambda``.
    """
    rng = make_rng(seed)
    C, G = spec.n_cells, spec.n_genes
    subpop = (rng.random(C) >= spec.subpop_fracs[0]).astype(np.int8)
    lam0 = rng.gamma(spec.gamma_shape, 1.0 / spec.gamma_rate, size=G)
    de_genes = rng.permutation(G)[: int(round(spec.de_frac * G))]
    phi = np.ones((C, G))
    phi[np.ix_(subpop == 1, de_genes)] = spec.de_fold
    lam = lam0[None, :] * phi
    theta = rng.lognormal(0.0, spec.theta_logsd, size=C)
    noise = rng.lognormal(0.0, spec.ln_sigma, size=(C, G))
    expr = theta[:, None] * lam
    raw = rng.poisson(spec.d * expr * noise)

    # batches split by parity of a shuffled index, independent of subpop
    batch = np.empty(C, dtype=np.int8)
    batch[rng.permutation(C)] = np.arange(C) % 2
    if spec.baseline_p is not None:
        base = np.full(C, spec.baseline_p)
    else:
        (a1, b1), (a2, b2) = spec.beta_params
        base = np.where(batch == 0, rng.beta(a1, b1, size=C), rng.beta(a2, b2, size=C))
    with np.errstate(divide="ignore"):
        beta0 = special.logit(base)
    p = special.expit(beta0[:, None] + spec.dropout_slope * (expr - expr.mean()))
    if spec.dropout:
        dropped = (raw > 0) & (rng.random((C, G)) < p)
    else:
        dropped = np.zeros_like(raw, dtype=bool)
    counts = np.where(dropped, 0, raw)

    true_dropout = dropped.sum(axis=1) / G
    observed_dropout = (counts == 0).sum(axis=1) / G
    return ScrnaSample(counts, true_dropout, observed_dropout, subpop, batch, theta)


def dropout_correction(
    counts: Sequence[int] | np.ndarray,
    n_genes: int,
    estimator: Callable[[CountHistogram], object],
) -> float:
    """Dropout rate ``(n_genes - S_hat) / n_genes`` from a cell's gene counts.

    Falls back to the observed zero fraction when the estimate exceeds
    ``n_genes`` or the estimator fails.
    """
    arr = np.asarray(counts)
    observed = 1.0 - np.count_nonzero(arr) / n_genes
    try:
        S_hat = estimator(from_counts(arr)).S_hat
    except (HistogramError, ArithmeticError, ValueError):
        return observed
    return corrected_rate(S_hat, n_genes, observed)


def corrected_rate(S_hat: float, n_genes: int, observed: float) -> float:
    if not math.isfinite(S_hat) or S_hat > n_genes:
        return observed
    return max(0.0, (n_genes - S_hat) / n_genes)
