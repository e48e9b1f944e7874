"""Replicated simulation experiments: estimates against known truth."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, Optional

import numpy as np

from .bootstrap import bagged_estimate
from .estimator import chao_estimate, estimate
from .moments import MAX_ORDER_CAP
from .quadrature import DEFAULT_FLOOR
from .simulate import (
    THREE_COMPONENT_CASES,
    TWO_COMPONENT_CASES,
    MixtureSpec,
    PowerLawSpec,
    ScrnaSpec,
    dropout_correction,
    make_rng,
    sample_mixture,
    sample_power_law,
    sample_scrna,
)

FAMILIES = ("two-comp", "three-comp", "power-law", "scrna")


def derive_seed(seed: int, *key: int) -> int:
    """Integer seed for a sub-experiment, e.g. the bootstrap inside replicate r."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def mixture_spec(family: str, case: int, S: int) -> MixtureSpec:
    table = TWO_COMPONENT_CASES if family == "two-comp" else THREE_COMPONENT_CASES
    if case not in table:
        raise ValueError(f"{family} has cases {sorted(table)}, got {case}")
    lambdas, weights = table[case]
    return MixtureSpec(lambdas, weights, S)


def _richness_replicate(draw, rep, seed, max_order, floor, boot):
    sample = draw(make_rng(seed, rep))
    h = sample.histogram
    row = {"rep": rep, "S": sample.S, "n0": sample.n0, "D": h.D, "N": h.N}
    try:
        row["chao"] = chao_estimate(h).S_hat
    except (ArithmeticError, ValueError):
        row["chao"] = math.nan
    try:
        est = estimate(h, max_order, floor)
        row["quad"] = est.S_hat
        row["order"] = est.order_used
    except (ArithmeticError, ValueError):
        row["quad"] = math.nan
        row["order"] = 0
    if boot:
        try:
            summ = bagged_estimate(h, boot, max_order, floor, seed=derive_seed(seed, rep, 1))
            row["bagged"] = summ.bagged_S
        except (ArithmeticError, ValueError, RuntimeError):
            row["bagged"] = math.nan
    return row


def _scrna_replicate(spec, rep, seed, max_order, floor):
    sm = sample_scrna(spec, make_rng(seed, rep))
    quad = [dropout_correction(c, spec.n_genes, lambda h: estimate(h, max_order, floor)) for c in sm.counts]
    chao = [dropout_correction(c, spec.n_genes, chao_estimate) for c in sm.counts]
    return {
        "rep": rep,
        "observed": _corr(sm.observed_dropout, sm.true_dropout),
        "chao": _corr(chao, sm.true_dropout),
        "quad": _corr(quad, sm.true_dropout),
    }


def _corr(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.std() == 0 or b.std() == 0:
        return math.nan
    return float(np.corrcoef(a, b)[0, 1])


def run_bench(
    family: str,
    reps: int,
    seed: int,
    case: int = 1,
    scale: int = 10_000,
    alpha: float = 1.0,
    boot: int = 0,
    max_order: int = MAX_ORDER_CAP,
    floor: float = DEFAULT_FLOOR,
    threads: int = 1,
    scrna: Optional[ScrnaSpec] = None,
) -> Iterator[dict]:
    """Yield one row per replicate, in replicate order."""
    if family in ("two-comp", "three-comp"):
        spec = mixture_spec(family, case, scale)
        job: Callable = lambda r: _richness_replicate(
            lambda rng: sample_mixture(spec, rng), r, seed, max_order, floor, boot
        )
    elif family == "power-law":
        pspec = PowerLawSpec(scale, alpha, float(scale))
        job = lambda r: _richness_replicate(
            lambda rng: sample_power_law(pspec, rng), r, seed, max_order, floor, boot
        )
    elif family == "scrna":
        sspec = scrna or ScrnaSpec(n_cells=200, n_genes=2000)
        job = lambda r: _scrna_replicate(sspec, r, seed, max_order, floor)
    else:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            yield from pool.map(job, range(reps))
    else:
        for r in range(reps):
            yield job(r)


def summarize(rows: list[dict], family: str) -> list[dict]:
    """Median and RMSE of ``S_hat`` against truth, per estimator."""
    if not rows:
        return []
    if family == "scrna":
        return [
            {"estimator": name, "median_corr": float(np.nanmedian([r[name] for r in rows]))}
            for name in ("observed", "chao", "quad")
        ]
    out = []
    truth = np.array([r["S"] for r in rows], dtype=float)
    for name in ("chao", "quad", "bagged"):
        if name not in rows[0]:
            continue
        est = np.array([r[name] for r in rows], dtype=float)
        ok = np.isfinite(est)
        err = est[ok] - truth[ok]
        out.append(
            {
                "estimator": name,
                "median": float(np.median(est[ok])) if ok.any() else math.nan,
                "median_error": float(np.median(err)) if ok.any() else math.nan,
                "rmse": float(np.sqrt(np.mean(err**2))) if ok.any() else math.nan,
                "n": int(ok.sum()),
            }
        )
    return out
