"""Exit criteria, one test each, at the tolerances fixed up front."""

import math
import subprocess
import sys
import time

import numpy as np

from unseen.bench import run_bench
from unseen.bootstrap import bagged_estimate
from unseen.estimator import estimate
from unseen.histogram import CountHistogram
from unseen.moments import select_order
from unseen.quadrature import quadrature_rule
from unseen.simulate import (
    TWO_COMPONENT_CASES,
    MixtureSpec,
    ScrnaSpec,
    dropout_correction,
    expected_histogram,
    make_rng,
    sample_mixture,
    sample_scrna,
)

from conftest import atom_moments

SCALED_S = 10_000


def random_histogram(rng):
    freqs = {1: int(rng.integers(1, 10**6)), 2: int(rng.integers(1, 10**6))}
    for j in rng.choice(np.arange(3, 40), size=rng.integers(0, 12), replace=False):
        freqs[int(j)] = int(rng.integers(1, 10**5))
    return CountHistogram.from_mapping(freqs)


def test_01_chao_equivalence(verdict):
    rng = np.random.default_rng(101)
    hists = [random_histogram(rng) for _ in range(200)]
    t0 = time.perf_counter()
    worst = max(abs(estimate(h, 1).n0_hat / (h[1] ** 2 / (2 * h[2])) - 1) for h in hists)
    elapsed = time.perf_counter() - t0
    verdict(1, worst <= 1e-12 and elapsed < 1.0, f"max rel err {worst:.1e} (<=1e-12), {elapsed:.3f}s (<1s)")


def test_02_moment_reproduction(verdict):
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(200):
        P = int(rng.integers(1, 6))
        x = np.sort(rng.uniform(0.1, 10.0, P))
        while np.min(np.diff(x), initial=np.inf) < 0.2:
            x = np.sort(rng.uniform(0.1, 10.0, P))
        nu = atom_moments(x, rng.dirichlet(np.full(P, 2.0)), 2 * P)
        got = quadrature_rule(nu, P).moments(2 * P)
        worst = max(worst, float(np.max(np.abs(got - nu) / np.asarray(nu))))
    verdict(2, worst <= 1e-8, f"max rel moment err {worst:.1e} (<=1e-8)")


def test_03_atom_recovery(verdict):
    rng = np.random.default_rng(103)
    worst = 0.0
    wrong_order = 0
    for _ in range(100):
        P = int(rng.integers(2, 5))
        # distinct atoms: consecutive ratio >= 1.2
        while True:
            x = np.sort(rng.uniform(0.05, 20.0, P))
            if np.all(x[1:] / x[:-1] >= 1.2):
                break
        w = rng.dirichlet(np.ones(P))
        nu = atom_moments(x, w, 2 * P)
        rule = quadrature_rule(nu, P)
        worst = max(worst, np.max(np.abs(np.array(rule.points) - x)), np.max(np.abs(np.array(rule.weights) - w)))
        wrong_order += select_order(nu, P + 2) != P
    verdict(3, worst <= 1e-6 and wrong_order == 0, f"max atom/weight err {worst:.1e} (<=1e-6), order mismatches {wrong_order}")


def test_04_noise_free_mixture(verdict):
    spec = MixtureSpec((1.0, 0.1), (0.5, 0.5), 10**6)
    scale = 1e3
    est = estimate(expected_histogram(spec, 40, scale), 2)
    truth = spec.S * (0.5 * math.exp(-1) + 0.5 * math.exp(-0.1))
    rel = abs(est.n0_hat / scale / truth - 1)
    verdict(4, rel <= 5e-3, f"n0_hat {est.n0_hat / scale:.1f} vs {truth:.1f}, rel err {rel:.1e} (<=5e-3)")


def _mixture_runs(case, reps, seed):
    return list(run_bench("two-comp", reps, seed, case=case, scale=SCALED_S))


def test_05_scaled_mixture_monte_carlo(verdict):
    t0 = time.perf_counter()
    details = []
    ok = True
    for case in (2, 3):
        rows = _mixture_runs(case, 100, 500 + case)
        quad = np.median([r["quad"] for r in rows])
        chao = np.median([r["chao"] for r in rows])
        within = abs(quad / SCALED_S - 1) <= 0.15
        closer = abs(quad - SCALED_S) < abs(chao - SCALED_S)
        ok &= within and closer
        details.append(f"case {case}: median {quad:.0f} ({quad / SCALED_S - 1:+.1%}), chao {chao:.0f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    verdict(5, ok, "; ".join(details) + f"; {elapsed:.1f}s (<60s)")


def test_06_bagging_tames_tails(verdict):
    rows = list(run_bench("three-comp", 50, 600, case=1, scale=SCALED_S, boot=200))
    S = SCALED_S
    raw = np.array([r["quad"] for r in rows])
    bag = np.array([r["bagged"] for r in rows])
    tail_event = np.any(raw > 3 * S)
    bag_ok = np.all(bag <= 10 * S)
    if tail_event:
        ok = bool(bag_ok)
        detail = f"max raw {raw.max() / S:.1f}xS (>3x seen), max bagged {bag.max() / S:.2f}xS (<=10x)"
    else:
        rmse = lambda v: math.sqrt(np.mean((v - S) ** 2))
        ok = bool(bag_ok) and rmse(bag) <= rmse(raw)
        detail = f"no raw tail event; RMSE bagged {rmse(bag):.0f} vs raw {rmse(raw):.0f}"
    verdict(6, ok, detail)


def test_07_power_law_ordering(verdict):
    t0 = time.perf_counter()
    rows = list(run_bench("power-law", 50, 700, scale=SCALED_S, alpha=1.0))
    quad = np.median([abs(r["quad"] - r["S"]) for r in rows])
    chao = np.median([abs(r["chao"] - r["S"]) for r in rows])
    elapsed = time.perf_counter() - t0
    verdict(7, quad <= chao and elapsed < 120, f"median |err| quad {quad:.0f} vs chao {chao:.0f}; {elapsed:.1f}s (<120s)")


def test_08_variance_decomposition(verdict):
    details = []
    ok = True
    for case in (2, 3):
        lambdas, weights = TWO_COMPONENT_CASES[case]
        spec = MixtureSpec(lambdas, weights, SCALED_S)
        covered = 0
        for r in range(100):
            sample = sample_mixture(spec, make_rng(800 + case, r))
            summ = bagged_estimate(sample.histogram, 200, seed=r)
            ok &= summ.variance == summ.var_within + summ.var_between
            ok &= summ.var_within >= 0 and summ.var_between >= 0
            covered += summ.ci_lower <= sample.n0 <= summ.ci_upper
        ok &= covered >= 80
        details.append(f"case {case}: coverage {covered}/100")
    verdict(8, ok, "; ".join(details) + " (>=80), components sum and non-negative")


def test_09_scrna_dropout_correction(verdict):
    t0 = time.perf_counter()
    spec = ScrnaSpec(n_cells=200, n_genes=2000)
    sm = sample_scrna(spec, 900)
    corrected = [dropout_correction(c, spec.n_genes, estimate) for c in sm.counts]
    r_corr = np.corrcoef(corrected, sm.true_dropout)[0, 1]
    r_obs = np.corrcoef(sm.observed_dropout, sm.true_dropout)[0, 1]
    elapsed = time.perf_counter() - t0
    verdict(9, r_corr > r_obs and elapsed < 300, f"corr corrected {r_corr:.3f} vs observed {r_obs:.3f}; {elapsed:.1f}s (<300s)")


CLI_CASES = [
    ["bootstrap", "--hist", "{fixtures}/tcr_prefix.txt", "--reps", "200", "--seed", "10"],
    ["estimate", "--hist", "{fixtures}/tcr_prefix.txt", "--seed", "10"],
    ["bench", "two-comp", "--case", "2", "--scale", "2000", "--reps", "8", "--boot", "20", "--seed", "10"],
    ["bench", "scrna", "--cells", "20", "--genes", "200", "--reps", "2", "--seed", "10"],
    ["simulate", "power-law", "--scale", "3000", "--seed", "10"],
]


def test_10_determinism(verdict):
    from pathlib import Path

    fixtures = Path(__file__).parent / "fixtures"
    mismatches = []
    for case in CLI_CASES:
        argv = [a.format(fixtures=fixtures) for a in case]
        outputs = set()
        for threads in ("1", "4", "1", "4"):
            proc = subprocess.run(
                [sys.executable, "-m", "unseen", *argv, "--threads", threads, "--format", "json"],
                capture_output=True, check=True,
            )
            outputs.add(proc.stdout)
        if len(outputs) != 1:
            mismatches.append(argv[0])
    verdict(10, not mismatches, f"{len(CLI_CASES)} invocations x threads {{1,4}} x 2 runs; mismatches {mismatches}")
