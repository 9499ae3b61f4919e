"""Train/test protocol: repeated split trials, convergence sweeps and sample-size advice."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import ConcentrationEstimate, Dataset, DomainError, TrialReport
from .geometry import empirical_measure
from .search import SearchConfig, SearchResult, adv_risk, search_halfspace

log = logging.getLogger(__name__)


def make_rng(*key: int) -> np.random.Generator:
    """Counter-based (Philox) stream keyed by integers; equal keys give equal streams."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


def train_count(m: int, fraction: float) -> int:
    """round(fraction * m), half up, kept within [1, m - 1]."""
    return min(max(int(math.floor(fraction * m + 0.5)), 1), m - 1)


def split(data: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    if not 0.0 < fraction < 1.0:
        raise DomainError(f"split fraction must lie in (0, 1), got {fraction}")
    if data.m < 2:
        raise ValueError("cannot split fewer than two samples")
    n_train = train_count(data.m, fraction)
    perm = make_rng(seed).permutation(data.m)
    tag = f"{data.source}#seed={seed}"
    return data.subset(perm[:n_train], tag + ":train"), data.subset(perm[n_train:], tag + ":test")


@dataclass(frozen=True, eq=False)
class TrialEstimate(ConcentrationEstimate):
    """Estimate plus the winning candidate's provenance."""

    seed: int = 0
    component: int = -1
    exponent: object = None
    sign: int = 1


def evaluate(result: SearchResult, test: Dataset, cfg: SearchConfig, seed: int = 0) -> TrialEstimate:
    h = result.half_space
    return TrialEstimate(
        half_space=h,
        train_risk=result.train_risk,
        train_adv_risk=result.train_adv_risk,
        test_risk=empirical_measure(test, h),
        test_adv_risk=adv_risk(test, h, cfg.problem),
        seed=seed,
        component=result.component,
        exponent=result.exponent,
        sign=result.sign,
    )


def run_trials(data: Dataset, cfg: SearchConfig, trials: int = 5, base_seed: int = 0,
               fraction: float = 0.5) -> TrialReport:
    """Trial t splits with seed ``base_seed + t``, searches on train, scores on test."""
    if trials < 1:
        raise ValueError("need at least one trial")
    estimates = []
    for t in range(trials):
        seed = base_seed + t
        train, test = split(data, fraction, seed)
        est = evaluate(search_halfspace(train, cfg), test, cfg, seed)
        log.info("trial %d: test risk %.4f adv risk %.4f", t, est.test_risk, est.test_adv_risk)
        estimates.append(est)
    return TrialReport.from_estimates(estimates)


@dataclass(frozen=True)
class ConvergencePoint:
    train_size: int
    mean_test_adv_risk: float
    std_test_adv_risk: float
    trials: int
    mean_test_risk: float = float("nan")
    std_test_risk: float = float("nan")


def convergence_sweep(data: Dataset, cfg: SearchConfig, train_sizes, test_size: int,
                      trials: int, seed: int = 0) -> list[ConvergencePoint]:
    """Test adversarial risk against training-set size.

    Each (size, trial) draws fresh disjoint train and test subsets without
    replacement from ``data``.
    """
    sizes = sorted({int(s) for s in train_sizes})
    if not sizes or sizes[0] < 2:
        raise ValueError("training sizes must be at least 2")
    if trials < 1 or test_size < 1:
        raise ValueError("need at least one trial and a non-empty test set")
    if sizes[-1] + test_size > data.m:
        raise ValueError(
            f"insufficient data: train size {sizes[-1]} + test size {test_size} > {data.m} samples")
    points = []
    for size in sizes:
        risks, advs = [], []
        for t in range(trials):
            perm = make_rng(seed, size, t).permutation(data.m)
            train = data.subset(perm[:size])
            test = data.subset(perm[size:size + test_size])
            est = evaluate(search_halfspace(train, cfg), test, cfg)
            risks.append(est.test_risk)
            advs.append(est.test_adv_risk)
        log.info("size %d: mean adv risk %.4f", size, float(np.mean(advs)))
        points.append(ConvergencePoint(size, float(np.mean(advs)), float(np.std(advs)), trials,
                                       float(np.mean(risks)), float(np.std(risks))))
    return points


def required_sample_size(n: int, delta: float, c1: float = 1.0) -> int:
    """ceil(c1 * n * ln(n) / delta^2) samples for delta generalization error over half spaces."""
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if not c1 > 0:
        raise DomainError(f"c1 must be positive, got {c1}")
    return math.ceil(c1 * n * math.log(n) / delta ** 2)
