"""Heuristic search for a slowly-expanding half space.

Candidates are the principal components of the training data, pushed toward
their dominant axis by :func:`pow_transform`, in both signs. Each candidate's
bias is the alpha-quantile of the projections, which makes the half space
feasible by construction; the candidate whose ε-expansion covers the fewest
training points wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ConcentrationProblem, Dataset, DomainError, HalfSpace, lp_norm
from .geometry import empirical_measure, expand
from .spectral import PrincipalComponents, axis_limit, eigendecompose, pow_transform, sample_covariance

DEFAULT_EXPONENTS = (1, 2, 4, 8, 16, 32, 64)
AXIS = "axis"

# projection columns evaluated per matrix product; bounds memory at m * BATCH floats
BATCH_COLUMNS = 512


@dataclass(frozen=True)
class SearchConfig:
    problem: ConcentrationProblem
    exponent_schedule: tuple = DEFAULT_EXPONENTS
    include_axis_limit: bool = True

    def __post_init__(self):
        sched = tuple(int(s) for s in self.exponent_schedule)
        if not sched:
            raise ValueError("exponent schedule is empty")
        if any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("exponent schedule must be strictly increasing")
        if sched[0] != 1 or any(s < 1 for s in sched):
            raise ValueError("exponent schedule must consist of positive integers and contain 1")
        object.__setattr__(self, "exponent_schedule", sched)


@dataclass(frozen=True, eq=False)
class SearchResult:
    half_space: HalfSpace
    train_risk: float
    train_adv_risk: float
    component: int
    exponent: object  # int, or AXIS for the axis-limit candidate
    sign: int
    candidates: int = field(default=0)


def order_statistic_index(alpha: float, m: int) -> int:
    """Smallest k with k / m >= alpha (ceil(alpha * m)), at least 1.

    The comparison is done in floating point, the same way feasibility is
    checked, so 0.07 * 100 = 7.000000000000001 still gives k = 7.
    """
    k = min(max(math.ceil(alpha * m), 1), m)
    while k > 1 and (k - 1) / m >= alpha:
        k -= 1
    while k < m and k / m < alpha:
        k += 1
    return k


def quantile_bias(data: Dataset, w, alpha: float) -> float:
    """b = -t, t the ceil(alpha*m)-th smallest projection wᵀx_i, so at least
    that many rows satisfy wᵀx + b <= 0."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    proj = data.samples @ np.asarray(w, dtype=float)
    k = order_statistic_index(alpha, data.m)
    t = np.partition(proj, k - 1)[k - 1]
    return -float(t)


def adv_risk(data: Dataset, h: HalfSpace, problem: ConcentrationProblem) -> float:
    """Empirical measure of the ε-expansion of ``h``."""
    return empirical_measure(data, expand(h, problem.epsilon, problem.metric))


def _candidate_block(comps: PrincipalComponents, idx: np.ndarray, schedule, with_axis: bool):
    """Weight columns for components ``idx``: every exponent, then the axis limit."""
    v = comps.vectors[:, idx]
    cols, comp_ids, exps = [], [], []
    for rank, s in enumerate(schedule):
        cols.append(v if s == 1 else pow_transform(v, s))
        comp_ids.append(idx)
        exps.append(np.full(idx.size, rank))
    if with_axis:
        j = np.argmax(np.abs(v), axis=0)
        ax = np.zeros_like(v)
        ax[j, np.arange(idx.size)] = np.sign(v[j, np.arange(idx.size)])
        cols.append(ax)
        comp_ids.append(idx)
        exps.append(np.full(idx.size, len(schedule)))
    return np.hstack(cols), np.concatenate(comp_ids), np.concatenate(exps)


def _score_block(x: np.ndarray, w: np.ndarray, k: int, shift: np.ndarray):
    """Adversarial counts of +w and -w candidates.

    For +w: t = k-th smallest projection, count(proj <= t + shift).
    For -w: projections negate, so t' = -(k-th largest), count(proj >= -(t' + shift)).
    """
    m = x.shape[0]
    proj = x @ w
    part = np.partition(proj, (k - 1, m - k), axis=0)
    t_pos = part[k - 1]
    t_neg = -part[m - k]
    pos = np.count_nonzero(proj - t_pos <= shift, axis=0)
    neg = np.count_nonzero(-proj - t_neg <= shift, axis=0)
    return pos, neg


def search_halfspace(train: Dataset, cfg: SearchConfig,
                     components: PrincipalComponents | None = None) -> SearchResult:
    """Best half space among power-transformed principal components.

    Ties on the adversarial count go to the smaller ‖w‖_q, then the earlier
    component, then the smaller exponent, then the positive sign.
    """
    if train.m < 2:
        raise ValueError("search needs at least two training samples")
    problem = cfg.problem
    metric = problem.metric
    if components is None:
        components = eigendecompose(sample_covariance(train))
    x = train.samples
    m, n = x.shape
    k = order_statistic_index(problem.alpha, m)
    n_exp = len(cfg.exponent_schedule) + (1 if cfg.include_axis_limit else 0)
    per_block = max(1, BATCH_COLUMNS // n_exp)

    counts, qnorms, comp_ids, exp_ranks, signs = [], [], [], [], []
    n_comp = len(components)
    for start in range(0, n_comp, per_block):
        idx = np.arange(start, min(start + per_block, n_comp))
        w, cid, er = _candidate_block(components, idx, cfg.exponent_schedule, cfg.include_axis_limit)
        qn = lp_norm(w, metric.q, axis=0)
        pos, neg = _score_block(x, w, k, problem.epsilon * qn)
        for cnt, sign in ((pos, 0), (neg, 1)):
            counts.append(cnt)
            qnorms.append(qn)
            comp_ids.append(cid)
            exp_ranks.append(er)
            signs.append(np.full(cid.size, sign))

    counts = np.concatenate(counts)
    qnorms = np.concatenate(qnorms)
    comp_ids = np.concatenate(comp_ids)
    exp_ranks = np.concatenate(exp_ranks)
    signs = np.concatenate(signs)
    best = np.lexsort((signs, exp_ranks, comp_ids, qnorms, counts))[0]

    c = int(comp_ids[best])
    rank = int(exp_ranks[best])
    v = components[c]
    if rank < len(cfg.exponent_schedule):
        s = cfg.exponent_schedule[rank]
        w = v if s == 1 else pow_transform(v, s)
        exponent = s
    else:
        w = axis_limit(v)
        exponent = AXIS
    sign = -1 if signs[best] else 1
    w = sign * w

    # recompute on the canonical path so the reported numbers describe exactly this half space
    h = HalfSpace(w, quantile_bias(train, w, problem.alpha))
    return SearchResult(
        half_space=h,
        train_risk=empirical_measure(train, h),
        train_adv_risk=adv_risk(train, h, problem),
        component=c,
        exponent=exponent,
        sign=sign,
        candidates=int(counts.size),
    )
