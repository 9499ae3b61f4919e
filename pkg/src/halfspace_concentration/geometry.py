"""ℓp geometry of half spaces.

The distance from x to H = {z : wᵀz + b <= 0} is max(wᵀx + b, 0) / ‖w‖_q, so
the ε-expansion of a half space is the half space with bias b - ε‖w‖_q.
"""

from __future__ import annotations

import numpy as np

from .core import INF, Dataset, DomainError, HalfSpace, LpMetric, lp_norm

BRUTE_FORCE_MAX_ROWS = 2000


def _check_dim(n: int, h: HalfSpace):
    if n != h.n:
        raise ValueError(f"dimension mismatch: data has {n} columns, half space has {h.n}")


def distance_to_halfspace(x, h: HalfSpace, metric: LpMetric) -> float:
    x = np.asarray(x, dtype=float).ravel()
    _check_dim(x.size, h)
    margin = float(x @ h.w + h.b)
    if margin <= 0:
        return 0.0
    return margin / metric.dual_norm(h.w)


def nearest_point(x, h: HalfSpace, metric: LpMetric) -> np.ndarray:
    """Closest point of ``h`` to an outside point ``x`` in the ℓp sense.

    Moves coordinate j by d * sgn(w_j) * (|w_j| / ‖w‖_q)^(q-1), which is the
    equality case of Hölder's inequality. p = ∞ moves every coordinate with
    w_j != 0 by d; p = 1 moves only the largest |w_j| (smallest index on ties).
    """
    x = np.asarray(x, dtype=float).ravel()
    _check_dim(x.size, h)
    w = h.w
    margin = float(x @ w + h.b)
    if margin <= 0:
        raise DomainError("nearest_point needs a point outside the half space")
    qnorm = metric.dual_norm(w)
    d = margin / qnorm
    p = metric.p
    if p == INF:
        step = np.sign(w)
    elif p == 1:
        j = int(np.argmax(np.abs(w)))
        step = np.zeros_like(w)
        step[j] = np.sign(w[j])
    else:
        q = metric.q
        step = np.sign(w) * (np.abs(w) / qnorm) ** float(q - 1)
    return x - d * step


def expand(h: HalfSpace, epsilon: float, metric: LpMetric) -> HalfSpace:
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    if epsilon == 0:
        return h
    return HalfSpace(h.w, h.b - epsilon * metric.dual_norm(h.w))


def members(data: Dataset, h: HalfSpace) -> np.ndarray:
    """Boolean mask of rows with wᵀx + b <= 0 (boundary included, no tolerance)."""
    _check_dim(data.n, h)
    return data.samples @ h.w + h.b <= 0


def empirical_measure(data: Dataset, h: HalfSpace) -> float:
    return int(np.count_nonzero(members(data, h))) / data.m


def brute_force_expansion_measure(data: Dataset, member_set, epsilon: float,
                                  metric: LpMetric) -> float:
    """Fraction of rows within ℓp distance ``epsilon`` of some row in ``member_set``.

    Exhaustive pairwise check, test-only (capped at BRUTE_FORCE_MAX_ROWS rows).
    """
    if data.m > BRUTE_FORCE_MAX_ROWS:
        raise ValueError(f"brute force oracle is limited to {BRUTE_FORCE_MAX_ROWS} rows")
    idx = np.asarray(member_set)
    if idx.dtype == bool:
        idx = np.flatnonzero(idx)
    idx = np.unique(idx.astype(int))
    if idx.size == 0:
        return 0.0
    x = data.samples
    covered = np.zeros(data.m, dtype=bool)
    for i in idx:
        covered |= lp_norm(x - x[i], metric.p, axis=1) <= epsilon
    return int(np.count_nonzero(covered)) / data.m
