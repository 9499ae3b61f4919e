"""Shared domain types: norms, datasets, half spaces and result records."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

INF = math.inf

Exponent = Union[Fraction, float]

NORM_TOL = 1e-9
RENORM_TOL = 1e-6


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedStructureError(ValueError):
    """The requested (covariance, metric) combination has no exact closed form."""


def _as_exponent(p) -> Exponent:
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "oo"):
            return INF
        p = Fraction(s)
    if isinstance(p, float):
        if math.isinf(p) and p > 0:
            return INF
        if math.isnan(p):
            raise DomainError("p is NaN")
        p = Fraction(p).limit_denominator(10**6)
    p = Fraction(p)
    if p < 1:
        raise DomainError(f"norm exponent must satisfy p >= 1, got {p}")
    return p


def conjugate(p) -> Exponent:
    """Hölder conjugate q with 1/p + 1/q = 1.

    Finite exponents come back as exact fractions; ``INF`` stands for infinity.
    """
    p = _as_exponent(p)
    if p == INF:
        return Fraction(1)
    if p == 1:
        return INF
    return p / (p - 1)


def lp_norm(v, p, axis=None):
    """ℓp norm of ``v`` (along ``axis`` when given). The three special exponents are case-split."""
    p = _as_exponent(p)
    a = np.abs(np.asarray(v, dtype=float))
    if p == INF:
        return a.max(axis=axis)
    if p == 1:
        return a.sum(axis=axis)
    if p == 2:
        return np.sqrt((a * a).sum(axis=axis))
    # scale by the max entry so large exponents cannot overflow
    scale = a.max(axis=axis, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    r = ((a / safe) ** float(p)).sum(axis=axis, keepdims=True) ** (1.0 / float(p)) * scale
    if axis is None:
        return float(r.reshape(()))
    return np.squeeze(r, axis=axis)


@dataclass(frozen=True)
class LpMetric:
    """Perturbation norm ℓp, p in [1, ∞]; the conjugate exponent is derived."""

    p: Exponent

    def __post_init__(self):
        object.__setattr__(self, "p", _as_exponent(self.p))

    @property
    def q(self) -> Exponent:
        return conjugate(self.p)

    @property
    def is_inf(self) -> bool:
        return self.p == INF

    def norm(self, v, axis=None):
        return lp_norm(v, self.p, axis=axis)

    def dual_norm(self, v, axis=None):
        return lp_norm(v, self.q, axis=axis)

    @property
    def name(self) -> str:
        if self.is_inf:
            return "linf"
        return f"l{self.p}"

    @classmethod
    def parse(cls, text: str) -> "LpMetric":
        """Accepts ``linf``, ``l1``, ``l2``, ``l4``, ``l3/2`` and bare exponents."""
        s = text.strip().lower()
        if s.startswith("l"):
            s = s[1:]
        try:
            return cls(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"bad metric {text!r}") from exc

    def __str__(self):
        return self.name


def _frozen_array(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Samples stored row-major, one instance per row."""

    samples: np.ndarray
    source: str = "memory"

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError(f"samples must be a non-empty 2-d array, got shape {x.shape}")
        if not np.isfinite(x).all():
            raise ValueError("samples contain NaN or Inf")
        if x.flags.writeable:
            x = _frozen_array(x)
        object.__setattr__(self, "samples", x)

    @property
    def m(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    def subset(self, rows, tag: str | None = None) -> "Dataset":
        return Dataset(self.samples[np.asarray(rows)], tag or self.source)

    def __len__(self):
        return self.m


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """H = {x : wᵀx + b <= 0} with ‖w‖₂ = 1.

    Inputs whose norm is off by less than ``RENORM_TOL`` are rescaled together
    with ``b`` (the set is unchanged); anything further off is rejected.
    """

    w: np.ndarray
    b: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).ravel()
        b = float(self.b)
        if w.size == 0 or not np.isfinite(w).all() or not math.isfinite(b):
            raise ValueError("half space parameters must be finite and non-empty")
        norm = float(np.linalg.norm(w))
        if abs(norm - 1.0) > NORM_TOL:
            if abs(norm - 1.0) > RENORM_TOL:
                raise ValueError(f"weight vector must have unit l2 norm, got {norm!r}")
            w = w / norm
            b = b / norm
        object.__setattr__(self, "w", _frozen_array(w))
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.w.size

    def margin(self, x) -> np.ndarray:
        """wᵀx + b for a point or for every row of a matrix."""
        return np.asarray(x, dtype=float) @ self.w + self.b

    def contains(self, x):
        return self.margin(x) <= 0


@dataclass(frozen=True)
class ConcentrationProblem:
    alpha: float
    epsilon: float
    metric: LpMetric = field(default_factory=lambda: LpMetric(INF))

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.epsilon >= 0.0 or not math.isfinite(self.epsilon):
            raise DomainError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if not isinstance(self.metric, LpMetric):
            object.__setattr__(self, "metric", LpMetric(self.metric))


@dataclass(frozen=True, eq=False)
class ConcentrationEstimate:
    half_space: HalfSpace
    train_risk: float
    train_adv_risk: float
    test_risk: float
    test_adv_risk: float

    def __post_init__(self):
        for name in ("train_risk", "train_adv_risk", "test_risk", "test_adv_risk"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.train_adv_risk < self.train_risk or self.test_adv_risk < self.test_risk:
            raise ValueError("adversarial risk below risk: expansion must contain the set")


@dataclass(frozen=True, eq=False)
class TrialReport:
    estimates: tuple
    mean_test_risk: float
    std_test_risk: float
    mean_test_adv_risk: float
    std_test_adv_risk: float

    @classmethod
    def from_estimates(cls, estimates) -> "TrialReport":
        estimates = tuple(estimates)
        if not estimates:
            raise ValueError("a trial report needs at least one estimate")
        risk = np.array([e.test_risk for e in estimates])
        adv = np.array([e.test_adv_risk for e in estimates])
        # population standard deviation (ddof=0)
        return cls(estimates, float(risk.mean()), float(risk.std()),
                   float(adv.mean()), float(adv.std()))
