"""Exact Gaussian concentration: normal CDF/quantile, the lp isoperimetric
lower bound for N(theta, Sigma), and the half spaces that attain it."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import DomainError, HalfSpace, LpMetric, UnsupportedStructureError

SYMMETRY_TOL = 1e-9
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Spherical:
    variance: float

    def __post_init__(self):
        if not self.variance > 0 or not math.isfinite(self.variance):
            raise ValueError(f"spherical variance must be positive, got {self.variance}")


@dataclass(frozen=True, eq=False)
class Diagonal:
    variances: np.ndarray

    def __post_init__(self):
        d = np.array(self.variances, dtype=float).ravel()
        if d.size == 0 or not np.isfinite(d).all() or (d <= 0).any():
            raise ValueError("diagonal variances must be finite and strictly positive")
        d.setflags(write=False)
        object.__setattr__(self, "variances", d)


@dataclass(frozen=True, eq=False)
class Full:
    matrix: np.ndarray

    def __post_init__(self):
        s = np.array(self.matrix, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.size == 0:
            raise ValueError(f"covariance must be a square matrix, got shape {s.shape}")
        if not np.isfinite(s).all():
            raise ValueError("covariance has non-finite entries")
        if np.abs(s - s.T).max() > SYMMETRY_TOL:
            raise ValueError("covariance is not symmetric")
        s = 0.5 * (s + s.T)
        if np.linalg.eigvalsh(s).min() <= 0:
            raise ValueError("covariance is not positive definite")
        s.setflags(write=False)
        object.__setattr__(self, "matrix", s)

    def eig(self):
        """Eigenpairs sorted by decreasing eigenvalue."""
        vals, vecs = np.linalg.eigh(self.matrix)
        order = np.argsort(vals)[::-1]
        return vals[order], vecs[:, order]


Covariance = Union[Spherical, Diagonal, Full]


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    """N(theta, Sigma) with a structured covariance."""

    theta: np.ndarray
    covariance: Covariance

    def __post_init__(self):
        t = np.array(self.theta, dtype=float).ravel()
        if t.size == 0 or not np.isfinite(t).all():
            raise ValueError("mean must be a finite non-empty vector")
        cov = self.covariance
        if isinstance(cov, Diagonal) and cov.variances.size != t.size:
            raise ValueError("diagonal covariance length does not match the mean")
        if isinstance(cov, Full) and cov.matrix.shape[0] != t.size:
            raise ValueError("covariance shape does not match the mean")
        if not isinstance(cov, (Spherical, Diagonal, Full)):
            raise TypeError(f"unknown covariance structure {type(cov).__name__}")
        t.setflags(write=False)
        object.__setattr__(self, "theta", t)

    @classmethod
    def standard(cls, n: int) -> "GaussianSpec":
        return cls(np.zeros(n), Spherical(1.0))

    @property
    def n(self) -> int:
        return self.theta.size


def std_normal_cdf(x: float) -> float:
    # erfc keeps full relative accuracy in the lower tail
    return 0.5 * math.erfc(-x / _SQRT2)


def std_normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


# Acklam's rational approximation, relative error about 1e-9 before refinement
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _initial_quantile(u: float) -> float:
    if u < _P_LOW:
        q = math.sqrt(-2.0 * math.log(u))
        return ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    if u > 1.0 - _P_LOW:
        q = math.sqrt(-2.0 * math.log1p(-u))
        return -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                 / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    q = u - 0.5
    r = q * q
    return ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))


def std_normal_quantile(u: float) -> float:
    """Inverse of :func:`std_normal_cdf` on (0, 1)."""
    if not 0.0 < u < 1.0:
        raise DomainError(f"quantile argument must lie in (0, 1), got {u}")
    if u == 0.5:
        return 0.0
    x = _initial_quantile(u)
    for _ in range(2):
        # Newton on the tail that is represented more accurately
        if x < 0:
            err = std_normal_cdf(x) - u
        else:
            err = (1.0 - u) - std_normal_cdf(-x)
        x -= err / std_normal_pdf(x)
    return x


def sqrt_matrix_p_norm(spec: GaussianSpec, metric: LpMetric) -> float:
    """Induced p-norm of Sigma^(1/2).

    Diagonal structure gives max_i sqrt(d_i) for every p. A dense covariance is
    only handled for p = 2 (largest singular value); other p would need a general
    matrix p-norm, which is NP-hard to approximate.
    """
    cov = spec.covariance
    if isinstance(cov, Spherical):
        return math.sqrt(cov.variance)
    if isinstance(cov, Diagonal):
        return float(np.sqrt(cov.variances.max()))
    if metric.p != 2:
        raise UnsupportedStructureError(
            f"induced {metric.name} norm of a dense covariance square root is not available: "
            "approximating general matrix p-norms is NP-hard (only l2 is supported)")
    return math.sqrt(float(cov.eig()[0][0]))


def _require_p_at_least_2(metric: LpMetric):
    if metric.p < 2:
        raise DomainError(f"the isoperimetric bound needs p >= 2, got {metric.name}")


def gii_lower_bound(spec: GaussianSpec, measure_of_E: float, epsilon: float,
                    metric: LpMetric) -> float:
    """Smallest possible measure of an epsilon-expansion of a set of measure ``measure_of_E``:
    Phi(Phi^-1(measure) + epsilon / ||Sigma^(1/2)||_p)."""
    _require_p_at_least_2(metric)
    if not 0.0 < measure_of_E < 1.0:
        raise DomainError(f"measure must lie in (0, 1), got {measure_of_E}")
    if not epsilon >= 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    scale = sqrt_matrix_p_norm(spec, metric)
    if epsilon == 0:
        return measure_of_E
    return std_normal_cdf(std_normal_quantile(measure_of_E) + epsilon / scale)


def optimal_halfspace(spec: GaussianSpec, alpha: float, metric: LpMetric) -> HalfSpace:
    """Half space of measure ``alpha`` whose expansion meets :func:`gii_lower_bound`.

    Spherical covariance with p >= 2: the first coordinate axis (any axis works).
    p = 2 with any covariance: the top eigenvector of Sigma.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    cov = spec.covariance
    z = std_normal_quantile(alpha)
    n = spec.n
    if isinstance(cov, Spherical) and metric.p >= 2:
        w = np.zeros(n)
        w[0] = 1.0
        return HalfSpace(w, -spec.theta[0] - math.sqrt(cov.variance) * z + 0.0)
    if metric.p == 2:
        if isinstance(cov, Diagonal):
            j = int(np.argmax(cov.variances))
            v1 = np.zeros(n)
            v1[j] = 1.0
            lam = float(cov.variances[j])
        else:
            vals, vecs = cov.eig()
            v1 = vecs[:, 0]
            nz = np.flatnonzero(np.abs(v1) > 1e-12)
            if v1[nz[0]] < 0:
                v1 = -v1
            lam = float(vals[0])
        return HalfSpace(v1, -float(v1 @ spec.theta) - math.sqrt(lam) * z + 0.0)
    raise UnsupportedStructureError(
        f"no known optimal half space for {type(cov).__name__.lower()} covariance under {metric.name}")
