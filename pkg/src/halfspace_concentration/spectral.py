"""Sample covariance, principal components and the sign-preserving power transform."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset

CLAMP_TOL = 1e-9
SIGN_TOL = 1e-12


class SpectralError(ArithmeticError):
    """Eigendecomposition produced values that violate positive semidefiniteness."""


@dataclass(frozen=True, eq=False)
class PrincipalComponents:
    """Unit eigenvectors as the *columns* of ``vectors``, eigenvalues non-increasing."""

    vectors: np.ndarray
    eigenvalues: np.ndarray

    def __len__(self):
        return self.eigenvalues.size

    def __getitem__(self, i) -> np.ndarray:
        return self.vectors[:, i]


def sample_covariance(data: Dataset) -> np.ndarray:
    """Unbiased covariance (divisor m - 1) of the rows of ``data``."""
    if data.m < 2:
        raise ValueError("sample covariance needs at least two samples")
    x = data.samples
    centered = x - x.mean(axis=0)
    q = centered.T @ centered / (data.m - 1)
    return 0.5 * (q + q.T)


def jacobi_eigh(a, tol: float = 1e-14, max_sweeps: int = 100):
    """Cyclic Jacobi rotations for a symmetric matrix.

    Returns (eigenvalues, eigenvectors) unsorted, eigenvectors as columns.
    Quadratic work per sweep; meant for small matrices and cross-checks.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(np.abs(a).max(), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    else:
        raise SpectralError("Jacobi iteration did not converge")
    return np.diag(a).copy(), v


def eigendecompose(q, method: str = "lapack") -> PrincipalComponents:
    """Principal components of a symmetric matrix.

    Eigenvalues are sorted non-increasing; tiny negative round-off (relative to
    the largest magnitude) is clamped to zero. Each eigenvector is signed so that
    its first non-negligible coordinate is positive.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {q.shape}")
    qmax = float(np.abs(q).max()) if q.size else 0.0
    if np.abs(q - q.T).max() > 1e-9 * max(1.0, qmax):
        raise ValueError("matrix is not symmetric")
    if method == "lapack":
        vals, vecs = np.linalg.eigh(q)
    elif method == "jacobi":
        vals, vecs = jacobi_eigh(q)
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    floor = -CLAMP_TOL * max(1.0, float(np.abs(vals).max()))
    if vals.min() < floor:
        raise SpectralError(f"eigenvalue {vals.min()!r} is below the PSD tolerance")
    vals = np.maximum(vals, 0.0)
    first = np.argmax(np.abs(vecs) > SIGN_TOL, axis=0)
    signs = np.where(vecs[first, np.arange(vecs.shape[1])] < 0, -1.0, 1.0)
    vecs = vecs * signs
    return PrincipalComponents(vecs, vals)


def pow_transform(v, s: int) -> np.ndarray:
    """sgn(v) * |v|^s, renormalized to unit ℓ2 norm."""
    v = np.asarray(v, dtype=float)
    if int(s) != s or s < 1:
        raise ValueError(f"exponent must be a positive integer, got {s}")
    a = np.abs(v)
    top = a.max(axis=0) if a.size else 0.0
    if np.any(top == 0):
        raise ValueError("pow_transform of a zero vector")
    # dividing by the max first keeps large exponents from underflowing
    r = np.sign(v) * (a / top) ** int(s)
    return r / np.linalg.norm(r, axis=0)


def axis_limit(v) -> np.ndarray:
    """Signed coordinate axis of the largest |v_j| (smallest index on ties)."""
    v = np.asarray(v, dtype=float).ravel()
    if not np.any(v):
        raise ValueError("axis_limit of a zero vector")
    j = int(np.argmax(np.abs(v)))
    e = np.zeros_like(v)
    e[j] = np.sign(v[j])
    return e
