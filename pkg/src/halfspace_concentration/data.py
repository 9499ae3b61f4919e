"""Dataset readers/writers and Gaussian sampling."""

from __future__ import annotations

import csv
import gzip
import struct
from pathlib import Path

import numpy as np

from .analytic import Diagonal, Full, GaussianSpec, Spherical
from .core import Dataset
from .spectral import eigendecompose

IDX_UBYTE_3D = 0x00000803
CIFAR_RECORD = 3073
CIFAR_PIXELS = 3072
GAUSS_BIN_MAGIC = b"GCONC1\0\0"
GAUSS_BIN_HEADER = struct.Struct("<8sII")


class DataFormatError(ValueError):
    """A data file is malformed or of an unsupported kind."""


def _read_bytes(path) -> bytes:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        return f.read()


def load_idx(path) -> Dataset:
    """MNIST-style IDX image file (unsigned bytes, 3 dims) as rows scaled to [0, 1]."""
    raw = _read_bytes(path)
    if len(raw) < 4:
        raise DataFormatError(f"{path}: truncated IDX header")
    zero, dtype, ndim = struct.unpack(">HBB", raw[:4])
    if zero != 0:
        raise DataFormatError(f"{path}: bad IDX magic {raw[:4].hex()}")
    if dtype != 0x08 or ndim != 3:
        raise DataFormatError(
            f"{path}: unsupported IDX type 0x{dtype:02x} with {ndim} dims (need unsigned-byte images)")
    if len(raw) < 16:
        raise DataFormatError(f"{path}: truncated IDX dimensions")
    count, rows, cols = struct.unpack(">III", raw[4:16])
    size = count * rows * cols
    if len(raw) - 16 < size:
        raise DataFormatError(f"{path}: truncated IDX payload ({len(raw) - 16} of {size} bytes)")
    if count == 0 or rows * cols == 0:
        raise DataFormatError(f"{path}: IDX file holds no pixels")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=size, offset=16)
    return Dataset(pixels.reshape(count, rows * cols) / 255.0, str(path))


def save_idx(path, images) -> None:
    images = np.asarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise ValueError("IDX images must be a (count, rows, cols) array")
    with open(path, "wb") as f:
        f.write(struct.pack(">I", IDX_UBYTE_3D))
        f.write(struct.pack(">III", *images.shape))
        f.write(images.tobytes())


def load_cifar10(paths) -> Dataset:
    """CIFAR-10 binary batches (label byte + 3072 pixels per record); labels are dropped."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    blocks = []
    for path in paths:
        raw = _read_bytes(path)
        if len(raw) == 0 or len(raw) % CIFAR_RECORD:
            raise DataFormatError(f"{path}: length {len(raw)} is not a multiple of {CIFAR_RECORD}")
        rec = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD)
        blocks.append(rec[:, 1:])
    if not blocks:
        raise DataFormatError("no CIFAR-10 files given")
    return Dataset(np.vstack(blocks) / 255.0, ",".join(str(p) for p in paths))


def load_csv(path, has_header: bool = False) -> Dataset:
    """Numeric CSV, one sample per line, no rescaling."""
    rows = []
    width = None
    with open(path, newline="") as f:
        for lineno, rec in enumerate(csv.reader(f), start=1):
            if lineno == 1 and has_header:
                continue
            if not rec or all(not c.strip() for c in rec):
                continue
            if width is None:
                width = len(rec)
            elif len(rec) != width:
                raise DataFormatError(f"{path}:{lineno}: expected {width} fields, got {len(rec)}")
            try:
                rows.append([float(c) for c in rec])
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    try:
        return Dataset(np.array(rows), str(path))
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def save_gauss_bin(path, data) -> None:
    """16-byte header (magic, u32 m, u32 n, little-endian) then row-major float64."""
    x = np.ascontiguousarray(data.samples if isinstance(data, Dataset) else data, dtype="<f8")
    with open(path, "wb") as f:
        f.write(GAUSS_BIN_HEADER.pack(GAUSS_BIN_MAGIC, x.shape[0], x.shape[1]))
        f.write(x.tobytes())


def load_gauss_bin(path) -> Dataset:
    raw = _read_bytes(path)
    if len(raw) < GAUSS_BIN_HEADER.size:
        raise DataFormatError(f"{path}: truncated gauss-bin header")
    magic, m, n = GAUSS_BIN_HEADER.unpack_from(raw)
    if magic != GAUSS_BIN_MAGIC:
        raise DataFormatError(f"{path}: bad gauss-bin magic {magic!r}")
    if len(raw) != GAUSS_BIN_HEADER.size + 8 * m * n:
        raise DataFormatError(f"{path}: payload size does not match {m}x{n}")
    x = np.frombuffer(raw, dtype="<f8", offset=GAUSS_BIN_HEADER.size).reshape(m, n)
    try:
        return Dataset(x.astype(float), str(path))
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None


def sqrt_covariance(spec: GaussianSpec) -> np.ndarray:
    """Symmetric square root Sigma^(1/2) = U Lambda^(1/2) U^T."""
    cov = spec.covariance
    n = spec.n
    if isinstance(cov, Spherical):
        return np.sqrt(cov.variance) * np.eye(n)
    if isinstance(cov, Diagonal):
        return np.diag(np.sqrt(cov.variances))
    pcs = eigendecompose(cov.matrix)
    if pcs.eigenvalues.min() <= 0:
        raise ValueError("covariance is not positive definite")
    return (pcs.vectors * np.sqrt(pcs.eigenvalues)) @ pcs.vectors.T


def sample_gaussian(spec: GaussianSpec, m: int, seed: int) -> Dataset:
    """Rows theta + Sigma^(1/2) u with u ~ N(0, I), from a seeded Philox stream."""
    if m < 1:
        raise ValueError("need at least one sample")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    u = rng.standard_normal((m, spec.n))
    cov = spec.covariance
    if isinstance(cov, Spherical):
        x = np.sqrt(cov.variance) * u
    elif isinstance(cov, Diagonal):
        x = u * np.sqrt(cov.variances)
    else:
        x = u @ sqrt_covariance(spec)
    return Dataset(x + spec.theta, f"gaussian:seed={seed}")
