"""Seeded snapshot synthesis and the sample covariance.

Random draws are keyed by ``(seed, stream)`` through numpy's ``SeedSequence``
so that Monte Carlo trials get independent substreams without sharing a
generator. Draws are made at unit variance and scaled afterwards; the same key
with different powers therefore reuses the same underlying noise realization.
"""
import struct
from dataclasses import dataclass

import numpy as np

from .array_model import steering_matrix
from .hermitian_linalg import as_hermitian

MAGIC = b"DOAS"
_HEADER = struct.Struct("<4sIII")  # magic, M, N, reserved


@dataclass(frozen=True)
class RngSeed:
    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if int(v) != v or not 0 <= v < 2**64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self):
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))


def complex_normal(rng, shape):
    """Unit-variance circularly-symmetric complex Gaussian samples."""
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)


def generate_snapshots(geometry, sources, noise, N, rng):
    """Draw ``N`` array snapshots ``x(t) = A s(t) + n(t)``.

    Parameters
    ----------
    geometry : ArrayGeometry
    sources : SourceSet
        Source DOAs and per-source powers. Signals are independent complex
        Gaussian across sources and time.
    noise : NoiseProfile or array_like
        Per-sensor noise variances. A plain array is accepted so that tests
        can use zero variances.
    N : int
        Number of snapshots.
    rng : RngSeed or numpy.random.Generator

    Returns
    -------
    X : (M, N) complex ndarray
        Sensors along rows, time along columns.
    """
    if int(N) != N or N < 1:
        raise ValueError("snapshot count must be a positive integer")
    N = int(N)
    noise_var = np.asarray(getattr(noise, "diag", noise), dtype=np.float64)
    M = geometry.sensor_count
    if noise_var.shape != (M,):
        raise ValueError(f"noise profile must have {M} entries")
    if np.any(noise_var < 0):
        raise ValueError("noise variances must be non-negative")
    if isinstance(rng, RngSeed):
        rng = rng.generator()

    A = steering_matrix(sources.doas_deg, geometry)
    powers = np.array(sources.powers)
    # fixed draw order (signals, then noise) keeps streams comparable across powers
    S = complex_normal(rng, (sources.L, N)) * np.sqrt(powers)[:, None]
    W = complex_normal(rng, (M, N)) * np.sqrt(noise_var)[:, None]
    return A @ S + W


def sample_covariance(X):
    """``(1/N) sum_t x(t) x(t)^H``, Hermitian by construction."""
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("snapshot matrix must be M x N with N >= 1")
    if not np.all(np.isfinite(X)):
        raise ValueError("snapshot matrix contains non-finite entries")
    return as_hermitian(X @ X.conj().T / X.shape[1])


def write_snapshots(path, X):
    """Dump a snapshot matrix to the little-endian ``DOAS`` binary format.

    Layout: 16-byte header (``b"DOAS"``, u32 M, u32 N, u32 reserved = 0)
    followed by M*N complex entries in row-major order, each stored as two
    float64 values (real, imaginary).
    """
    X = np.asarray(X, dtype=np.complex128)
    M, N = X.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, M, N, 0))
        fh.write(np.ascontiguousarray(X).astype("<c16").tobytes())


def read_snapshots(path):
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, M, N, _ = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != M * N:
        raise ValueError(f"{path}: expected {M * N} entries, found {data.size}")
    return data.reshape(M, N).astype(np.complex128)
