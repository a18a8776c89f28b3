"""Uniform linear array signal model.

Angles are in degrees at every public boundary. The steering vector uses the
``+j`` convention ``a_m(theta) = exp(j 2 pi d m sin(theta))`` for
``m = 0..M-1``; generation and estimation both go through this module, so the
convention is shared.
"""
from dataclasses import dataclass, field

import numpy as np

from .hermitian_linalg import as_hermitian


@dataclass(frozen=True)
class ArrayGeometry:
    """ULA with ``sensor_count`` elements spaced ``spacing_wavelengths`` apart."""

    sensor_count: int
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if int(self.sensor_count) != self.sensor_count or self.sensor_count < 2:
            raise ValueError("array needs at least 2 sensors")
        if not self.spacing_wavelengths > 0:
            raise ValueError("sensor spacing must be positive")

    @property
    def M(self):
        return self.sensor_count


@dataclass(frozen=True)
class SourceSet:
    """Uncorrelated far-field sources: DOAs in degrees and their powers."""

    doas_deg: tuple
    powers: tuple

    def __init__(self, doas_deg, powers=None):
        doas = tuple(float(t) for t in np.atleast_1d(doas_deg))
        if powers is None:
            powers = (1.0,) * len(doas)
        elif np.isscalar(powers):
            powers = (float(powers),) * len(doas)
        pw = tuple(float(p) for p in np.atleast_1d(powers))
        object.__setattr__(self, "doas_deg", doas)
        object.__setattr__(self, "powers", pw)
        if len(doas) < 1:
            raise ValueError("at least one source is required")
        if len(pw) != len(doas):
            raise ValueError("one power per source is required")
        if any(not -90.0 < t < 90.0 for t in doas):
            raise ValueError("DOAs must lie in the open interval (-90, 90) degrees")
        if len(set(doas)) != len(doas):
            raise ValueError("DOAs must be distinct")
        if any(p < 0 or not np.isfinite(p) for p in pw):
            raise ValueError("source powers must be non-negative")

    @property
    def L(self):
        return len(self.doas_deg)

    def with_power(self, power):
        return SourceSet(self.doas_deg, power)


@dataclass(frozen=True)
class NoiseProfile:
    """Per-sensor noise variances (the diagonal of the noise covariance)."""

    variances: tuple = field()

    def __init__(self, variances):
        v = tuple(float(x) for x in np.atleast_1d(variances))
        object.__setattr__(self, "variances", v)
        if not v:
            raise ValueError("noise profile is empty")
        if any(not (x > 0 and np.isfinite(x)) for x in v):
            raise ValueError("noise variances must be positive")

    @classmethod
    def uniform(cls, M, q=1.0):
        return cls([q] * M)

    @property
    def diag(self):
        return np.array(self.variances)

    def __len__(self):
        return len(self.variances)


def _check_angle(theta_deg):
    theta = np.asarray(theta_deg, dtype=np.float64)
    if not np.all((theta > -90.0) & (theta < 90.0)):
        raise ValueError("steering angle must lie in the open interval (-90, 90) degrees")
    return theta


def steering_vector(theta_deg, geometry):
    """Array response to a unit plane wave from ``theta_deg``.

    >>> np.round(steering_vector(30.0, ArrayGeometry(4)), 12)
    array([ 1.+0.j,  0.+1.j, -1.+0.j, -0.-1.j])
    """
    return steering_matrix([theta_deg], geometry)[:, 0]


def steering_matrix(thetas_deg, geometry):
    """Stack steering vectors for several angles as columns (M x len(thetas))."""
    theta = _check_angle(np.atleast_1d(thetas_deg))
    m = np.arange(geometry.sensor_count)[:, None]
    phase = 2.0 * np.pi * geometry.spacing_wavelengths * m * np.sin(np.deg2rad(theta))[None, :]
    return np.exp(1j * phase)


def population_covariance(geometry, sources, noise):
    """``A P A^H + Q`` for uncorrelated sources and diagonal noise."""
    if len(noise) != geometry.sensor_count:
        raise ValueError(
            f"noise profile has {len(noise)} entries for {geometry.sensor_count} sensors"
        )
    if sources.L >= geometry.sensor_count:
        raise ValueError("number of sources must be smaller than the number of sensors")
    A = steering_matrix(sources.doas_deg, geometry)
    R = (A * np.array(sources.powers)[None, :]) @ A.conj().T
    R[np.diag_indices_from(R)] += noise.diag
    return as_hermitian(R)


def wnpr(noise):
    """Worst noise power ratio, largest over smallest sensor variance."""
    d = noise.diag
    return float(d.max() / d.min())


def snr_of(signal_power, noise):
    """Linear SNR ``(sigma_s^2 / M) * sum_m 1 / sigma_m^2``."""
    d = noise.diag
    return float(signal_power * np.sum(1.0 / d) / d.size)


def signal_power_for_snr(snr_db, noise, M=None):
    """Per-source power that yields ``snr_db`` under the averaged SNR definition."""
    d = noise.diag
    if M is not None and M != d.size:
        raise ValueError(f"noise profile has {d.size} entries, expected {M}")
    snr = 10.0 ** (snr_db / 10.0)
    return float(snr * d.size / np.sum(1.0 / d))
