"""Two-phase subspace DOA estimation under nonuniform sensor noise.

Phase 1 takes the noise subspace from the eigenvectors of the sample
covariance with its diagonal removed. No noise variances are needed: at the
population level the diagonal of ``R`` is the noise variance plus the total
source power, so removing it shifts the noise-subspace eigenvalues by a common
constant.

Phase 2 uses that subspace to rebuild the diagonal noise covariance, then
takes the noise subspace from the generalized eigenproblem ``R u = lam Q u``.

Both phases, and classical MUSIC on ``R`` itself, end with a MUSIC
pseudospectrum search over a grid of angles.
"""
import enum
import functools
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .array_model import steering_matrix
from .hermitian_linalg import (
    as_diagonal,
    as_hermitian,
    eigh,
    generalized_eigh,
    orthonormalize,
)

logger = logging.getLogger(__name__)

DENOM_TOL = 1e-10
IMAG_WARN = 1e-8
FLOOR_REL = 1e-8


class Method(str, enum.Enum):
    PHASE1 = "phase1"
    PHASE2 = "phase2"
    CLASSICAL = "classical"

    def __str__(self):
        return self.value


ALL_METHODS = (Method.PHASE1, Method.PHASE2, Method.CLASSICAL)


class EstimationError(ArithmeticError):
    """A phase-2 quantity could not be formed from the data."""


class DegenerateSubspaceError(EstimationError):
    pass


class NonPositivePowerError(EstimationError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Uniform search grid in degrees.

    Points are ``min_deg + i * step_deg`` up to ``max_deg``; any point at or
    beyond +-90 degrees is dropped, where the steering vector degenerates.
    """

    min_deg: float = -90.0
    max_deg: float = 90.0
    step_deg: float = 0.05

    def __post_init__(self):
        if not self.step_deg > 0:
            raise ValueError("grid step must be positive")
        if not self.max_deg > self.min_deg:
            raise ValueError("grid max must exceed grid min")

    @functools.cached_property
    def angles(self):
        n = int(np.floor((self.max_deg - self.min_deg) / self.step_deg + 1e-9))
        # round to kill accumulated representation error (e.g. -2.9999999999)
        g = np.round(self.min_deg + self.step_deg * np.arange(n + 1), 10)
        g = g[(g > -90.0) & (g < 90.0)]
        if g.size < 3:
            raise ValueError("grid must contain at least 3 points inside (-90, 90)")
        g.setflags(write=False)
        return g


@functools.lru_cache(maxsize=32)
def _grid_steering(geometry, grid):
    A = steering_matrix(grid.angles, geometry)
    A.setflags(write=False)
    return A


@dataclass
class NoiseSubspace:
    """Basis vectors of an estimated noise subspace.

    ``basis`` holds the vectors that enter the MUSIC denominator. For phase 1
    and classical MUSIC they are orthonormal; for phase 2 they are unit
    Q-norm generalized eigenvectors.
    """

    basis: np.ndarray
    phase: Method
    eigenvalues: np.ndarray

    @property
    def projector(self):
        """``U U^H`` built from ``basis`` as is."""
        return self.basis @ self.basis.conj().T

    @property
    def span_projector(self):
        """Orthogonal projector onto the span of ``basis``."""
        Uo = orthonormalize(self.basis)
        return Uo @ Uo.conj().T


@dataclass
class NoiseCovEstimate:
    q_hat: np.ndarray
    sigma2: float
    k: int
    c: float
    fallback_used: bool = False


@dataclass
class Pseudospectrum:
    grid_deg: np.ndarray
    values: np.ndarray


@dataclass
class DoaEstimate:
    """Estimated DOAs (ascending, degrees).

    ``padded`` is set when fewer than ``L`` local maxima were found;
    ``fallback`` when phase 2 reverted to the phase-1 subspace or the noise
    covariance had to be floored.
    """

    doas_deg: np.ndarray
    method: Method
    padded: bool = False
    fallback: bool = False
    subspace: Optional[NoiseSubspace] = field(default=None, repr=False)
    spectrum: Optional[Pseudospectrum] = field(default=None, repr=False)


def _check_L(M, L):
    if int(L) != L or not 1 <= L < M:
        raise ValueError(f"source count must satisfy 1 <= L < M = {M}, got {L}")
    return int(L)


def strip_diagonal(R):
    """Copy of ``R`` with its diagonal set to zero."""
    R1 = as_hermitian(R)
    R1[np.diag_indices_from(R1)] = 0.0
    return R1


def phase1_noise_subspace(R1, L):
    """Noise subspace from the ``M - L`` smallest eigenpairs of the stripped covariance."""
    R1 = as_hermitian(R1)
    L = _check_L(R1.shape[0], L)
    vals, vecs = eigh(R1)
    n = R1.shape[0] - L
    return NoiseSubspace(vecs[:, :n], Method.PHASE1, vals[:n])


def classical_noise_subspace(R, L):
    """Noise subspace of spectral MUSIC: smallest eigenvectors of ``R`` itself."""
    R = as_hermitian(R)
    L = _check_L(R.shape[0], L)
    vals, vecs = eigh(R)
    n = R.shape[0] - L
    return NoiseSubspace(vecs[:, :n], Method.CLASSICAL, vals[:n])


def smallest_diag_index(R):
    """Index of the smallest diagonal entry; ties go to the lowest index."""
    return int(np.argmin(np.real(np.diag(np.asarray(R)))))


def estimate_common_power(R, U, k):
    """Common noise power from the noise subspace and the quietest sensor.

    Evaluates ``(e_k^T R U U^H e_k) / (e_k^T U U^H e_k)``. Only the real part
    is kept; in finite samples the ratio carries an imaginary residue.

    Raises
    ------
    DegenerateSubspaceError
        If the noise subspace is (numerically) orthogonal to ``e_k``.
    NonPositivePowerError
        If the estimate is not strictly positive.
    """
    R = np.asarray(R)
    basis = getattr(U, "basis", U)
    row = basis[k, :].conj()  # U^H e_k
    den = np.real(basis[k, :] @ row)
    if abs(den) < DENOM_TOL:
        raise DegenerateSubspaceError(
            f"noise subspace nearly orthogonal to sensor {k} (|e_k^T U U^H e_k| = {den:.2e})"
        )
    num = R[k, :] @ (basis @ row)
    ratio = num / den
    if abs(ratio.imag) > IMAG_WARN * max(abs(ratio.real), 1.0):
        logger.debug("common-power ratio has imaginary residue %.3e", ratio.imag)
    sigma2 = float(ratio.real)
    if not sigma2 > 0:
        raise NonPositivePowerError(f"common noise power estimate is {sigma2:.3e}")
    return sigma2


def build_qnun(R):
    """Excess noise power per sensor relative to the smallest diagonal entry."""
    d = np.real(np.diag(np.asarray(R)))
    return d - d.min()


def estimate_noise_cov(sigma2, qnun, k=None, c=float("nan")):
    """Diagonal noise covariance ``sigma2 * I + Q_nun`` with a positivity floor.

    Entries are floored at ``1e-8 * max(diag)`` so whitening stays defined;
    ``fallback_used`` records whether the floor was applied.
    """
    qnun = as_diagonal(qnun)
    if np.any(qnun < 0):
        raise ValueError("Q_nun entries must be non-negative")
    if k is None:
        k = int(np.argmin(qnun))
    q = sigma2 + qnun
    eps = FLOOR_REL * q.max()
    floored = bool(np.any(q < eps)) or not eps > 0
    if floored:
        q = np.maximum(q, eps if eps > 0 else np.finfo(float).tiny)
    return NoiseCovEstimate(q, float(sigma2), int(k), float(c), floored)


def phase2_noise_subspace(R, Qhat, L):
    """Noise subspace from the generalized eigenproblem of ``(R, Q_hat)``.

    Keeps the ``M - L`` generalized eigenvectors with the smallest
    eigenvalues, scaled to unit Q-norm (``u^H Q u = 1``). They are
    Q-orthogonal rather than orthonormal, so ``a^H U U^H a`` is the MUSIC
    denominator in noise-whitened coordinates. Use
    :attr:`NoiseSubspace.span_projector` to compare spans.
    """
    R = as_hermitian(R)
    L = _check_L(R.shape[0], L)
    q = as_diagonal(getattr(Qhat, "q_hat", Qhat))
    vals, vecs = generalized_eigh(R, q)
    n = R.shape[0] - L
    U = vecs[:, :n]
    qnorm = np.sqrt(np.einsum("ij,i,ij->j", U.conj(), q, U).real)
    return NoiseSubspace(U / qnorm[None, :], Method.PHASE2, vals[:n])


def music_pseudospectrum(U, geometry, grid=None):
    """``S(theta) = 1 / (a^H U U^H a)`` over the grid.

    ``grid`` may be a :class:`GridSpec` or an explicit array of angles.
    """
    basis = getattr(U, "basis", U)
    if grid is None:
        grid = GridSpec()
    if isinstance(grid, GridSpec):
        angles = grid.angles
        A = _grid_steering(geometry, grid)
    else:
        angles = np.asarray(grid, dtype=np.float64)
        A = steering_matrix(angles, geometry)
    proj = basis.conj().T @ A
    den = np.einsum("ij,ij->j", proj.conj(), proj).real
    den = np.maximum(den, 1e-12 * geometry.sensor_count)
    return Pseudospectrum(angles, 1.0 / den)


def _parabolic_vertex(x, y):
    x0, x1, x2 = x
    y0, y1, y2 = y
    a = (x1 - x0) * (y1 - y2)
    b = (x1 - x2) * (y1 - y0)
    den = a - b
    if den == 0:
        return x1
    return x1 - 0.5 * ((x1 - x0) * a - (x1 - x2) * b) / den


def find_peaks(S, L, method=None):
    """Locate the ``L`` largest interior local maxima of a pseudospectrum.

    Each peak is refined with a three-point parabola through ``log S``. When
    fewer than ``L`` strict local maxima exist, the largest remaining grid
    values fill in (unrefined) and the result is flagged ``padded``.
    """
    theta = np.asarray(S.grid_deg, dtype=np.float64)
    s = np.asarray(S.values, dtype=np.float64)
    if theta.size < 3:
        raise ValueError("pseudospectrum grid needs at least 3 points")
    if int(L) != L or L < 1:
        raise ValueError("number of peaks must be a positive integer")
    L = int(L)
    y = np.log(s)
    inner = np.flatnonzero((s[1:-1] > s[:-2]) & (s[1:-1] > s[2:])) + 1
    inner = inner[np.argsort(-s[inner], kind="stable")][:L]
    doas = [
        _parabolic_vertex(theta[i - 1 : i + 2], y[i - 1 : i + 2]) for i in inner
    ]
    padded = len(doas) < L
    if padded:
        taken = set(inner.tolist())
        for i in np.argsort(-s, kind="stable"):
            if len(doas) == L:
                break
            if i not in taken:
                doas.append(theta[i])
    return DoaEstimate(np.sort(np.array(doas, dtype=np.float64)), Method(method or Method.PHASE2), padded)


def phase2_from_phase1(R, sub1, L):
    """Noise covariance reconstruction followed by the generalized ED.

    Returns ``(subspace, noise_cov)``; raises :class:`EstimationError` or
    an eigensolver error when phase 2 cannot be completed.
    """
    k = smallest_diag_index(R)
    qnun = build_qnun(R)
    c = float(np.real(R[k, k]))
    sigma2 = estimate_common_power(R, sub1, k)
    qcov = estimate_noise_cov(sigma2, qnun, k=k, c=c)
    return phase2_noise_subspace(R, qcov, L), qcov


def estimate_doa(R, L, geometry, grid=None, mode=Method.PHASE2):
    """Full DOA pipeline on a (sample) covariance matrix.

    Parameters
    ----------
    R : (M, M) array_like
        Sample covariance of the array output.
    L : int
        Number of sources, assumed known.
    geometry : ArrayGeometry
    grid : GridSpec or array_like, optional
    mode : Method or str
        ``phase1`` uses the stripped-diagonal subspace directly, ``phase2``
        adds the noise covariance reconstruction and generalized ED, and
        ``classical`` is spectral MUSIC on ``R``.

    Returns
    -------
    (DoaEstimate, NoiseCovEstimate or None)
        The noise covariance estimate is only returned by ``phase2``. If any
        phase-2 step fails, the phase-1 subspace is used instead and the
        estimate is flagged ``fallback``.
    """
    mode = Method(mode)
    R = as_hermitian(R)
    L = _check_L(R.shape[0], L)
    qcov = None
    fallback = False
    if mode is Method.CLASSICAL:
        sub = classical_noise_subspace(R, L)
    else:
        sub = phase1_noise_subspace(strip_diagonal(R), L)
        if mode is Method.PHASE2:
            try:
                sub, qcov = phase2_from_phase1(R, sub, L)
                fallback = qcov.fallback_used
            except ArithmeticError as exc:
                logger.debug("phase 2 fell back to phase 1: %s", exc)
                fallback = True
    spec = music_pseudospectrum(sub, geometry, grid)
    est = find_peaks(spec, L, mode)
    est.fallback = fallback
    est.subspace = sub
    est.spectrum = spec
    return est, qcov
