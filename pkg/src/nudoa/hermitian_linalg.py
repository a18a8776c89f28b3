"""Eigendecomposition kernels for small complex Hermitian matrices.

The standard problem is solved with a cyclic complex Jacobi method compiled
with numba. The generalized problem ``R u = lam Q u`` with a positive diagonal
``Q`` is reduced to the standard one by whitening.
"""
from typing import NamedTuple

import numba as nb
import numpy as np

MAX_SWEEPS = 100
OFF_DIAG_TOL = 1e-12
RANK_TOL = 1e-12


class EigensolverError(ArithmeticError):
    """Raised when the Jacobi iteration does not converge.

    Attributes
    ----------
    residual : float
        Relative off-diagonal Frobenius mass reached when the sweep cap hit.
    """

    def __init__(self, residual, sweeps):
        self.residual = residual
        self.sweeps = sweeps
        super().__init__(
            f"Jacobi eigensolver did not converge after {sweeps} sweeps "
            f"(relative off-diagonal mass {residual:.3e})"
        )


class RankDeficientError(ArithmeticError):
    """Raised when columns handed to :func:`orthonormalize` are dependent."""


class EigenPairs(NamedTuple):
    """Eigenvalues in ascending order; column ``i`` of vectors pairs with values[i]."""

    values: np.ndarray
    vectors: np.ndarray


def as_hermitian(H):
    """Return ``(H + H^H) / 2`` as a complex128 array.

    Sample covariances pick up tiny asymmetries from floating point, so
    Hermitian structure is enforced rather than checked.
    """
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {H.shape}")
    Hs = 0.5 * (H + H.conj().T)
    # the line above already zeroes the diagonal imaginary part up to rounding
    idx = np.diag_indices_from(Hs)
    Hs[idx] = Hs[idx].real
    return Hs


def as_diagonal(d):
    """Validate a diagonal matrix given by its real diagonal entries."""
    d = np.asarray(d, dtype=np.float64)
    if d.ndim == 2:
        d = np.diag(d).real.copy()
    if d.ndim != 1 or d.size < 1:
        raise ValueError("diagonal matrix must be given as a non-empty 1-D array")
    return d


@nb.njit(cache=True)
def _off_norm2(A):
    n = A.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += A[i, j].real ** 2 + A[i, j].imag ** 2
    return s


@nb.njit(cache=True)
def _jacobi(A, V, tol2, max_sweeps):
    """In-place cyclic Jacobi sweeps. Returns (sweeps used, final off-norm^2)."""
    n = A.shape[0]
    off2 = _off_norm2(A)
    sweep = 0
    while off2 > tol2 and sweep < max_sweeps:
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                # phase factor turns the (p, q) entry real and positive
                ph = apq / mag
                app = A[p, p].real
                aqq = A[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                phc = ph.conjugate()
                # J = [[c, s], [-s*conj(ph), c*conj(ph)]] on columns (p, q)
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * phc * akq
                    A[k, q] = s * akp + c * phc * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * ph * aqk
                    A[q, k] = s * apk + c * ph * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = app - t * mag
                A[q, q] = aqq + t * mag
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * phc * vkq
                    V[k, q] = s * vkp + c * phc * vkq
        off2 = _off_norm2(A)
    return sweep, off2


def _fix_phase(V):
    # largest-magnitude entry of every column becomes real positive
    idx = np.argmax(np.abs(V), axis=0)
    lead = V[idx, np.arange(V.shape[1])]
    mag = np.abs(lead)
    return V * (lead.conj() / mag)[None, :]


def eigh(H, max_sweeps=MAX_SWEEPS, tol=OFF_DIAG_TOL):
    """Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi.

    Parameters
    ----------
    H : (M, M) array_like
        Hermitian matrix. It is symmetrized before use.
    max_sweeps : int
        Cap on full Jacobi sweeps.
    tol : float
        Convergence threshold on the off-diagonal Frobenius mass relative to
        ``||H||_F``.

    Returns
    -------
    EigenPairs
        Ascending real eigenvalues and orthonormal eigenvectors (columns).
        Each vector is scaled so its largest-magnitude entry is real positive.

    Raises
    ------
    EigensolverError
        If the off-diagonal mass is still above ``tol`` after ``max_sweeps``.
    """
    A = as_hermitian(H)
    n = A.shape[0]
    fro = np.linalg.norm(A)
    V = np.eye(n, dtype=np.complex128)
    if fro > 0.0:
        tol2 = (tol * fro) ** 2
        sweeps, off2 = _jacobi(A, V, tol2, max_sweeps)
        if off2 > tol2:
            raise EigensolverError(np.sqrt(off2) / fro, sweeps)
    values = np.diag(A).real.copy()
    order = np.argsort(values, kind="stable")
    return EigenPairs(values[order], _fix_phase(V[:, order]))


def generalized_eigh(R, Q, **kwargs):
    """Solve ``R u = lam Q u`` for Hermitian ``R`` and positive diagonal ``Q``.

    The problem is whitened into the standard eigenproblem of
    ``Q^{-1/2} R Q^{-1/2}``; eigenvectors are mapped back with
    ``u = Q^{-1/2} v`` and scaled to unit Euclidean length. The returned
    vectors are therefore Q-orthogonal but not Q-normalized.

    Raises
    ------
    ValueError
        If any diagonal entry of ``Q`` is not strictly positive, or the
        dimensions disagree.
    """
    R = as_hermitian(R)
    q = as_diagonal(Q)
    if q.size != R.shape[0]:
        raise ValueError(f"dimension mismatch: R is {R.shape[0]}, Q is {q.size}")
    if not np.all(q > 0) or not np.all(np.isfinite(q)):
        raise ValueError("noise covariance not positive definite")
    w = 1.0 / np.sqrt(q)
    pairs = eigh(w[:, None] * R * w[None, :], **kwargs)
    U = w[:, None] * pairs.vectors
    U /= np.linalg.norm(U, axis=0)[None, :]
    return EigenPairs(pairs.values, U)


def orthonormalize(vectors, tol=RANK_TOL):
    """Orthonormal basis for the span of the columns, by Gram-Schmidt.

    Modified Gram-Schmidt with one reorthogonalization pass. Column order and
    direction are kept, so an orthonormal input comes back unchanged.

    Raises
    ------
    RankDeficientError
        If a column's remainder after projection falls below ``tol`` times its
        original norm.
    """
    X = np.array(vectors, dtype=np.complex128, copy=True)
    if X.ndim == 1:
        X = X[:, None]
    out = np.empty_like(X)
    for j in range(X.shape[1]):
        v = X[:, j]
        norm0 = np.linalg.norm(v)
        for _ in range(2):
            for i in range(j):
                v = v - (out[:, i].conj() @ v) * out[:, i]
        nv = np.linalg.norm(v)
        if norm0 == 0.0 or nv < tol * norm0:
            raise RankDeficientError(
                f"column {j} is numerically dependent on the previous ones "
                f"(pivot {nv:.3e})"
            )
        out[:, j] = v / nv
    return out


def projector(U):
    """``U U^H`` for a basis with orthonormal columns."""
    U = np.asarray(U)
    return U @ U.conj().T
