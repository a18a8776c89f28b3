import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nudoa.estimator import phase2_noise_subspace, strip_diagonal
from nudoa.hermitian_linalg import (
    EigensolverError,
    RankDeficientError,
    as_hermitian,
    eigh,
    generalized_eigh,
    orthonormalize,
)

from conftest import proj, random_hermitian


def test_identity():
    vals, vecs = eigh(np.eye(3))
    np.testing.assert_allclose(vals, [1, 1, 1], atol=1e-15)
    np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(3), atol=1e-12)


def test_textbook_2x2():
    vals, vecs = eigh([[2, 1], [1, 2]])
    np.testing.assert_allclose(vals, [1, 3], atol=1e-14)
    s = 1 / np.sqrt(2)
    # phase convention: largest-magnitude entry real positive (first on ties)
    np.testing.assert_allclose(vecs[:, 0], [s, -s], atol=1e-14)
    np.testing.assert_allclose(vecs[:, 1], [s, s], atol=1e-14)


def test_phase_convention():
    rng = np.random.default_rng(3)
    _, V = eigh(random_hermitian(rng, 6))
    lead = V[np.argmax(np.abs(V), axis=0), np.arange(6)]
    assert np.all(np.abs(lead.imag) < 1e-14)
    assert np.all(lead.real > 0)


def test_s0_stripped_smallest_eigenvalues(s0):
    _, _, _, R = s0
    vals, _ = eigh(strip_diagonal(R))
    # one unit-power source: noise-subspace eigenvalue is -1
    np.testing.assert_allclose(vals[:3], -1.0, atol=1e-10)
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(strip_diagonal(R)), atol=1e-12)


def test_symmetrization():
    H = np.array([[1.0 + 1e-14j, 2 + 1j], [2 - 1j + 1e-13, 5]])
    Hs = as_hermitian(H)
    assert np.array_equal(Hs, Hs.conj().T)
    assert np.all(np.diag(Hs).imag == 0)


def test_zero_matrix():
    vals, vecs = eigh(np.zeros((3, 3)))
    np.testing.assert_array_equal(vals, 0)
    np.testing.assert_allclose(vecs, np.eye(3))


def test_nonconvergence_reports_residual():
    rng = np.random.default_rng(0)
    with pytest.raises(EigensolverError) as err:
        eigh(random_hermitian(rng, 6), max_sweeps=1)
    assert err.value.residual > 1e-12
    assert err.value.sweeps == 1


def test_generalized_identity_metric_pair():
    rng = np.random.default_rng(1)
    R = random_hermitian(rng, 5)
    g = generalized_eigh(R, np.ones(5))
    s = eigh(R)
    np.testing.assert_allclose(g.values, s.values, atol=1e-10)
    np.testing.assert_allclose(proj(g.vectors), proj(s.vectors), atol=1e-10)


def test_generalized_r_equals_q():
    q = np.array([0.5, 2.0, 7.0, 1.5])
    vals, _ = generalized_eigh(np.diag(q), q)
    np.testing.assert_allclose(vals, 1.0, atol=1e-13)


def test_generalized_population_s0(s0):
    _, _, noise, R = s0
    vals, U = generalized_eigh(R, noise.diag)
    np.testing.assert_allclose(vals[:3], 1.0, atol=1e-10)
    assert vals[3] > 1 + 1e-6
    # independent route: whitened dense ED
    w = 1 / np.sqrt(noise.diag)
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(w[:, None] * R * w[None, :]), atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(U, axis=0), 1.0, atol=1e-14)


def test_generalized_rejects_nonpositive_metric():
    with pytest.raises(ValueError, match="not positive definite"):
        generalized_eigh(np.eye(3), [1.0, 0.0, 2.0])
    with pytest.raises(ValueError, match="dimension"):
        generalized_eigh(np.eye(3), [1.0, 2.0])


def test_orthonormalize_keeps_orthonormal_input():
    rng = np.random.default_rng(2)
    Q, _ = np.linalg.qr(rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3)))
    np.testing.assert_allclose(orthonormalize(Q), Q, atol=1e-13)


def test_orthonormalize_textbook():
    out = orthonormalize(np.array([[1, 1], [0, 1], [0, 0]], dtype=float))
    np.testing.assert_allclose(out.conj().T @ out, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(proj(out), np.diag([1, 1, 0]), atol=1e-14)


def test_orthonormalize_phase2_vectors_s0(s0):
    _, _, noise, R = s0
    sub = phase2_noise_subspace(R, noise.diag, 1)
    P = proj(orthonormalize(sub.basis))
    np.testing.assert_allclose(P @ P, P, atol=1e-10)
    np.testing.assert_allclose(P, sub.span_projector, atol=1e-12)


def test_orthonormalize_rank_deficient():
    with pytest.raises(RankDeficientError):
        orthonormalize(np.array([[1, 2], [1, 2], [0, 0]], dtype=float))


hermitian_dims = st.integers(min_value=2, max_value=16)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=200, deadline=None)
@given(n=hermitian_dims, seed=seeds)
def test_reconstruction_and_orthonormality(n, seed):
    H = random_hermitian(np.random.default_rng(seed), n)
    vals, V = eigh(H)
    fro = np.linalg.norm(H)
    assert np.all(np.diff(vals) >= 0)
    assert np.linalg.norm(H - (V * vals) @ V.conj().T) <= 1e-9 * fro
    assert np.abs(V.conj().T @ V - np.eye(n)).max() <= 1e-10
    assert np.linalg.norm(H @ V - V * vals, axis=0).max() <= 1e-9 * fro


@settings(max_examples=100, deadline=None)
@given(n=hermitian_dims, seed=seeds, b=st.floats(-50, 50))
def test_shift_invariance(n, seed, b):
    H = random_hermitian(np.random.default_rng(seed), n)
    v0, V0 = eigh(H)
    v1, V1 = eigh(H + b * np.eye(n))
    np.testing.assert_allclose(v1, v0 + b, atol=1e-10 * max(1, abs(b)))
    # compare subspaces of well-separated eigenvalue clusters via projectors
    gaps = np.flatnonzero(np.diff(v0) > 1e-3) + 1
    for cut in gaps:
        assert np.linalg.norm(proj(V0[:, :cut]) - proj(V1[:, :cut])) <= 1e-7


@settings(max_examples=100, deadline=None)
@given(n=hermitian_dims, seed=seeds)
def test_generalized_residual_and_q_orthogonality(n, seed):
    rng = np.random.default_rng(seed)
    R = random_hermitian(rng, n)
    q = rng.uniform(0.1, 50, size=n)
    vals, U = generalized_eigh(R, q)
    fro = np.linalg.norm(R)
    res = R @ U - (q[:, None] * U) * vals
    assert np.linalg.norm(res, axis=0).max() <= 1e-9 * fro
    G = U.conj().T @ (q[:, None] * U)
    off = G - np.diag(np.diag(G))
    assert np.abs(off).max() <= 1e-10 * np.abs(np.diag(G)).max()


@settings(max_examples=100, deadline=None)
@given(n=hermitian_dims, seed=seeds)
def test_generalized_with_identity_matches_standard(n, seed):
    R = random_hermitian(np.random.default_rng(seed), n)
    np.testing.assert_allclose(generalized_eigh(R, np.ones(n)).values, eigh(R).values, atol=1e-10)
