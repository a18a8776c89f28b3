import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nudoa.array_model import (
    ArrayGeometry,
    NoiseProfile,
    SourceSet,
    population_covariance,
    signal_power_for_snr,
    snr_of,
    steering_matrix,
    steering_vector,
    wnpr,
)
from nudoa.hermitian_linalg import eigh

from conftest import EX1_Q


def test_broadside_is_all_ones():
    np.testing.assert_allclose(steering_vector(0.0, ArrayGeometry(5)), np.ones(5))


def test_thirty_degrees_quarter_turns():
    a = steering_vector(30.0, ArrayGeometry(4))
    np.testing.assert_allclose(a, [1, 1j, -1, -1j], atol=1e-15)


@given(theta=st.floats(-89.9, 89.9), M=st.integers(2, 32))
def test_steering_norm(theta, M):
    a = steering_vector(theta, ArrayGeometry(M))
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-14)
    assert a[0] == 1
    assert np.isclose(np.vdot(a, a).real, M)


@pytest.mark.parametrize("theta", [90.0, -90.0, 120.0])
def test_steering_domain(theta):
    with pytest.raises(ValueError):
        steering_vector(theta, ArrayGeometry(4))


def test_geometry_and_source_validation():
    with pytest.raises(ValueError):
        ArrayGeometry(1)
    with pytest.raises(ValueError):
        ArrayGeometry(4, 0.0)
    with pytest.raises(ValueError, match="distinct"):
        SourceSet([10, 10])
    with pytest.raises(ValueError, match="positive"):
        NoiseProfile([1, 0, 2])


def test_zero_power_sources_give_noise_only(s0):
    g, _, noise, _ = s0
    R = population_covariance(g, SourceSet([30.0], [0.0]), noise)
    np.testing.assert_allclose(R, np.diag(noise.diag), atol=1e-15)


def test_s0_diagonal(s0):
    *_, R = s0
    np.testing.assert_allclose(np.diag(R).real, [2, 3, 4, 5], atol=1e-14)


def test_example1_diagonal_span(ex1):
    *_, R = ex1
    d = np.diag(R).real
    assert d[7] - d[0] == pytest.approx(49, abs=1e-12)


def test_wnpr():
    assert wnpr(NoiseProfile([1, 1, 1])) == 1
    assert wnpr(NoiseProfile(EX1_Q)) == 50
    assert wnpr(NoiseProfile([2, 4])) == 2


def test_signal_power_for_snr():
    assert signal_power_for_snr(0, NoiseProfile.uniform(6), 6) == pytest.approx(1)
    assert signal_power_for_snr(10, NoiseProfile.uniform(3)) == pytest.approx(10)
    assert signal_power_for_snr(0, NoiseProfile([1, 2, 3, 4]), 4) == pytest.approx(48 / 25, rel=1e-14)


@given(snr=st.floats(-30, 40), v=st.lists(st.floats(0.01, 100), min_size=2, max_size=16))
def test_snr_round_trip(snr, v):
    noise = NoiseProfile(v)
    p = signal_power_for_snr(snr, noise)
    assert snr_of(p, noise) == pytest.approx(10 ** (snr / 10), rel=1e-12)


def test_population_structure(ex1):
    g, src, noise, R = ex1
    vals = np.linalg.eigvalsh(R)
    assert vals.min() >= noise.diag.min() - 1e-12
    excess = np.linalg.eigvalsh(R - np.diag(noise.diag))
    assert np.sum(excess > 1e-9) == src.L
    assert np.all(np.abs(excess[excess <= 1e-9]) < 1e-9)


def test_quadratic_form_on_null_space(ex1):
    g, src, noise, R = ex1
    A = steering_matrix(src.doas_deg, g)
    # orthonormal basis of null(A^H)
    _, _, Vh = np.linalg.svd(A.conj().T)
    N = Vh[src.L:].conj().T
    rng = np.random.default_rng(0)
    for _ in range(10):
        u = N @ (rng.normal(size=N.shape[1]) + 1j * rng.normal(size=N.shape[1]))
        u /= np.linalg.norm(u)
        assert np.vdot(u, R @ u) == pytest.approx(np.vdot(u, noise.diag * u), abs=1e-12)


def test_population_rank_via_jacobi(ex1):
    g, src, noise, R = ex1
    vals, _ = eigh(R - np.diag(noise.diag))
    assert np.sum(vals > 1e-9) == 2
