import numpy as np
import pytest

from nudoa.array_model import ArrayGeometry, NoiseProfile, SourceSet, population_covariance
from nudoa.snapshots import (
    RngSeed,
    generate_snapshots,
    read_snapshots,
    sample_covariance,
    write_snapshots,
)

from conftest import EX1_Q


@pytest.fixture
def ex1_setup():
    g = ArrayGeometry(8)
    noise = NoiseProfile(EX1_Q)
    src = SourceSet([-3.0, 6.0], [10.0, 10.0])
    return g, src, noise, population_covariance(g, src, noise)


def test_degenerate_all_zero():
    g = ArrayGeometry(4)
    X = generate_snapshots(g, SourceSet([10.0], [0.0]), np.zeros(4), 16, RngSeed(1))
    assert X.shape == (4, 16)
    assert np.all(X == 0)


def test_determinism(ex1_setup):
    g, src, noise, _ = ex1_setup
    a = generate_snapshots(g, src, noise, 50, RngSeed(11, 3))
    b = generate_snapshots(g, src, noise, 50, RngSeed(11, 3))
    c = generate_snapshots(g, src, noise, 50, RngSeed(11, 4))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_diagonal_law_of_large_numbers(ex1_setup):
    g, src, noise, R = ex1_setup
    Rhat = sample_covariance(generate_snapshots(g, src, noise, 500, RngSeed(2024)))
    rel = np.abs(np.diag(Rhat).real / np.diag(R).real - 1)
    assert rel.max() < 0.15


def test_sample_covariance_close_to_population(ex1_setup):
    g, src, noise, R = ex1_setup
    Rhat = sample_covariance(generate_snapshots(g, src, noise, 500, RngSeed(2024)))
    assert np.linalg.norm(Rhat - R) / np.linalg.norm(R) < 0.2


def test_rank_one_outer_product():
    Rhat = sample_covariance(np.array([[1.0], [1j]]))
    np.testing.assert_allclose(Rhat, [[1, -1j], [1j, 1]])


def test_scaled_orthogonal_columns():
    X = np.sqrt(2) * np.eye(2)
    np.testing.assert_allclose(sample_covariance(X), np.eye(2), atol=1e-15)


def test_psd_and_hermitian(ex1_setup):
    g, src, noise, _ = ex1_setup
    Rhat = sample_covariance(generate_snapshots(g, src, noise, 3, RngSeed(5)))
    assert np.array_equal(Rhat, Rhat.conj().T)
    assert np.linalg.eigvalsh(Rhat).min() >= -1e-12
    assert np.trace(Rhat).real >= 0


def test_unbiased_over_seeds(ex1_setup):
    g, src, noise, R = ex1_setup
    K, N = 200, 500
    acc = np.zeros_like(R)
    for k in range(K):
        acc += sample_covariance(generate_snapshots(g, src, noise, N, RngSeed(9, k)))
    mean = acc / K
    # per-entry std of a sample covariance entry is sqrt(R_ii R_jj / N)
    d = np.diag(R).real
    predicted = np.sqrt(np.sum(np.outer(d, d)) / (K * N))
    assert np.linalg.norm(mean - R) < 3 * predicted


def test_complex_noise_is_circular():
    g = ArrayGeometry(2)
    X = generate_snapshots(g, SourceSet([0.0], [0.0]), [1.0, 4.0], 200_000, RngSeed(3))
    np.testing.assert_allclose(np.mean(np.abs(X) ** 2, axis=1), [1.0, 4.0], rtol=0.02)
    # pseudo-covariance E[x x^T] vanishes for circular noise
    assert np.abs(np.mean(X[0] ** 2)) < 0.02


def test_binary_round_trip(tmp_path, ex1_setup):
    g, src, noise, _ = ex1_setup
    X = generate_snapshots(g, src, noise, 7, RngSeed(1))
    path = tmp_path / "x.bin"
    write_snapshots(path, X)
    raw = path.read_bytes()
    assert raw[:4] == b"DOAS"
    assert int.from_bytes(raw[4:8], "little") == 8
    assert int.from_bytes(raw[8:12], "little") == 7
    assert len(raw) == 16 + 8 * 7 * 16
    # first entry: real then imaginary float64, little-endian
    assert np.frombuffer(raw[16:32], "<f8").tolist() == [X[0, 0].real, X[0, 0].imag]
    assert np.array_equal(read_snapshots(path), X)


def test_binary_bad_magic(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(b"XXXX" + bytes(12))
    with pytest.raises(ValueError, match="magic"):
        read_snapshots(p)


def test_seed_validation():
    with pytest.raises(ValueError):
        RngSeed(-1)
    with pytest.raises(ValueError):
        RngSeed(0, 2**64)
