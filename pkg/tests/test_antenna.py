import numpy as np
import pytest

from uav_channel_gan.antenna import (
    AntennaConfig,
    Codebook,
    PathComponent,
    beta_coefficient,
    estimate_gain,
    mimo_channel,
    received_pilot,
    steering_vector,
)
from uav_channel_gan.exceptions import ContractViolation, SingularBeamformingError


def test_steering_vector_broadside():
    np.testing.assert_allclose(steering_vector(0.0, 4), np.ones(4))


def test_steering_vector_endfire():
    np.testing.assert_allclose(steering_vector(np.pi / 2, 2, np.pi), [1, -1], atol=1e-12)


def test_steering_vector_odd_symmetry():
    a = steering_vector(0.3, 8)
    np.testing.assert_allclose(steering_vector(-0.3, 8), a.conj())


def test_steering_vector_rejects_empty_array():
    with pytest.raises(ContractViolation):
        steering_vector(0.1, 0)


def test_path_angles_are_wrapped():
    path = PathComponent(1.0, -0.5, 7.0)
    assert 0 <= path.aod < 2 * np.pi
    assert path.aoa == pytest.approx(7.0 - 2 * np.pi)


def test_path_rejects_non_finite_gain():
    with pytest.raises(ContractViolation):
        PathComponent(complex(np.inf, 0), 0.0, 0.0)


def test_mimo_channel_scalar():
    cfg = AntennaConfig(1, 1, 0.01)
    np.testing.assert_allclose(mimo_channel([PathComponent(1.0, 0.2, 0.4)], cfg), [[1.0]])


def test_mimo_channel_single_path_is_rank_one():
    cfg = AntennaConfig(4, 2, 0.01)
    alpha = 0.3 - 0.7j
    H = mimo_channel([PathComponent(alpha, 0.4, 1.1)], cfg)
    assert H.shape == (2, 4)
    s = np.linalg.svd(H, compute_uv=False)
    assert s[1] < 1e-10 * s[0]
    assert np.linalg.norm(H) == pytest.approx(abs(alpha) * np.sqrt(8))


def test_mimo_channel_cancelling_paths():
    cfg = AntennaConfig(4, 2, 0.01)
    H = mimo_channel([PathComponent(0.5, 0.4, 1.1), PathComponent(-0.5, 0.4, 1.1)], cfg)
    np.testing.assert_allclose(H, 0.0, atol=1e-15)


def test_received_pilot_scalar():
    r = received_pilot(np.array([[2.0 + 1j]]), np.ones(1), np.ones(1), 4.0, np.zeros(1))
    assert r == pytest.approx(2 * (2.0 + 1j))


def test_received_pilot_noise_only():
    noise = np.array([0.1 + 0.2j, -0.3j])
    q = np.array([1.0, 1j])
    r = received_pilot(np.zeros((2, 3)), np.ones(3), q, 1.0, noise)
    assert r == pytest.approx(np.vdot(q, noise))


def test_received_pilot_dimension_mismatch():
    with pytest.raises(ContractViolation):
        received_pilot(np.zeros((2, 3)), np.ones(2), np.ones(2), 1.0, np.zeros(2))


def test_beta_scalar():
    assert beta_coefficient(np.ones(1), np.ones(1), np.ones(1), np.ones(1), 4.0) == 2.0


def test_beta_matched_vectors():
    a_t, a_r = steering_vector(0.3, 8), steering_vector(-0.2, 4)
    beta = beta_coefficient(a_t, a_r, a_t, a_r, 9.0)
    assert beta == pytest.approx(3.0 * 8 * 4)


def test_beta_kronecker_form_matches_factored_form():
    rng = np.random.default_rng(0)
    for _ in range(100):
        w, a_t = rng.normal(size=(2, 5)) + 1j * rng.normal(size=(2, 5))
        q, a_r = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
        factored = beta_coefficient(w, q, a_t, a_r, 2.0)
        kron = beta_coefficient(w, q, a_t, a_r, 2.0, kronecker_form=True)
        assert abs(factored - kron) <= 1e-10 * max(1.0, abs(factored))


def test_noiseless_pilot_recovers_gain(small_antenna, small_codebook):
    k = 23
    aod, aoa = small_codebook.angles(k)
    w, q = small_codebook.pair(k)
    alpha = 1e-6 * (0.6 - 0.8j)
    H = mimo_channel([PathComponent(alpha, aod, aoa)], small_antenna)
    r = received_pilot(H, w, q, 0.1, np.zeros(small_antenna.rx_elements))
    a_t = steering_vector(aod, small_antenna.tx_elements)
    a_r = steering_vector(aoa, small_antenna.rx_elements)
    beta = beta_coefficient(w, q, a_t, a_r, 0.1)
    assert estimate_gain(r, beta) == pytest.approx(alpha, rel=1e-10)


def test_estimator_is_unbiased():
    rng = np.random.default_rng(1)
    alpha, beta, sigma2 = 0.5 + 0.25j, 2.0 - 1.0j, 0.04
    q = np.ones(4)
    noise = rng.normal(size=(10_000, 4)) + 1j * rng.normal(size=(10_000, 4))
    noise *= np.sqrt(sigma2 / 2)
    estimates = alpha + (noise @ q.conj()) / beta
    err_var = sigma2 * 4 / abs(beta) ** 2
    stderr = np.sqrt(err_var / len(estimates))
    assert abs(estimates.mean() - alpha) < 3 * np.sqrt(2) * stderr
    assert np.var(estimates - alpha) == pytest.approx(err_var, rel=0.05)


def test_estimate_gain_singular():
    with pytest.raises(SingularBeamformingError):
        estimate_gain(1.0, 0.0)


def test_codebook_grid(small_codebook):
    assert small_codebook.size == 81
    assert np.allclose(np.abs(small_codebook.tx_vectors), 1.0)
    aod, aoa = small_codebook.angles(1)
    assert np.sin(aod) == pytest.approx(-0.8)
    assert np.sin(aoa) == pytest.approx(-0.8)
    # AoD varies slowest
    assert np.sin(small_codebook.angles(2)[0]) == pytest.approx(-0.8)
    assert np.sin(small_codebook.angles(10)[0]) == pytest.approx(-0.6)


def test_codebook_nearest_index(small_codebook):
    assert small_codebook.nearest_index(0.0, 0.0)[0] == 41
    assert small_codebook.nearest_index(-0.79, 0.81)[0] == 9


def test_codebook_rejects_bad_index(small_codebook):
    with pytest.raises(ContractViolation):
        small_codebook.pair(0)
    with pytest.raises(ContractViolation):
        small_codebook.angles(82)


def test_codebook_rejects_duplicate_pairs(small_antenna):
    with pytest.raises(ContractViolation):
        Codebook.from_sine_grid(small_antenna, [0.1, 0.1], [0.2])
