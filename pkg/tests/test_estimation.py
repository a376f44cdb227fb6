import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cellfree import estimation_stats, make_pilots, mmse_estimate, sample_channel


def test_scalar_closed_form():
    # single AP, two users on the same pilot
    beta = np.array([[2.0, 0.5]])
    gram2 = np.ones((2, 2))
    tau, p = 4, 3.0
    stats = estimation_stats(beta, gram2, p, tau)
    denom = tau * p * 2.5 + 1
    assert stats.c[0, 0] == pytest.approx(np.sqrt(tau * p) * 2.0 / denom)
    assert stats.gamma[0, 0] == pytest.approx(tau * p * 4.0 / denom)
    assert stats.gamma[0, 1] == pytest.approx(tau * p * 0.25 / denom)


@settings(max_examples=50, deadline=None)
@given(arrays(float, (4, 5), elements=st.floats(1e-16, 1e-6)), st.integers(1, 6),
       st.integers(0, 100), st.floats(1e6, 1e13))
def test_gamma_between_zero_and_beta(beta, tau, seed, p):
    pilots = make_pilots(5, tau, "random", seed)
    gamma = estimation_stats(beta, pilots, p, tau).gamma
    assert np.all(gamma > 0)
    assert np.all(gamma <= beta * (1 + 1e-12))


def test_contaminated_users_quality_ratio():
    beta = np.array([[1e-8, 3e-9, 5e-9]])
    pilots = make_pilots(3, 1, "random")  # tau=1: all users share
    g = estimation_stats(beta, pilots, 1e12, 1).gamma[0]
    assert g[0] / g[1] == pytest.approx((1e-8 / 3e-9) ** 2)


def test_orthogonal_high_snr_limit():
    beta = np.array([[1e-7, 2e-9]])
    gamma = estimation_stats(beta, make_pilots(2, 2, "orthogonal"), 1e20, 2).gamma
    np.testing.assert_allclose(gamma, beta, rtol=1e-8)


def test_rejects_nonpositive_pilot_power():
    with pytest.raises(ValueError):
        estimation_stats(np.ones((1, 1)), np.ones((1, 1)), 0.0, 1)


@pytest.mark.parametrize("mode,tau", [("orthogonal", 3), ("random", 2)])
def test_sample_estimates_match_statistics(mode, tau):
    # Monte-Carlo oracle: E|ghat|^2 = gamma, E|g - ghat|^2 = beta - gamma, and
    # the error is uncorrelated with the estimate
    rng = np.random.default_rng(0)
    beta = 10 ** rng.uniform(-1, 1, size=(3, 3))
    p_p, T, N = 0.7, 60_000, 2
    pilots = make_pilots(3, tau, mode, seed=4)
    stats = estimation_stats(beta, pilots, p_p, tau)
    g = sample_channel(beta, N, seed=1, trials=T)
    ghat = mmse_estimate(g, pilots, stats, p_p, tau, seed=2)
    err = g - ghat
    np.testing.assert_allclose(np.mean(np.abs(ghat) ** 2, axis=(0, 3)), stats.gamma, rtol=0.03)
    np.testing.assert_allclose(np.mean(np.abs(err) ** 2, axis=(0, 3)), beta - stats.gamma,
                               rtol=0.03)
    cross = np.abs(np.mean(ghat.conj() * err, axis=(0, 3)))
    assert np.all(cross < 0.02 * beta)


def test_noiseless_estimates_are_deterministic():
    beta = np.array([[1.0, 2.0]])
    pilots = make_pilots(2, 2, "orthogonal")
    stats = estimation_stats(beta, pilots, 5.0, 2)
    g = sample_channel(beta, 1, seed=3)
    ghat = mmse_estimate(g, pilots, stats, 5.0, 2, seed=0, noise_scale=0)
    np.testing.assert_allclose(ghat[..., 0], stats.c * np.sqrt(10.0) * g[..., 0])


@pytest.mark.parametrize("gram2,beta,c,gamma", [
    (np.eye(1), [[1.0]], 0.5, 0.5),
    (np.ones((2, 2)), [[1.0, 1.0]], 1 / 3, 1 / 3),
])
def test_unit_snr_examples(gram2, beta, c, gamma):
    stats = estimation_stats(np.array(beta), gram2, 1.0, 1)
    np.testing.assert_allclose(stats.c, c)
    np.testing.assert_allclose(stats.gamma, gamma)


def test_zero_gain_gives_zero_statistics():
    stats = estimation_stats(np.array([[0.0, 1.0]]), np.eye(2), 2.0, 2)
    assert stats.c[0, 0] == 0 and stats.gamma[0, 0] == 0


def test_extra_contaminator_lowers_quality():
    beta = np.array([[1.0, 0.5, 0.3]])
    alone = estimation_stats(beta, np.eye(3), 10.0, 3).gamma
    shared = np.eye(3)
    shared[0, 2] = shared[2, 0] = 1.0
    assert estimation_stats(beta, shared, 10.0, 3).gamma[0, 0] < alone[0, 0]
