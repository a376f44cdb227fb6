import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cellfree import SystemConfig, drop_topology, large_scale, make_pilots, path_loss_db, sample_channel
from cellfree.config import PathLossParams, thermal_noise_mw
from cellfree.scenario import Topology, derive_rng


def test_thermal_noise_matches_kTBF():
    boltzmann = 1.380649e-23
    expected_w = boltzmann * 290 * 20e6 * 10 ** 0.9
    assert thermal_noise_mw() == pytest.approx(expected_w * 1e3, rel=1e-9)
    assert thermal_noise_mw() == pytest.approx(6.36e-10, rel=0.01)


def test_path_loss_anchor_values():
    # at 1 km the far-field law reduces to -L
    assert path_loss_db(1000.0) == pytest.approx(-140.7)
    assert path_loss_db(100.0) == pytest.approx(-140.7 + 35.0)
    # inside d0 the loss is flat
    assert path_loss_db(1.0) == pytest.approx(path_loss_db(10.0))
    assert path_loss_db(5.0) == pytest.approx(-140.7 - 15 * math.log10(0.05) - 20 * math.log10(0.01))


def test_path_loss_is_continuous_at_breakpoints():
    p = PathLossParams()
    for d in (p.d0, p.d1):
        left, right = path_loss_db(d * (1 - 1e-9)), path_loss_db(d * (1 + 1e-9))
        assert left == pytest.approx(right, abs=1e-6)


@given(st.floats(0.1, 5000.0), st.floats(0.1, 5000.0))
def test_path_loss_monotone_in_distance(d1, d2):
    lo, hi = sorted((d1, d2))
    assert path_loss_db(hi) <= path_loss_db(lo) + 1e-12


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        path_loss_db(0.0)
    with pytest.raises(ValueError):
        path_loss_db(np.array([10.0, -1.0]))


def test_no_shadowing_within_d1():
    aps = np.array([[0.0, 0.0]])
    users = np.array([[5.0, 0.0], [30.0, 0.0], [50.0, 0.0]])
    beta = large_scale(Topology(aps, users), 8.0, seed=7)
    expected = 10 ** (path_loss_db(np.array([5.0, 30.0, 50.0])) / 10)
    np.testing.assert_allclose(beta[0], expected, rtol=1e-12)


def test_shadowing_statistics_beyond_d1():
    aps = np.zeros((200, 2))
    users = np.column_stack([np.full(50, 400.0), np.zeros(50)])
    beta = large_scale(Topology(aps, users), 8.0, seed=11)
    dev = 10 * np.log10(beta) - path_loss_db(400.0)
    assert abs(dev.mean()) < 0.3
    assert dev.std() == pytest.approx(8.0, rel=0.03)


def test_topology_reproducible_and_in_square():
    cfg = SystemConfig(M=30, K=10, tau=10, D=1000.0)
    a, b = drop_topology(cfg, 5), drop_topology(cfg, 5)
    np.testing.assert_array_equal(a.ap_positions, b.ap_positions)
    assert a.ap_positions.min() >= 0 and a.ap_positions.max() <= 1000.0
    c = drop_topology(cfg, 6)
    assert not np.array_equal(a.user_positions, c.user_positions)


def test_derived_streams_are_independent_of_order():
    x = derive_rng(3, 1, 2).random(4)
    derive_rng(3, 9).random(100)
    np.testing.assert_array_equal(x, derive_rng(3, 1, 2).random(4))


def test_orthogonal_pilots_identity_gram():
    book = make_pilots(6, 8, "orthogonal")
    np.testing.assert_array_equal(book.gram2, np.eye(6))


def test_orthogonal_pilots_need_enough_length():
    with pytest.raises(ValueError):
        make_pilots(5, 4, "orthogonal")


def test_unknown_pilot_mode():
    with pytest.raises(ValueError):
        make_pilots(3, 4, "gold")


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(1, 20), st.integers(0, 10_000))
def test_random_pilots_share_or_orthogonal(K, tau, seed):
    book = make_pilots(K, tau, "random", seed)
    np.testing.assert_allclose(np.linalg.norm(book.phi, axis=0), 1.0, atol=1e-12)
    assert set(np.unique(book.gram2)) <= {0.0, 1.0}
    np.testing.assert_array_equal(np.diag(book.gram2), 1.0)
    np.testing.assert_array_equal(book.gram2, book.gram2.T)


def test_channel_power_matches_beta():
    beta = np.array([[1.0, 0.25], [4.0, 1e-3]])
    g = sample_channel(beta, 3, seed=2, trials=40_000)
    assert g.shape == (40_000, 2, 2, 3)
    power = np.mean(np.abs(g) ** 2, axis=(0, 3))
    np.testing.assert_allclose(power, beta, rtol=0.02)


def test_small_and_full_drops():
    top = drop_topology(SystemConfig(M=2, K=1, tau=1, D=1000.0), 7)
    pts = np.vstack([top.ap_positions, top.user_positions])
    assert pts.shape == (3, 2) and pts.min() >= 0 and pts.max() <= 1000
    full = drop_topology(SystemConfig(), 0)
    assert full.ap_positions.shape == (100, 2) and full.user_positions.shape == (40, 2)


def test_zero_shadowing_is_exact_and_gains_positive():
    cfg = SystemConfig(M=20, K=5, tau=5)
    top = drop_topology(cfg, 1)
    beta = large_scale(top, 0.0, seed=1)
    np.testing.assert_allclose(beta, 10 ** (path_loss_db(top.distances()) / 10), rtol=1e-12)
    assert np.all(large_scale(top, 8.0, seed=1) > 0)


def test_zero_gain_gives_zero_channel_and_seeds_are_independent():
    beta = np.array([[0.0, 1.0]])
    g = sample_channel(beta, 2, seed=0)
    assert np.all(g[0, 0] == 0)
    a = sample_channel(np.ones((1, 1)), 1, seed=1, trials=50_000).ravel()
    b = sample_channel(np.ones((1, 1)), 1, seed=2, trials=50_000).ravel()
    assert abs(np.mean(a * b.conj())) < 3 / np.sqrt(50_000) * 1.5
