"""MMSE channel estimation: long-term statistics and sample-level estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import PILOT_NOISE, complex_normal, derive_rng


@dataclass(frozen=True)
class EstimationStats:
    c: np.ndarray  # (M, K) MMSE scaling
    gamma: np.ndarray  # (M, K) mean-square estimate quality


def estimation_stats(beta, pilots, p_p, tau):
    """MMSE scalings c_mk and estimate qualities gamma_mk.

    ``pilots`` is a PilotBook or a (K, K) matrix of squared pilot overlaps.
    """
    if p_p <= 0:
        raise ValueError("pilot SNR must be positive")
    beta = np.asarray(beta, dtype=float)
    gram2 = getattr(pilots, "gram2", pilots)
    a = np.sqrt(tau * p_p)
    # contamination[m, k] = sum_k' beta_mk' |phi_k^H phi_k'|^2
    contamination = beta @ np.asarray(gram2, dtype=float).T
    c = a * beta / (tau * p_p * contamination + 1.0)
    gamma = a * beta * c
    return EstimationStats(c=c, gamma=gamma)


def mmse_estimate(channels, pilots, stats, p_p, tau, seed, noise_scale=1.0):
    """Sample-level MMSE estimates from de-spread pilot observations.

    ``channels`` has shape (..., M, K, N); the result has the same shape.
    ``noise_scale`` multiplies the pilot-phase noise (0 gives the noiseless
    limit). ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    g = np.asarray(channels)
    *lead, M, K, N = g.shape
    rng = seed if isinstance(seed, np.random.Generator) else derive_rng(seed, PILOT_NOISE)
    inner = pilots.inner  # [k, k'] = phi_k^H phi_k'
    a = np.sqrt(tau * p_p)
    mixed = a * np.einsum("kj,...mjn->...mkn", inner, g)
    if noise_scale:
        # W_{p,m} phi_k for an N x tau noise block per AP
        w = complex_normal(rng, tuple(lead) + (M, N, pilots.phi.shape[0]))
        proj = np.einsum("...mnt,tk->...mkn", w, pilots.phi)
        mixed = mixed + noise_scale * proj
    return stats.c[..., None] * mixed
