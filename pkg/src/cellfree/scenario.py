"""Topologies, large-scale fading, pilot books and small-scale channels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PathLossParams

# RNG purpose tags; streams are keyed by (seed, purpose, ...) so that trials
# can run in any order and still reproduce.
TOPOLOGY, SHADOWING, PILOTS, CHANNEL, PILOT_NOISE, SYMBOLS, RX_NOISE = range(7)


def derive_rng(seed, *keys):
    """Independent generator for ``(seed, *keys)``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


@dataclass(frozen=True)
class Topology:
    ap_positions: np.ndarray  # (M, 2)
    user_positions: np.ndarray  # (K, 2)

    def distances(self):
        """AP-user distances, shape (M, K), in metres."""
        diff = self.ap_positions[:, None, :] - self.user_positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])


@dataclass(frozen=True)
class PilotBook:
    phi: np.ndarray  # (tau, K) complex, unit-norm columns
    gram2: np.ndarray  # (K, K), |phi_k^H phi_k'|^2

    @classmethod
    def from_matrix(cls, phi):
        phi = np.asarray(phi, dtype=complex)
        gram2 = np.abs(phi.conj().T @ phi) ** 2
        # snap floating-point residue of exactly orthogonal / identical columns
        gram2[np.abs(gram2) < 1e-12] = 0.0
        gram2[np.abs(gram2 - 1.0) < 1e-12] = 1.0
        return cls(phi=phi, gram2=gram2)

    @property
    def inner(self):
        """Matrix of inner products phi_k^H phi_k'."""
        return self.phi.conj().T @ self.phi


def drop_topology(config, seed):
    """Uniform AP and user drop in the ``D x D`` square."""
    rng = derive_rng(seed, TOPOLOGY)
    aps = rng.uniform(0.0, config.D, size=(config.M, 2))
    users = rng.uniform(0.0, config.D, size=(config.K, 2))
    return Topology(ap_positions=aps, user_positions=users)


def path_loss_db(d, params=PathLossParams()):
    """Three-slope path loss (as a gain in dB, i.e. negative) at distance ``d`` metres."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    d_km = d / 1e3
    d0_km = params.d0 / 1e3
    d1_km = params.d1 / 1e3
    inner = -params.L - 15 * np.log10(d1_km) - 20 * np.log10(d0_km)
    with np.errstate(divide="ignore"):
        middle = -params.L - 15 * np.log10(d1_km) - 20 * np.log10(d_km)
        outer = -params.L - 35 * np.log10(d_km)
    pl = np.where(d <= params.d0, inner, np.where(d <= params.d1, middle, outer))
    return pl if pl.ndim else float(pl)


def large_scale(topology, sigma_sh, seed, params=PathLossParams()):
    """Large-scale gains beta (M, K), linear. Shadowing only beyond ``d1``."""
    d = topology.distances()
    pl = path_loss_db(d, params)
    z = derive_rng(seed, SHADOWING).standard_normal(d.shape)
    shadow = np.where(d > params.d1, sigma_sh * z, 0.0)
    return 10 ** ((pl + shadow) / 10)


def make_pilots(K, tau, mode="random", seed=0):
    """Pilot book.

    ``orthogonal`` takes the first K columns of the tau-point DFT basis;
    ``random`` draws, for each user, one DFT column uniformly at random, so
    users either share a pilot exactly or are orthogonal.
    """
    basis = np.fft.fft(np.eye(tau)) / np.sqrt(tau)
    if mode == "orthogonal":
        if tau < K:
            raise ValueError(f"orthogonal pilots need tau >= K (tau={tau}, K={K})")
        idx = np.arange(K)
    elif mode == "random":
        idx = derive_rng(seed, PILOTS).integers(0, tau, size=K)
    else:
        raise ValueError(f"unknown pilot mode {mode!r}")
    return PilotBook.from_matrix(basis[:, idx])


def complex_normal(rng, shape):
    """i.i.d. CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def sample_channel(beta, N, seed, trials=None):
    """Rayleigh channels g_mk = sqrt(beta_mk) h_mk.

    Returns shape (M, K, N), or (trials, M, K, N) when ``trials`` is given.
    """
    beta = np.asarray(beta, dtype=float)
    rng = seed if isinstance(seed, np.random.Generator) else derive_rng(seed, CHANNEL)
    lead = () if trials is None else (trials,)
    h = complex_normal(rng, lead + beta.shape + (N,))
    return np.sqrt(beta)[..., None] * h
