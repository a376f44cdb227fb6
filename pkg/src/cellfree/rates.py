"""Closed-form uplink SINR and rate evaluation.

Shapes: ``beta`` and ``gamma`` are (M, K); powers ``q`` are (K,); receiver
weights ``u`` are (M, K) with one unit-norm column per user.

Every SINR here has the form ``a_k q_k / ((F q)_k + c_k)`` with ``F``
nonnegative, which is what the power-control code in ``solver`` relies on.
:class:`LinearSinr` carries that representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantization import distortion_factor


def _gram2(pilots):
    return np.asarray(getattr(pilots, "gram2", pilots), dtype=float)


def _check_stats(beta, gamma):
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if beta.shape != gamma.shape:
        raise ValueError(f"beta {beta.shape} and gamma {gamma.shape} differ in shape")
    if np.any((beta == 0) & (gamma != 0)):
        raise ValueError("inconsistent statistics: zero beta with nonzero gamma")
    return beta, gamma


def _ratio(gamma, beta):
    """gamma_mk / beta_mk with 0/0 := 0."""
    out = np.zeros_like(gamma)
    np.divide(gamma, beta, out=out, where=beta > 0)
    return out


def _per_ap(value, M):
    return np.broadcast_to(np.asarray(value, dtype=float), (M,))


def spectral_efficiency(sinr, prefactor=1.0):
    return prefactor * np.log2(1.0 + np.asarray(sinr))


@dataclass(frozen=True)
class LinearSinr:
    """SINR_k(q) = a_k q_k / ((F q)_k + c_k)."""

    a: np.ndarray  # (K,)
    F: np.ndarray  # (K, K), nonnegative
    c: np.ndarray  # (K,)

    def sinr(self, q):
        q = np.asarray(q, dtype=float)
        return self.a * q / (self.F @ q + self.c)


@dataclass(frozen=True)
class RateIngredients:
    """Vectors and diagonal matrices of the weighted-combining rate.

    Index order is [k, k', m]: ``Lambda[k, k']`` is the M-vector
    gamma_mk beta_mk' / beta_mk and ``Upsilon[k, k']`` the diagonal of
    the corresponding M x M matrix.
    """

    Gamma: np.ndarray  # (K, M)
    Lambda: np.ndarray  # (K, K, M)
    Upsilon: np.ndarray  # (K, K, M)
    R: np.ndarray  # (K, M)
    beta: np.ndarray  # (M, K)
    gamma: np.ndarray  # (M, K)
    dz: np.ndarray  # (M,) per-AP w_z^2 / (3 Q_m^2)

    @property
    def M(self):
        return self.Gamma.shape[1]

    @property
    def K(self):
        return self.Gamma.shape[0]


def rate_ingredients(beta, gamma, w_z, Q):
    """Build Gamma_k, Lambda_kk', Upsilon_kk' and R_k. ``Q`` may be per AP."""
    beta, gamma = _check_stats(beta, gamma)
    M, K = beta.shape
    dz = distortion_factor(w_z, _per_ap(Q, M))
    ratio = _ratio(gamma, beta)  # (M, K)
    Gamma = gamma.T.copy()
    Lambda = ratio.T[:, None, :] * beta.T[None, :, :]
    # pairs with gamma = 0 are not forwarded, so they carry no quantization error
    own = np.where(gamma > 0, dz[:, None] * (2 * beta - gamma) + gamma, 0.0)  # (M, K)
    Upsilon = own.T[:, None, :] * beta.T[None, :, :]
    R = ((dz[:, None] + 1.0) * gamma).T
    return RateIngredients(Gamma=Gamma, Lambda=Lambda, Upsilon=Upsilon, R=R,
                           beta=beta, gamma=gamma, dz=dz)


def _form(u, Gamma, Lambda, Upsilon, R, gram2, N, rho):
    u2 = u * u
    a = N**2 * np.einsum("mk,km->k", u, Gamma) ** 2
    S = np.einsum("mk,kjm->kj", u, Lambda)
    coherent = N**2 * gram2 * S**2
    np.fill_diagonal(coherent, 0.0)
    F = coherent + N * np.einsum("mk,kjm->kj", u2, Upsilon)
    c = (N / rho) * np.einsum("mk,km->k", u2, R)
    return LinearSinr(a=a, F=F, c=c)


def check_weights(u, atol=1e-9):
    u = np.asarray(u, dtype=float)
    norms = np.linalg.norm(u, axis=0)
    bad = np.flatnonzero(np.abs(norms - 1.0) > atol)
    if bad.size:
        raise ValueError(f"receiver weights for users {bad.tolist()} are not unit-norm")
    return u


def normalize_weights(u):
    u = np.asarray(u, dtype=float)
    return u / np.linalg.norm(u, axis=0, keepdims=True)


def uniform_weights(M, K):
    return np.full((M, K), 1.0 / np.sqrt(M))


def weighted_form(u, ingredients, pilots, N, rho):
    """:class:`LinearSinr` of the weighted-combining SINR for fixed ``u``."""
    ing = ingredients
    return _form(np.asarray(u, dtype=float), ing.Gamma, ing.Lambda, ing.Upsilon, ing.R,
                 _gram2(pilots), N, rho)


def case1_form(beta, gamma, pilots, c_tot_per_ap, N, rho):
    """:class:`LinearSinr` of the quantized (CSI, signal) SINR."""
    beta, gamma = _check_stats(beta, gamma)
    M, K = beta.shape
    scale = _per_ap(c_tot_per_ap, M)[:, None] + 1.0
    ratio = _ratio(gamma, beta)
    Lambda = ratio.T[:, None, :] * beta.T[None, :, :]
    Upsilon = (scale * gamma).T[:, None, :] * beta.T[None, :, :]
    R = (scale * gamma).T
    return _form(np.ones((M, K)), gamma.T, Lambda, Upsilon, R, _gram2(pilots), N, rho)


def sinr_case1(q, beta, gamma, pilots, c_tot_per_ap, N, rho):
    """Per-user SINR with quantized channel estimates and quantized signals at the CPU."""
    beta, gamma = _check_stats(beta, gamma)
    q = np.asarray(q, dtype=float)
    gram2 = _gram2(pilots)
    M, K = beta.shape
    ctot = _per_ap(c_tot_per_ap, M)
    ratio = _ratio(gamma, beta)
    num = N**2 * q * gamma.sum(axis=0) ** 2
    den = np.empty(K)
    load = beta @ q  # (M,) sum_k' q_k' beta_mk'
    for k in range(K):
        others = [j for j in range(K) if j != k]
        s = np.array([np.sum(ratio[:, k] * beta[:, j]) for j in others])
        contamination = N**2 * np.sum(q[others] * s**2 * gram2[k, others])
        spread = N * np.sum((ctot + 1) * gamma[:, k] * load)
        noise = (N / rho) * np.sum((ctot + 1) * gamma[:, k])
        den[k] = contamination + spread + noise
    return num / den


def sinr_case2(q, beta, gamma, pilots, w_z, Q_per_ap, N, rho):
    """Per-user SINR with quantized MRC-weighted signals z_mk at the CPU."""
    beta, gamma = _check_stats(beta, gamma)
    q = np.asarray(q, dtype=float)
    gram2 = _gram2(pilots)
    M, K = beta.shape
    dz = distortion_factor(w_z, _per_ap(Q_per_ap, M))
    ratio = _ratio(gamma, beta)
    num = N**2 * q * gamma.sum(axis=0) ** 2
    den = np.empty(K)
    load = beta @ q
    for k in range(K):
        others = [j for j in range(K) if j != k]
        s = np.array([np.sum(ratio[:, k] * beta[:, j]) for j in others])
        contamination = N**2 * np.sum(q[others] * s**2 * gram2[k, others])
        own = np.where(gamma[:, k] > 0, dz * (2 * beta[:, k] - gamma[:, k]) + gamma[:, k], 0.0)
        spread = N * np.sum(own * load)
        noise = (N / rho) * np.sum((dz + 1) * gamma[:, k])
        den[k] = contamination + spread + noise
    return num / den


@dataclass(frozen=True)
class SinrBreakdown:
    """Per-user SINR terms, all in the same (unnormalized) power units.

    ``iui[k, k']`` is the interference power of user k' on user k; the
    diagonal is zero.
    """

    ds2: np.ndarray
    bu: np.ndarray
    iui: np.ndarray
    tn: np.ndarray
    tqe: np.ndarray

    @property
    def interference(self):
        return self.bu + self.iui.sum(axis=1) + self.tn + self.tqe

    @property
    def sinr(self):
        return self.ds2 / self.interference


def _coherent_iui(u, ratio, beta, gram2, q, N, rho):
    S = np.einsum("mk,mk,mj->kj", u, ratio, beta)
    iui = N**2 * rho * gram2 * S**2 * q[None, :]
    np.fill_diagonal(iui, 0.0)
    return iui


def weighted_breakdown(u, q, ingredients, pilots, N, rho):
    """Term-by-term decomposition for weighted combining of quantized z_mk."""
    ing = ingredients
    u = np.asarray(u, dtype=float)
    q = np.asarray(q, dtype=float)
    beta, gamma = ing.beta, ing.gamma
    u2 = u * u
    ds2 = rho * N**2 * q * np.sum(u * gamma, axis=0) ** 2
    bu = rho * N * q * np.sum(u2 * gamma * beta, axis=0)
    spread = N * rho * np.einsum("mk,mj,mk->kj", u2, beta, gamma) * q[None, :]
    np.fill_diagonal(spread, 0.0)
    iui = spread + _coherent_iui(u, _ratio(gamma, beta), beta, _gram2(pilots), q, N, rho)
    tn = N * np.sum(u2 * gamma, axis=0)
    load = rho * (beta @ q)  # (M,)
    tqe = N * np.sum(np.where(gamma > 0, u2 * ing.dz[:, None]
                              * ((2 * beta - gamma) * load[:, None] + gamma), 0.0), axis=0)
    return SinrBreakdown(ds2=ds2, bu=bu, iui=iui, tn=tn, tqe=tqe)


def case1_breakdown(q, beta, gamma, pilots, c_tot_per_ap, N, rho):
    """Term-by-term decomposition of the quantized (CSI, signal) receiver."""
    beta, gamma = _check_stats(beta, gamma)
    q = np.asarray(q, dtype=float)
    M, K = beta.shape
    ctot = _per_ap(c_tot_per_ap, M)
    ones = np.ones((M, K))
    ds2 = rho * N**2 * q * gamma.sum(axis=0) ** 2
    bu = rho * N * q * np.sum(gamma * beta, axis=0)
    spread = N * rho * np.einsum("mj,mk->kj", beta, gamma) * q[None, :]
    np.fill_diagonal(spread, 0.0)
    iui = spread + _coherent_iui(ones, _ratio(gamma, beta), beta, _gram2(pilots), q, N, rho)
    tn = N * gamma.sum(axis=0)
    power = rho * (beta @ q) + 1.0
    tqe = N * np.sum(ctot[:, None] * gamma * power[:, None], axis=0)
    return SinrBreakdown(ds2=ds2, bu=bu, iui=iui, tn=tn, tqe=tqe)


def rate_with_weights(u, q, ingredients, pilots, N, rho, normalize=False, prefactor=1.0):
    """Rates log2(1 + SINR_k) under receiver weights ``u``, with the term breakdown.

    With ``normalize=True`` the columns of ``u`` are rescaled to unit norm
    first; otherwise non-unit columns are rejected.
    """
    u = normalize_weights(u) if normalize else check_weights(u)
    q = np.asarray(q, dtype=float)
    sinr = weighted_form(u, ingredients, pilots, N, rho).sinr(q)
    breakdown = weighted_breakdown(u, q, ingredients, pilots, N, rho)
    return spectral_efficiency(sinr, prefactor), breakdown
