"""Sample-level Monte-Carlo check of the closed-form SINR terms.

Each trial draws fresh small-scale fading, pilot noise, unit-modulus data
symbols and receiver noise, runs the actual quantizers, and splits the CPU
output into desired signal, beamforming uncertainty, inter-user
interference, filtered noise and quantization error. Second moments and
pairwise correlations of these terms are accumulated over trials.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimation import estimation_stats, mmse_estimate
from .quantization import (
    CASE1,
    CASE2,
    QuantizerSpec,
    c_tot,
    dithered_quantize,
    distortion_factor,
    uniform_quantize,
)
from .rates import (
    SinrBreakdown,
    case1_breakdown,
    check_weights,
    rate_ingredients,
    uniform_weights,
    weighted_breakdown,
)
from .scenario import complex_normal, derive_rng, drop_topology, large_scale, make_pilots

ORACLE_STREAM = 1000


@dataclass
class OracleResult:
    case_id: str
    trials: int
    empirical: SinrBreakdown
    closed: SinrBreakdown
    labels: list  # per user, names of the decomposition terms
    correlation: np.ndarray  # (K, P, P) normalized cross-correlation magnitudes
    sub_empirical: dict = field(default_factory=dict)
    sub_closed: dict = field(default_factory=dict)

    def relative_errors(self):
        """Relative deviation of each empirical term from its closed form."""
        out = {}
        for name in ("ds2", "bu", "tn", "tqe"):
            emp, ref = getattr(self.empirical, name), getattr(self.closed, name)
            out[name] = _rel(emp, ref)
        K = self.closed.ds2.size
        off = ~np.eye(K, dtype=bool)
        out["iui"] = _rel(self.empirical.iui[off], self.closed.iui[off])
        out["denominator"] = _rel(self.empirical.interference, self.closed.interference)
        for name, ref in self.sub_closed.items():
            out[name] = _rel(self.sub_empirical[name], ref)
        return out

    def max_correlation(self):
        K, P, _ = self.correlation.shape
        off = ~np.eye(P, dtype=bool)
        return float(max(self.correlation[k][off].max() for k in range(K)))


def _rel(emp, ref):
    emp, ref = np.asarray(emp, dtype=float), np.asarray(ref, dtype=float)
    out = np.zeros_like(ref)
    nz = ref > 0
    out[nz] = np.abs(emp[nz] - ref[nz]) / ref[nz]
    out[~nz] = np.abs(emp[~nz])
    return out


def default_scenario(config, seed):
    """Topology, beta and pilots drawn from ``config`` for the oracle."""
    top = drop_topology(config, seed)
    beta = large_scale(top, config.sigma_sh, seed, config.path_loss)
    pilots = make_pilots(config.K, config.tau, config.pilot_mode, seed)
    return beta, pilots


def oracle_case(case_id, config, trials, seed, beta=None, pilots=None, q=None, u=None,
                dither=True, chunk=2000):
    """Empirical term powers and correlations for Case 1 or Case 2.

    For Case 2, ``u`` selects the combining weights (uniform by default).
    ``config.alpha1`` / ``config.alpha2`` set the bit widths; an infinite
    width bypasses the quantizer. With ``dither`` (default) every quantizer
    uses subtractive dither so its error is white and input-independent;
    without it, pairs whose analytic input variance far exceeds the actual
    one are quantized coarsely and the error departs from step**2 / 12.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if beta is None or pilots is None:
        b, p = default_scenario(config, seed)
        beta = b if beta is None else beta
        pilots = p if pilots is None else pilots
    beta = np.asarray(beta, dtype=float)
    M, K = beta.shape
    N, rho, tau, p_p = config.N, config.rho, config.tau, config.p_p
    stats = estimation_stats(beta, pilots, p_p, tau)
    gamma = stats.gamma
    q = np.full(K, config.pmax) if q is None else np.asarray(q, dtype=float)
    if case_id == CASE1:
        u = np.ones((M, K))
        Q = config.Q1
        labels_tail = ["TN", "TQE_y", "TQE_g", "TQE_gy"] + [f"TQE_{j}" for j in range(K)]
    elif case_id == CASE2:
        u = uniform_weights(M, K) if u is None else check_weights(u)
        Q = config.Q2
        labels_tail = ["TN", "TQE"]
    else:
        raise ValueError(f"unknown case {case_id!r}")

    load = beta @ q  # (M,)
    sigma_y = np.sqrt(rho * load + 1.0)[:, None]  # per antenna, broadcast over N
    sigma_g = np.sqrt(gamma)[..., None]  # (M, K, 1)
    sigma_z = np.sqrt(N * ((2 * beta - gamma) * rho * load[:, None] + gamma))  # (M, K)
    amp = np.sqrt(rho * q)

    P = 2 + (K - 1) + len(labels_tail)
    gram = np.zeros((K, P, P), dtype=complex)
    sums = np.zeros((K, P), dtype=complex)
    done = 0
    index = 0
    while done < trials:
        T = min(chunk, trials - done)
        rng = derive_rng(seed, ORACLE_STREAM, index)
        g = np.sqrt(beta)[..., None] * complex_normal(rng, (T, M, K, N))
        ghat = mmse_estimate(g, pilots, stats, p_p, tau, rng)
        s = np.exp(1j * np.pi * (rng.integers(0, 4, size=(T, K)) / 2 + 0.25))
        n = complex_normal(rng, (T, M, N))
        x = amp * s  # (T, K)
        y = np.einsum("tmkn,tk->tmn", g, x) + n
        cross = np.einsum("tmkn,tmjn->tmkj", ghat.conj(), g)  # ghat_mk^H g_mj
        gn = np.einsum("tmkn,tmn->tmk", ghat.conj(), n)
        coh = np.einsum("mk,tmkj->tkj", u, cross) * amp[None, None, :]  # (T, K, K)
        tn = np.einsum("mk,tmk->tk", u, gn)
        if dither:
            quantize = lambda v, spec: dithered_quantize(v, spec, rng)  # noqa: E731
        else:
            quantize = uniform_quantize
        if case_id == CASE2:
            z = np.einsum("tmkj,tj->tmk", cross, x) + gn
            zq = quantize(z, QuantizerSpec(config.alpha2, config.w_z, sigma_z))
            tails = [tn, np.einsum("mk,tmk->tk", u, zq - z)]
        else:
            gq = quantize(ghat, QuantizerSpec(config.alpha1, config.w_g, sigma_g))
            yq = quantize(y, QuantizerSpec(config.alpha1, config.w_y, sigma_y))
            eg, ey = gq - ghat, yq - y
            t_y = np.einsum("tmkn,tmn->tk", ghat.conj(), ey)
            t_g = np.einsum("tmkn,tmn->tk", eg.conj(), n)
            t_gy = np.einsum("tmkn,tmn->tk", eg.conj(), ey)
            t_kj = np.einsum("tmkn,tmjn->tkj", eg.conj(), g) * x[:, None, :]
            tails = [tn, t_y, t_g, t_gy] + [t_kj[:, :, j] for j in range(K)]
        W = np.empty((T, K, P), dtype=complex)
        for k in range(K):
            W[:, k, 0] = coh[:, k, k] * s[:, k]
            W[:, k, 1] = s[:, k]
            others = [j for j in range(K) if j != k]
            W[:, k, 2:K + 1] = coh[:, k, others] * s[:, others]
        for i, term in enumerate(tails):
            W[:, :, K + 1 + i] = term
        gram += np.einsum("tkp,tkq->kpq", W, W.conj())
        sums += W.sum(axis=0)
        done += T
        index += 1

    # |s| = 1, so sum(coh_kk s_k conj(s_k)) is the summed coherent gain
    mean_gain = gram[:, 0, 1] / trials
    second = gram / trials
    # rows: [DS s, BU s, IUI..., tails] as linear maps of W = [A s, s, ...]
    Tm = np.zeros((K, P, P), dtype=complex)
    for k in range(K):
        Tm[k] = np.eye(P)
        Tm[k, 0] = 0
        Tm[k, 0, 1] = mean_gain[k]
        Tm[k, 1] = 0
        Tm[k, 1, 0] = 1
        Tm[k, 1, 1] = -mean_gain[k]
    cov = np.einsum("kap,kpq,kbq->kab", Tm, second, Tm.conj())
    power = np.real(np.einsum("kaa->ka", cov))
    denom = np.sqrt(np.maximum(power[:, :, None] * power[:, None, :], 1e-300))
    corr = np.abs(cov) / denom

    iui = np.zeros((K, K))
    for k in range(K):
        others = [j for j in range(K) if j != k]
        iui[k, others] = power[k, 2:K + 1]
    tail = power[:, K + 1:]
    if case_id == CASE2:
        empirical = SinrBreakdown(ds2=np.abs(mean_gain) ** 2, bu=power[:, 1], iui=iui,
                                  tn=tail[:, 0], tqe=tail[:, 1])
        ing = rate_ingredients(beta, gamma, config.w_z, Q)
        closed = weighted_breakdown(u, q, ing, pilots, N, rho)
        sub_emp, sub_ref = {}, {}
    else:
        empirical = SinrBreakdown(ds2=np.abs(mean_gain) ** 2, bu=power[:, 1], iui=iui,
                                  tn=tail[:, 0], tqe=tail[:, 1:].sum(axis=1))
        closed = case1_breakdown(q, beta, gamma, pilots, c_tot(config.w_y, config.w_g, Q), N, rho)
        a = distortion_factor(config.w_y, Q)
        b = distortion_factor(config.w_g, Q)
        pw = (rho * load + 1.0)[:, None]
        sub_ref = {
            "tqe_y": N * np.sum(a * gamma * pw, axis=0),
            "tqe_g": N * np.sum(b * gamma, axis=0),
            "tqe_gy": N * np.sum(a * b * gamma * pw, axis=0),
            "tqe_kk": rho * N * q[None, :] * ((b * gamma).T @ beta),
        }
        sub_emp = {
            "tqe_y": tail[:, 1],
            "tqe_g": tail[:, 2],
            "tqe_gy": tail[:, 3],
            "tqe_kk": tail[:, 4:],
        }
    labels = []
    for k in range(K):
        names = ["DS", "BU"] + [f"IUI_{j}" for j in range(K) if j != k] + labels_tail
        labels.append(names)
    return OracleResult(case_id=case_id, trials=trials, empirical=empirical, closed=closed,
                        labels=labels, correlation=corr, sub_empirical=sub_emp,
                        sub_closed=sub_ref)
