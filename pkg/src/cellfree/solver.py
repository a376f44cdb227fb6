"""Alternating max-min SINR optimization: receive filters and power control."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .rates import LinearSinr, _gram2, rate_ingredients, uniform_weights, weighted_form

log = logging.getLogger(__name__)


@dataclass
class MaxMinResult:
    u: np.ndarray  # (M, K)
    q: np.ndarray  # (K,)
    t_star: float
    iterations: int
    trace: list = field(default_factory=list)
    sinr: np.ndarray | None = None
    converged: bool = False


def interference_matrix(k, q, ingredients, gram2, N, rho):
    """B_k: the denominator matrix of user k's SINR quadratic form."""
    ing = ingredients
    diag = N * (q @ ing.Upsilon[k]) + (N / rho) * ing.R[k]
    B = np.diag(diag)
    weights = N**2 * q * gram2[k]
    weights[k] = 0.0
    for j in np.flatnonzero(weights > 0):
        lam = ing.Lambda[k, j]
        B += weights[j] * np.outer(lam, lam)
    return B


def signal_matrix(k, q, ingredients, N):
    g = ingredients.Gamma[k]
    return N**2 * q[k] * np.outer(g, g)


def receiver_filter(q, ingredients, pilots, N, rho):
    """Per-user unit-norm weights maximizing each user's SINR for fixed powers.

    The numerator matrix has rank one, so the dominant generalized
    eigenvector is B_k^{-1} Gamma_k. APs with gamma_mk = 0 get zero weight.
    """
    ing = ingredients
    q = np.asarray(q, dtype=float)
    gram2 = _gram2(pilots)
    M, K = ing.M, ing.K
    u = np.zeros((M, K))
    for k in range(K):
        g = ing.Gamma[k]
        support = np.flatnonzero(g > 0)
        if support.size == 0:
            u[0, k] = 1.0
            continue
        B = interference_matrix(k, q, ing, gram2, N, rho)[np.ix_(support, support)]
        scale = np.max(np.diag(B))
        if not scale > 0:
            raise np.linalg.LinAlgError(f"singular interference matrix for user {k}")
        try:
            x = linalg.cho_solve(linalg.cho_factor(B / scale), g[support] / np.max(g))
        except linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(f"singular interference matrix for user {k}") from exc
        x /= np.linalg.norm(x)
        if x @ g[support] < 0:
            x = -x
        u[support, k] = x
    return u


def _fixed_point(t, form, pmax, max_iter, rtol):
    a, F, c = form.a, form.F, form.c
    q = np.zeros_like(a)
    for _ in range(max_iter):
        nxt = np.minimum(pmax, t * (F @ q + c) / a)
        if np.all(np.abs(nxt - q) <= rtol * np.maximum(nxt, 1e-300)):
            return nxt, True
        q = nxt
    return q, False


def feasible_at_t(t, form, pmax, method="solve", max_iter=200_000, rtol=1e-12):
    """Can every user reach SINR ``t`` with powers in [0, pmax]?

    Returns ``(feasible, q)`` with ``q`` the componentwise-minimal power
    vector when feasible, else ``(False, None)``. ``method="fixed_point"``
    iterates q <- min(pmax, t I(q)) from zero; ``"solve"`` computes the same
    limit directly as the solution of (I - t A^{-1} F) q = t A^{-1} c.
    """
    a, F, c = form.a, form.F, form.c
    K = a.size
    if t <= 0:
        return True, np.zeros(K)
    if np.any(a <= 0):
        return False, None
    if method == "fixed_point":
        q, done = _fixed_point(t, form, pmax, max_iter, rtol)
        if not done:
            log.warning("power fixed point did not settle at t=%g; treating as infeasible", t)
            return False, None
        ok = np.all(a * q >= t * (F @ q + c) * (1 - 1e-9))
        return (True, q) if ok else (False, None)
    if method != "solve":
        raise ValueError(f"unknown method {method!r}")
    A = np.eye(K) - t * F / a[:, None]
    try:
        q = np.linalg.solve(A, t * c / a)
    except np.linalg.LinAlgError:
        return False, None
    # a nonnegative solution exists iff the spectral radius of t A^{-1} F is < 1
    if not np.all(np.isfinite(q)) or np.any(q < 0) or np.any(q > pmax * (1 + 1e-12)):
        return False, None
    if np.any(c > 0) and not np.all(q > 0):
        return False, None
    return True, np.minimum(q, pmax)


def power_allocation(form, pmax, tol=1e-7, q0=None, method="solve"):
    """Max-min SINR power control by bisection on the common SINR target.

    ``q0`` is an optional feasible warm start; the returned min-SINR is never
    below the min-SINR at ``q0`` nor at full power. ``tol`` is relative.
    """
    K = form.a.size
    full = np.full(K, float(pmax))
    best_q = full
    lo = float(np.min(form.sinr(full)))
    if q0 is not None:
        q0 = np.clip(np.asarray(q0, dtype=float), 0.0, pmax)
        t0 = float(np.min(form.sinr(q0)))
        if t0 > lo:
            lo, best_q = t0, q0
    diag = np.diag(form.F)
    hi = float(np.min(form.a * pmax / (diag * pmax + form.c)))
    q_lo = None
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        ok, q = feasible_at_t(mid, form, pmax, method=method)
        if ok:
            lo, q_lo = mid, q
        else:
            hi = mid
    if q_lo is not None and np.min(form.sinr(q_lo)) >= np.min(form.sinr(best_q)):
        best_q = q_lo
    return best_q, float(np.min(form.sinr(best_q)))


def maxmin_solve(config, beta, gamma, pilots, Q_per_ap, q0=None, tol=1e-7):
    """Alternate receive-filter design and power control until no user gains more than epsilon.

    Without ``q0`` the iteration starts from the baseline operating point
    (uniform weights, max-min powers). The filter step can only raise each
    user's SINR at fixed powers, so the result never falls below the baseline.
    """
    N, rho, pmax = config.N, config.rho, config.pmax
    ing = rate_ingredients(beta, gamma, config.w_z, Q_per_ap)
    if q0 is None:
        start = weighted_form(uniform_weights(ing.M, ing.K), ing, pilots, N, rho)
        q, _ = power_allocation(start, pmax, tol=tol)
    else:
        q = np.asarray(q0, dtype=float)
    trace = []
    u = None
    converged = False
    it = 0
    for it in range(1, config.max_iters + 1):
        u = receiver_filter(q, ing, pilots, N, rho)
        form = weighted_form(u, ing, pilots, N, rho)
        before = form.sinr(q)
        q, t = power_allocation(form, pmax, tol=tol, q0=q)
        after = form.sinr(q)
        trace.append(t)
        if np.all(after - before <= config.epsilon):
            converged = True
            break
    return MaxMinResult(u=u, q=q, t_star=trace[-1], iterations=it, trace=trace,
                        sinr=after, converged=converged)


def baseline_solve(config, beta, gamma, pilots, Q_per_ap, tol=1e-7):
    """Uniform receive weights with max-min power control only."""
    ing = rate_ingredients(beta, gamma, config.w_z, Q_per_ap)
    u = uniform_weights(ing.M, ing.K)
    form = weighted_form(u, ing, pilots, config.N, config.rho)
    q, t = power_allocation(form, config.pmax, tol=tol)
    return MaxMinResult(u=u, q=q, t_star=t, iterations=1, trace=[t], sinr=form.sinr(q),
                        converged=True)
