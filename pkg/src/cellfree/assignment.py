"""Backhaul-budgeted selection of the users each AP quantizes and forwards."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ActiveSetPlan:
    sets: tuple  # per AP, sorted tuple of user ids
    K_m: np.ndarray  # (M,) set-size caps
    alpha_m: np.ndarray  # (M,) bits per real dimension

    def mask(self, K):
        out = np.zeros((len(self.sets), K), dtype=bool)
        for m, members in enumerate(self.sets):
            out[m, list(members)] = True
        return out

    def check(self, K, budget=None):
        """Raise if a set overflows, a user is unserved, or the budget is exceeded."""
        for m, members in enumerate(self.sets):
            if len(members) > self.K_m[m]:
                raise AssertionError(f"AP {m} serves {len(members)} > {self.K_m[m]} users")
        served = self.mask(K).any(axis=0)
        if not served.all():
            raise AssertionError(f"unserved users {np.flatnonzero(~served).tolist()}")
        if budget is not None and np.any(self.K_m * self.alpha_m > budget):
            raise AssertionError("bit budget exceeded")


def enumerate_budget(budget, K):
    """(K_m, alpha) pairs with K_m * alpha <= budget, keeping the largest alpha per K_m."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    return [(km, budget // km) for km in range(1, K + 1) if budget // km >= 1]


def build_active_sets(beta, K_m, alpha=0):
    """Each AP keeps its ``K_m`` strongest users; uncovered users are then repaired in.

    An uncovered user goes to its strongest AP that either has room or holds
    a member also served elsewhere (the weakest such member is dropped).
    Ties in beta go to the lower user id.
    """
    beta = np.asarray(beta, dtype=float)
    M, K = beta.shape
    if not 1 <= K_m <= K:
        raise ValueError(f"K_m must be in [1, {K}], got {K_m}")
    if M * K_m < K:
        raise ValueError(f"{M} APs with {K_m} users each cannot cover {K} users")
    order = np.argsort(-beta, axis=1, kind="stable")
    sets = [set(order[m, :K_m].tolist()) for m in range(M)]
    count = np.zeros(K, dtype=int)
    for s in sets:
        count[list(s)] += 1

    for k in np.flatnonzero(count == 0):
        for m in np.argsort(-beta[:, k], kind="stable"):
            members = sets[m]
            if len(members) < K_m:
                members.add(int(k))
                count[k] += 1
                break
            evictable = [j for j in members if count[j] > 1]
            if evictable:
                drop = min(evictable, key=lambda j: (beta[m, j], -j))
                members.remove(drop)
                count[drop] -= 1
                members.add(int(k))
                count[k] += 1
                break
        else:  # unreachable while M * K_m >= K
            raise RuntimeError(f"could not place user {k}")

    plan = ActiveSetPlan(
        sets=tuple(tuple(sorted(s)) for s in sets),
        K_m=np.full(M, K_m),
        alpha_m=np.full(M, alpha),
    )
    plan.check(K)
    return plan


def masked_stats(gamma, plan):
    """Zero gamma_mk for users AP m does not forward."""
    gamma = np.asarray(gamma, dtype=float)
    return np.where(plan.mask(gamma.shape[1]), gamma, 0.0)
