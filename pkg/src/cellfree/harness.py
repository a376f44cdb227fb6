"""Experiment presets, Monte-Carlo aggregation over topology drops and CSV output."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assignment import build_active_sets, masked_stats
from .config import SystemConfig, coerce_overrides
from .estimation import estimation_stats
from .quantization import c_tot
from .rates import case1_form, rate_ingredients, spectral_efficiency, uniform_weights, weighted_form
from .scenario import drop_topology, large_scale, make_pilots
from .solver import baseline_solve, maxmin_solve, power_allocation

log = logging.getLogger(__name__)

PRESETS = ("fig1", "fig2", "fig3", "fig4", "custom")

# experiment-level knobs accepted by --set besides SystemConfig fields
EXPERIMENT_KEYS = {"budget": int, "km_values": "ints", "alphas": "floats"}

DEFAULT_ALPHAS = tuple(range(1, 21)) + (math.inf,)
DEFAULT_KM = (5, 8, 10, 15, 20, 25, 30, 35, 40)


@dataclass
class ExperimentSpec:
    preset: str = "custom"
    overrides: dict = field(default_factory=dict)
    trials: int = 100
    seed: int = 0
    out: str | None = None
    workers: int = 1
    variants: tuple | None = None  # experiment names to keep; None keeps all

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {PRESETS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class ResultRecord:
    experiment: str
    trial: int
    sweep_variable: str
    sweep_value: str
    per_user_rates: tuple
    min_rate: float
    average_rate: float


CSV_FIELDS = [f.name for f in dataclasses.fields(ResultRecord)]


def _record(experiment, trial, name, value, rates):
    rates = np.asarray(rates, dtype=float)
    return ResultRecord(experiment, trial, name, _fmt_value(value), tuple(rates.tolist()),
                        float(rates.min()), float(rates.mean()))


def _fmt_value(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, float) and value == int(value):
        return str(int(value))
    return str(value)


def cdf(samples):
    """Empirical CDF as sorted (value, fraction) pairs; ties collapse to one step."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("cdf of an empty sample")
    values, last = np.unique(x, return_index=False, return_counts=True)
    frac = np.cumsum(last) / x.size
    return list(zip(values.tolist(), frac.tolist()))


def median(samples):
    return float(np.median(np.asarray(samples, dtype=float)))


def split_overrides(overrides):
    """Separate SystemConfig overrides from experiment knobs; reject unknown keys."""
    sys_part, exp_part = {}, {}
    for key, value in dict(overrides).items():
        if key in EXPERIMENT_KEYS:
            kind = EXPERIMENT_KEYS[key]
            if isinstance(value, str):
                items = [v for v in value.replace(";", ",").split(",") if v.strip()]
                if kind == "ints":
                    value = tuple(int(v) for v in items)
                elif kind == "floats":
                    value = tuple(float(v) for v in items)
                else:
                    value = kind(value)
            exp_part[key] = value
        else:
            sys_part[key] = value
    coerced = coerce_overrides(sys_part)  # raises KeyError naming the bad key
    return coerced, exp_part


def _trial_seed(seed, trial):
    return int(np.random.SeedSequence([int(seed), int(trial)]).generate_state(1)[0])


def _draw(config, seed):
    top = drop_topology(config, seed)
    beta = large_scale(top, config.sigma_sh, seed, config.path_loss)
    pilots = make_pilots(config.K, config.tau, config.pilot_mode, seed)
    stats = estimation_stats(beta, pilots, config.p_p, config.tau)
    return beta, pilots, stats.gamma


def _prefactor(config):
    return config.tau_f / config.tau_c if config.rate_prefactor else 1.0


def _rates(config, sinr):
    return spectral_efficiency(sinr, _prefactor(config))


# --- preset definitions -----------------------------------------------------

def _cfg(params, sys_over):
    return SystemConfig(**{**params, **sys_over})


def fig1_variants(sys_over):
    base = dict(K=40, tau=40, pilot_mode="orthogonal", D=1000.0)
    return [(f"fig1/N{N}-M{M}", _cfg({**base, "N": N, "M": M}, sys_over))
            for N, M in ((2, 140), (4, 70), (10, 28))]


def fig2_variants(sys_over):
    base = dict(M=100, N=2, K=40, alpha2=5, D=1000.0)
    return [
        ("fig2/random-tau20", _cfg({**base, "tau": 20, "pilot_mode": "random"}, sys_over)),
        ("fig2/orthogonal", _cfg({**base, "tau": 40, "pilot_mode": "orthogonal"}, sys_over)),
    ]


def fig3_variants(sys_over):
    base = dict(M=100, N=2, K=40)
    out = []
    for D in (1000.0, 2000.0):
        out.append((f"fig3/D{int(D)}-tau30",
                    _cfg({**base, "D": D, "tau": 30, "pilot_mode": "random"}, sys_over)))
        out.append((f"fig3/D{int(D)}-orthogonal",
                    _cfg({**base, "D": D, "tau": 40, "pilot_mode": "orthogonal"}, sys_over)))
    return out


def fig4_variants(sys_over):
    base = dict(M=100, tau_c=200, D=1000.0, pilot_mode="orthogonal")
    return [
        ("fig4/N4-K20", _cfg({**base, "N": 4, "K": 20, "tau": 20, "alpha1": 9, "alpha2": 2,
                              "w_g": 3.0, "w_y": 80.0, "w_z": 3.0}, sys_over)),
        ("fig4/N20-K40", _cfg({**base, "N": 20, "K": 40, "tau": 40, "alpha1": 8, "alpha2": 5,
                               "w_g": 3.5, "w_y": 70.0, "w_z": 3.0}, sys_over)),
    ]


def custom_variants(sys_over):
    return [("custom", _cfg({}, sys_over))]


VARIANTS = {
    "fig1": fig1_variants,
    "fig2": fig2_variants,
    "fig3": fig3_variants,
    "fig4": fig4_variants,
    "custom": custom_variants,
}


def run_fig1_trial(variants, exp, trial, seed):
    records = []
    for name, cfg in variants:
        beta, pilots, gamma = _draw(cfg, seed)
        q = np.full(cfg.K, cfg.pmax)
        u = uniform_weights(cfg.M, cfg.K)
        for alpha in exp.get("alphas", DEFAULT_ALPHAS):
            ing = rate_ingredients(beta, gamma, cfg.w_z, 2.0 ** alpha)
            sinr = weighted_form(u, ing, pilots, cfg.N, cfg.rho).sinr(q)
            records.append(_record(name, trial, "alpha", alpha, _rates(cfg, sinr)))
    return records


def run_fig2_trial(variants, exp, trial, seed):
    records = []
    for name, cfg in variants:
        beta, pilots, gamma = _draw(cfg, seed)
        alg = maxmin_solve(cfg, beta, gamma, pilots, cfg.Q2)
        base = baseline_solve(cfg, beta, gamma, pilots, cfg.Q2)
        records.append(_record(name, trial, "scheme", "alternating", _rates(cfg, alg.sinr)))
        records.append(_record(name, trial, "scheme", "baseline", _rates(cfg, base.sinr)))
    return records


def run_fig3_trial(variants, exp, trial, seed):
    budget = exp.get("budget", 200)
    records = []
    for name, cfg in variants:
        beta, pilots, gamma = _draw(cfg, seed)
        for km in exp.get("km_values", DEFAULT_KM):
            alpha = budget // km
            if alpha < 1 or km > cfg.K:
                continue
            plan = build_active_sets(beta, km, alpha)
            res = maxmin_solve(cfg, beta, masked_stats(gamma, plan), pilots, 2.0 ** alpha)
            records.append(_record(name, trial, "K_m", km, _rates(cfg, res.sinr)))
    return records


def run_fig4_trial(variants, exp, trial, seed):
    records = []
    for name, cfg in variants:
        beta, pilots, gamma = _draw(cfg, seed)
        form1 = case1_form(beta, gamma, pilots, c_tot(cfg.w_y, cfg.w_g, cfg.Q1), cfg.N, cfg.rho)
        q1, _ = power_allocation(form1, cfg.pmax)
        records.append(_record(name, trial, "case", "case1", _rates(cfg, form1.sinr(q1))))
        base = baseline_solve(cfg, beta, gamma, pilots, cfg.Q2)
        records.append(_record(name, trial, "case", "case2", _rates(cfg, base.sinr)))
    return records


def run_custom_trial(variants, exp, trial, seed):
    records = []
    for name, cfg in variants:
        beta, pilots, gamma = _draw(cfg, seed)
        alg = maxmin_solve(cfg, beta, gamma, pilots, cfg.Q2)
        base = baseline_solve(cfg, beta, gamma, pilots, cfg.Q2)
        records.append(_record(name, trial, "scheme", "alternating", _rates(cfg, alg.sinr)))
        records.append(_record(name, trial, "scheme", "baseline", _rates(cfg, base.sinr)))
    return records


TRIALS = {
    "fig1": run_fig1_trial,
    "fig2": run_fig2_trial,
    "fig3": run_fig3_trial,
    "fig4": run_fig4_trial,
    "custom": run_custom_trial,
}


def _run_one(args):
    preset, variants, exp, trial, seed = args
    return TRIALS[preset](variants, exp, trial, _trial_seed(seed, trial))


def run_records(spec):
    """All ResultRecords of ``spec``, ordered by trial then emission order."""
    sys_over, exp = split_overrides(spec.overrides)
    variants = VARIANTS[spec.preset](sys_over)
    if spec.variants:
        known = [name for name, _ in variants]
        unknown = sorted(set(spec.variants) - set(known))
        if unknown:
            raise ValueError(f"unknown variant(s) {unknown}; {spec.preset} has {known}")
        variants = [v for v in variants if v[0] in spec.variants]
    jobs = [(spec.preset, variants, exp, t, spec.seed) for t in range(spec.trials)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_run_one, jobs))
    else:
        chunks = []
        for job in jobs:
            chunks.append(_run_one(job))
            log.debug("trial %d done", job[3])
    return [r for chunk in chunks for r in chunk]


def _group(records, key):
    out = {}
    for r in records:
        out.setdefault(key(r), []).append(r)
    return out


def summarize(preset, records):
    """Preset-specific aggregates (JSON-serializable)."""
    by_exp = _group(records, lambda r: r.experiment)
    summary = {"preset": preset, "trials": len({r.trial for r in records}), "experiments": {}}
    for name, recs in by_exp.items():
        sweep = _group(recs, lambda r: r.sweep_value)
        entry = {
            "mean_average_rate": {v: float(np.mean([r.average_rate for r in rs])) for v, rs in sweep.items()},
            "mean_min_rate": {v: float(np.mean([r.min_rate for r in rs])) for v, rs in sweep.items()},
            "median_min_rate": {v: median([r.min_rate for r in rs]) for v, rs in sweep.items()},
        }
        if preset == "fig1":
            avg = entry["mean_average_rate"]
            ceiling = avg.get("inf")
            entry["ceiling"] = ceiling
            finite = sorted((float(v), a) for v, a in avg.items() if v != "inf")
            hits = [v for v, a in finite if ceiling is not None and a >= 0.99 * ceiling]
            entry["alpha_within_1pct"] = int(hits[0]) if hits else None
        elif preset in ("fig2", "custom"):
            med = entry["median_min_rate"]
            if med.get("baseline"):
                entry["median_min_rate_ratio"] = med["alternating"] / med["baseline"]
        elif preset == "fig3":
            mean_min = entry["mean_min_rate"]
            entry["best_K_m"] = int(max(mean_min, key=lambda v: mean_min[v]))
        summary["experiments"][name] = entry
    return summary


def write_csv(records, path_or_buffer):
    own = isinstance(path_or_buffer, (str, Path))
    fh = open(path_or_buffer, "w", newline="", encoding="utf-8") if own else path_or_buffer
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow([
                r.experiment, r.trial, r.sweep_variable, r.sweep_value,
                ";".join(repr(x) for x in r.per_user_rates),
                repr(r.min_rate), repr(r.average_rate),
            ])
    finally:
        if own:
            fh.close()


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [
        ResultRecord(row["experiment"], int(row["trial"]), row["sweep_variable"], row["sweep_value"],
                     tuple(float(x) for x in row["per_user_rates"].split(";")),
                     float(row["min_rate"]), float(row["average_rate"]))
        for row in rows
    ]


def records_to_csv_text(records):
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def run_experiment(spec):
    """Run ``spec``; write CSV (and a JSON summary beside it) if ``spec.out`` is set."""
    records = run_records(spec)
    summary = summarize(spec.preset, records)
    if spec.out:
        write_csv(records, spec.out)
        Path(spec.out).with_suffix(".summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return records, summary
