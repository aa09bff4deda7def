"""Experiment harness: alternating optimization, baselines, seeded campaigns.

A campaign derives one substream per trial from the master seed (seed XOR
trial index), draws the channel paths once per trial, and feeds the same
realization to every scheme so comparisons are paired.  Aggregation always
runs in trial order, which keeps CSV output byte-identical at any
parallelism level.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import os
from dataclasses import dataclass, replace
from multiprocessing import Pool

import numpy as np

from .channel import PathSet, rx_field_matrix, sample_paths, tx_field_matrix
from .config import ExperimentSpec, RunConfig
from .geometry import PortSelection, Scenario, p_max_from_snr, validate_selection
from .metrics import energy_efficiency, rate_upper_bound, validate_covariance
from .portopt import random_selection, sweep_ports
from .txopt import dinkelbach

logger = logging.getLogger(__name__)

DEFAULT_MAX_OUTER = 50
SCHEME_ORDER = {"proposed": 0, "random": 1, "fpa": 2}

RAW_COLUMNS = ("scheme", "sweep_name", "sweep_value", "trial", "ee", "rate", "iterations", "seed")
AGG_COLUMNS = (
    "scheme",
    "sweep_name",
    "sweep_value",
    "ee_mean",
    "ee_std_error",
    "rate_mean",
    "rate_std_error",
    "trials",
    "master_seed",
)


@dataclass
class AltOptReport:
    """Alternating-optimization run: efficiency trajectory and final design."""

    eta_per_iteration: list[float]
    rate_per_iteration: list[float]
    final_selection: PortSelection
    final_q: np.ndarray
    outer_iterations: int
    converged: bool


@dataclass(frozen=True)
class TrialRecord:
    """One scheme evaluated on one trial at one sweep point."""

    scheme: str
    sweep_name: str
    sweep_value: float | int
    trial: int
    ee: float
    rate: float
    iterations: int
    seed: int
    q_trace: float
    selection: tuple[int, ...]
    paths_digest: str


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregate over trials for one scheme at one sweep point."""

    scheme: str
    sweep_name: str
    sweep_value: float | int
    ee_mean: float
    ee_std_error: float
    rate_mean: float
    rate_std_error: float
    trials: int
    master_seed: int


def substream_seed(master_seed: int, index: int) -> int:
    """Documented splitting rule: per-trial seed is master_seed XOR trial index."""
    return master_seed ^ index


def trial_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(substream_seed(master_seed, index))


def paths_digest(paths_t: PathSet, paths_r: PathSet) -> str:
    """Stable hash of the drawn channel paths, for paired-comparison audits."""
    digest = hashlib.sha256()
    for paths in (paths_t, paths_r):
        for arr in (paths.elevations, paths.azimuths, paths.distances):
            digest.update(np.ascontiguousarray(arr).tobytes())
    return digest.hexdigest()[:16]


def spread_selection(scenario: Scenario) -> PortSelection:
    """Deterministic starting selection: evenly spread, endpoints included.

    Containing both end ports guarantees the starting surrogate rate already
    dominates the fixed endpoint pair, so the optimized scheme can never end
    below the fixed-position baseline on the same channel.
    """
    points = np.linspace(1, scenario.m_ports, scenario.m_active)
    return PortSelection(np.rint(points).astype(int))


def alternate(
    scenario: Scenario,
    paths_t: PathSet,
    paths_r: PathSet,
    rng: np.random.Generator | None = None,
    init: PortSelection | None = None,
    max_outer: int = DEFAULT_MAX_OUTER,
    model: str = "approx",
) -> AltOptReport:
    """Alternate covariance optimization and one port sweep until the EE settles.

    Without an explicit `init`, a random selection is drawn from `rng` when
    given, otherwise the deterministic spread selection is used.  Iterates
    until the efficiency changes by at most the scenario tolerance or the
    outer cap is hit (then `converged` is False).
    """
    if init is None:
        init = random_selection(rng, scenario) if rng is not None else spread_selection(scenario)
    validate_selection(init, scenario)
    tx_a = tx_field_matrix(paths_t, scenario, model)
    sel = init
    q = scenario.p_max / scenario.n_tx * np.eye(scenario.n_tx, dtype=complex)
    rate = rate_upper_bound(tx_a, rx_field_matrix(sel, paths_r, scenario, model), q, scenario)
    etas = [energy_efficiency(rate, q, scenario)]
    rates = [rate]
    converged = False
    for _ in range(max_outer):
        q, _, _ = dinkelbach(tx_a, rx_field_matrix(sel, paths_r, scenario, model), scenario, q_init=q)
        sel = sweep_ports(sel, q, paths_t, paths_r, scenario, model)
        rate = rate_upper_bound(tx_a, rx_field_matrix(sel, paths_r, scenario, model), q, scenario)
        rates.append(rate)
        etas.append(energy_efficiency(rate, q, scenario))
        if abs(etas[-1] - etas[-2]) <= scenario.epsilon:
            converged = True
            break
    validate_covariance(q, scenario)
    return AltOptReport(
        eta_per_iteration=etas,
        rate_per_iteration=rates,
        final_selection=sel,
        final_q=q,
        outer_iterations=len(etas) - 1,
        converged=converged,
    )


def _optimize_fixed_selection(
    scenario: Scenario,
    tx_a: np.ndarray,
    paths_r: PathSet,
    sel: PortSelection,
    model: str = "approx",
) -> tuple[np.ndarray, float, float, int]:
    """Single covariance solve at a fixed selection: (q, ee, rate, iterations)."""
    rx_b = rx_field_matrix(sel, paths_r, scenario, model)
    q, _, trace = dinkelbach(tx_a, rx_b, scenario)
    validate_covariance(q, scenario)
    rate = rate_upper_bound(tx_a, rx_b, q, scenario)
    return q, energy_efficiency(rate, q, scenario), rate, trace.iterations


def run_baseline_random(
    scenario: Scenario,
    paths_t: PathSet,
    paths_r: PathSet,
    rng: np.random.Generator,
    model: str = "approx",
) -> tuple[float, float]:
    """Randomly select ports, optimize the covariance once; returns (ee, rate)."""
    sel = random_selection(rng, scenario)
    tx_a = tx_field_matrix(paths_t, scenario, model)
    _, ee, rate, _ = _optimize_fixed_selection(scenario, tx_a, paths_r, sel, model)
    return ee, rate


def fpa_selection(scenario: Scenario) -> PortSelection:
    """The two fixed endpoint positions used by the conventional baseline."""
    if scenario.m_ports < 2:
        raise ValueError("fixed-position baseline needs at least 2 ports")
    return PortSelection((1, scenario.m_ports))


def run_baseline_fpa(
    scenario: Scenario,
    paths_t: PathSet,
    paths_r: PathSet,
    model: str = "approx",
) -> tuple[float, float]:
    """Two fixed endpoint antennas (full-aperture spacing); returns (ee, rate)."""
    fpa_scenario = replace(scenario, m_active=2)
    sel = fpa_selection(fpa_scenario)
    tx_a = tx_field_matrix(paths_t, fpa_scenario, model)
    _, ee, rate, _ = _optimize_fixed_selection(fpa_scenario, tx_a, paths_r, sel, model)
    return ee, rate


# --- campaign plumbing -------------------------------------------------------


def _scenario_at_snr(scenario: Scenario, snr_db: float) -> Scenario:
    return replace(scenario, p_max=p_max_from_snr(snr_db, scenario.noise_power))


def _draw_trial_paths(cfg: RunConfig, scenario: Scenario, trial: int):
    rng = trial_rng(cfg.master_seed, trial)
    paths_t = sample_paths(rng, scenario.l_t_paths, cfg.channel.distance_range)
    paths_r = sample_paths(rng, scenario.l_r_paths, cfg.channel.distance_range)
    digest = paths_digest(paths_t, paths_r)
    logger.debug("trial %d paths digest %s", trial, digest)
    return rng, paths_t, paths_r, digest


def _convergence_trial(args) -> tuple:
    cfg, snr_db, trial = args
    scenario = _scenario_at_snr(cfg.scenario, snr_db)
    _, paths_t, paths_r, digest = _draw_trial_paths(cfg, scenario, trial)
    rep = alternate(
        scenario, paths_t, paths_r, init=spread_selection(scenario), model=cfg.channel.phase_model
    )
    return (
        trial,
        rep.eta_per_iteration,
        rep.rate_per_iteration,
        rep.outer_iterations,
        float(np.real(np.trace(rep.final_q))),
        rep.final_selection.indices,
        digest,
    )


def _ports_trial(args) -> list[TrialRecord]:
    cfg, exp, trial = args
    base = _scenario_at_snr(cfg.scenario, exp.snr_db)
    model = cfg.channel.phase_model
    rng, paths_t, paths_r, digest = _draw_trial_paths(cfg, base, trial)
    seed = substream_seed(cfg.master_seed, trial)
    tx_a = tx_field_matrix(paths_t, base, model)
    records = []

    def add(scheme: str, sweep_value, ee, rate, iterations, q_trace, sel):
        records.append(
            TrialRecord(
                scheme=scheme,
                sweep_name="m0",
                sweep_value=sweep_value,
                trial=trial,
                ee=ee,
                rate=rate,
                iterations=iterations,
                seed=seed,
                q_trace=q_trace,
                selection=tuple(sel),
                paths_digest=digest,
            )
        )

    for m0 in exp.values:
        scenario = replace(base, m_active=int(m0))
        rep = alternate(scenario, paths_t, paths_r, init=spread_selection(scenario), model=model)
        add(
            "proposed",
            m0,
            rep.eta_per_iteration[-1],
            rep.rate_per_iteration[-1],
            rep.outer_iterations,
            float(np.real(np.trace(rep.final_q))),
            rep.final_selection.indices,
        )
        sel = random_selection(rng, scenario)
        q, ee, rate, iters = _optimize_fixed_selection(scenario, tx_a, paths_r, sel, model)
        add("random", m0, ee, rate, iters, float(np.real(np.trace(q))), sel.indices)

    fpa_scenario = replace(base, m_active=2)
    sel = fpa_selection(fpa_scenario)
    q, ee, rate, iters = _optimize_fixed_selection(fpa_scenario, tx_a, paths_r, sel, model)
    for m0 in exp.values:
        add("fpa", m0, ee, rate, iters, float(np.real(np.trace(q))), sel.indices)
    return records


def _snr_trial(args) -> list[TrialRecord]:
    cfg, exp, trial = args
    base = cfg.scenario
    model = cfg.channel.phase_model
    rng, paths_t, paths_r, digest = _draw_trial_paths(cfg, base, trial)
    seed = substream_seed(cfg.master_seed, trial)
    rand_sel = random_selection(rng, base)
    records = []
    for snr_db in exp.values:
        scenario = _scenario_at_snr(base, snr_db)
        tx_a = tx_field_matrix(paths_t, scenario, model)
        rep = alternate(scenario, paths_t, paths_r, init=spread_selection(scenario), model=model)
        records.append(
            TrialRecord(
                scheme="proposed",
                sweep_name="snr_db",
                sweep_value=snr_db,
                trial=trial,
                ee=rep.eta_per_iteration[-1],
                rate=rep.rate_per_iteration[-1],
                iterations=rep.outer_iterations,
                seed=seed,
                q_trace=float(np.real(np.trace(rep.final_q))),
                selection=rep.final_selection.indices,
                paths_digest=digest,
            )
        )
        q, ee, rate, iters = _optimize_fixed_selection(scenario, tx_a, paths_r, rand_sel, model)
        records.append(
            TrialRecord(
                scheme="random",
                sweep_name="snr_db",
                sweep_value=snr_db,
                trial=trial,
                ee=ee,
                rate=rate,
                iterations=iters,
                seed=seed,
                q_trace=float(np.real(np.trace(q))),
                selection=rand_sel.indices,
                paths_digest=digest,
            )
        )
        fpa_scenario = replace(scenario, m_active=2)
        sel = fpa_selection(fpa_scenario)
        q, ee, rate, iters = _optimize_fixed_selection(fpa_scenario, tx_a, paths_r, sel, model)
        records.append(
            TrialRecord(
                scheme="fpa",
                sweep_name="snr_db",
                sweep_value=snr_db,
                trial=trial,
                ee=ee,
                rate=rate,
                iterations=iters,
                seed=seed,
                q_trace=float(np.real(np.trace(q))),
                selection=sel.indices,
                paths_digest=digest,
            )
        )
    return records


def _map_trials(worker, args_list, jobs: int) -> list:
    if jobs <= 1:
        return [worker(a) for a in args_list]
    with Pool(processes=jobs) as pool:
        chunk = max(1, len(args_list) // (jobs * 4))
        return pool.map(worker, args_list, chunksize=chunk)


def aggregate(records: list[TrialRecord], master_seed: int) -> list[ExperimentResult]:
    """Per (scheme, sweep value) means and standard errors, in deterministic order."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault((rec.scheme, rec.sweep_name, rec.sweep_value), []).append(rec)
    keys = sorted(groups, key=lambda k: (SCHEME_ORDER.get(k[0], 99), float(k[2])))
    results = []
    for key in keys:
        rows = groups[key]
        ee = np.array([r.ee for r in rows])
        rate = np.array([r.rate for r in rows])
        n = len(rows)
        results.append(
            ExperimentResult(
                scheme=key[0],
                sweep_name=key[1],
                sweep_value=key[2],
                ee_mean=float(ee.mean()),
                ee_std_error=float(ee.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
                rate_mean=float(rate.mean()),
                rate_std_error=float(rate.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
                trials=n,
                master_seed=master_seed,
            )
        )
    return results


def experiment_convergence(cfg: RunConfig, exp: ExperimentSpec, jobs: int = 1):
    """Per-iteration mean efficiency at each configured SNR.

    Trials that converge early are padded with their final value so means at
    every iteration index cover all trials.  Returns one table per SNR.
    """
    tables = []
    for snr_db in exp.values:
        outputs = _map_trials(
            _convergence_trial, [(cfg, snr_db, t) for t in range(exp.trials)], jobs
        )
        max_len = max(len(out[1]) for out in outputs)
        records = []
        for trial, etas, rates, outer, q_trace, sel, digest in outputs:
            etas = etas + [etas[-1]] * (max_len - len(etas))
            rates = rates + [rates[-1]] * (max_len - len(rates))
            for k in range(max_len):
                records.append(
                    TrialRecord(
                        scheme="proposed",
                        sweep_name="iteration",
                        sweep_value=k,
                        trial=trial,
                        ee=etas[k],
                        rate=rates[k],
                        iterations=outer,
                        seed=substream_seed(cfg.master_seed, trial),
                        q_trace=q_trace,
                        selection=sel,
                        paths_digest=digest,
                    )
                )
        name = f"{exp.name}_snr{snr_db:g}"
        tables.append((name, records, aggregate(records, cfg.master_seed)))
    return tables


def experiment_vs_ports(cfg: RunConfig, exp: ExperimentSpec, jobs: int = 1):
    """EE and rate of all three schemes across activated-port counts."""
    outputs = _map_trials(_ports_trial, [(cfg, exp, t) for t in range(exp.trials)], jobs)
    records = [rec for rows in outputs for rec in rows]
    return [(exp.name, records, aggregate(records, cfg.master_seed))]


def experiment_vs_snr(cfg: RunConfig, exp: ExperimentSpec, jobs: int = 1):
    """EE and rate of all three schemes across the SNR sweep."""
    outputs = _map_trials(_snr_trial, [(cfg, exp, t) for t in range(exp.trials)], jobs)
    records = [rec for rows in outputs for rec in rows]
    return [(exp.name, records, aggregate(records, cfg.master_seed))]


_EXPERIMENT_RUNNERS = {
    "convergence": experiment_convergence,
    "vs_ports": experiment_vs_ports,
    "vs_snr": experiment_vs_snr,
}


def run_experiment(cfg: RunConfig, exp: ExperimentSpec, jobs: int = 1):
    return _EXPERIMENT_RUNNERS[exp.name](cfg, exp, jobs)


# --- output ------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        raise TypeError("unexpected bool in output row")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_raw_csv(path: str, records: list[TrialRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(RAW_COLUMNS)
        for rec in records:
            writer.writerow(
                [
                    rec.scheme,
                    rec.sweep_name,
                    _fmt(rec.sweep_value),
                    _fmt(rec.trial),
                    _fmt(rec.ee),
                    _fmt(rec.rate),
                    _fmt(rec.iterations),
                    _fmt(rec.seed),
                ]
            )


def write_agg_csv(path: str, results: list[ExperimentResult]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(AGG_COLUMNS)
        for res in results:
            writer.writerow(
                [
                    res.scheme,
                    res.sweep_name,
                    _fmt(res.sweep_value),
                    _fmt(res.ee_mean),
                    _fmt(res.ee_std_error),
                    _fmt(res.rate_mean),
                    _fmt(res.rate_std_error),
                    _fmt(res.trials),
                    _fmt(res.master_seed),
                ]
            )


def write_plot_svg(path: str, results: list[ExperimentResult], title: str, metric: str = "ee") -> None:
    """Line chart of aggregate means (with error bars) per scheme."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme in sorted({r.scheme for r in results}, key=lambda s: SCHEME_ORDER.get(s, 99)):
        rows = [r for r in results if r.scheme == scheme]
        x = [r.sweep_value for r in rows]
        y = [getattr(r, f"{metric}_mean") for r in rows]
        err = [getattr(r, f"{metric}_std_error") for r in rows]
        ax.errorbar(x, y, yerr=err, marker="o", capsize=3, label=scheme)
    ax.set_xlabel(results[0].sweep_name if results else "")
    ax.set_ylabel("energy efficiency (bits/use/W)" if metric == "ee" else "rate (bits/use)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def run_experiments(cfg: RunConfig, out_dir: str, jobs: int = 1, plots: bool = False) -> dict:
    """Run every configured experiment and write raw/aggregate CSVs (and plots)."""
    os.makedirs(out_dir, exist_ok=True)
    tables = {}
    for exp in cfg.experiments:
        logger.info("running experiment %s (%d trials)", exp.name, exp.trials)
        for name, records, results in run_experiment(cfg, exp, jobs):
            write_raw_csv(os.path.join(out_dir, f"{name}_raw.csv"), records)
            write_agg_csv(os.path.join(out_dir, f"{name}_agg.csv"), results)
            if plots:
                for metric in ("ee", "rate"):
                    write_plot_svg(
                        os.path.join(out_dir, f"{name}_{metric}.svg"), results, name, metric
                    )
            tables[name] = (records, results)
    return tables
