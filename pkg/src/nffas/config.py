"""Experiment configuration: JSON schema, defaults, strict ingestion.

A config document has three blocks plus a master seed.  Every key is
optional (defaults fill in), unknown keys are rejected so sweep typos fail
loudly, and `dump_config(resolve(load_config(path)))` round-trips.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

from .channel import DEFAULT_DISTANCE_RANGE, PHASE_MODELS
from .geometry import Scenario, p_max_from_snr

DEFAULT_MASTER_SEED = 20260810
DEFAULT_TRIALS = 200
EXPERIMENT_KINDS = ("convergence", "vs_ports", "vs_snr")

_SCENARIO_KEYS = {
    "n_tx": int,
    "m_ports": int,
    "m_active": int,
    "wavelength": float,
    "d_bs": float,
    "d_u": float,
    "noise_power": float,
    "path_gain_var": float,
    "p_max": float,
    "p_c": float,
    "epsilon": float,
    "l_t_paths": int,
    "l_r_paths": int,
}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration document."""


@dataclass(frozen=True)
class ChannelConfig:
    distance_range: tuple[float, float] = DEFAULT_DISTANCE_RANGE
    phase_model: str = "approx"


@dataclass(frozen=True)
class ExperimentSpec:
    """One named experiment: its sweep variable, sweep values and trial count."""

    name: str
    sweep: str
    values: tuple
    trials: int = DEFAULT_TRIALS
    snr_db: float | None = None  # fixed SNR for the m0 sweep


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    channel: ChannelConfig
    experiments: tuple[ExperimentSpec, ...]
    master_seed: int


def default_config() -> RunConfig:
    scenario = Scenario()
    experiments = (
        ExperimentSpec(name="convergence", sweep="snr_db", values=(5.0, 15.0)),
        ExperimentSpec(name="vs_ports", sweep="m0", values=(1, 2, 3, 4, 5, 6), snr_db=15.0),
        ExperimentSpec(name="vs_snr", sweep="snr_db", values=(-5.0, 0.0, 5.0, 10.0, 15.0, 20.0)),
    )
    return RunConfig(
        scenario=scenario,
        channel=ChannelConfig(),
        experiments=experiments,
        master_seed=DEFAULT_MASTER_SEED,
    )


def _reject_unknown(block: dict, allowed, where: str) -> None:
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _coerce(value, kind, where: str):
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return float(value)
    raise AssertionError(kind)


def _scenario_from_dict(block: dict) -> Scenario:
    _reject_unknown(block, set(_SCENARIO_KEYS) | {"snr_db"}, "scenario")
    if "snr_db" in block and "p_max" in block:
        raise ConfigError("scenario: give either snr_db or p_max, not both")
    kwargs = {}
    for key, kind in _SCENARIO_KEYS.items():
        if key in block:
            kwargs[key] = _coerce(block[key], kind, f"scenario.{key}")
    if "snr_db" in block:
        noise = kwargs.get("noise_power", Scenario.noise_power)
        kwargs["p_max"] = p_max_from_snr(_coerce(block["snr_db"], float, "scenario.snr_db"), noise)
    try:
        return Scenario(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from exc


def _channel_from_dict(block: dict) -> ChannelConfig:
    _reject_unknown(block, {"distance_range", "phase_model"}, "channel")
    rng = block.get("distance_range", list(DEFAULT_DISTANCE_RANGE))
    if not (isinstance(rng, (list, tuple)) and len(rng) == 2):
        raise ConfigError("channel.distance_range must be a [min, max] pair")
    lo = _coerce(rng[0], float, "channel.distance_range[0]")
    hi = _coerce(rng[1], float, "channel.distance_range[1]")
    if lo <= 0 or hi < lo:
        raise ConfigError(f"channel.distance_range invalid: [{lo}, {hi}]")
    model = block.get("phase_model", "approx")
    if model not in ("approx", "exact"):
        raise ConfigError(f"channel.phase_model must be 'approx' or 'exact', got {model!r}")
    assert model in PHASE_MODELS
    return ChannelConfig(distance_range=(lo, hi), phase_model=model)


def _experiment_from_dict(block: dict, scenario: Scenario) -> ExperimentSpec:
    _reject_unknown(block, {"name", "sweep", "values", "trials", "snr_db"}, "experiment")
    name = block.get("name")
    if name not in EXPERIMENT_KINDS:
        raise ConfigError(f"experiment name must be one of {EXPERIMENT_KINDS}, got {name!r}")
    expected_sweep = "m0" if name == "vs_ports" else "snr_db"
    sweep = block.get("sweep", expected_sweep)
    if sweep != expected_sweep:
        raise ConfigError(f"experiment {name}: sweep must be {expected_sweep!r}, got {sweep!r}")
    values = block.get("values")
    if not isinstance(values, (list, tuple)) or not values:
        raise ConfigError(f"experiment {name}: values must be a non-empty list")
    if sweep == "m0":
        coerced = tuple(_coerce(v, int, f"{name}.values") for v in values)
        for v in coerced:
            if not 1 <= v <= scenario.m_ports:
                raise ConfigError(f"experiment {name}: m0 value {v} outside [1, {scenario.m_ports}]")
    else:
        coerced = tuple(_coerce(v, float, f"{name}.values") for v in values)
    trials = _coerce(block.get("trials", DEFAULT_TRIALS), int, f"{name}.trials")
    if trials < 1:
        raise ConfigError(f"experiment {name}: trials must be >= 1")
    snr_db = None
    if "snr_db" in block:
        if name != "vs_ports":
            raise ConfigError(f"experiment {name}: snr_db only applies to vs_ports")
        snr_db = _coerce(block["snr_db"], float, f"{name}.snr_db")
    elif name == "vs_ports":
        snr_db = 15.0
    return ExperimentSpec(name=name, sweep=sweep, values=coerced, trials=trials, snr_db=snr_db)


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    _reject_unknown(doc, {"master_seed", "scenario", "channel", "experiments"}, "config")
    seed = doc.get("master_seed", DEFAULT_MASTER_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"master_seed must be an integer in [0, 2^64), got {seed!r}")
    scenario = _scenario_from_dict(doc.get("scenario", {}))
    channel = _channel_from_dict(doc.get("channel", {}))
    exp_blocks = doc.get("experiments")
    if exp_blocks is None:
        exp_blocks = [asdict(e) for e in default_config().experiments]
        for block in exp_blocks:
            if block["snr_db"] is None:
                del block["snr_db"]
    if not isinstance(exp_blocks, list) or not exp_blocks:
        raise ConfigError("experiments must be a non-empty list")
    experiments = tuple(_experiment_from_dict(b, scenario) for b in exp_blocks)
    names = [e.name for e in experiments]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate experiment names: {names}")
    return RunConfig(scenario=scenario, channel=channel, experiments=experiments, master_seed=seed)


def config_to_dict(cfg: RunConfig) -> dict:
    doc = {
        "master_seed": cfg.master_seed,
        "scenario": {k: getattr(cfg.scenario, k) for k in _SCENARIO_KEYS},
        "channel": {
            "distance_range": list(cfg.channel.distance_range),
            "phase_model": cfg.channel.phase_model,
        },
        "experiments": [],
    }
    for exp in cfg.experiments:
        block = {"name": exp.name, "sweep": exp.sweep, "values": list(exp.values), "trials": exp.trials}
        if exp.snr_db is not None:
            block["snr_db"] = exp.snr_db
        doc["experiments"].append(block)
    return doc


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(doc)
