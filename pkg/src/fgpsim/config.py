"""Experiment config files (TOML or JSON) -> typed configs.

Sections and keys:

  [market]    d, T_days, dt_days, vol_lo, vol_hi, log_neutral, scheme, seed
              (optional: vols, drifts_per_day, s0)
  [cost]      alpha, kappa_bar_bps, eta_bps, kappa0_bps, rho, sign_convention,
              kappa_min_bps, shocks = [{start, end, mult}, ...]
  [generator] kind = "diversity" | "entropy", p, weight_rule
  [schedule]  delta_days, turnover_convention, charge_initial
  [mc]        n_paths, master_seed, threads, scenario = [{start, end, mult}]
  [backtest]  subperiods = [["1994-01-01", "1999-12-31"], ...],
              max_spread_bps, max_missing_frac   (used by the backtest command)

Unknown keys are rejected.  Bps-suffixed keys are plain basis points
(20 -> 0.0020 internally).
"""
import json
import sys
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .costs import CostConfig
from .errors import ConfigError
from .generators import GeneratorSpec, diversity_generator, entropy_generator
from .harness import McConfig
from .ledger import RebalanceSchedule
from .market import MarketConfig


def read_config_file(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        if path.suffix.lower() == ".json":
            with open(path) as f:
                return json.load(f)
        with open(path, "rb") as f:
            return tomllib.load(f)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None


def _check_keys(section, data, allowed):
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}; "
                          f"allowed: {sorted(allowed)}")


def _windows(raw, section):
    out = []
    for w in raw:
        if isinstance(w, dict):
            try:
                out.append((float(w["start"]), float(w["end"]), float(w["mult"])))
            except KeyError as exc:
                raise ConfigError(f"[{section}] window needs start/end/mult, "
                                  f"missing {exc}") from None
        else:
            if len(w) != 3:
                raise ConfigError(f"[{section}] window must be (start, end, mult)")
            out.append((float(w[0]), float(w[1]), float(w[2])))
    return out


def parse_market(data) -> MarketConfig:
    _check_keys("market", data, {"d", "T_days", "dt_days", "vol_lo", "vol_hi",
                                 "log_neutral", "scheme", "seed", "vols",
                                 "drifts_per_day", "s0", "cap_sigma"})
    kw = dict(
        n_assets=int(data.get("d", 50)),
        horizon=float(data.get("T_days", 1000)),
        dt=float(data.get("dt_days", 1.0)),
        vol_range=(float(data.get("vol_lo", 0.15)), float(data.get("vol_hi", 0.35))),
        log_neutral=bool(data.get("log_neutral", True)),
        scheme=data.get("scheme", "milstein"),
        seed=int(data.get("seed", 0)),
        s0=float(data.get("s0", 1.0)),
        cap_sigma=float(data.get("cap_sigma", 0.0)),
    )
    if "vols" in data:
        kw["vols"] = np.asarray(data["vols"], dtype=float)
    if "drifts_per_day" in data:
        kw["drifts"] = np.asarray(data["drifts_per_day"], dtype=float)
        kw["log_neutral"] = bool(data.get("log_neutral", False))
    return MarketConfig(**kw).validate()


def parse_cost(data) -> CostConfig:
    _check_keys("cost", data, {"alpha", "kappa_bar_bps", "eta_bps", "kappa0_bps",
                               "rho", "sign_convention", "kappa_min_bps", "shocks"})
    kappa_bar = float(data.get("kappa_bar_bps", 20.0)) / 1e4
    return CostConfig(
        alpha=float(data.get("alpha", 3.0)),
        kappa_bar=kappa_bar,
        eta=float(data.get("eta_bps", 5.0)) / 1e4,
        kappa0=float(data.get("kappa0_bps", data.get("kappa_bar_bps", 20.0))) / 1e4,
        rho=float(data.get("rho", 0.4)),
        sign_convention=data.get("sign_convention", "spread_up_when_market_down"),
        kappa_min=float(data.get("kappa_min_bps", 0.0)) / 1e4,
        shocks=_windows(data.get("shocks", []), "cost"),
    ).validate()


def parse_generator(data) -> GeneratorSpec:
    _check_keys("generator", data, {"kind", "p", "weight_rule"})
    kind = data.get("kind", "diversity")
    if kind == "diversity":
        return diversity_generator(float(data.get("p", 0.7)),
                                   weight_rule=data.get("weight_rule", "direct"))
    if kind == "entropy":
        if data.get("weight_rule", "fgp_formula") != "fgp_formula":
            raise ConfigError("entropy generator supports only weight_rule='fgp_formula'")
        return entropy_generator()
    raise ConfigError(f"generator kind {kind!r} not loadable from config "
                      f"(custom generators are constructed in code)")


def parse_schedule(data):
    _check_keys("schedule", data, {"delta_days", "turnover_convention", "charge_initial"})
    return (RebalanceSchedule(float(data.get("delta_days", 5.0))),
            data.get("turnover_convention", "drifted"),
            bool(data.get("charge_initial", False)))


def experiment_from_file(path):
    """Build (McConfig, threads, backtest_options) from a config file."""
    raw = read_config_file(path)
    _check_keys("<root>", raw, {"market", "cost", "generator", "schedule", "mc",
                                "backtest"})
    market = parse_market(raw.get("market", {}))
    cost = parse_cost(raw.get("cost", {}))
    gen = parse_generator(raw.get("generator", {}))
    sched, convention, charge_initial = parse_schedule(raw.get("schedule", {}))

    mc = raw.get("mc", {})
    _check_keys("mc", mc, {"n_paths", "master_seed", "threads", "scenario"})
    cfg = McConfig(
        market=market, cost=cost, generator=gen, schedule=sched,
        n_paths=int(mc.get("n_paths", 500)),
        master_seed=int(mc.get("master_seed", 0)),
        turnover_convention=convention, charge_initial=charge_initial,
        scenario=_windows(mc.get("scenario", []), "mc"),
    ).validate()

    return cfg, int(mc.get("threads", 1)), backtest_options(raw.get("backtest", {}))


def backtest_options(bt):
    _check_keys("backtest", bt, {"subperiods", "max_spread_bps", "max_missing_frac"})
    return {
        "subperiods": [tuple(r) for r in bt.get("subperiods", [])],
        "max_spread_bps": float(bt.get("max_spread_bps", 500.0)),
        "max_missing_frac": float(bt.get("max_missing_frac", 0.05)),
    }
