"""Monte-Carlo harness: runs many seeded paths through the full pipeline
(market -> cost -> ledger -> audit) and aggregates cross-path statistics.

Paths are independent work items; per-path seeds come from the documented
derivation rule in fgpsim.seeding, so results are identical for any worker
count and execution order.  Aggregation always happens in path-index order.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .audit import audit_path
from .costs import CostConfig, shock_scenario, simulate_cost
from .errors import ConfigError, DomainError, ExperimentError, PathAbort
from .generators import GeneratorSpec
from .ledger import RebalanceSchedule, run_strategy
from .market import MarketConfig, simulate_market
from .seeding import path_seeds

log = logging.getLogger(__name__)

EXCLUSION_BUDGET = 0.01
CROSSING_PERSISTENCE = 20


@dataclass
class McConfig:
    """One experiment: sub-configs plus path count and master seed."""

    market: MarketConfig
    cost: CostConfig
    generator: GeneratorSpec
    schedule: RebalanceSchedule
    n_paths: int = 500
    master_seed: int = 0
    turnover_convention: str = "drifted"
    charge_initial: bool = False
    scenario: list = field(default_factory=list)  # extra (start, end, mult) windows

    def validate(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ConfigError(f"n_paths must be an integer >= 1, got {self.n_paths}")
        self.market.validate()
        self.effective_cost().validate(horizon=self.market.horizon)
        self.schedule.mesh_step(self.market.dt, self.market.horizon)
        return self

    def effective_cost(self) -> CostConfig:
        cost = self.cost
        for window in self.scenario:
            cost = shock_scenario(cost, (window[0], window[1]), window[2])
        return cost


@dataclass
class SqrtFit:
    """Least-squares c for y ~ c sqrt(t), with R^2 against a linear fit."""

    c: float
    r2_sqrt: float
    r2_linear: float
    degenerate: bool = False


@dataclass
class McSummary:
    """Cross-path statistics of one experiment."""

    times: np.ndarray
    mean_logrel: np.ndarray
    sd_logrel: np.ndarray
    quantiles: dict               # {10: curve, 25: curve, 75: curve, 90: curve}
    mean_cost: np.ndarray
    sqrt_fit: SqrtFit
    terminal: dict                # {"mean", "skewness", "frac_positive"}
    crossing_day: float | None
    terminal_logrel: np.ndarray
    terminal_cost: np.ndarray
    reports: list
    n_paths: int
    excluded_paths: list

    @property
    def sqrt_fit_c(self):
        return self.sqrt_fit.c

    @property
    def n_excluded(self):
        return len(self.excluded_paths)

    @property
    def n_violations(self):
        return sum(1 for r in self.reports if not r.holds)


def _run_one_path(cfg: McConfig, index, ledger_hook=None):
    """Full pipeline for one path; returns None payload on path abort."""
    mseed, cseed = path_seeds(cfg.master_seed, index)
    try:
        market = simulate_market(cfg.market, mseed)
        cost = simulate_cost(cfg.effective_cost(), market.agg_shocks, cseed,
                             cfg.market.dt)
        led = run_strategy(market, cost, cfg.generator, cfg.schedule,
                           turnover_convention=cfg.turnover_convention,
                           charge_initial=cfg.charge_initial)
        if ledger_hook is not None:
            led = ledger_hook(led)
        report = audit_path(market, led, cfg.generator)
    except PathAbort as exc:
        log.warning("path %d excluded: %s", index, exc)
        return index, None
    return index, (led.log_relative, led.C, report)


def _worker_chunk(payload):
    cfg, indices, ledger_hook = payload
    return [_run_one_path(cfg, i, ledger_hook) for i in indices]


def _collect(cfg, indices, threads, ledger_hook=None):
    if threads and threads > 1:
        chunks = [(cfg, list(c), ledger_hook)
                  for c in np.array_split(indices, threads * 4) if len(c)]
        results = []
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(_worker_chunk, chunks):
                results.extend(part)
    else:
        results = [_run_one_path(cfg, i, ledger_hook) for i in indices]
    return dict(results)


def crossing_day(mean_logrel, times, persistence=CROSSING_PERSISTENCE):
    """First time the curve is positive and stays positive for
    ``persistence`` consecutive steps; None if that never happens."""
    pos = np.asarray(mean_logrel) > 0
    n = len(pos)
    run_len = np.zeros(n, dtype=int)  # positive-run length starting at each step
    acc = 0
    for i in range(n - 1, -1, -1):
        acc = acc + 1 if pos[i] else 0
        run_len[i] = acc
    hits = np.nonzero(run_len >= persistence)[0]
    return float(times[hits[0]]) if hits.size else None


def sqrt_fit(times, series) -> SqrtFit:
    """Fit c minimizing sum (series_t - c sqrt(t))^2; compare to a linear fit."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(series, dtype=float)
    if (y < -1e-12).any():
        raise DomainError("series must be non-negative")
    if (np.diff(y) < -1e-12).any():
        raise DomainError("series must be non-decreasing")
    mask = t > 0
    t, y = t[mask], y[mask]
    if not (y > 0).any():
        return SqrtFit(c=0.0, r2_sqrt=1.0, r2_linear=1.0, degenerate=True)
    xs = np.sqrt(t)
    c = float((xs * y).sum() / (xs * xs).sum())
    a = float((t * y).sum() / (t * t).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2s = 1.0 - float(((y - c * xs) ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    r2l = 1.0 - float(((y - a * t) ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return SqrtFit(c=c, r2_sqrt=r2s, r2_linear=r2l)


def terminal_density_stats(values):
    """Sample mean, adjusted Fisher-Pearson skewness and P(value > 0)."""
    v = np.asarray(values, dtype=float)
    n = v.shape[0]
    if n < 2:
        raise DomainError(f"need at least 2 terminal values, got {n}")
    mean = float(v.mean())
    dev = v - mean
    m2 = float((dev ** 2).mean())
    m3 = float((dev ** 3).mean())
    if m2 > 0 and n > 2:
        skew = float(np.sqrt(n * (n - 1.0)) / (n - 2.0) * m3 / m2 ** 1.5)
    else:
        skew = 0.0
    return {"mean": mean, "skewness": skew,
            "frac_positive": float((v > 0).mean())}


def run_experiment(cfg: McConfig, threads=1, ledger_hook=None) -> McSummary:
    """Run n_paths independent pipelines and summarize; deterministic given
    (cfg.master_seed, n_paths) for any thread count.

    ledger_hook is a test hook: a picklable callable applied to each ledger
    before auditing (used to verify the audit detects corrupted accounting).
    """
    cfg.validate()
    indices = list(range(cfg.n_paths))
    results = _collect(cfg, indices, threads, ledger_hook)

    excluded = sorted(i for i, r in results.items() if r is None)
    if len(excluded) > EXCLUSION_BUDGET * cfg.n_paths:
        raise ExperimentError(
            f"{len(excluded)}/{cfg.n_paths} paths excluded, over the "
            f"{EXCLUSION_BUDGET:.0%} budget")
    kept = [i for i in indices if results[i] is not None]
    if not kept:
        raise ExperimentError("all paths excluded")

    logrel = np.stack([results[i][0] for i in kept])
    costs = np.stack([results[i][1] for i in kept])
    reports = [results[i][2] for i in kept]

    m = logrel.shape[1] - 1
    times = np.arange(m + 1) * cfg.market.dt
    mean_logrel = logrel.mean(axis=0)
    sd_logrel = logrel.std(axis=0, ddof=1) if len(kept) > 1 else np.zeros(m + 1)
    qs = np.percentile(logrel, [10, 25, 75, 90], axis=0)
    mean_cost = costs.mean(axis=0)

    if logrel.shape[0] >= 2:
        terminal = terminal_density_stats(logrel[:, -1])
    else:
        v = float(logrel[0, -1])
        terminal = {"mean": v, "skewness": 0.0, "frac_positive": float(v > 0)}

    return McSummary(
        times=times, mean_logrel=mean_logrel, sd_logrel=sd_logrel,
        quantiles={10: qs[0], 25: qs[1], 75: qs[2], 90: qs[3]},
        mean_cost=mean_cost, sqrt_fit=sqrt_fit(times, mean_cost),
        terminal=terminal,
        crossing_day=crossing_day(mean_logrel, times),
        terminal_logrel=logrel[:, -1], terminal_cost=costs[:, -1],
        reports=reports, n_paths=cfg.n_paths, excluded_paths=excluded)


@dataclass
class MeshRow:
    delta: float
    edge_bp: float                # mean terminal log-relative wealth, basis points
    mean_terminal_logrel: float
    mean_cost: float
    n_paths: int


def _sweep_one_path(cfg: McConfig, meshes, index):
    mseed, cseed = path_seeds(cfg.master_seed, index)
    try:
        market = simulate_market(cfg.market, mseed)
        cost = simulate_cost(cfg.effective_cost(), market.agg_shocks, cseed,
                             cfg.market.dt)
        out = []
        for delta in meshes:
            led = run_strategy(market, cost, cfg.generator,
                               RebalanceSchedule(delta),
                               turnover_convention=cfg.turnover_convention,
                               charge_initial=cfg.charge_initial)
            out.append((float(np.log(led.V[-1] / led.V_mkt[-1])), float(led.C[-1])))
    except PathAbort as exc:
        log.warning("sweep path %d excluded: %s", index, exc)
        return index, None
    return index, out


def _sweep_chunk(payload):
    cfg, meshes, indices = payload
    return [_sweep_one_path(cfg, meshes, i) for i in indices]


def mesh_sweep(cfg: McConfig, meshes, threads=1):
    """Terminal edge per rebalancing mesh on seed-matched paths.

    A path aborting under any mesh is excluded from all meshes so the
    comparison stays matched.  Duplicate meshes are dropped with a warning.
    """
    cfg.validate()
    uniq = sorted(set(float(d) for d in meshes))
    if len(uniq) != len(meshes):
        log.warning("duplicate meshes in %s deduplicated to %s", list(meshes), uniq)
    for delta in uniq:
        RebalanceSchedule(delta).mesh_step(cfg.market.dt, cfg.market.horizon)

    indices = list(range(cfg.n_paths))
    if threads and threads > 1:
        chunks = [(cfg, uniq, list(c)) for c in np.array_split(indices, threads * 4)
                  if len(c)]
        results = []
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(_sweep_chunk, chunks):
                results.extend(part)
        results = dict(results)
    else:
        results = dict(_sweep_one_path(cfg, uniq, i) for i in indices)

    excluded = sorted(i for i, r in results.items() if r is None)
    if len(excluded) > EXCLUSION_BUDGET * cfg.n_paths:
        raise ExperimentError(
            f"{len(excluded)}/{cfg.n_paths} sweep paths excluded, over budget")
    kept = [i for i in indices if results[i] is not None]

    rows = []
    for j, delta in enumerate(uniq):
        terms = np.array([results[i][j][0] for i in kept])
        cterm = np.array([results[i][j][1] for i in kept])
        rows.append(MeshRow(delta=delta, edge_bp=float(terms.mean() * 1e4),
                            mean_terminal_logrel=float(terms.mean()),
                            mean_cost=float(cterm.mean()), n_paths=len(kept)))
    return rows
