"""Empirical pipeline: monthly-rebalanced generator portfolios on a
price/half-spread panel with per-asset proportional costs.

Panel CSV contract (long format, bit-exact header):

    date,asset,mid,half_spread_bps

Rows with zero or extreme (> 500 bps) spreads are dropped at load time;
assets missing more than a configurable share of days are dropped entirely.
``mid`` doubles as the capitalization scale: value weights are mid / sum(mid)
over the in-universe assets, and mids are assumed total-return adjusted.

The strategy trades at each month's first trading day at that day's close;
the net leg deducts sum_i kappa_{i,t} |d weight_i| multiplicatively, the
gross leg is the identical pipeline with zero costs.  The value-weighted
benchmark buys initial weights, is never charged costs, and is re-formed
only when membership changes (departure proceeds reinvested proportionally).
"""
import csv
import datetime
import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, CostExceedsWealthError, DomainError
from .generators import GeneratorSpec
from .market import MarketConfig, simulate_market

PANEL_HEADER = ["date", "asset", "mid", "half_spread_bps"]
MAX_SPREAD_BPS = 500.0


@dataclass
class PricePanel:
    """Rectangularized panel; nan marks (date, asset) cells out of universe."""

    dates: list                   # datetime.date, strictly increasing
    assets: list                  # asset identifiers, sorted
    mid: np.ndarray               # (n_dates, n_assets)
    half_spread: np.ndarray       # fraction, (n_dates, n_assets)
    member: np.ndarray            # bool, (n_dates, n_assets)
    drop_stats: dict = field(default_factory=dict)

    @property
    def n_dates(self):
        return len(self.dates)

    @property
    def n_assets(self):
        return len(self.assets)

    def scaled(self, factor):
        """Copy with all mids multiplied by a positive constant."""
        if not factor > 0:
            raise DomainError("scale factor must be positive")
        return PricePanel(dates=list(self.dates), assets=list(self.assets),
                          mid=self.mid * factor, half_spread=self.half_spread.copy(),
                          member=self.member.copy(), drop_stats=dict(self.drop_stats))


def load_panel(path, max_spread_bps=MAX_SPREAD_BPS, max_missing_frac=0.05) -> PricePanel:
    """Parse and filter a panel CSV; raises ConfigError with the offending
    line number on malformed rows."""
    rows = []
    dropped_spread = 0
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != PANEL_HEADER:
            raise ConfigError(f"panel header must be {','.join(PANEL_HEADER)}, "
                              f"got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ConfigError(f"line {lineno}: expected 4 fields, got {len(row)}")
            try:
                day = datetime.date.fromisoformat(row[0])
                mid = float(row[2])
                spread_bps = float(row[3])
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {exc}") from None
            asset = row[1]
            if not asset:
                raise ConfigError(f"line {lineno}: empty asset id")
            if not (np.isfinite(mid) and mid > 0):
                raise ConfigError(f"line {lineno}: mid must be positive, got {row[2]}")
            if not np.isfinite(spread_bps):
                raise ConfigError(f"line {lineno}: non-finite spread")
            if spread_bps <= 0 or spread_bps > max_spread_bps:
                dropped_spread += 1
                continue
            rows.append((day, asset, mid, spread_bps / 1e4))

    if not rows:
        raise ConfigError("panel is empty after spread filtering")

    dates = sorted({r[0] for r in rows})
    assets = sorted({r[1] for r in rows})
    d_idx = {d: i for i, d in enumerate(dates)}
    a_idx = {a: i for i, a in enumerate(assets)}
    mid = np.full((len(dates), len(assets)), np.nan)
    spread = np.full((len(dates), len(assets)), np.nan)
    for day, asset, m, s in rows:
        mid[d_idx[day], a_idx[asset]] = m
        spread[d_idx[day], a_idx[asset]] = s
    member = np.isfinite(mid)

    missing_frac = 1.0 - member.mean(axis=0)
    keep = missing_frac <= max_missing_frac
    dropped_assets = [a for a, k in zip(assets, keep) if not k]
    if dropped_assets:
        assets = [a for a, k in zip(assets, keep) if k]
        mid, spread, member = mid[:, keep], spread[:, keep], member[:, keep]
    if not assets or not member.any():
        raise ConfigError("panel is empty after filtering")

    return PricePanel(dates=dates, assets=assets, mid=mid, half_spread=spread,
                      member=member,
                      drop_stats={"rows_dropped_spread": dropped_spread,
                                  "assets_dropped_missing": dropped_assets})


def export_panel(panel: PricePanel, path):
    """Write the retained rows back out in the panel CSV contract."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(PANEL_HEADER)
        for t, day in enumerate(panel.dates):
            for i, asset in enumerate(panel.assets):
                if panel.member[t, i]:
                    w.writerow([day.isoformat(), asset,
                                repr(float(panel.mid[t, i])),
                                repr(float(panel.half_spread[t, i] * 1e4))])


def _forward_fill(a):
    out = a.copy()
    for i in range(out.shape[1]):
        col = out[:, i]
        last = np.nan
        for t in range(col.shape[0]):
            if np.isfinite(col[t]):
                last = col[t]
            else:
                col[t] = last
    return out


def monthly_first_trading_days(dates):
    """Indices of the first trading day of each month present."""
    idx, seen = [], set()
    for t, day in enumerate(dates):
        key = (day.year, day.month)
        if key not in seen:
            seen.add(key)
            idx.append(t)
    return idx


def performance_metrics(wealth, dates):
    """(cagr, max_dd) with cagr = (W_end/W_start)^(365.25/calendar_days) - 1."""
    w = np.asarray(wealth, dtype=float)
    if w.shape[0] < 2:
        raise DomainError("need at least 2 wealth points")
    if not (np.isfinite(w).all() and (w > 0).all()):
        raise DomainError("wealth must be positive and finite")
    days = (dates[-1] - dates[0]).days
    if days <= 0:
        raise DomainError("dates must span a positive number of calendar days")
    cagr = float((w[-1] / w[0]) ** (365.25 / days) - 1.0)
    peak = np.maximum.accumulate(w)
    max_dd = float(np.max(1.0 - w / peak))
    return cagr, max_dd


@dataclass
class BacktestReport:
    dates: list
    gross: np.ndarray
    net: np.ndarray
    benchmark: np.ndarray
    gross_cagr: float
    net_cagr: float
    benchmark_cagr: float
    max_dd: float
    avg_monthly_turnover: float
    subperiods: list = field(default_factory=list)  # (start, end, excess_per_year)

    def to_json(self, path):
        payload = {
            "start": self.dates[0].isoformat(), "end": self.dates[-1].isoformat(),
            "gross_cagr": self.gross_cagr, "net_cagr": self.net_cagr,
            "benchmark_cagr": self.benchmark_cagr, "max_dd": self.max_dd,
            "avg_monthly_turnover": self.avg_monthly_turnover,
            "subperiods": [
                {"start": s.isoformat(), "end": e.isoformat(), "excess_per_year": x}
                for s, e, x in self.subperiods],
        }
        with open(path, "w") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
            f.write("\n")

    def curves_to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["date", "gross", "net", "benchmark"])
            for t, day in enumerate(self.dates):
                w.writerow([day.isoformat(), repr(float(self.gross[t])),
                            repr(float(self.net[t])), repr(float(self.benchmark[t]))])


def run_backtest(panel: PricePanel, G: GeneratorSpec, subperiods=None) -> BacktestReport:
    """Monthly-first-trading-day rebalance of G's weights vs the value-weighted
    buy-and-hold benchmark, with per-asset proportional costs on the net leg."""
    reb = monthly_first_trading_days(panel.dates)
    if len(reb) < 2:
        raise ConfigError("panel must span at least 2 monthly rebalance dates")
    start = reb[0]
    dates = panel.dates[start:]
    ffmid = _forward_fill(panel.mid)[start:]
    spread = _forward_fill(panel.half_spread)[start:]
    member = panel.member[start:]
    reb_idx = [r - start for r in reb]
    n_dates, n_assets = ffmid.shape

    gross = np.empty(n_dates)
    net = np.empty(n_dates)
    bench = np.empty(n_dates)

    # benchmark: value weights of initial members, departures redistributed
    in_bench = member[0].copy()
    if not in_bench.any():
        raise ConfigError("no member assets on the first rebalance date")
    w0 = ffmid[0, in_bench] / ffmid[0, in_bench].sum()
    hb = np.zeros(n_assets)
    hb[in_bench] = w0 / ffmid[0, in_bench]

    h_gross = np.zeros(n_assets)
    h_net = np.zeros(n_assets)
    turnovers = []
    next_reb = 0

    for t in range(n_dates):
        if next_reb < len(reb_idx) and t == reb_idx[next_reb]:
            mem = member[t]
            if not mem.any():
                raise ConfigError(f"rebalance date {dates[t]} has no member assets")
            mu = ffmid[t, mem] / ffmid[t, mem].sum()
            target = np.zeros(n_assets)
            target[mem] = 1.0 if mem.sum() == 1 else G.weights(mu)

            if next_reb == 0:
                # initial acquisition from cash: free, not counted as turnover
                h_gross = target / ffmid[t]
                h_gross[~mem] = 0.0
                h_net = h_gross.copy()
            else:
                vg = float(np.nansum(h_gross * ffmid[t]))
                vn = float(np.nansum(h_net * ffmid[t]))
                drifted = np.where(h_gross > 0, h_gross * ffmid[t] / vg, 0.0)
                dw = np.abs(target - drifted)
                turnovers.append(float(dw.sum()))
                kappa = np.where(np.isfinite(spread[t]), spread[t], 0.0)
                cost_frac = float((kappa * dw).sum())
                if cost_frac >= 1.0:
                    raise CostExceedsWealthError(
                        f"cost fraction {cost_frac:.4f} >= 1 at {dates[t]}")
                vn = vn * (1.0 - cost_frac)
                h_gross = np.where(mem, vg * target / ffmid[t], 0.0)
                h_net = np.where(mem, vn * target / ffmid[t], 0.0)

            # benchmark reform on membership change
            if next_reb > 0:
                departed = in_bench & ~mem
                if departed.any():
                    stay = in_bench & mem
                    if stay.any():
                        v_dep = float(np.nansum(hb[departed] * ffmid[t, departed]))
                        v_stay = float(np.nansum(hb[stay] * ffmid[t, stay]))
                        hb[stay] *= 1.0 + v_dep / v_stay
                    hb[departed] = 0.0
                    in_bench = stay
            next_reb += 1

        gross[t] = float(np.nansum(h_gross * ffmid[t]))
        net[t] = float(np.nansum(h_net * ffmid[t]))
        bench[t] = float(np.nansum(hb * ffmid[t]))

    gross_cagr, _ = performance_metrics(gross, dates)
    net_cagr, max_dd = performance_metrics(net, dates)
    bench_cagr, _ = performance_metrics(bench, dates)
    report = BacktestReport(
        dates=dates, gross=gross, net=net, benchmark=bench,
        gross_cagr=gross_cagr, net_cagr=net_cagr, benchmark_cagr=bench_cagr,
        max_dd=max_dd,
        avg_monthly_turnover=float(np.mean(turnovers)) if turnovers else 0.0)
    if subperiods:
        report.subperiods = subperiod_decomposition(report, subperiods)
    return report


def subperiod_decomposition(report: BacktestReport, ranges):
    """Annualized net return minus benchmark return per (start, end) range."""
    out = []
    for start, end in ranges:
        if isinstance(start, str):
            start = datetime.date.fromisoformat(start)
        if isinstance(end, str):
            end = datetime.date.fromisoformat(end)
        sel = [t for t, d in enumerate(report.dates) if start <= d <= end]
        if len(sel) < 2:
            raise ConfigError(f"empty or degenerate subperiod ({start}, {end})")
        lo, hi = sel[0], sel[-1]
        seg_dates = report.dates[lo:hi + 1]
        net_cagr, _ = performance_metrics(report.net[lo:hi + 1], seg_dates)
        ben_cagr, _ = performance_metrics(report.benchmark[lo:hi + 1], seg_dates)
        out.append((seg_dates[0], seg_dates[-1], net_cagr - ben_cagr))
    return out


def make_synthetic_panel(n_assets=30, n_years=10, seed=9, start=None,
                         vol_range=(0.15, 0.35), cap_sigma=1.2) -> PricePanel:
    """Generate a demo panel with the simulation engine: dispersed initial
    capitalizations, log-neutral price paths, per-asset OU half-spreads."""
    if start is None:
        start = datetime.date(1994, 1, 3)
    n_days = int(round(n_years * 252))
    day, dates = start, []
    while len(dates) < n_days:
        if day.weekday() < 5:
            dates.append(day)
        day += datetime.timedelta(days=1)

    cfg = MarketConfig(n_assets=n_assets, horizon=float(n_days - 1), dt=1.0,
                       vol_range=vol_range, log_neutral=True, seed=seed,
                       scheme="euler_log_exact", s0=50.0, cap_sigma=cap_sigma)
    market = simulate_market(cfg, rng_seed=seed)
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x5ca1e)))
    mid = market.prices

    # per-asset OU half-spreads around 10-40 bps, floored at 1 bp
    kbar = rng.uniform(0.0010, 0.0040, size=n_assets)
    alpha, dtd = 3.0, 1.0
    decay = np.exp(-alpha * dtd)
    scale = np.sqrt((1.0 - np.exp(-2.0 * alpha * dtd)) / (2.0 * alpha))
    spread = np.empty((n_days, n_assets))
    for i in range(n_assets):
        zeta = rng.standard_normal(n_days - 1)
        amp = np.full(n_days - 1, 0.35 * kbar[i] * scale)
        spread[:, i] = kernels.ou_exact(kbar[i], kbar[i], decay,
                                        amp, zeta, 0.0001)

    member = np.ones((n_days, n_assets), dtype=bool)
    assets = [f"A{i:03d}" for i in range(n_assets)]
    return PricePanel(dates=dates, assets=assets, mid=mid, half_spread=spread,
                      member=member, drop_stats={})
