"""Cost-adjusted wealth ledger for a piecewise-constant rebalanced portfolio.

Between mesh dates the strategy is buy-and-hold (share holdings fixed,
weights drift with prices).  At a mesh date it trades to the generator's
target weights and pays kappa times the l1 weight turnover, deducted
multiplicatively: V -> V * (1 - kappa * turnover).  Two turnover
conventions exist:

  drifted  ||pi_target(t_n) - pi_drifted(t_n-)||_1       (what a trade moves)
  target   ||pi_target(t_{n+1}) - pi_target(t_n)||_1     (literal mesh-sum
           cost definition; the charge at t_n looks one mesh date ahead)

The market reference is buy-and-hold of the initial market weights and is
never charged costs.  No trade occurs at the terminal date.
"""
import csv
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (ConfigError, CostExceedsWealthError, GridMismatchError,
                     PathAbort)
from .generators import GeneratorSpec, weights_on_path

CONVENTIONS = ("drifted", "target")


@dataclass
class RebalanceSchedule:
    """Trade every ``delta`` days on the grid t_n = n * delta."""

    delta: float

    def mesh_step(self, dt, horizon):
        """Steps per mesh interval; validates divisibility both ways."""
        k = self.delta / dt
        if self.delta <= 0 or abs(k - round(k)) > 1e-9 or round(k) < 1:
            raise ConfigError(
                f"mesh delta={self.delta} must be a positive integer multiple of dt={dt}")
        n = horizon / self.delta
        if abs(n - round(n)) > 1e-9:
            raise ConfigError(
                f"horizon T={horizon} must be divisible by mesh delta={self.delta}")
        return int(round(k))


@dataclass
class WealthLedger:
    """Pathwise record of strategy wealth, market wealth, turnover and cost.

    V and C are on the full simulation grid; mesh-date quantities (turnover,
    pre-trade wealth/weights, targets) are indexed by rebalance number
    n = 0..n_reb with the final entry belonging to the untraded terminal date.
    C[0] is zero unless a cost is charged at t_0 (charge_initial, or the
    forward-looking first term of the target convention).
    """

    times: np.ndarray
    V: np.ndarray
    V_mkt: np.ndarray
    C: np.ndarray
    turnover: np.ndarray
    drifted_weights: np.ndarray
    target_weights: np.ndarray
    V_pre: np.ndarray
    kappa_at_rebalance: np.ndarray
    mesh_step: int
    convention: str
    charge_initial: bool
    generator: str = ""

    @property
    def n_rebalances(self):
        """Number of mesh intervals (trades happen at dates 0..n_reb-1)."""
        return self.turnover.shape[0] - 1

    @property
    def mesh_indices(self):
        return np.arange(0, self.V.shape[0], self.mesh_step)

    @property
    def log_relative(self):
        return np.log(self.V / self.V_mkt)

    def to_csv(self, path):
        kappa_bps = np.full(self.V.shape[0], np.nan)
        kappa_bps[self.mesh_indices] = self.kappa_at_rebalance * 1e4
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["step", "time", "V", "V_mkt", "log_rel", "C", "kappa_bps"])
            logrel = self.log_relative
            for n in range(self.V.shape[0]):
                w.writerow([n, repr(float(self.times[n])), repr(float(self.V[n])),
                            repr(float(self.V_mkt[n])), repr(float(logrel[n])),
                            repr(float(self.C[n])),
                            "" if np.isnan(kappa_bps[n]) else repr(float(kappa_bps[n]))])

    def rebalances_to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["n", "t_n", "turnover", "cost_paid"])
            for n in range(self.turnover.shape[0]):
                w.writerow([n, repr(float(self.times[n * self.mesh_step])),
                            repr(float(self.turnover[n])),
                            repr(float(self.kappa_at_rebalance[n] * self.turnover[n]))])


def run_strategy(market, cost, G: GeneratorSpec, sched: RebalanceSchedule,
                 turnover_convention="drifted", charge_initial=False) -> WealthLedger:
    """Run the rebalanced strategy for one (market, cost) path pair."""
    if turnover_convention not in CONVENTIONS:
        raise ConfigError(f"unknown turnover convention {turnover_convention!r}")
    m = market.n_steps
    if cost.n_steps != m or abs(cost.dt - market.dt) > 1e-12:
        raise GridMismatchError(
            f"market grid (m={m}, dt={market.dt}) != cost grid "
            f"(m={cost.n_steps}, dt={cost.dt})")
    horizon = m * market.dt
    k = sched.mesh_step(market.dt, horizon)

    mesh = np.arange(0, m + 1, k)
    targets = np.ascontiguousarray(weights_on_path(G, market.weights[mesh]))
    S = np.ascontiguousarray(market.prices)
    kappa = np.ascontiguousarray(cost.kappa)
    mu0 = np.ascontiguousarray(market.weights[0])

    V, V_mkt, C, turnover, drifted, V_pre, status, step = kernels.ledger_evolve(
        S, mu0, kappa, targets, k,
        1 if turnover_convention == "target" else 0,
        1 if charge_initial else 0)

    if status == kernels.LEDGER_COST_EXCEEDS_WEALTH:
        raise CostExceedsWealthError(
            f"cost fraction exceeds wealth at step {step} "
            f"(kappa={kappa[step]:.6f})", step=step)
    if status == kernels.LEDGER_NONPOSITIVE_WEALTH:
        raise PathAbort(f"non-positive strategy wealth at step {step}", step=step)

    return WealthLedger(
        times=market.times, V=V, V_mkt=V_mkt, C=C, turnover=turnover,
        drifted_weights=drifted, target_weights=targets, V_pre=V_pre,
        kappa_at_rebalance=kappa[mesh], mesh_step=k,
        convention=turnover_convention, charge_initial=bool(charge_initial),
        generator=G.describe())


def cumulative_cost(ledger: WealthLedger):
    """The cumulative cost series C_t; C_T equals the mesh sum of
    kappa_{t_n} * turnover_n exactly."""
    return ledger.C
