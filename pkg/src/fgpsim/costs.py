"""Proportional trading-cost process: mean-reverting OU spread dynamics.

kappa_t is stepped with the exact OU transition (unconditionally stable,
no discretization knob) and floored at kappa_min.  The driving noise can be
correlated with the market's aggregate shock; under the default sign
convention the spread widens when the market falls.  Liquidity shocks are
windows in which the noise volatility eta is multiplied.
"""
import csv
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import ConfigError, GridMismatchError

SIGN_CONVENTIONS = ("spread_up_when_market_down", "literal")


@dataclass
class CostConfig:
    """OU spread parameters, all in per-day units and plain fractions
    (20 bps = 0.0020)."""

    alpha: float = 3.0               # mean reversion, 1/day
    kappa_bar: float = 0.0020        # long-run spread
    eta: float = 0.0005              # noise scale, fraction / sqrt(day)
    kappa0: float = 0.0020
    rho: float = 0.4                 # |corr| with the aggregate market shock
    sign_convention: str = "spread_up_when_market_down"
    kappa_min: float = 0.0
    shocks: list = field(default_factory=list)  # (start_day, end_day, eta_multiplier)

    def validate(self, horizon=None):
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")
        # zero kappa_bar/kappa0 (with eta = 0) expresses the frictionless
        # kappa == 0 runs used by the equality audits
        if self.kappa_bar < 0:
            raise ConfigError(f"kappa_bar must be >= 0, got {self.kappa_bar}")
        if self.eta < 0:
            raise ConfigError(f"eta must be >= 0, got {self.eta}")
        if self.kappa0 < 0:
            raise ConfigError(f"kappa0 must be >= 0, got {self.kappa0}")
        if not -1.0 <= self.rho <= 1.0:
            raise ConfigError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.sign_convention not in SIGN_CONVENTIONS:
            raise ConfigError(f"unknown sign_convention {self.sign_convention!r}")
        if self.kappa_min < 0:
            raise ConfigError(f"kappa_min must be >= 0, got {self.kappa_min}")
        for w in self.shocks:
            start, end, mult = w
            if not start < end:
                raise ConfigError(f"inverted shock window {w}")
            if start < 0 or (horizon is not None and end > horizon):
                raise ConfigError(f"shock window {w} outside [0, {horizon}]")
            if not mult > 0:
                raise ConfigError(f"shock multiplier must be > 0, got {mult}")
        return self


@dataclass
class CostPath:
    """kappa on the simulation grid (m+1 values, fraction per unit turnover)."""

    times: np.ndarray
    kappa: np.ndarray
    dt: float

    @property
    def n_steps(self):
        return self.kappa.shape[0] - 1

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["step", "time", "kappa_bps"])
            for n, t in enumerate(self.times):
                w.writerow([n, repr(float(t)), repr(float(self.kappa[n]) * 1e4)])


def eta_schedule(cfg: CostConfig, times):
    """Per-step eta after shock-window multipliers.

    Step n covers [t_n, t_{n+1}); a window (start, end, mult) applies to the
    steps whose left endpoint t_n satisfies start <= t_n < end.
    """
    eta = np.full(len(times), cfg.eta)
    for start, end, mult in cfg.shocks:
        eta[(times >= start) & (times < end)] *= mult
    return eta


def simulate_cost(cfg: CostConfig, market_agg_shocks, rng_seed, dt) -> CostPath:
    """Simulate kappa given the market's standardized aggregate shocks.

    The per-step innovation is zeta_n = s * rho * agg_n + sqrt(1 - rho^2) * xi_n
    with xi an independent N(0,1) stream seeded by rng_seed and s = -1 under
    spread_up_when_market_down, +1 under literal.
    """
    agg = np.ascontiguousarray(market_agg_shocks, dtype=float)
    if agg.ndim != 1:
        raise GridMismatchError("market_agg_shocks must be a 1-D per-step vector")
    m = agg.shape[0]
    cfg.validate(horizon=m * dt)

    rng = np.random.default_rng(int(rng_seed))
    xi = rng.standard_normal(m)
    s = -1.0 if cfg.sign_convention == "spread_up_when_market_down" else 1.0
    zeta = s * cfg.rho * agg + np.sqrt(1.0 - cfg.rho * cfg.rho) * xi

    step_times = np.arange(m) * dt
    decay = np.exp(-cfg.alpha * dt)
    ou_scale = np.sqrt((1.0 - np.exp(-2.0 * cfg.alpha * dt)) / (2.0 * cfg.alpha))
    noise_amp = np.ascontiguousarray(eta_schedule(cfg, step_times) * ou_scale)

    kappa = kernels.ou_exact(cfg.kappa0, cfg.kappa_bar, decay, noise_amp,
                             np.ascontiguousarray(zeta), cfg.kappa_min)
    times = np.arange(m + 1) * dt
    return CostPath(times=times, kappa=kappa, dt=float(dt))


def shock_scenario(base: CostConfig, window, multiplier) -> CostConfig:
    """Return a copy of ``base`` with one more eta-multiplier window appended."""
    start, end = window
    if not start < end:
        raise ConfigError(f"inverted shock window ({start}, {end})")
    if not multiplier > 0:
        raise ConfigError(f"shock multiplier must be > 0, got {multiplier}")
    return replace(base, shocks=list(base.shocks) + [(float(start), float(end), float(multiplier))])
