"""Multi-asset Ito market simulation on a uniform daily grid.

Prices follow dS_t^i / S_t^i = b_i dt + sigma_i dW_t^i with one independent
Brownian driver per asset and constant coefficients.  Stepping is either a
diagonal-noise Milstein scheme or exact lognormal stepping; both consume the
same standard-normal draws, so schemes can be compared on matched paths.

Units: the time grid is in trading days; configured volatilities are
annualized and converted to per-day scale by 1/sqrt(252); drifts are per-day
rates.  With ``log_neutral`` the per-asset drift is set so that log prices
are driftless (E[log(S_T/S_0)] = 0).
"""
import csv
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, DomainError, PathAbort

TRADING_DAYS_PER_YEAR = 252.0
SCHEMES = ("milstein", "euler_log_exact")


@dataclass
class MarketConfig:
    """Parameters of the simulated market.

    vols / vol_range are annualized; exactly one of them must be given.
    Volatilities drawn from vol_range use ``seed`` and are therefore the
    same for every path of an experiment.
    """

    n_assets: int = 50
    horizon: float = 1000.0          # T, trading days
    dt: float = 1.0                  # step, trading days
    vol_range: tuple = (0.15, 0.35)  # annualized (lo, hi) for i.i.d. draws
    vols: np.ndarray = None          # annualized, overrides vol_range
    drifts: np.ndarray = None        # per-day Ito drift b_i
    log_neutral: bool = True
    seed: int = 0                    # seeds the volatility and cap draws only
    scheme: str = "milstein"
    s0: float = 1.0
    cap_sigma: float = 0.0           # lognormal dispersion of initial caps

    def validate(self):
        if int(self.n_assets) != self.n_assets or self.n_assets < 2:
            raise ConfigError(f"n_assets must be an integer >= 2, got {self.n_assets}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        m = self.horizon / self.dt
        if self.horizon <= 0 or abs(m - round(m)) > 1e-9:
            raise ConfigError(
                f"horizon must be a positive integer multiple of dt "
                f"(T={self.horizon}, dt={self.dt})")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if self.vols is not None:
            v = np.asarray(self.vols, dtype=float)
            if v.shape != (self.n_assets,):
                raise ConfigError(f"vols must have shape ({self.n_assets},)")
            # explicit zero vol is allowed for degenerate/diagnostic runs;
            # drawn vols stay strictly positive via the range check below
            if not (np.isfinite(v).all() and (v >= 0).all()):
                raise ConfigError("vols must be finite and >= 0")
        else:
            lo, hi = self.vol_range
            if not (0 < lo <= hi):
                raise ConfigError(f"vol_range must satisfy 0 < lo <= hi, got {self.vol_range}")
        if self.drifts is not None:
            if self.log_neutral:
                raise ConfigError("give explicit drifts or log_neutral, not both")
            b = np.asarray(self.drifts, dtype=float)
            if b.shape != (self.n_assets,) or not np.isfinite(b).all():
                raise ConfigError(f"drifts must be finite with shape ({self.n_assets},)")
        if not self.s0 > 0:
            raise ConfigError("s0 must be positive")
        if self.cap_sigma < 0:
            raise ConfigError("cap_sigma must be >= 0")
        return self

    @property
    def n_steps(self):
        return int(round(self.horizon / self.dt))

    def resolved_vols(self):
        """Annualized per-asset vols, drawing from vol_range when not explicit."""
        if self.vols is not None:
            return np.asarray(self.vols, dtype=float).copy()
        lo, hi = self.vol_range
        rng = np.random.default_rng(np.random.SeedSequence((int(self.seed), 0x70f5)))
        return rng.uniform(lo, hi, size=self.n_assets)

    def resolved_s0(self):
        """Initial prices; with cap_sigma > 0 they model a dispersed
        capitalization structure: s0 * exp(cap_sigma * zeta_i), drawn once
        from ``seed`` and constant across paths (like the vols)."""
        if self.cap_sigma == 0.0:
            return np.full(self.n_assets, float(self.s0))
        rng = np.random.default_rng(np.random.SeedSequence((int(self.seed), 0xcab5)))
        return float(self.s0) * np.exp(self.cap_sigma
                                       * rng.standard_normal(self.n_assets))

    def per_day(self):
        """(sigma_day, b_day): per-day volatility and Ito drift arrays."""
        sigma = self.resolved_vols() / np.sqrt(TRADING_DAYS_PER_YEAR)
        if self.log_neutral:
            # zero log drift: b - sigma^2/2 = 0
            b = 0.5 * sigma * sigma
        elif self.drifts is not None:
            b = np.asarray(self.drifts, dtype=float).copy()
        else:
            b = np.zeros(self.n_assets)
        return sigma, b


@dataclass
class MarketPath:
    """One simulated path: prices, market weights and the driving shocks.

    ``tau`` is the instantaneous covariance sigma sigma^T; coefficients are
    constant here, so one (d, d) matrix serves every grid point.
    ``shocks`` holds the per-step standard normal draws z (the Brownian
    increment is sqrt(dt) * z); ``agg_shocks`` is sum_i z_i / sqrt(d).
    """

    times: np.ndarray
    prices: np.ndarray
    weights: np.ndarray
    sigma: np.ndarray         # per-day, (d,)
    tau: np.ndarray           # per-day covariance rate, (d, d)
    shocks: np.ndarray
    agg_shocks: np.ndarray
    dt: float
    scheme: str

    @property
    def n_steps(self):
        return self.shocks.shape[0]

    @property
    def n_assets(self):
        return self.prices.shape[1]

    def to_csv(self, path):
        """Long-format export: step,time,asset,price,weight."""
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["step", "time", "asset", "price", "weight"])
            for n, t in enumerate(self.times):
                for i in range(self.n_assets):
                    w.writerow([n, repr(float(t)), i,
                                repr(float(self.prices[n, i])),
                                repr(float(self.weights[n, i]))])


def market_weights(prices):
    """Normalize a positive price/capitalization vector to market weights."""
    p = np.asarray(prices, dtype=float)
    if not (np.isfinite(p).all() and (p > 0).all()):
        raise DomainError("market weights need strictly positive finite prices")
    return p / p.sum()


def instantaneous_cov(vols):
    """tau = sigma sigma^T for a diagonal (d,) or full (d, d) volatility input."""
    s = np.asarray(vols, dtype=float)
    if not np.isfinite(s).all():
        raise DomainError("volatility input must be finite")
    if s.ndim == 1:
        return np.diag(s * s)
    if s.ndim == 2 and s.shape[0] == s.shape[1]:
        return s @ s.T
    raise DomainError(f"expected (d,) or (d, d) volatility, got shape {s.shape}")


def simulate_market(cfg: MarketConfig, rng_seed) -> MarketPath:
    """Simulate one market path; deterministic given (cfg, rng_seed)."""
    cfg.validate()
    sigma, b = cfg.per_day()
    m, d = cfg.n_steps, cfg.n_assets
    rng = np.random.default_rng(int(rng_seed))
    z = rng.standard_normal((m, d))
    s0 = cfg.resolved_s0()

    # overflow is handled by the abort check below, not by numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        if cfg.scheme == "milstein":
            prices = kernels.gbm_milstein(s0, b, sigma, float(cfg.dt), z)
        else:
            prices = kernels.gbm_exact_log(s0, b, sigma, float(cfg.dt), z)

    bad = ~(np.isfinite(prices) & (prices > 0))
    if bad.any():
        step = int(np.argwhere(bad.any(axis=1))[0, 0])
        raise PathAbort(
            f"non-finite or non-positive price at step {step} "
            f"(scheme={cfg.scheme}, seed={rng_seed})", step=step)

    weights = prices / prices.sum(axis=1, keepdims=True)
    times = np.arange(m + 1) * float(cfg.dt)
    agg = z.sum(axis=1) / np.sqrt(d)
    return MarketPath(times=times, prices=prices, weights=weights, sigma=sigma,
                      tau=np.diag(sigma * sigma), shocks=z, agg_shocks=agg,
                      dt=float(cfg.dt), scheme=cfg.scheme)
