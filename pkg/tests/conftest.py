import numpy as np
import pytest

from fgpsim import CostConfig, MarketConfig, simulate_cost, simulate_market


@pytest.fixture(scope="session")
def small_market():
    """d=10, T=200 baseline-style market, shared across tests."""
    cfg = MarketConfig(n_assets=10, horizon=200, dt=1.0, vol_range=(0.15, 0.35),
                      log_neutral=True, seed=11)
    return simulate_market(cfg, rng_seed=101)


@pytest.fixture(scope="session")
def small_cost(small_market):
    return simulate_cost(CostConfig(), small_market.agg_shocks, 202, small_market.dt)


def interior_simplex(rng, d, floor=1e-4):
    """Random interior weight vector with all components >= floor."""
    w = rng.dirichlet(np.ones(d))
    w = np.maximum(w, floor)
    return w / w.sum()
