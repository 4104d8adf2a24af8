"""Seed derivation for reproducible per-path random streams.

Every path in a Monte-Carlo experiment gets two independent integer seeds,
one for the market shocks and one for the cost-process noise, both derived
from the experiment's master seed through a splittable generator:

    SeedSequence((master_seed, path_index)) -> generate_state(2)

The rule is a pure function of (master_seed, path_index), so results do not
depend on execution order or worker count, and the cost stream stays fixed
when only the market seed changes (and vice versa).
"""
import numpy as np

STREAM_MARKET = 0
STREAM_COST = 1


def path_seeds(master_seed, path_index):
    """Return (market_seed, cost_seed) for one path as plain ints."""
    ss = np.random.SeedSequence((int(master_seed), int(path_index)))
    state = ss.generate_state(2, dtype=np.uint64)
    return int(state[STREAM_MARKET]), int(state[STREAM_COST])
