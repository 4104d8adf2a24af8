"""Kernel backend selection.

The compiled extension (fgpsim.kernels._core) is used when available; the
numpy reference (fgpsim.kernels._ref) otherwise.  Override with the
environment variable FGPSIM_KERNELS=py|c.  `backend()` reports which one
is active; `benchmarks/bench_kernels.py` compares the two.
"""
import os

from . import _ref

_forced = os.environ.get("FGPSIM_KERNELS")

if _forced == "py":
    _impl = _ref
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "cython"
    except ImportError:
        if _forced == "c":
            raise
        _impl = _ref
        BACKEND = "python"

gbm_milstein = _impl.gbm_milstein
gbm_exact_log = _impl.gbm_exact_log
ou_exact = _impl.ou_exact
ledger_evolve = _impl.ledger_evolve

LEDGER_OK = _ref.LEDGER_OK
LEDGER_COST_EXCEEDS_WEALTH = _ref.LEDGER_COST_EXCEEDS_WEALTH
LEDGER_NONPOSITIVE_WEALTH = _ref.LEDGER_NONPOSITIVE_WEALTH


def backend():
    """Name of the active kernel backend: 'cython' or 'python'."""
    return BACKEND
