"""Pure-Python/numpy reference kernels.

These are the fallback implementations selected at import time when the
compiled extension is unavailable.  Arithmetic is arranged in the same
operation order as the Cython kernels so both backends agree pathwise
(bitwise for the price/cost recursions; to float rounding for the ledger,
whose asset sums use numpy's pairwise reduction).
"""
import numpy as np

# status codes shared with the compiled kernel
LEDGER_OK = 0
LEDGER_COST_EXCEEDS_WEALTH = 1
LEDGER_NONPOSITIVE_WEALTH = 2


def gbm_milstein(s0, b, sigma, dt, z):
    """Milstein step for diagonal-noise GBM, one column per asset.

    S[n+1,i] = S[n,i] * (1 + b_i dt + sigma_i sqrt(dt) z + 0.5 sigma_i^2 (dt z^2 - dt))

    s0, b, sigma are (d,) per-day quantities, z is (m, d) standard normal
    draws.  Returns prices of shape (m+1, d).
    """
    m, d = z.shape
    sqdt = np.sqrt(dt)
    factor = 1.0 + b * dt + sigma * sqdt * z + 0.5 * sigma * sigma * (dt * z * z - dt)
    out = np.empty((m + 1, d))
    out[0] = s0
    out[1:] = s0 * np.cumprod(factor, axis=0)
    return out


def gbm_exact_log(s0, b, sigma, dt, z):
    """Exact lognormal step: S[n+1] = S[n] * exp((b - sigma^2/2) dt + sigma sqrt(dt) z)."""
    m, d = z.shape
    sqdt = np.sqrt(dt)
    g = (b - 0.5 * sigma * sigma) * dt + sigma * sqdt * z
    factor = np.exp(g)
    out = np.empty((m + 1, d))
    out[0] = s0
    out[1:] = s0 * np.cumprod(factor, axis=0)
    return out


def ou_exact(kappa0, kappa_bar, decay, noise_amp, zeta, kappa_min):
    """Exact Ornstein-Uhlenbeck transition with a per-step floor.

    kappa[n+1] = max(kappa_bar + (kappa[n] - kappa_bar) * decay
                     + noise_amp[n] * zeta[n], kappa_min)

    decay = exp(-alpha dt); noise_amp carries eta (with any shock-window
    multiplier) times the stationary step scale.  The floor feeds back into
    the recursion, so the loop is inherently sequential.
    """
    m = zeta.shape[0]
    out = np.empty(m + 1)
    k = float(kappa0)
    out[0] = k
    for n in range(m):
        k = kappa_bar + (k - kappa_bar) * decay + noise_amp[n] * zeta[n]
        if k < kappa_min:
            k = kappa_min
        out[n + 1] = k
    return out


def ledger_evolve(S, mu0, kappa, targets, k, convention, charge_initial):
    """Evolve a buy-and-hold-between-mesh-dates wealth ledger.

    S        : (m+1, d) prices, m divisible by k
    mu0      : (d,) initial market weights
    kappa    : (m+1,) proportional cost per unit l1 turnover
    targets  : (n_reb+1, d) target weights at every mesh date incl. T
    k        : steps per mesh interval
    convention: 0 = drifted (trade from drifted weights), 1 = target
                (charge the forward target-to-target change at t_n)
    charge_initial: 1 to charge kappa_0 * ||pi_0||_1 for the initial buy

    Returns (V, V_mkt, C, turnover, drifted_w, V_pre, status, status_step);
    V_pre[n] is pre-trade wealth at mesh date n.
    """
    m1, d = S.shape
    m = m1 - 1
    n_reb = m // k

    V = np.empty(m + 1)
    V_mkt = np.empty(m + 1)
    C = np.empty(m + 1)
    turnover = np.zeros(n_reb + 1)
    drifted_w = np.empty((n_reb + 1, d))
    V_pre = np.empty(n_reb + 1)

    h_mkt = mu0 / S[0]
    V_mkt[0] = 1.0
    V_mkt[1:] = (h_mkt * S[1:]).sum(axis=1)

    drifted_w[0] = targets[0]
    V_pre[0] = 1.0
    turn0 = 0.0
    if charge_initial:
        turn0 += np.abs(targets[0]).sum()
    if convention == 1 and n_reb >= 1:
        turn0 += np.abs(targets[1] - targets[0]).sum()
    x0 = kappa[0] * turn0
    if x0 >= 1.0:
        return V, V_mkt, C, turnover, drifted_w, V_pre, LEDGER_COST_EXCEEDS_WEALTH, 0
    v = 1.0 - x0
    c = kappa[0] * turn0
    V[0] = v
    C[0] = c
    turnover[0] = turn0
    h = v * targets[0] / S[0]

    for n in range(1, n_reb + 1):
        lo, hi = (n - 1) * k + 1, n * k + 1
        vals = (h * S[lo:hi]).sum(axis=1)
        V[lo:hi] = vals
        C[lo:hi] = c
        v = vals[-1]
        if not v > 0.0:
            return V, V_mkt, C, turnover, drifted_w, V_pre, LEDGER_NONPOSITIVE_WEALTH, n * k
        V_pre[n] = v
        drifted_w[n] = h * S[n * k] / v
        if n < n_reb:
            if convention == 1:
                turn = np.abs(targets[n + 1] - targets[n]).sum()
            else:
                turn = np.abs(targets[n] - drifted_w[n]).sum()
            x = kappa[n * k] * turn
            if x >= 1.0:
                return V, V_mkt, C, turnover, drifted_w, V_pre, LEDGER_COST_EXCEEDS_WEALTH, n * k
            v = v * (1.0 - x)
            c = c + kappa[n * k] * turn
            V[n * k] = v
            C[n * k] = c
            turnover[n] = turn
            h = v * targets[n] / S[n * k]

    return V, V_mkt, C, turnover, drifted_w, V_pre, LEDGER_OK, -1
