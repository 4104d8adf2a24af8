"""Pathwise audit of the cost-adjusted wealth decomposition.

For a strategy holding weights pi_n over the no-trade interval
(t_n, t_{n+1}) the relative return against the buy-and-hold market satisfies
the exact identity

    log(V_{t_{n+1}-} / V_{t_n})  -  log(V^mkt_{t_{n+1}} / V^mkt_{t_n})
        = log( sum_i pi_n,i * mu_{n+1,i} / mu_n,i ).

Splitting each interval term into the generator ratio log G(mu_{n+1}) /
G(mu_n) plus a divergence remainder L_n and telescoping over mesh dates
gives

    log(V_T / V^mkt_T) = log(G(mu_T)/G(mu_0)) + sum_n L_n + sum_n log(1 - x_n),

with x_n = kappa_{t_n} * turnover_n the cost fraction per trade.  The audit
evaluates every term from its own source (ledger wealth on the left;
generator values and weight ratios on the right), reports

    slack = lhs - (g_term + drift_integral - C_T),

and asserts slack >= -tol_quad.  sum_n L_n is the mesh-exact evaluation of
the drift term (its fine-mesh limit is the usual excess-growth integral);
the reported error estimate is the drift sum's sensitivity to doubled mesh
spacing (step-halving) plus the exactly computable cost-linearization
remainder sum x_n^2 / (2(1-x_n)), which bounds the gap between the rhs's
-C_T and the exact log cost sum log(1-x_n).  Because log(1-x) <= -x, a
correct ledger lands in [-tol_quad, ~0] and any accounting error surfaces
as a violation.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, GridMismatchError
from .generators import GeneratorSpec, excess_growth_pairwise, log_value_on_path
from .ledger import WealthLedger

SLACK_ABS_TOL = 1e-8


@dataclass
class MasterReport:
    """All terms of the audited inequality for one path."""

    lhs: float                    # log(V_T / V_mkt_T)
    g_term: float                 # log(G(mu_T) / G(mu_0))
    drift_integral: float         # mesh-exact divergence sum
    cost_term: float              # C_T
    rhs: float
    slack: float
    D_T: float                    # integral of pairwise excess growth
    quadrature_err_estimate: float
    n_intervals: int
    convention: str

    @property
    def tol_quad(self):
        return self.quadrature_err_estimate + SLACK_ABS_TOL

    @property
    def holds(self):
        return self.slack >= -self.tol_quad

    def csv_row(self):
        return [repr(float(v)) for v in
                (self.lhs, self.g_term, self.drift_integral, self.cost_term,
                 self.slack, self.D_T)]


REPORT_CSV_HEADER = ["lhs", "g_term", "drift_integral", "cost_term", "slack", "D_T"]


def _divergence_sum(pi_rows, mu_rows, log_g):
    """sum_n [log(sum_i pi_n,i mu_{n+1,i}/mu_n,i) - (log G_{n+1} - log G_n)]."""
    ratios = (pi_rows * (mu_rows[1:] / mu_rows[:-1])).sum(axis=1)
    if (ratios <= 0).any():
        raise DomainError("non-positive portfolio return ratio in divergence sum")
    return float((np.log(ratios) - np.diff(log_g)).sum())


def pairwise_growth_series(weights, times):
    """Cumulative trapezoid of the pairwise excess growth rate: D_t."""
    g = excess_growth_pairwise(np.asarray(weights, dtype=float))
    dt_steps = np.diff(times)
    inc = 0.5 * (g[1:] + g[:-1]) * dt_steps
    return np.concatenate([[0.0], np.cumsum(inc)])


def audit_path(market, ledger: WealthLedger, G: GeneratorSpec) -> MasterReport:
    """Compute every term of the inequality on one realized path."""
    if ledger.V.shape[0] != market.n_steps + 1:
        raise GridMismatchError(
            f"ledger has {ledger.V.shape[0]} grid points, market has {market.n_steps + 1}")
    G.hessian(market.weights[0])  # generator must be twice differentiable

    mesh = ledger.mesh_indices
    mu_mesh = market.weights[mesh]
    log_g = log_value_on_path(G, mu_mesh)
    pi_held = ledger.target_weights[:-1]

    drift = _divergence_sum(pi_held, mu_mesh, log_g)
    g_term = float(log_g[-1] - log_g[0])
    lhs = float(np.log(ledger.V[-1] / ledger.V_mkt[-1]))
    cost_term = float(ledger.C[-1])
    rhs = g_term + drift - cost_term

    n_reb = ledger.n_rebalances
    if n_reb >= 2:
        coarse = list(range(0, n_reb + 1, 2))
        if coarse[-1] != n_reb:
            coarse.append(n_reb)
        coarse = np.asarray(coarse)
        drift_coarse = _divergence_sum(ledger.target_weights[coarse[:-1]],
                                       mu_mesh[coarse], log_g[coarse])
        quad_err = abs(drift - drift_coarse) / 3.0
    else:
        quad_err = 0.0
    # rhs carries -C_T, a first-order proxy for the exact log cost
    # sum log(1 - x_n); add the linearization remainder bound to the estimate
    x = ledger.kappa_at_rebalance * ledger.turnover
    quad_err += float((x * x / (2.0 * (1.0 - x))).sum())

    D = pairwise_growth_series(market.weights, market.times)
    return MasterReport(
        lhs=lhs, g_term=g_term, drift_integral=drift, cost_term=cost_term,
        rhs=rhs, slack=lhs - rhs, D_T=float(D[-1]),
        quadrature_err_estimate=float(quad_err), n_intervals=int(n_reb),
        convention=ledger.convention)


@dataclass
class DriftCheck:
    """Both sides of the claimed diversity drift identity, reported not asserted."""

    hessian_form_integral: float   # trapezoid of 1/2 sum (d2 G_p / G_p) mu mu tau
    pairwise_form_integral: float  # (1 - p) * integral of pairwise gamma*
    ratio: float


def diversity_drift_check(market, p) -> DriftCheck:
    """Evaluate the Hessian-contraction drift of G_p = sum mu^p against
    (1-p) * integral gamma*_pairwise dt on one path.  The two disagree for
    this G_p (different sign and scale); the discrepancy is diagnostic output."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    w = market.weights
    s2 = np.diag(market.tau)
    gp = (w ** p).sum(axis=1)
    hess_integrand = 0.5 * p * (p - 1.0) * (w ** p * s2).sum(axis=1) / gp
    hess_int = float(np.trapezoid(hess_integrand, market.times))
    pair_int = float((1.0 - p) * np.trapezoid(excess_growth_pairwise(w), market.times))
    ratio = hess_int / pair_int if pair_int != 0.0 else float("nan")
    return DriftCheck(hessian_form_integral=hess_int,
                      pairwise_form_integral=pair_int, ratio=ratio)


@dataclass
class CostScalingFit:
    """Scaling-law fits of expected cumulative cost across (delta, T) cells."""

    K_hat: float                  # E[C_T] ~ K * T / sqrt(delta), through origin
    r2_mesh_law: float
    fixed_delta: float            # delta used for the T-scaling fits below
    sqrt_c: float                 # E[C_T] ~ c * sqrt(T)
    r2_sqrt: float
    r2_linear: float
    power_exponent: float         # free log-log slope of E[C_T] vs T
    mesh_exponent: float          # log-log slope of E[C_T] vs delta at fixed T
    degenerate: bool              # all-zero costs


def _r2(y, pred):
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float(((y - pred) ** 2).sum())
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


def cost_bound_diagnostic(samples, min_per_cell=100) -> CostScalingFit:
    """Fit cost scaling laws over Monte-Carlo cells.

    ``samples`` maps (delta, T) -> array of per-path terminal costs C_T.
    Each cell needs at least ``min_per_cell`` entries.
    """
    if not samples:
        raise ConfigError("no cost samples given")
    cells = {}
    for (delta, T), vals in samples.items():
        vals = np.asarray(vals, dtype=float)
        if vals.shape[0] < min_per_cell:
            raise ConfigError(
                f"cell (delta={delta}, T={T}) has {vals.shape[0]} ledgers, "
                f"needs >= {min_per_cell}")
        cells[(float(delta), float(T))] = float(vals.mean())

    deltas = np.array([k[0] for k in cells])
    Ts = np.array([k[1] for k in cells])
    means = np.array([cells[k] for k in cells])

    if np.all(means == 0.0):
        return CostScalingFit(K_hat=0.0, r2_mesh_law=1.0, fixed_delta=float(deltas[0]),
                              sqrt_c=0.0, r2_sqrt=1.0, r2_linear=1.0,
                              power_exponent=float("nan"), mesh_exponent=float("nan"),
                              degenerate=True)

    x = Ts / np.sqrt(deltas)
    K_hat = float((x * means).sum() / (x * x).sum())
    r2_mesh = _r2(means, K_hat * x)

    # T-scaling at the delta with the most distinct horizons
    best_delta = max(set(deltas), key=lambda d: len(set(Ts[deltas == d])))
    sel = deltas == best_delta
    Tsel, ysel = Ts[sel], means[sel]
    order = np.argsort(Tsel)
    Tsel, ysel = Tsel[order], ysel[order]
    xs = np.sqrt(Tsel)
    sqrt_c = float((xs * ysel).sum() / (xs * xs).sum())
    r2_sqrt = _r2(ysel, sqrt_c * xs)
    a_lin = float((Tsel * ysel).sum() / (Tsel * Tsel).sum())
    r2_lin = _r2(ysel, a_lin * Tsel)
    if len(Tsel) >= 2 and (ysel > 0).all():
        power_exponent = float(np.polyfit(np.log(Tsel), np.log(ysel), 1)[0])
    else:
        power_exponent = float("nan")

    # mesh scaling at the T with the most distinct deltas
    best_T = max(set(Ts), key=lambda t: len(set(deltas[Ts == t])))
    selt = Ts == best_T
    dsel, ydel = deltas[selt], means[selt]
    if len(set(dsel)) >= 2 and (ydel > 0).all():
        mesh_exponent = float(np.polyfit(np.log(dsel), np.log(ydel), 1)[0])
    else:
        mesh_exponent = float("nan")

    return CostScalingFit(K_hat=K_hat, r2_mesh_law=r2_mesh, fixed_delta=float(best_delta),
                          sqrt_c=sqrt_c, r2_sqrt=r2_sqrt, r2_linear=r2_lin,
                          power_exponent=power_exponent, mesh_exponent=mesh_exponent,
                          degenerate=False)


def mesh_threshold_estimate(eps, K_hat):
    """Break-even mesh estimate (eps / (2 K_hat))^2."""
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    if not K_hat > 0:
        raise DomainError(f"K_hat must be > 0, got {K_hat}")
    return (eps / (2.0 * K_hat)) ** 2


def estimate_diversity_floor(gamma_values, quantile=5.0):
    """Default diversity floor: the 5th percentile of pathwise excess growth."""
    vals = np.asarray(gamma_values, dtype=float)
    if vals.size == 0:
        raise DomainError("need at least one excess-growth value")
    return float(np.percentile(vals, quantile))
