"""fgpsim: functionally generated portfolios under stochastic proportional
trading costs - simulation engine, pathwise inequality audit, Monte-Carlo
harness, and a panel backtest."""

__version__ = "0.1.0"

from .audit import (CostScalingFit, DriftCheck, MasterReport, audit_path,
                    cost_bound_diagnostic, diversity_drift_check,
                    estimate_diversity_floor, mesh_threshold_estimate)
from .backtest import (BacktestReport, PricePanel, export_panel, load_panel,
                       make_synthetic_panel, performance_metrics, run_backtest,
                       subperiod_decomposition)
from .costs import CostConfig, CostPath, shock_scenario, simulate_cost
from .errors import (ConfigError, CostExceedsWealthError, DomainError,
                     ExperimentError, FgpsimError, GridMismatchError, PathAbort)
from .generators import (GeneratorSpec, constant_generator, custom_generator,
                         diversity_generator, diversity_weights, entropy_generator,
                         entropy_weights, excess_growth_classical,
                         excess_growth_pairwise, fgp_weights,
                         gibbs_entropy_generator, tangent_hessian_max_eig)
from .harness import (McConfig, McSummary, MeshRow, SqrtFit, crossing_day,
                      mesh_sweep, run_experiment, sqrt_fit, terminal_density_stats)
from .kernels import backend as kernel_backend
from .ledger import (RebalanceSchedule, WealthLedger, cumulative_cost,
                     run_strategy)
from .market import (MarketConfig, MarketPath, instantaneous_cov,
                     market_weights, simulate_market)
from .seeding import path_seeds
