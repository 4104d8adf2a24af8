"""Command-line interface.

Commands map one-to-one to the reproduction artifacts:

  simulate    mean/sd curves, terminal density, quantile fan, per-path audits
              -> summary.csv terminals.csv reports.csv manifest.json
  sweep       terminal edge per rebalancing mesh -> sweep.csv manifest.json
  audit       per-path inequality audit with a violations count -> reports.csv
  backtest    panel pipeline -> report.json curves.csv manifest.json
  make-panel  bundled synthetic panel generator -> CSV in the panel contract

Exit codes: 0 success, 1 audit violations, 2 usage/config error, 3 runtime
error.  Override precedence for seed/paths/threads: config < environment
(FGPSIM_SEED, FGPSIM_PATHS, FGPSIM_THREADS) < flag.
"""
import argparse
import csv
import datetime
import hashlib
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .audit import REPORT_CSV_HEADER
from .backtest import export_panel, load_panel, make_synthetic_panel, run_backtest
from .config import (backtest_options, experiment_from_file, parse_generator,
                     read_config_file)
from .errors import ConfigError, FgpsimError
from .harness import mesh_sweep, run_experiment


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _env_int(name):
    raw = os.environ.get(name)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"environment variable {name} must be an integer, got {raw!r}")


def _resolve(config_value, env_name, flag_value):
    value = config_value
    env = _env_int(env_name)
    if env is not None:
        value = env
    if flag_value is not None:
        value = flag_value
    return value


def _write_manifest(out_dir, command, config_path, seed, n_paths, threads, files):
    manifest = {
        "command": command,
        "config": str(config_path) if config_path else None,
        "config_sha256": _sha256(config_path) if config_path else None,
        "master_seed": seed,
        "n_paths": n_paths,
        "threads": threads,
        "fgpsim_version": __version__,
        "python": sys.version.split()[0],
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": [{"name": f.name, "sha256": _sha256(f), "bytes": f.stat().st_size}
                    for f in files],
    }
    path = out_dir / "manifest.json"
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def _load_experiment(args):
    cfg, threads, bt_options = experiment_from_file(args.config)
    seed = _resolve(cfg.master_seed, "FGPSIM_SEED", args.seed)
    n_paths = _resolve(cfg.n_paths, "FGPSIM_PATHS", args.paths)
    threads = _resolve(threads, "FGPSIM_THREADS", args.threads)
    cfg = replace(cfg, master_seed=seed, n_paths=n_paths)
    return cfg, threads, bt_options


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_summary_csv(path, summary):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["step", "time", "mean_logrel", "sd_logrel",
                    "q10", "q25", "q75", "q90", "mean_cost"])
        for n in range(summary.times.shape[0]):
            w.writerow([n, repr(float(summary.times[n])),
                        repr(float(summary.mean_logrel[n])),
                        repr(float(summary.sd_logrel[n])),
                        repr(float(summary.quantiles[10][n])),
                        repr(float(summary.quantiles[25][n])),
                        repr(float(summary.quantiles[75][n])),
                        repr(float(summary.quantiles[90][n])),
                        repr(float(summary.mean_cost[n]))])


def _write_terminals_csv(path, summary):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["path", "terminal_logrel", "terminal_cost"])
        for i in range(summary.terminal_logrel.shape[0]):
            w.writerow([i, repr(float(summary.terminal_logrel[i])),
                        repr(float(summary.terminal_cost[i]))])


def _write_reports_csv(path, summary):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["path"] + REPORT_CSV_HEADER)
        for i, rep in enumerate(summary.reports):
            w.writerow([i] + rep.csv_row())


def cmd_simulate(args):
    cfg, threads, _ = _load_experiment(args)
    out = _out_dir(args)
    summary = run_experiment(cfg, threads=threads)
    files = [out / "summary.csv", out / "terminals.csv", out / "reports.csv"]
    _write_summary_csv(files[0], summary)
    _write_terminals_csv(files[1], summary)
    _write_reports_csv(files[2], summary)
    _write_manifest(out, "simulate", args.config, cfg.master_seed, cfg.n_paths,
                    threads, files)
    cross = summary.crossing_day
    print(f"simulate: {cfg.n_paths} paths, terminal mean "
          f"{summary.terminal['mean']:+.6f}, frac_positive "
          f"{summary.terminal['frac_positive']:.3f}, crossing_day "
          f"{'none' if cross is None else cross:}, excluded {summary.n_excluded}")
    return 0


def cmd_sweep(args):
    cfg, threads, _ = _load_experiment(args)
    try:
        meshes = [float(x) for x in args.mesh.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--mesh must be a comma-separated number list, got {args.mesh!r}")
    if not meshes:
        raise ConfigError("--mesh list is empty")
    out = _out_dir(args)
    rows = mesh_sweep(cfg, meshes, threads=threads)
    path = out / "sweep.csv"
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["delta", "edge_bp", "mean_terminal_logrel", "mean_cost", "n_paths"])
        for r in rows:
            w.writerow([repr(r.delta), repr(r.edge_bp), repr(r.mean_terminal_logrel),
                        repr(r.mean_cost), r.n_paths])
    _write_manifest(out, "sweep", args.config, cfg.master_seed, cfg.n_paths,
                    threads, [path])
    for r in rows:
        print(f"sweep: delta={r.delta:g} edge={r.edge_bp:+.1f} bp")
    return 0


def _corrupt_ledger(led):
    """Test hook: shave wealth without booking the cost, so audits must fail."""
    bp = float(os.environ.get("FGPSIM_AUDIT_CORRUPT_BP", "0"))
    led.V[-1] = led.V[-1] * (1.0 - bp / 1e4)
    return led


def cmd_audit(args):
    cfg, threads, _ = _load_experiment(args)
    out = _out_dir(args)
    hook = _corrupt_ledger if os.environ.get("FGPSIM_AUDIT_CORRUPT_BP") else None
    summary = run_experiment(cfg, threads=threads, ledger_hook=hook)
    path = out / "reports.csv"
    _write_reports_csv(path, summary)
    _write_manifest(out, "audit", args.config, cfg.master_seed, cfg.n_paths,
                    threads, [path])
    n = len(summary.reports)
    k = summary.n_violations
    print(f"master inequality violations: {k}/{n}")
    max_abs_slack = max(abs(r.slack) for r in summary.reports)
    print(f"max |slack| {max_abs_slack:.3e}; excluded paths {summary.n_excluded}")
    return 1 if k > 0 else 0


def cmd_backtest(args):
    raw = read_config_file(args.config) if args.config else {}
    G = parse_generator(raw.get("generator", {}))
    bt_options = backtest_options(raw.get("backtest", {}))
    out = _out_dir(args)
    panel = load_panel(args.panel,
                       max_spread_bps=bt_options.get("max_spread_bps", 500.0),
                       max_missing_frac=bt_options.get("max_missing_frac", 0.05))
    report = run_backtest(panel, G, subperiods=bt_options.get("subperiods") or None)
    files = [out / "report.json", out / "curves.csv"]
    report.to_json(files[0])
    report.curves_to_csv(files[1])
    _write_manifest(out, "backtest", args.config, None, None, None, files)
    print(f"backtest: gross {report.gross_cagr:+.4%} net {report.net_cagr:+.4%} "
          f"benchmark {report.benchmark_cagr:+.4%} max_dd {report.max_dd:.2%}")
    return 0


def cmd_make_panel(args):
    panel = make_synthetic_panel(n_assets=args.assets, n_years=args.years,
                                 seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    export_panel(panel, out)
    print(f"make-panel: wrote {panel.n_dates} days x {panel.n_assets} assets to {out}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="fgpsim",
                                description="Rebalanced generator portfolios under "
                                            "stochastic proportional trading costs")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="TOML or JSON experiment config")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="master seed override")
        sp.add_argument("--paths", type=int, default=None, help="path count override")
        sp.add_argument("--threads", type=int, default=None, help="worker processes")

    sp = sub.add_parser("simulate", help="Monte-Carlo experiment curves and terminals")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="terminal edge per rebalancing mesh")
    common(sp)
    sp.add_argument("--mesh", required=True, help="comma-separated mesh list, days")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("audit", help="pathwise inequality audit")
    common(sp)
    sp.set_defaults(func=cmd_audit)

    sp = sub.add_parser("backtest", help="panel backtest")
    sp.add_argument("--panel", required=True, help="panel CSV path")
    sp.add_argument("--config", default=None, help="config with [generator]/[backtest]")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_backtest)

    sp = sub.add_parser("make-panel", help="write a synthetic demo panel")
    sp.add_argument("--out", required=True)
    sp.add_argument("--assets", type=int, default=30)
    sp.add_argument("--years", type=int, default=10)
    sp.add_argument("--seed", type=int, default=9)
    sp.set_defaults(func=cmd_make_panel)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"fgpsim: config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"fgpsim: {exc}", file=sys.stderr)
        return 2
    except FgpsimError as exc:
        print(f"fgpsim: runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
