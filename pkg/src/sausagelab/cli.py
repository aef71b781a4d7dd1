"""Command-line entry point.

Subcommands cover the pipeline stages individually (simulate, persistence,
regen) and end to end (clt, report). Data goes to files under the output
directory; progress and warnings go to standard error. Every command writes
a manifest listing each emitted file with its checksum.

Exit codes: 0 success, 2 invalid configuration, 3 resource limit exceeded,
4 check failure when --check is given.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .artifacts import (RunManifest, load_report_dict, write_betti_average_csv,
                        write_betti_csv, write_cycles_csv, write_eta_tail_csv,
                        write_lags_csv, write_pairs_csv, write_paths_csv,
                        write_qq_csv, write_r2_csv, write_renewal_csv,
                        write_report_json, write_z_samples_csv)
from .config import ExperimentConfig, load_config
from .errors import (InvalidParameterError, ResourceLimitError,
                     SeedOverlapError)
from .experiment import clt_experiment
from .paths import resample_to_spacing, simulate_path
from .regeneration import detect_regenerations, extract_cycles
from .topology import betti_curve, build_alpha_complex, persistence_deg1

logger = logging.getLogger("sausagelab")

CHECK_IDENTITY_TOL = 1e-9


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.out is not None:
        cfg.out_dir = args.out
    if args.workers is not None:
        cfg.workers = args.workers
    if getattr(args, "surrogate", False):
        cfg.surrogate = True
    if args.seed_override is not None:
        cfg.seed_calibration = args.seed_override
        cfg.seed_evaluation = args.seed_override + 1
    cfg.validate()
    return cfg


def _eval_paths(cfg: ExperimentConfig):
    """Evaluation-stream replicas: raw path plus its spacing-resampled form."""
    for i in range(cfg.n_evaluation):
        path = simulate_path(cfg.drift(), cfg.horizon(), cfg.dt,
                             cfg.seed_evaluation, i)
        yield i, path, resample_to_spacing(path, cfg.max_spacing)


def cmd_simulate(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    manifest = RunManifest(cfg.config_hash(), out)
    t0 = time.time()
    for i, _path, res in _eval_paths(cfg):
        if cfg.store_paths:
            f = out / f"path_{i:04d}.csv"
            write_paths_csv(f, res.times, res.points)
            manifest.add(f)
        else:
            logger.info("replica %d generated (%d points, storage disabled)",
                        i, res.points.shape[0])
    manifest.time("simulate", time.time() - t0)
    manifest.write()
    logger.info("wrote %d path files to %s", len(manifest.files), out)
    return 0


def _read_points_csv(path_file) -> np.ndarray:
    """Point cloud from CSV: t,x,y path files or plain x,y tables."""
    rows = np.genfromtxt(path_file, delimiter=",", names=True)
    names = rows.dtype.names
    if names is None or len(names) < 2:
        raise InvalidParameterError(
            f"{path_file}: expected a header row with x,y or t,x,y columns")
    got = {n.lower(): n for n in names}
    if "x" in got and "y" in got:
        return np.column_stack([rows[got["x"]], rows[got["y"]]])
    raise InvalidParameterError(
        f"{path_file}: no x,y columns in header {names}")


def cmd_persistence(cfg: ExperimentConfig, points_file=None) -> int:
    out = Path(cfg.out_dir)
    manifest = RunManifest(cfg.config_hash(), out)
    window = cfg.window()
    t0 = time.time()
    if points_file is not None:
        clouds = [("input", _read_points_csv(points_file))]
    else:
        clouds = []
        for i, _path, res in _eval_paths(cfg):
            clouds.append((f"{i:04d}", res.points))
    for tag, pts in clouds:
        cx = build_alpha_complex(pts)
        pairs = persistence_deg1(cx)
        curve = betti_curve(pairs, window)
        fp = out / f"pairs_{tag}.csv"
        fb = out / f"betti_{tag}.csv"
        write_pairs_csv(fp, pairs)
        write_betti_csv(fb, curve)
        manifest.add(fp)
        manifest.add(fb)
    manifest.time("persistence", time.time() - t0)
    manifest.write()
    logger.info("persistence artifacts for %d clouds in %s", len(clouds), out)
    return 0


def cmd_regen(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    manifest = RunManifest(cfg.config_hash(), out)
    weights = cfg.weights()
    t0 = time.time()
    for i, path, res in _eval_paths(cfg):
        regen = detect_regenerations(path, cfg.regen_params())
        cycles = extract_cycles(res, regen, weights, cfg.window(),
                                osc_grid=cfg.osc_grid)
        f = out / f"cycles_{i:04d}.csv"
        write_cycles_csv(f, cycles, [w.name for w in weights])
        manifest.add(f)
    manifest.time("regen", time.time() - t0)
    manifest.write()
    logger.info("cycle tables for %d replicas in %s", cfg.n_evaluation, out)
    return 0


def cmd_clt(cfg: ExperimentConfig, check: bool = False) -> int:
    out = Path(cfg.out_dir)
    manifest = RunManifest(cfg.config_hash(), out)
    t0 = time.time()
    report = clt_experiment(cfg)
    manifest.time("clt", time.time() - t0)

    t0 = time.time()
    files = {
        "report.json": lambda f: write_report_json(f, report),
        "z_samples.csv": lambda f: write_z_samples_csv(
            f, report.weight_names, report.z_samples),
        "renewal.csv": lambda f: write_renewal_csv(
            f, report.weight_names, report.renewal_table),
        "lags.csv": lambda f: write_lags_csv(f, report.lag_rows),
    }
    for name, writer in files.items():
        f = out / name
        writer(f)
        manifest.add(f)

    # companion cycle table from the first calibration replica, with the
    # within-cycle oscillation columns included
    if not cfg.surrogate:
        path = simulate_path(cfg.drift(), cfg.calibration_horizon, cfg.dt,
                             cfg.seed_calibration, 0)
        regen = detect_regenerations(path, cfg.regen_params())
        res = resample_to_spacing(path, cfg.max_spacing)
        cycles = extract_cycles(res, regen, cfg.weights(), cfg.window(),
                                osc_grid=cfg.osc_grid)
        cycles = cycles[:cfg.calibration_cycles]
    else:
        from .surrogate import simulate_surrogate_replica
        rep = simulate_surrogate_replica(cfg.seed_calibration, 0,
                                         cfg.surrogate_calibration_t,
                                         cfg.surrogate_rho)
        cycles = rep.cycle_records(200)
    f = out / "cycles.csv"
    write_cycles_csv(f, cycles, list(report.weight_names))
    manifest.add(f)
    manifest.time("artifacts", time.time() - t0)
    manifest.write()

    for j, w in enumerate(report.weight_names):
        logger.info("weight %-10s rho=%.6g sigma_psi2=%.6g ks=%.4f",
                    w, report.rho_hat[j], report.sigma_psi2[j], report.ks[j])
    if not check:
        return 0
    failures = []
    ks_ref = report.ks_exact if report.ks_exact is not None else report.ks
    for j, w in enumerate(report.weight_names):
        if ks_ref[j] > cfg.check_ks_max:
            failures.append(f"KS for weight {w}: {ks_ref[j]:.4f} > "
                            f"{cfg.check_ks_max}")
    if report.telescope_residual > CHECK_IDENTITY_TOL:
        failures.append(f"telescope residual {report.telescope_residual:.3g}")
    if report.centering_residual > CHECK_IDENTITY_TOL:
        failures.append(f"centering residual {report.centering_residual:.3g}")
    if report.decomposition_residual > CHECK_IDENTITY_TOL * max(1.0, report.t):
        failures.append(
            f"decomposition residual {report.decomposition_residual:.3g}")
    if not report.psd_ok:
        failures.append(f"covariance not PSD (min eig {report.min_eigenvalue:.3g})")
    for msg in failures:
        logger.error("check failed: %s", msg)
    if failures:
        return 4
    logger.info("all checks passed (ks_max=%.4f <= %.4f)",
                float(np.max(ks_ref)), cfg.check_ks_max)
    return 0


def cmd_report(cfg: ExperimentConfig, report_file) -> int:
    out = Path(cfg.out_dir)
    rep = load_report_dict(report_file)
    manifest = RunManifest(cfg.config_hash(), out)
    t0 = time.time()
    weight_names = list(rep["weight_names"])
    z = np.asarray(rep["z_samples"], dtype=np.float64)
    if z.size == 0:
        z = z.reshape(0, len(weight_names))
    sig2 = np.asarray(rep["sigma_psi2"], dtype=np.float64)

    f = out / "qq.csv"
    write_qq_csv(f, weight_names, z, sig2)
    manifest.add(f)

    f = out / "r2.csv"
    write_r2_csv(f, weight_names, rep.get("renewal_table", []))
    manifest.add(f)

    f = out / "eta_tail.csv"
    write_eta_tail_csv(f, rep.get("eta_tail_grid", []),
                       rep.get("eta_tail_surv", []))
    manifest.add(f)

    # Betti-curve average over a prefix of the evaluation stream; skipped in
    # surrogate mode where no geometry exists
    f = out / "betti_avg.csv"
    if rep.get("surrogate"):
        write_betti_average_csv(f, [], [], 0)
    else:
        n_avg = min(20, cfg.n_evaluation)
        window = cfg.window()
        grid = np.linspace(window.r0, window.r1, 64)
        acc = np.zeros(grid.size)
        for i in range(n_avg):
            path = simulate_path(cfg.drift(), cfg.t, cfg.dt,
                                 cfg.seed_evaluation, i)
            res = resample_to_spacing(path, cfg.max_spacing)
            pairs = persistence_deg1(build_alpha_complex(res.points))
            curve = betti_curve(pairs, window)
            acc += [curve.value_at(r) for r in grid]
        write_betti_average_csv(f, grid, acc / max(n_avg, 1), n_avg)
    manifest.add(f)
    manifest.time("report", time.time() - t0)
    manifest.write()
    logger.info("plot tables written to %s", out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sausagelab",
        description="Persistence and renewal statistics of drifted planar "
                    "Brownian sausages.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML config file")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--workers", type=int, default=None,
                       help="worker process count override")
        p.add_argument("--seed-override", type=int, default=None,
                       help="replace master seeds: calibration gets this "
                            "value, evaluation gets it plus one")

    p = sub.add_parser("simulate", help="generate and store replica paths")
    common(p)

    p = sub.add_parser("persistence",
                       help="persistence pairs and Betti curves per replica")
    common(p)
    p.add_argument("--points-file", default=None,
                   help="run on one point cloud from a CSV instead of "
                        "simulated replicas")

    p = sub.add_parser("regen", help="regeneration cycle tables per replica")
    common(p)

    p = sub.add_parser("clt", help="full calibration + evaluation experiment")
    common(p)
    p.add_argument("--surrogate", action="store_true",
                   help="use the known-limit surrogate process")
    p.add_argument("--check", action="store_true",
                   help="verify KS and identity thresholds; exit 4 on failure")

    p = sub.add_parser("report", help="plot-ready CSV tables from a report")
    common(p)
    p.add_argument("--report", default=None,
                   help="report JSON path (default: <out>/report.json)")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "persistence":
            return cmd_persistence(cfg, points_file=args.points_file)
        if args.command == "regen":
            return cmd_regen(cfg)
        if args.command == "clt":
            return cmd_clt(cfg, check=args.check)
        if args.command == "report":
            report_file = args.report or Path(cfg.out_dir) / "report.json"
            return cmd_report(cfg, report_file)
        parser.error(f"unknown command {args.command}")
    except (InvalidParameterError, SeedOverlapError) as exc:
        logger.error("invalid configuration: %s", exc)
        return 2
    except ResourceLimitError as exc:
        logger.error("resource limit: %s", exc)
        return 3
    except OSError as exc:
        logger.error("I/O failure: %s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
