#!/usr/bin/env python3
"""Run the full pipeline for one config: clt experiment, check, plot tables.

Usage:
    python3 scripts/run_experiment.py configs/smoke.toml [--workers N]

Equivalent to `sausagelab clt --check` followed by `sausagelab report`,
with a one-screen summary printed at the end.
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from sausagelab import cli  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config", help="TOML experiment file")
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default=None)
    ap.add_argument("--no-check", action="store_true",
                    help="skip the KS/identity gate")
    args = ap.parse_args()

    flags = ["--config", args.config]
    if args.workers is not None:
        flags += ["--workers", str(args.workers)]
    if args.out is not None:
        flags += ["--out", args.out]

    rc = cli.main(["clt", *flags] + ([] if args.no_check else ["--check"]))
    if rc not in (0, 4):
        return rc
    rc_report = cli.main(["report", *flags])
    if rc_report != 0:
        return rc_report

    out_dir = args.out
    if out_dir is None:
        from sausagelab.config import load_config
        out_dir = load_config(args.config).out_dir
    report = json.loads((Path(out_dir) / "report.json").read_text())
    print()
    print(f"report: {Path(out_dir) / 'report.json'}")
    print(f"{'weight':<12} {'rho':>10} {'sigma2':>10} {'KS':>8} {'z mean':>8}")
    for j, name in enumerate(report["weight_names"]):
        print(f"{name:<12} {report['rho_hat'][j]:>10.5f} "
              f"{report['sigma_psi2'][j]:>10.5f} {report['ks'][j]:>8.4f} "
              f"{report['z_mean'][j]:>8.4f}")
    print(f"KS threshold {report['ks_threshold']:.4f}   "
          f"psd_ok {report['psd_ok']}   "
          f"eta_mean {report['eta_mean']:.4f}")
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
