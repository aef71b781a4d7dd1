"""File artifacts: CSV tables, the report JSON, and the run manifest.

Every writer formats floats with 17 significant digits so a value survives
a write/read round trip bit for bit. Report JSON is rendered with sorted
keys and no timestamps, so identical configs produce identical bytes; the
manifest is the one file that carries wall-clock timings and is therefore
excluded from the byte-determinism guarantee (its checksum entries for the
other files are still deterministic).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import platform
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from . import __version__
from .topology import BettiCurve, PersistencePairs

SCHEMA_VERSION = 1

__all__ = ["SCHEMA_VERSION", "RunManifest", "fmt", "sha256_file",
           "write_paths_csv", "write_pairs_csv", "write_betti_csv",
           "write_observables_csv", "write_cycles_csv",
           "report_to_dict", "write_report_json", "load_report_dict",
           "write_z_samples_csv", "write_renewal_csv", "write_lags_csv",
           "write_qq_csv", "write_betti_average_csv", "write_r2_csv",
           "write_eta_tail_csv"]


def fmt(x) -> str:
    """Render one scalar for CSV output (17 significant digits)."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return "%.17g" % float(x)


def _write_rows(path, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# CSV tables

def write_paths_csv(path_file, times: np.ndarray, points: np.ndarray) -> None:
    """Path samples as t,x,y rows."""
    _write_rows(path_file, ["t", "x", "y"],
                zip(times, points[:, 0], points[:, 1]))


def write_pairs_csv(path_file, pairs: PersistencePairs) -> None:
    """Degree-one persistence pairs as birth,death rows."""
    _write_rows(path_file, ["birth", "death"],
                zip(pairs.births, pairs.deaths))


def write_betti_csv(path_file, curve: BettiCurve) -> None:
    """Betti curve in breakpoint representation: value from r onward."""
    _write_rows(path_file, ["r", "beta1"],
                zip(curve.breakpoints, curve.values))


def write_observables_csv(path_file, samples, weight_names) -> None:
    """ObservableSample batch with one row per sample."""
    header = (["t"] + ["phi_%s" % w for w in weight_names]
              + ["h", "area", "seed", "dt", "max_spacing"])
    rows = []
    for s in samples:
        rows.append([s.t] + [s.phi[w] for w in weight_names]
                    + [s.h, s.area_r1, s.seed, s.dt, s.max_spacing])
    _write_rows(path_file, header, rows)


def write_cycles_csv(path_file, cycles, weight_names) -> None:
    """Cycle records with per-weight increment and oscillation columns."""
    header = (["n", "tau_n", "tau_np1", "eta"]
              + ["delta_%s" % w for w in weight_names]
              + ["m_%s" % w for w in weight_names] + ["complete"])
    rows = []
    for c in cycles:
        rows.append([c.index, c.tau_n, c.tau_np1, c.eta]
                    + [c.delta[w] for w in weight_names]
                    + [c.m_osc.get(w, float("nan")) for w in weight_names]
                    + [True])
    _write_rows(path_file, header, rows)


# ---------------------------------------------------------------------------
# report JSON

def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def report_to_dict(report) -> dict:
    """CltReport as a plain dict with a schema version."""
    out = {"schema_version": SCHEMA_VERSION}
    for f in dataclasses.fields(report):
        out[f.name] = _jsonable(getattr(report, f.name))
    return out


def write_report_json(path_file, report) -> None:
    path_file = Path(path_file)
    path_file.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(report_to_dict(report), sort_keys=True, indent=1)
    path_file.write_text(text + "\n")


def load_report_dict(path_file) -> dict:
    with open(path_file) as fh:
        return json.load(fh)


def write_z_samples_csv(path_file, weight_names, z_samples) -> None:
    z = np.asarray(z_samples, dtype=np.float64)
    header = ["replica"] + ["z_%s" % w for w in weight_names]
    _write_rows(path_file, header,
                ([i] + list(z[i]) for i in range(z.shape[0])))


def write_renewal_csv(path_file, weight_names, renewal_table) -> None:
    header = ["t", "n_replicas", "nt_mean", "nt_ratio", "a2_mean", "a2_se"] \
        + ["r2_over_t_%s" % w for w in weight_names]
    rows = []
    for row in renewal_table:
        rows.append([row["t"], row["n_replicas"], row["nt_mean"],
                     row["nt_ratio"], row["a2_mean"], row["a2_se"]]
                    + list(row["r2_over_t"]))
    _write_rows(path_file, header, rows)


def write_lags_csv(path_file, lag_rows) -> None:
    # rows are (series, lag, corr, n_pairs, band) tuples from the
    # dependence diagnostics
    _write_rows(path_file, ["series", "lag", "corr", "n_pairs", "band"],
                (list(r) for r in lag_rows))


def write_qq_csv(path_file, weight_names, z_samples, sigma_psi2) -> None:
    """QQ data: sorted Z against same-variance normal quantiles.

    Quantile levels are (i - 1/2)/n; the reference quantile uses the
    calibrated variance, or the sample's own when that is degenerate.
    """
    z = np.asarray(z_samples, dtype=np.float64)
    sig2 = np.asarray(sigma_psi2, dtype=np.float64)
    rows = []
    if z.size:
        n = z.shape[0]
        p = (np.arange(1, n + 1) - 0.5) / n
        q01 = ndtri(p)
        for j, w in enumerate(weight_names):
            s = np.sqrt(sig2[j]) if sig2[j] > 0 else float(np.std(z[:, j]))
            zs = np.sort(z[:, j])
            for k in range(n):
                rows.append([w, q01[k] * s, zs[k]])
    _write_rows(path_file, ["weight", "q_reference", "z_sorted"], rows)


def write_betti_average_csv(path_file, radii, beta1_mean, n_replicas) -> None:
    rows = ([r, b, n_replicas] for r, b in zip(radii, beta1_mean))
    _write_rows(path_file, ["r", "beta1_mean", "n_replicas"], rows)


def write_r2_csv(path_file, weight_names, renewal_table) -> None:
    header = ["t"] + ["r2_over_t_%s" % w for w in weight_names]
    rows = ([row["t"]] + list(row["r2_over_t"]) for row in renewal_table)
    _write_rows(path_file, header, rows)


def write_eta_tail_csv(path_file, grid, surv) -> None:
    grid = np.asarray(grid, dtype=np.float64)
    surv = np.asarray(surv, dtype=np.float64)
    rows = ([g, s, float(np.log(s))] for g, s in zip(grid, surv))
    _write_rows(path_file, ["x", "survival", "log_survival"], rows)


# ---------------------------------------------------------------------------
# manifest

class RunManifest:
    """Checksums and timings for one command invocation.

    Files register as they are written; `write` emits the manifest itself
    (never listed inside, as its own checksum would be self-referential).
    """

    def __init__(self, config_hash: str, out_dir) -> None:
        self.config_hash = config_hash
        self.out_dir = Path(out_dir)
        self.files: dict[str, str] = {}
        self.timings: dict[str, float] = {}

    def add(self, path) -> None:
        path = Path(path)
        rel = path.relative_to(self.out_dir).as_posix() \
            if path.is_relative_to(self.out_dir) else path.as_posix()
        self.files[rel] = sha256_file(path)

    def time(self, label: str, seconds: float) -> None:
        self.timings[label] = round(float(seconds), 3)

    def to_dict(self) -> dict:
        import numpy
        import scipy
        return {
            "schema_version": SCHEMA_VERSION,
            "config_hash": self.config_hash,
            "versions": {
                "package": __version__,
                "python": platform.python_version(),
                "numpy": numpy.__version__,
                "scipy": scipy.__version__,
            },
            "files": dict(sorted(self.files.items())),
            "timings": self.timings,
        }

    def write(self, name: str = "manifest.json") -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        path.write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1)
                        + "\n")
        return path
