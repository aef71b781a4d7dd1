import json

import numpy as np
import pytest

from sausagelab.artifacts import (RunManifest, fmt, load_report_dict,
                                  report_to_dict, sha256_file, write_betti_csv,
                                  write_cycles_csv, write_lags_csv,
                                  write_pairs_csv, write_paths_csv,
                                  write_qq_csv, write_report_json,
                                  write_z_samples_csv)
from sausagelab.config import ExperimentConfig
from sausagelab.experiment import clt_experiment
from sausagelab.topology import (RadiusWindow, betti_curve,
                                 build_alpha_complex, persistence_deg1)


def test_fmt_round_trips_float64():
    rng = np.random.default_rng(4)
    for x in rng.normal(size=50) * 10.0 ** rng.integers(-12, 12, size=50):
        assert float(fmt(float(x))) == x
    assert fmt(True) == "1" and fmt(False) == "0"
    assert fmt(7) == "7"
    assert fmt("abc") == "abc"
    assert fmt(0.1) == "0.10000000000000001"


def test_paths_csv_round_trip(tmp_path):
    times = np.array([0.0, 0.5, 1.0])
    pts = np.array([[0.0, 0.0], [0.3, -0.1], [1.0 / 3.0, 0.7]])
    f = tmp_path / "p.csv"
    write_paths_csv(f, times, pts)
    back = np.genfromtxt(f, delimiter=",", names=True)
    np.testing.assert_array_equal(back["t"], times)
    np.testing.assert_array_equal(back["x"], pts[:, 0])
    np.testing.assert_array_equal(back["y"], pts[:, 1])


def test_pairs_and_betti_csv(tmp_path):
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    pairs = persistence_deg1(build_alpha_complex(pts))
    f = tmp_path / "pairs.csv"
    write_pairs_csv(f, pairs)
    back = np.genfromtxt(f, delimiter=",", names=True)
    assert float(back["birth"]) == 0.5
    assert float(back["death"]) == np.sqrt(2) / 2

    curve = betti_curve(pairs, RadiusWindow(0.4, 0.9))
    g = tmp_path / "betti.csv"
    write_betti_csv(g, curve)
    rows = np.genfromtxt(g, delimiter=",", names=True)
    assert rows["r"].shape == curve.breakpoints.shape
    np.testing.assert_array_equal(rows["beta1"], curve.values)


def test_cycles_csv_headers_and_rows(tmp_path):
    from sausagelab.regeneration import CycleRecord
    recs = [CycleRecord(index=0, tau_n=0.0, tau_np1=1.5, eta=1.5,
                        delta={"a": 0.25, "b": -1.0},
                        m_osc={"a": 0.5, "b": 1.0})]
    f = tmp_path / "cycles.csv"
    write_cycles_csv(f, recs, ["a", "b"])
    lines = f.read_text().splitlines()
    assert lines[0] == "n,tau_n,tau_np1,eta,delta_a,delta_b,m_a,m_b,complete"
    assert lines[1].split(",") == [
        "0", "0", "1.5", "1.5", "0.25", "-1", "0.5", "1", "1"]


def test_lags_csv_takes_diagnostic_tuples(tmp_path):
    rows = [("eta", 1, 0.05, 400, 0.15), ("delta_w", 2, -0.01, 399, 0.15)]
    f = tmp_path / "lags.csv"
    write_lags_csv(f, rows)
    lines = f.read_text().splitlines()
    assert lines[0] == "series,lag,corr,n_pairs,band"
    assert lines[1].startswith("eta,1,0.05")
    assert len(lines) == 3


SURR = dict(surrogate=True, surrogate_rho=0.4, surrogate_t=60.0,
            surrogate_calibration_t=400.0, n_calibration=25,
            n_evaluation=150, seed_calibration=901, seed_evaluation=902,
            renewal_t_grid=(30.0, 60.0), functional_s_grid=(0.5, 1.0))


@pytest.fixture(scope="module")
def surrogate_report():
    return clt_experiment(ExperimentConfig(**SURR))


def test_report_json_round_trip(tmp_path, surrogate_report):
    f = tmp_path / "report.json"
    write_report_json(f, surrogate_report)
    d = load_report_dict(f)
    assert d["schema_version"] == 1
    assert d["weight_names"] == ["surrogate"]
    assert d["n_evaluation"] == 150
    np.testing.assert_allclose(d["rho_hat"], surrogate_report.rho_hat)
    np.testing.assert_allclose(d["z_samples"],
                               np.asarray(surrogate_report.z_samples))


def test_report_json_byte_identical_across_reruns(tmp_path):
    a = clt_experiment(ExperimentConfig(**SURR))
    b = clt_experiment(ExperimentConfig(**SURR))
    fa, fb = tmp_path / "a.json", tmp_path / "b.json"
    write_report_json(fa, a)
    write_report_json(fb, b)
    assert fa.read_bytes() == fb.read_bytes()


def test_report_dict_is_plain_json(surrogate_report):
    d = report_to_dict(surrogate_report)
    # everything must survive a strict JSON round trip unchanged
    again = json.loads(json.dumps(d, sort_keys=True))
    assert again == json.loads(json.dumps(d, sort_keys=True))
    assert isinstance(d["sigma_matrix"], list)
    assert isinstance(d["ks"], list)


def test_qq_csv_shapes(tmp_path, surrogate_report):
    f = tmp_path / "qq.csv"
    z = np.asarray(surrogate_report.z_samples)
    write_qq_csv(f, surrogate_report.weight_names, z,
                     surrogate_report.sigma_psi2)
    rows = np.genfromtxt(f, delimiter=",", names=True,
                         dtype=None, encoding="utf-8")
    assert rows.shape[0] == z.shape[0]
    q = rows["q_reference"]
    assert np.all(np.diff(q) > 0)
    np.testing.assert_array_equal(rows["z_sorted"], np.sort(z[:, 0]))


def test_z_samples_csv(tmp_path):
    f = tmp_path / "z.csv"
    z = np.array([[0.1, -0.2], [0.3, 0.4]])
    write_z_samples_csv(f, ["u", "v"], z)
    lines = f.read_text().splitlines()
    assert lines[0] == "replica,z_u,z_v"
    assert lines[1] == "0,0.10000000000000001,-0.20000000000000001"
    assert len(lines) == 3


def test_manifest_checksums_and_exclusion(tmp_path):
    f1 = tmp_path / "data.csv"
    f1.write_text("a,b\n1,2\n")
    man = RunManifest(config_hash="deadbeef", out_dir=tmp_path)
    man.add(f1)
    man.time("phase", 1.23456)
    man.write()
    d = json.loads((tmp_path / "manifest.json").read_text())
    assert d["config_hash"] == "deadbeef"
    assert d["files"]["data.csv"] == sha256_file(f1)
    assert "manifest.json" not in d["files"]
    assert d["timings"]["phase"] == 1.235
    assert "numpy" in d["versions"] and "python" in d["versions"]
