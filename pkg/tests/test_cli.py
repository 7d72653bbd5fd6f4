"""Command-line contract: exit codes, formats, round trips, determinism."""

import json
import subprocess
import sys

import numpy as np
from sliceproj import (BlockSymMatrix, make_cone, polar_curve,
                       read_block_matrix, read_cone_point, sample_cone,
                       write_block_matrix, write_cone_point)


def run_cli(*args, check=False):
    proc = subprocess.run([sys.executable, "-m", "sliceproj", *args],
                          capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"cli failed ({proc.returncode}):\n{proc.stderr}")
    return proc


def test_probe_exact_headline(tmp_path):
    out = tmp_path / "report.csv"
    proc = run_cli("probe", "--n", "2", "--mode", "exact", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    summary = proc.stdout.strip().splitlines()[-1]
    assert summary.startswith("n=2 slope=1.33")
    assert "implied_order=" in summary and "target=0.333333" in summary
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t,h_norm,residual_norm"
    assert len(lines) == 22  # header + 20 rows + footer
    assert lines[-1].startswith("# slope=")


def test_probe_exact_n6():
    proc = run_cli("probe", "--n", "6", "--mode", "exact")
    assert proc.returncode == 0, proc.stderr
    summary = proc.stdout.strip().splitlines()[-1]
    slope = float(summary.split("slope=")[1].split()[0])
    assert abs(slope - 64.0 / 63.0) <= 0.02


def test_probe_rejects_small_n():
    proc = run_cli("probe", "--n", "1", "--mode", "exact")
    assert proc.returncode == 2
    assert "n must be >= 2" in proc.stderr


def test_probe_rejects_bad_grid():
    proc = run_cli("probe", "--n", "2", "--t-min", "0.5", "--t-max", "0.1")
    assert proc.returncode == 2
    proc = run_cli("probe", "--n", "2", "--points", "3")
    assert proc.returncode == 2


def test_probe_deterministic_output(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run_cli("probe", "--n", "3", "--format", "json", "--out", str(a), check=True)
    run_cli("probe", "--n", "3", "--format", "json", "--out", str(b), check=True)
    assert a.read_bytes() == b.read_bytes()


def test_probe_json_round_trip(tmp_path):
    out = tmp_path / "report.json"
    run_cli("probe", "--n", "2", "--format", "json", "--out", str(out),
            check=True)
    raw = json.loads(out.read_text())
    model = make_cone(2)
    assert raw["n"] == 2 and raw["mode"] == "exact"
    assert raw["target_lambda"] == model.lam
    assert raw["implied_order"] == raw["fitted_slope"] - 1.0


def test_project_in_set_point_round_trips(tmp_path):
    model = make_cone(2)
    rng = np.random.default_rng(3)
    point = sample_cone(model, rng)
    src = tmp_path / "point.txt"
    dst = tmp_path / "projected.txt"
    src.write_text(write_cone_point(point))
    proc = run_cli("project", "--n", "2", "--target", "K",
                   "--in", str(src), "--out", str(dst))
    assert proc.returncode == 0, proc.stderr
    stats = json.loads(proc.stdout.strip().splitlines()[-1])
    assert stats["converged"] is True
    back = read_cone_point(dst.read_text())
    assert np.linalg.norm(back.coords - point.coords) <= 1e-8


def test_project_polar_point_maps_to_zero(tmp_path):
    model = make_cone(2)
    src = tmp_path / "v.txt"
    dst = tmp_path / "out.txt"
    src.write_text(write_cone_point(polar_curve(model, 0.4)))
    proc = run_cli("project", "--n", "2", "--target", "K",
                   "--in", str(src), "--out", str(dst))
    assert proc.returncode == 0, proc.stderr
    back = read_cone_point(dst.read_text())
    assert np.linalg.norm(back.coords) <= 1e-8


def test_project_polar_target_kills_members(tmp_path):
    model = make_cone(3)
    rng = np.random.default_rng(11)
    point = sample_cone(model, rng)
    src = tmp_path / "member.txt"
    dst = tmp_path / "out.txt"
    src.write_text(write_cone_point(point))
    proc = run_cli("project", "--n", "3", "--target", "polar",
                   "--in", str(src), "--out", str(dst))
    assert proc.returncode == 0, proc.stderr
    back = read_cone_point(dst.read_text())
    assert np.linalg.norm(back.coords) <= 1e-8


def test_project_slice_targets_agree(tmp_path):
    rng = np.random.default_rng(5)
    mat = BlockSymMatrix(2, rng.standard_normal((3, 3)))
    src = tmp_path / "mat.txt"
    src.write_text(write_block_matrix(mat))
    outs = {}
    for target in ("slice-dykstra", "slice-fixedpoint"):
        dst = tmp_path / f"{target}.txt"
        proc = run_cli("project", "--n", "2", "--target", target,
                       "--in", str(src), "--out", str(dst))
        assert proc.returncode == 0, proc.stderr
        outs[target] = read_block_matrix(dst.read_text())
    gap = np.linalg.norm(outs["slice-dykstra"].blocks
                         - outs["slice-fixedpoint"].blocks)
    assert gap <= 1e-5


def test_project_parse_failure(tmp_path):
    src = tmp_path / "bad.txt"
    src.write_text("2\n1.0 2.0\n")  # too few coordinates
    proc = run_cli("project", "--n", "2", "--target", "K", "--in", str(src))
    assert proc.returncode == 2
    proc = run_cli("project", "--n", "2", "--target", "K",
                   "--in", str(tmp_path / "missing.txt"))
    assert proc.returncode == 2


def test_project_dimension_mismatch(tmp_path):
    model = make_cone(3)
    src = tmp_path / "n3.txt"
    src.write_text(write_cone_point(polar_curve(model, 0.5)))
    proc = run_cli("project", "--n", "2", "--target", "K", "--in", str(src))
    assert proc.returncode == 2
    assert "n=" in proc.stderr


def test_curves_csv_contract(tmp_path):
    out = tmp_path / "curves.csv"
    proc = run_cli("curves", "--n", "2", "--t-min", "1e-4", "--t-max", "1e-1",
                   "--points", "5", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    lines = out.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header[0] == "t"
    assert header[-3:] == ["inner_vw", "h_norm", "residual_norm"]
    assert len(lines) == 6
    inner_idx = header.index("inner_vw")
    for line in lines[1:]:
        vals = [float(tok) for tok in line.split(",")]
        assert abs(vals[inner_idx]) <= 1e-12


def test_curves_endpoints_rows(tmp_path):
    out = tmp_path / "curves.csv"
    run_cli("curves", "--n", "2", "--t-min", "0", "--t-max", "1",
            "--points", "3", "--out", str(out), check=True)
    lines = out.read_text().strip().splitlines()
    first = [float(tok) for tok in lines[1].split(",")]
    last = [float(tok) for tok in lines[-1].split(",")]
    # v(0) = (0, 1, -1, 0, 0) and w(0) = (0, 1, 1, 0, 1)
    assert first[0] == 0.0
    assert first[1:6] == [0.0, 1.0, -1.0, 0.0, 0.0]
    assert first[6:11] == [0.0, 1.0, 1.0, 0.0, 1.0]
    # v(1) = (1, 0, -1, 0, 0) and w(1) = (1, 0, 1, 1, 0)
    assert last[0] == 1.0
    assert last[1:6] == [1.0, 0.0, -1.0, 0.0, 0.0]
    assert last[6:11] == [1.0, 0.0, 1.0, 1.0, 0.0]


def test_curves_residuals_match_probe(tmp_path):
    curves_out = tmp_path / "curves.csv"
    probe_out = tmp_path / "probe.csv"
    run_cli("curves", "--n", "3", "--points", "8", "--out", str(curves_out),
            check=True)
    run_cli("probe", "--n", "3", "--points", "8", "--out", str(probe_out),
            check=True)
    curve_lines = curves_out.read_text().strip().splitlines()
    probe_lines = probe_out.read_text().strip().splitlines()
    header = curve_lines[0].split(",")
    idx = header.index("residual_norm")
    curve_res = [line.split(",")[idx] for line in curve_lines[1:]]
    probe_res = [line.split(",")[2] for line in probe_lines[1:-1]]
    assert curve_res == probe_res  # identical 17-digit serialization


def test_curves_invalid_grid():
    proc = run_cli("curves", "--n", "2", "--t-min", "0.9", "--t-max", "0.2")
    assert proc.returncode == 2


def test_verify_passes():
    proc = run_cli("verify", "--n-max", "3")
    assert proc.returncode == 0, proc.stdout + proc.stderr
    lines = proc.stdout.strip().splitlines()
    assert len(lines) == 9
    assert all(line.startswith("PASS") for line in lines)


def test_verify_detects_injected_defect():
    proc = run_cli("verify", "--n-max", "3", "--inject-defect")
    assert proc.returncode == 1
    assert any(line.startswith("FAIL holder") for line in
               proc.stdout.strip().splitlines())


def test_version_flag():
    proc = run_cli("--version")
    assert proc.returncode == 0
