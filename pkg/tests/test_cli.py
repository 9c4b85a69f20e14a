import json
import subprocess
import sys

import pytest

from asymdim.cli import EXIT_DIAGNOSTIC, EXIT_INPUT, EXIT_OK, main


@pytest.fixture
def run(tmp_path, capsys):
    """Run the CLI in-process; return (exit code, stdout, out dir)."""
    def go(*argv, out="out", cache="cache"):
        d = tmp_path / out
        code = main([*argv, "--out", str(d), "--cache", str(tmp_path / cache)])
        return code, capsys.readouterr(), d
    return go


def result(out_dir, name):
    return json.loads((out_dir / name).read_text())["result"]


def test_dim_asym_on_plane(run):
    code, cap, d = run("dim", "asym", "--space", "lattice:d=2", "--Rmax", "64")
    assert code == EXIT_OK
    assert json.loads(cap.out)["result"]["limsup_slope"] == pytest.approx(2, abs=0.1)
    csv = (d / "dim-asym.csv").read_text().splitlines()
    assert csv[0].startswith("#") and "scale,value,log_scale,log_value" in csv
    assert (d / "dim-asym-windows.csv").exists()


def test_dim_box_on_cantor(run):
    code, cap, d = run("dim", "box", "--space", "cantor:depth=8", "--format", "csv")
    assert code == EXIT_OK and cap.out.startswith("#")
    assert result(d, "dim-box.json")["limsup_slope"] == pytest.approx(0.631, abs=0.05)


def test_dim_volume_on_oscillating_end(run):
    code, _, d = run("dim", "volume", "--space", "oscillating_end", "--R", "a2..a8")
    r = result(d, "dim-volume.json")
    assert code == EXIT_OK and r["limsup_slope"] >= 1.9 and r["liminf_slope"] <= 1.6


def test_malformed_spec_names_the_field(run):
    code, cap, _ = run("dim", "asym", "--space", "lattice:d=2,metric=l7")
    assert code == EXIT_INPUT and "metric" in cap.err
    code, _, _ = run("dim", "frobnicate", "--space", "lattice:d=1")
    assert code == EXIT_INPUT


def test_nonconvergence_is_a_diagnostic(run):
    # on the thin region the packing estimates at r = 2, 4, 8 are still far apart
    code, cap, _ = run("dim", "asym", "--space", "region:alpha=0.5")
    assert code == EXIT_DIAGNOSTIC and "diagnostic" in cap.err


def test_spectral_ns_and_warm_cache(run):
    argv = ("spectral", "ns", "--space", "torus:d=2,side=128")
    code, cap, d = run(*argv, out="a")
    assert code == EXIT_OK
    r = json.loads(cap.out)["result"]
    assert r["alpha0"] == pytest.approx(2, abs=0.15)
    assert "0 hit(s), 3 solve(s)" in cap.err
    code, cap, d2 = run(*argv, out="b")
    assert code == EXIT_OK and "3 hit(s), 0 solve(s)" in cap.err
    assert (d / "ns.json").read_bytes() == (d2 / "ns.json").read_bytes()


def test_spectral_counting_table(run):
    code, _, d = run("spectral", "counting", "--space", "torus:d=1,side=1024", "--single",
                     "--tmin", "0.01", "--tmax", "0.01")
    assert code == EXIT_OK
    rows = [ln for ln in (d / "counting.csv").read_text().splitlines()
            if ln and not ln.startswith("#")]
    assert rows[0] == "t,N,N0"
    assert rows[1].split(",")[2] == "0.03125"


def test_verify_a0(run):
    code, cap, _ = run("spectral", "verify-a0", "--space", "torus:d=1,side=256")
    assert code == EXIT_OK and json.loads(cap.out)["result"]["difference"] <= 0.2


def test_dense_budget_exits_one(run):
    code, cap, _ = run("spectral", "ns", "--space", "torus:d=2,side=128", "--method", "dense",
                       "--single")
    assert code == EXIT_INPUT and "4096" in cap.err


def test_trace_examples(run):
    code, cap, _ = run("trace", "dixmier", "--muA", "pow:-0.5", "--muT", "pow:-1")
    assert code == EXIT_OK and abs(json.loads(cap.out)["result"]["value"]) <= 1e-3
    code, cap, _ = run("trace", "dixmier", "--muA", "pow:-1", "--muT", "pow:-1")
    assert json.loads(cap.out)["result"]["value"] == 1.0
    code, cap, _ = run("trace", "duality", "--lambda", "pow:-2")
    r = json.loads(cap.out)["result"]
    assert r["lhs"] == pytest.approx(0.5) and r["rhs"] == pytest.approx(0.5)


def test_non_eccentric_reference_exits_two(run):
    code, cap, d = run("trace", "dixmier", "--muA", "pow:-0.5", "--muT", "pow:-0.5")
    assert code == EXIT_DIAGNOSTIC
    assert result(d, "dixmier.json")["eccentricity"]["is_eccentric"] is False


def test_trace_mu_csv_feeds_back(run, tmp_path):
    code, _, d = run("trace", "mu", "--lambda", "pow:-2")
    assert code == EXIT_OK
    code, cap, _ = run("trace", "ecc", "--mu", str(d / "mu.csv"), "--alpha", "2", out="e")
    r = json.loads(cap.out)["result"]
    assert r["is_eccentric"] and r["branch"] == "non-integrable"


def test_reports_carry_metadata(run):
    _, _, d = run("trace", "duality", "--lambda", "pow:-2", "--seed", "5")
    meta = json.loads((d / "duality.json").read_text())["meta"]
    assert meta["seed"] == 5 and meta["tool"] == "asymdim" and "version" in meta


def test_console_entry_point(tmp_path):
    p = subprocess.run([sys.executable, "-m", "asymdim.cli", "trace", "duality", "--lambda",
                        "pow:-2", "--out", str(tmp_path)], capture_output=True, text=True)
    assert p.returncode == 0 and '"lhs"' in p.stdout
