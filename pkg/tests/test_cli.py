import json
import subprocess
import sys

import numpy as np
import pytest

from ifsjacobi import fibonacci_jacobi, jacobi_lebesgue, read_atoms, read_jacobi, write_atoms, write_jacobi
from ifsjacobi.cli import run
from ifsjacobi.fixtures import two_atom


def test_closure_two_atom(tmp_path):
    src = tmp_path / "two-atom.atoms"
    write_atoms(two_atom(), src)
    out = tmp_path / "out.jac"
    assert run(["closure", "--sigma", str(src), "--delta", "0.5", "--size", "64", "-o", str(out)]) == 0
    J = read_jacobi(out)
    L = jacobi_lebesgue(64)
    assert np.max(np.abs(J.b - L.b)) <= 1e-13 and np.max(np.abs(J.a)) <= 1e-13


def test_deterministic_output(tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"o{i}.jac"
        assert run(["closure", "--sigma", "fixture:bernoulli-pisot", "--size", "200", "-o", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_single_atom_exit_1(tmp_path, capsys):
    src = tmp_path / "single-atom.atoms"
    src.write_text("atoms v1 1\n0.5 1\n")
    assert run(["closure", "--sigma", str(src), "--delta", "0.3", "--size", "4"]) == 1
    err = capsys.readouterr().err
    assert "DegenerateStep" in err and "n=0" in err


def test_usage_errors(tmp_path, capsys):
    assert run([]) == 2
    assert run(["closure", "--sigma", "fixture:two-atom"]) == 2
    assert run(["closure", "--sigma", "fixture:nope", "--size", "3"]) == 2
    assert run(["closure", "--sigma", "fixture:lebesgue", "--size", "3"]) == 2  # no delta
    bad = tmp_path / "bad.jac"
    bad.write_text("jacobi v1 3\n0 0 0\n")
    assert run(["gauss", "--jacobi", str(bad), "--order", "2"]) == 2
    assert "line" in capsys.readouterr().err


def test_invert_fibonacci(tmp_path, capsys):
    fib = tmp_path / "fib.jac"
    write_jacobi(fibonacci_jacobi(300), fib)
    out = tmp_path / "sigma.jac"
    assert run(["invert", "--mu", str(fib), "--delta", "1e-4", "--size", "300", "-o", str(out)]) == 0
    assert "feasible_size 300" in capsys.readouterr().err
    assert read_jacobi(out).size == 300


def test_frontier_and_gauss(tmp_path):
    out = tmp_path / "front.dat"
    assert run(["frontier", "--mu", "fixture:fibonacci", "--sizes", "20", "10", "-o", str(out)]) == 0
    rows = [line.split() for line in out.read_text().splitlines()]
    assert [r[0] for r in rows] == ["10", "20"] and float(rows[0][1]) >= float(rows[1][1])
    g = tmp_path / "g.atoms"
    assert run(["gauss", "--jacobi", "fixture:lebesgue", "--order", "2", "-o", str(g)]) == 0
    m = read_atoms(g)
    assert m.nodes == pytest.approx([-3**-0.5, 3**-0.5], abs=1e-15)


def test_convolve_and_fixpoint_methods(tmp_path):
    a, b = tmp_path / "a.jac", tmp_path / "b.jac"
    args = ["--sigma", "fixture:lebesgue", "--eta", "fixture:two-atom", "--delta", "0.3", "--size", "30"]
    assert run(["convolve", *args, "-o", str(a)]) == 0
    assert run(["convolve", *args, "--method", "spectral", "-o", str(b)]) == 0
    assert np.max(np.abs(read_jacobi(a).b - read_jacobi(b).b)) < 1e-12
    rep = tmp_path / "rep.json"
    plots = tmp_path / "plots"
    assert run(["fixpoint", "--sigma", "fixture:two-atom", "--delta", "0.3", "--size", "64",
                "--report", str(rep), "--plot-dir", str(plots), "-o", str(a)]) == 0
    r = json.loads(rep.read_text())
    assert r["converged"] and len(r["distances"]) == r["iterations_run"]
    assert len((plots / "distances.dat").read_text().splitlines()) == r["iterations_run"]
    assert run(["fixpoint", "--sigma", "fixture:two-atom", "--delta", "0.3", "--size", "64",
                "--max-iterations", "2", "-o", str(a)]) == 1
    assert run(["fixpoint", "--sigma", "fixture:two-atom", "--delta", "0.3", "--size", "64",
                "--max-iterations", "2", "--allow-unconverged", "-o", str(a)]) == 0


def test_analyze(tmp_path):
    J = tmp_path / "mu.jac"
    assert run(["closure", "--sigma", "fixture:refinable-1", "--size", "400", "-o", str(J)]) == 0
    out = tmp_path / "report.json"
    plots = tmp_path / "plots"
    assert run(["analyze", "--jacobi", str(J), "--a-inf", "1.5", "--b-inf", "0.75", "--window", "40", "400",
                "--reference", str(J), "--plot-dir", str(plots), "-o", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert abs(rep["nevai"]["fitted_exponent"] + 2) < 0.2
    assert rep["reference"]["max_b_difference"] == 0.0
    for name in ["a_deviation", "b_deviation", "partial_sums", "capacity", "a_difference"]:
        assert (plots / f"{name}.dat").exists()
    assert run(["analyze", "--jacobi", str(J), "--sigma", "fixture:lebesgue", "--delta", "0.5"]) == 0
    assert run(["analyze", "--jacobi", str(J), "--sigma", "fixture:lebesgue"]) == 2


def test_config_file(tmp_path, monkeypatch):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[ifsjacobi]\nmax_iterations = 2\n")
    args = ["fixpoint", "--sigma", "fixture:two-atom", "--delta", "0.3", "--size", "32", "-o", str(tmp_path / "x")]
    assert run(["--config", str(cfg), *args]) == 1
    monkeypatch.setenv("IFSJACOBI_CONFIG", str(cfg))
    assert run(args) == 1
    assert run([*args, "--max-iterations", "200"]) == 0
    cfg.write_text("[ifsjacobi]\nbogus = 1\n")
    assert run(args) == 2


def test_refinable_weights_config(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[ifsjacobi]\nrefinable_weights = 0.25,0.25,0.25,0.25\n")
    out = tmp_path / "r.jac"
    assert run(["--config", str(cfg), "closure", "--sigma", "fixture:refinable-1", "--size", "3", "-o", str(out)]) == 0
    assert read_jacobi(out).a[0] == pytest.approx(1.5)


def test_fixtures_command(tmp_path):
    assert run(["fixtures", "--out-dir", str(tmp_path), "--size", "50"]) == 0
    manifest = json.loads((tmp_path / "fixtures.json").read_text())
    names = {e["name"] for e in manifest}
    assert "bernoulli-pisot" in names and "fibonacci" in names
    assert read_jacobi(tmp_path / "fibonacci.jac").size == 50
    assert read_atoms(tmp_path / "refinable-1.atoms").count == 4


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "ifsjacobi", "closure", "--sigma", "fixture:two-atom",
                        "--size", "3", "--format", "json"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["size"] == 3
