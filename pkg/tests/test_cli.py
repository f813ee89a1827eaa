import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from sopt.cli import main
from sopt.io import read_ppm, write_cloud, write_points, write_ppm
from sopt.registration import make_shape, random_transform
from sopt.sliced import sopt_estimate
from sopt.oracle import oracle_dp


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def pts(tmp_path):
    def make(name, values):
        f = tmp_path / name
        write_points(f, values)
        return f
    return make


def test_opt1d_identical(capsys, pts):
    f = pts("x.txt", [2.0, 0.0, 1.0])
    code, out, _ = run(capsys, "opt1d", f, f, "--lam", 1)
    res = json.loads(out)
    assert code == 0 and res["value"] == 0.0
    assert res["matches"] == [[0, 0], [1, 1], [2, 2]]
    assert res["destroyed"] == []


def test_opt1d_small_example_with_verify(capsys, pts):
    code, out, _ = run(capsys, "opt1d", pts("x", [3.0, 0.0]), pts("y", [1.0]),
                       "--lam", 2, "--verify")
    res = json.loads(out)
    assert code == 0 and res["verified"]
    assert res["value"] == 3.0
    # raw order: x[1] = 0 is matched, x[0] = 3 is destroyed
    assert res["matches"] == [[1, 0]] and res["destroyed"] == [0]
    assert res["phi"][1] + res["psi"][0] == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(5))
def test_opt1d_verify_random(capsys, pts, seed):
    rng = np.random.default_rng(seed)
    code, out, _ = run(capsys, "opt1d", pts("x", rng.normal(size=40)),
                       pts("y", rng.normal(size=33)), "--lam", 0.5, "--p", 3,
                       "--verify")
    assert code == 0 and json.loads(out)["verified"]


def test_opt1d_pot(capsys, pts):
    code, out, _ = run(capsys, "opt1d", pts("x", [0.0]), pts("y", [10.0, 0.0]),
                       "--lam", 1, "--pot", 3, "--verify")
    res = json.loads(out)
    assert code == 0 and res["matches"] == [[0, 1]] and res["value"] == 3.0


def test_opt1d_verification_failure_exit_code(capsys, pts, monkeypatch):
    import sopt.cli as cli

    class Bad:
        ok = False

        def __str__(self):
            return "FAIL dual_feasible"

    monkeypatch.setattr(cli, "verify_optimality", lambda *a, **k: Bad())
    code, _, err = run(capsys, "opt1d", pts("x", [0.0]), pts("y", [1.0]),
                       "--lam", 1, "--verify")
    assert code == 1 and "dual_feasible" in err


def test_parse_error_exit_code(capsys, tmp_path, pts):
    bad = tmp_path / "bad.txt"
    bad.write_text("0.5\n1.0\nxyz\n")
    code, _, err = run(capsys, "opt1d", bad, pts("y", [1.0]), "--lam", 1)
    assert code == 2 and "bad.txt:3:" in err
    code, _, err = run(capsys, "opt1d", tmp_path / "missing", bad, "--lam", 1)
    assert code == 2
    code, _, err = run(capsys, "opt1d", pts("x", [0.0]), pts("y", [1.0]),
                       "--lam", 1, "--p", 1)
    assert code == 2


def test_seed_is_mandatory(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["sopt", "a", "b", "--lam", "1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["bench"])


def test_sopt_self_zero_and_slices(capsys, tmp_path):
    P = np.random.default_rng(0).normal(size=(20, 2))
    f = tmp_path / "p.xyz"
    write_cloud(f, P)
    sl = tmp_path / "s.csv"
    code, out, _ = run(capsys, "sopt", f, f, "--lam", 1, "--N", 8, "--seed", 2,
                       "--slices", sl)
    assert code == 0 and json.loads(out)["value"] == 0.0
    rows = list(csv.DictReader(open(sl)))
    assert len(rows) == 8 and set(rows[0]) == {"slice", "theta0", "theta1", "value"}


def test_sopt_d1_matches_opt1d(capsys, tmp_path, pts):
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=12), rng.normal(size=9)
    fx, fy = pts("x", x), pts("y", y)
    _, out1, _ = run(capsys, "opt1d", fx, fy, "--lam", 0.4)
    _, out2, _ = run(capsys, "sopt", fx, fy, "--dim", 1, "--lam", 0.4, "--N", 5,
                     "--seed", 0)
    assert json.loads(out2)["value"] == pytest.approx(json.loads(out1)["value"], rel=1e-9)


def test_sopt_matches_per_slice_dp(capsys, tmp_path):
    rng = np.random.default_rng(2)
    X, Y = rng.normal(size=(7, 3)), rng.normal(size=(6, 3))
    fx, fy = tmp_path / "x", tmp_path / "y"
    write_cloud(fx, X)
    write_cloud(fy, Y)
    _, out, _ = run(capsys, "sopt", fx, fy, "--lam", 0.8, "--N", 6, "--seed", 5)
    thetas = sopt_estimate(X, Y, 0.8, N=6, seed=5).directions.directions
    want = np.mean([oracle_dp(np.sort(X @ t), np.sort(Y @ t), 0.8) for t in thetas])
    assert json.loads(out)["value"] == pytest.approx(want, rel=1e-9)


def test_sopt_dimension_mismatch(capsys, tmp_path):
    f = tmp_path / "p.xyz"
    write_cloud(f, np.zeros((3, 2)))
    code, _, _ = run(capsys, "sopt", f, f, "--dim", 3, "--lam", 1, "--seed", 0)
    assert code == 2


def test_register_cli(capsys, tmp_path):
    rng = np.random.default_rng(4)
    X = make_shape(200, seed=4)
    truth = random_transform(X, rng)
    fx, fy, ft = tmp_path / "x.xyz", tmp_path / "y.xyz", tmp_path / "t.json"
    write_cloud(fx, X)
    write_cloud(fy, truth(X))
    ft.write_text(json.dumps(truth.to_dict()))
    trace = tmp_path / "trace.csv"
    out = tmp_path / "res.json"
    code, _, _ = run(capsys, "register", fx, fy, "--N", 600, "--seed", 4,
                     "--truth", ft, "--trace", trace, "--out", out)
    res = json.loads(out.read_text())
    assert code == 0 and res["error"] <= 1e-2
    assert len(res["R"]) == 9
    rows = list(csv.reader(open(trace)))
    assert rows[0] == ["iteration", "lam", "matched"] and len(rows) == 601


def test_color_cli(capsys, tmp_path):
    rng = np.random.default_rng(5)
    img = rng.integers(0, 256, size=(12, 10, 3), dtype=np.uint8)
    src, out = tmp_path / "s.ppm", tmp_path / "o.ppm"
    write_ppm(src, img)
    code, _, _ = run(capsys, "color", src, src, "-o", out, "--lam", 10, "--k", 50,
                     "--N", 40, "--seed", 1)
    assert code == 0
    res = read_ppm(out)
    assert np.abs(res.astype(int) - img.astype(int)).max() <= 2


def test_bench_cli(capsys, tmp_path):
    out = tmp_path / "b.csv"
    code, _, err = run(capsys, "bench", "--sizes", "50,100", "--lams", "20",
                       "--repeats", 2, "--seed", 0, "--out", out, "--slope")
    rows = list(csv.DictReader(open(out)))
    assert code == 0 and len(rows) == 4 and "slope=" in err


def test_points_csv_cli(capsys, pts):
    code, out, _ = run(capsys, "points-csv", pts("x", [1.0, 2.0]))
    assert out == "i,x\n0,1.0\n1,2.0\n"


def test_module_entry_point(tmp_path):
    f = tmp_path / "x.txt"
    write_points(f, [0.0, 1.0])
    proc = subprocess.run([sys.executable, "-m", "sopt", "opt1d", str(f), str(f),
                           "--lam", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["value"] == 0.0
