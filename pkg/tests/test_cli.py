import csv
import json
import math
from pathlib import Path

import pytest

from saamg.cli import (
    EXIT_CONFIG,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    EXIT_SETUP_FAILURE,
    REPORT_SCHEMA,
    ConfigError,
    RunConfig,
    all_variant_combinations,
    execute,
    main,
    parse_seed_range,
    sweep,
)
from saamg.hierarchy import setup

DATA = Path(__file__).parent / "data"


def _close(a, b, path="$"):
    """Structural equality with a relative tolerance on floats."""
    if isinstance(a, dict):
        assert set(a) == set(b), path
        for k in a:
            _close(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            _close(x, y, f"{path}[{i}]")
    elif isinstance(a, float) and isinstance(b, float):
        assert math.isclose(a, b, rel_tol=1e-8, abs_tol=1e-12), path
    else:
        assert a == b, path


def _write(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_golden_report(tmp_path):
    out = tmp_path / "report.json"
    assert main(["run", str(DATA / "tiny_cube.yaml"), "--out", str(out)]) == EXIT_OK
    got = json.loads(out.read_text())
    expected = json.loads((DATA / "golden_report.json").read_text())
    assert got["schema"] == REPORT_SCHEMA
    _close(got, expected)


def test_negative_eigenvalue_exit_code(tmp_path, capsys):
    assert main(["run", str(DATA / "negeig.yaml")]) == EXIT_SETUP_FAILURE
    report = json.loads(capsys.readouterr().out)
    assert report["failure"]["kind"] == "negative_eigenvalue"
    assert "negative eigenvalue" in report["failure"]["message"]
    assert report["failure"]["level"] == 0


def test_one_norm_rescues_same_system(tmp_path):
    text = (DATA / "negeig.yaml").read_text().replace("variants: []", "variants: [OneNorm]")
    cfg = _write(tmp_path, text.replace("path: negeig.mtx", f"path: {DATA / 'negeig.mtx'}"))
    assert main(["run", cfg, "--out", str(tmp_path / "r.json")]) == EXIT_OK


def test_complexity_passthrough():
    cfg = RunConfig.load(DATA / "tiny_cube.yaml")
    report, code = execute(cfg)
    from saamg.cli import build_problem

    A, _, X = build_problem(cfg.problem)
    h = setup(A, X, cfg.setup_config())
    assert report["operator_complexity"] == h.operator_complexity


def test_not_converged_exit_code(tmp_path):
    text = (DATA / "tiny_cube.yaml").read_text().replace("max_iters: 100", "max_iters: 2")
    assert main(["run", _write(tmp_path, text), "--out", str(tmp_path / "r.json")]) == EXIT_NOT_CONVERGED
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["failure"]["kind"] == "not_converged"
    assert report["iterations"] == 2


@pytest.mark.parametrize("text, fragment", [
    ("problem: {type: random_cube, n: 4}\nbogus: 1\n", "unknown configuration keys"),
    ("problem: {type: random_cube, n: 4, colour: red}\n", "unknown keys for random_cube"),
    ("problem: {type: lattice}\n", "unknown problem type"),
    ("theta: 0.1\n", "missing 'problem'"),
    ("problem: {type: random_cube}\nvariants: [Turbo]\n", "unknown variants"),
    ("problem: {type: random_cube}\nkrylov: {method: cg}\n", "unknown Krylov method"),
    ("problem: {type: random_cube}\nkrylov: {tolerance: 1}\n", "unknown krylov keys"),
    ("problem: {type: random_cube}\ntheta: 3\n", "theta"),
    ("problem: [unclosed\n", "cannot parse"),
])
def test_config_errors(tmp_path, capsys, text, fragment):
    assert main(["run", _write(tmp_path, text)]) == EXIT_CONFIG
    assert fragment in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.yaml")]) == EXIT_CONFIG


def test_json_config_accepted(tmp_path):
    cfg = {"problem": {"type": "random_cube", "n": 3, "seed": 1}, "variants": "OneNorm+Sprsfy"}
    parsed = RunConfig.load(_write(tmp_path, json.dumps(cfg), "cfg.json"))
    assert parsed.variants == ("OneNorm", "Sprsfy")


def test_from_dict_rejects_non_mapping():
    with pytest.raises(ConfigError):
        RunConfig.from_dict([1, 2])


def test_seed_ranges():
    assert parse_seed_range("3..6") == [3, 4, 5, 6]
    assert parse_seed_range("1,5") == [1, 5]


def test_sixteen_combinations():
    combos = all_variant_combinations()
    assert len(combos) == 16 and len(set(combos)) == 16
    assert combos[0] == ()


def test_sweep_sixteen_rows(tmp_path):
    cfg = _write(tmp_path, "problem: {type: random_cube, n: 4, seed: 0}\ncoarse_size: 10\n")
    out = tmp_path / "sweep.csv"
    per_run = tmp_path / "runs.csv"
    assert main(["sweep", cfg, "--seeds", "0..1", "--out", str(out), "--per-run", str(per_run)]) == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 16
    assert rows[0]["variants"] == "traditional"
    assert all(r["runs"] == "2" for r in rows)
    assert len(list(csv.DictReader(per_run.open()))) == 32
    again = tmp_path / "again.csv"
    main(["sweep", cfg, "--seeds", "0..1", "--out", str(again)])
    assert again.read_text() == out.read_text()


def test_sweep_excludes_failures_from_means():
    cfg = RunConfig.load(DATA / "negeig.yaml")
    summary, runs = sweep(cfg, [{}], combos=[(), ("OneNorm",)])
    trad, onenorm = summary
    assert trad["setup_failures"] == 1 and trad["mean_iterations"] == ""
    assert onenorm["setup_failures"] == 0 and onenorm["mean_iterations"] > 0


def test_sweep_grid_file(tmp_path):
    cfg = _write(tmp_path, "problem: {type: stretched_cube, n: 4, kx: 1, ky: 1, kz: 1, sigma: 1000}\ncoarse_size: 10\n")
    grid = _write(tmp_path, "cases:\n  - {kx: 1, ky: 5, kz: 10}\n  - {kx: 5, ky: 5, kz: 5}\n", "grid.yaml")
    per_run = tmp_path / "runs.csv"
    out = tmp_path / "s.csv"
    code = main(["sweep", cfg, "--grid", grid, "--variants", "traditional", "--variants", "OneNorm",
                 "--out", str(out), "--per-run", str(per_run)])
    assert code == EXIT_OK
    runs = list(csv.DictReader(per_run.open()))
    assert [(r["kx"], r["ky"], r["kz"]) for r in runs] == [("1", "5", "10")] * 2 + [("5", "5", "5")] * 2
    assert [r["variants"] for r in csv.DictReader(out.open())] == ["traditional", "OneNorm"]


def test_grid_product(tmp_path):
    from saamg.cli import load_grid

    grid = load_grid(_write(tmp_path, "theta: [0.02, 0.05]\nseed: [1, 2, 3]\n", "g.yaml"))
    assert len(grid) == 6
    assert grid[0] == {"seed": 1, "theta": 0.02}


def test_matrix_market_with_coords(tmp_path):
    import numpy as np

    from saamg.problems import assemble, mesh_random_cube
    from saamg.sparse import write_matrix_market

    A, b, X = assemble(mesh_random_cube(5, 0))
    write_matrix_market(A, tmp_path / "a.mtx", symmetric=True)
    np.savetxt(tmp_path / "x.txt", X)
    np.savetxt(tmp_path / "b.txt", b)
    cfg = _write(tmp_path, "problem: {type: matrix_market, path: a.mtx, coords_path: x.txt, rhs_path: b.txt}\n"
                           "coarse_size: 10\n")
    assert main(["run", cfg, "--out", str(tmp_path / "r.json")]) == EXIT_OK


def test_module_entry_point():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "saamg", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "sweep" in out.stdout
