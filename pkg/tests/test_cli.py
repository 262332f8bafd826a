import csv
import io

import pytest

from wgppr.cli import ConfigError, RunConfig, SweepError, main, render_reports, render_table, run_convergence
from wgppr.errors import ConvergenceReport, LevelResult
from wgppr import cli as cli_mod
from wgppr.linalg import SolverError


def table_report(levels=5):
    r = ConvergenceReport("sine", 1, 3.0, "uniform")
    errs = [1.3216e-01, 3.3156e-02, 8.2964e-03, 2.0746e-03, 5.1867e-04]
    for i in range(levels):
        r.add(LevelResult(8 * 2**i, 2**-i, errs[i], errs[i] * 1.2))
    return r


def test_single_row():
    r = table_report(1)
    csv_lines = render_table(r, "csv").splitlines()
    assert csv_lines[0] == "N,h,energy_err,energy_order,grad_err,grad_order"
    assert len(csv_lines) == 2 and csv_lines[1].split(",")[3] == ""
    md = render_table(r, "md").splitlines()
    assert sum(line.startswith("| 8 ") for line in md) == 1


def test_table_shape_and_format():
    r = table_report()
    rows = list(csv.reader(io.StringIO(render_table(r, "csv"))))
    assert len(rows) == 6
    assert rows[1][3] == ""
    assert rows[2][2] == "3.3156e-02" and rows[2][3] == "1.9949"
    md = [line for line in render_table(r, "md").splitlines() if line.startswith("| 8 ")]
    assert md[0].split("|")[4].strip() == "--"


def test_csv_md_same_numbers():
    r = table_report()
    rows = list(csv.reader(io.StringIO(render_table(r, "csv"))))[1:]
    md = [line for line in render_table(r, "md").splitlines() if line.startswith("| ") and line[2].isdigit()]
    for c, m in zip(rows, md):
        cells = [x.strip() for x in m.strip("|").split("|")]
        assert [x or "--" for x in c] == cells


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(alphas=(0.5,))
    with pytest.raises(ConfigError):
        RunConfig(levels=(8, 32))
    with pytest.raises(ConfigError):
        RunConfig(levels=(12,))
    with pytest.raises(ConfigError):
        RunConfig(mesh="perturbed", levels=(2, 4))
    with pytest.raises(ConfigError):
        RunConfig(problem="nope")
    assert RunConfig(h_mode="per-element").h_mode == "element"


def test_run_convergence_reference_values():
    r = run_convergence(RunConfig(alphas=(3,), levels=(8, 16, 32)))[0]
    for got, ref in zip(r.energy_errors, (1.3216e-01, 3.3156e-02, 8.2964e-03)):
        assert got == pytest.approx(ref, rel=5e-3)
    p = run_convergence(RunConfig(alphas=(3,), mesh="perturbed", levels=(8,)))[0]
    assert p.energy_errors[0] == pytest.approx(1.3595e-01, rel=5e-3)
    assert p.levels[0].energy_order is None


def test_main_outputs_are_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["--problem", "sine", "--k", "2", "--alpha", "1,3", "--levels", "4,8", "--format", "csv"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text(encoding="utf-8")
    assert "\r" not in text
    assert text.splitlines()[0] == "alpha,N,h,energy_err,energy_order,grad_err,grad_order"
    assert len(text.splitlines()) == 5


def test_main_dumps(tmp_path):
    assert main(["--alpha", "2", "--levels", "4", "--dump-dir", str(tmp_path), "--out", str(tmp_path / "t.md")]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["gradient_a2_N4.txt", "mesh_N4.txt", "solution_a2_N4.txt", "t.md"]
    assert (tmp_path / "mesh_N4.txt").read_text().startswith("X\n0.0\n")


def test_exit_codes(monkeypatch, capsys):
    assert main(["--alpha", "0.5"]) == 1
    assert main(["--levels", "8,32"]) == 1
    with pytest.raises(SystemExit) as info:
        main(["--bogus"])
    assert info.value.code == 1

    def boom(*a, **k):
        raise SolverError("stalled", residual=1.0)

    monkeypatch.setattr(cli_mod, "solve_wg", boom)
    assert main(["--alpha", "2", "--levels", "4"]) == 2
    assert "alpha=2, N=4" in capsys.readouterr().err
    with pytest.raises(SweepError):
        run_convergence(RunConfig(alphas=(2,), levels=(4,)))


def test_render_reports_multi():
    r1, r2 = table_report(2), table_report(2)
    r2.alpha = 1.0
    text = render_reports([r1, r2], "csv").splitlines()
    assert text[1].startswith("3,8,") and text[3].startswith("1,8,")
    assert render_reports([r1, r2], "md").count("### alpha") == 2
