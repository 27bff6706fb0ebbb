import csv
import io
import math

import numpy as np
import pytest

from nonsmooth_expint.cli import main
from nonsmooth_expint.harness import (
    CSV_COLUMNS,
    Cell,
    ConvergenceReport,
    StudyConfig,
    emit,
    estimate_order,
    load_configs,
    parse_config,
    run_study,
    successive_difference,
)
from nonsmooth_expint.integrator import SolutionHistory

SMALL = """\
schema = 1
problem = allen_cahn
initial = step
method = exp_k2
T = 1/2, 1/4
tau = 1/16, 1/32, 1/64
beta = 3/4
alpha = pi/4
K_mult = 10
M = 63
"""


def hist(T, u):
    return SolutionHistory(times=np.array([0.0, T]), states=np.array([np.zeros_like(u), u]))


def test_successive_difference():
    u = np.array([0.0, 1.0, -2.0])
    assert successive_difference(hist(0.5, u), hist(0.5, u)) == 0.0
    assert successive_difference(hist(0.5, u), hist(0.5, u + [0, 0.25, -0.5])) == 0.5
    with pytest.raises(ValueError):
        successive_difference(hist(0.5, u), hist(0.25, u))
    with pytest.raises(ValueError):
        successive_difference(hist(0.5, u), hist(0.5, np.zeros(4)))


def test_order_examples():
    two, lsq = estimate_order([1e-2, 2.5e-3, 6.25e-4])
    assert two == pytest.approx(2.0, abs=1e-12) and lsq == pytest.approx(2.0, abs=1e-12)
    two, _ = estimate_order([7.410e-7, 1.779e-7])
    assert two == pytest.approx(math.log2(7.410e-7 / 1.779e-7), rel=1e-12)
    assert two == pytest.approx(2.06, abs=0.005)
    two, lsq = estimate_order([2.215e-8, 1.085e-8, 4.022e-9])
    assert two == pytest.approx(1.43, abs=0.005)
    assert lsq == pytest.approx(1.23, abs=0.005)


@pytest.mark.parametrize("bad", [[1.0], [1.0, 0.0], [1.0, -2.0], [np.nan, 1.0]])
def test_order_rejects(bad):
    with pytest.raises(ValueError):
        estimate_order(bad)


@pytest.mark.parametrize("rate", [0.5, 1.0, 2.0, 3.7])
def test_estimators_agree_on_geometric_sequences(rate):
    d = 0.3 * 2.0 ** (-rate * np.arange(5))
    two, lsq = estimate_order(d)
    assert abs(two - lsq) <= 0.15
    assert two == pytest.approx(rate, abs=1e-12)


def test_config_validation():
    with pytest.raises(ValueError, match="halve"):
        StudyConfig(tau=(1 / 8, 1 / 16, 1 / 64))
    with pytest.raises(ValueError, match="three"):
        StudyConfig(tau=(1 / 8, 1 / 16))
    with pytest.raises(ValueError):
        StudyConfig(method="rk4")
    with pytest.raises(ValueError):
        StudyConfig(T=())


def test_parse_config_and_errors(tmp_path):
    (cfg,) = parse_config(SMALL)
    assert cfg.T == (0.5, 0.25)
    assert cfg.tau == (1 / 16, 1 / 32, 1 / 64)
    assert cfg.alpha == math.pi / 4 and cfg.M == 63
    multi = parse_config(SMALL.replace("method = exp_k2", "method = crank_nicolson, radau2  # baselines"))
    assert [c.method for c in multi] == ["crank_nicolson", "radau2"]
    path = tmp_path / "s.cfg"
    path.write_text(SMALL)
    assert load_configs(path) == [cfg]
    with pytest.raises(ValueError, match="schema"):
        parse_config(SMALL.replace("schema = 1\n", ""))
    with pytest.raises(ValueError, match="unknown config key"):
        parse_config(SMALL + "gamma = 4\n")
    with pytest.raises(ValueError, match="duplicate"):
        parse_config(SMALL + "M = 7\n")
    with pytest.raises(ValueError):
        parse_config(SMALL.replace("beta = 3/4", "beta = __import__('os')"))


def test_shipped_configs_parse():
    from pathlib import Path

    root = Path(__file__).resolve().parents[1] / "configs"
    k2 = load_configs(root / "table_k2.cfg")[0]
    assert k2.method == "exp_k2" and k2.M == 1023 and len(k2.T) == 4 and len(k2.tau) == 4
    comp = load_configs(root / "comparison.cfg")
    assert [c.method for c in comp] == ["crank_nicolson", "gauss2", "radau2"]
    assert comp[0].M == 16383


def test_steps_mapping():
    cfg = StudyConfig()
    # graded steps measured in absolute time: N = ceil(gamma T^(1-beta) / tau)
    assert cfg.steps(0.5, 1 / 64) == math.ceil(4 * 0.5**0.25 * 64)
    horizon = StudyConfig(mesh_reference_time=None)
    assert horizon.steps(0.5, 1 / 64) == 128
    assert StudyConfig(method="radau2").steps(0.5, 1 / 256) == 128
    assert cfg.nodes(1 / 64) == 42 and StudyConfig(method="gauss2").nodes(1 / 64) is None


def test_emit_empty_and_single_row():
    assert emit(ConvergenceReport()) == ",".join(CSV_COLUMNS) + "\n"
    report = ConvergenceReport(cells=[Cell("exp_k2", 0.5, 1 / 64, 155, 42, diff_norm=2.934e-6, wall_seconds=1.5)],
                               orders={0.5: (2.06, 2.03)})
    rows = list(csv.DictReader(io.StringIO(emit(report))))
    assert len(rows) == 1
    r = rows[0]
    assert r["method"] == "exp_k2" and int(r["N"]) == 155 and int(r["K"]) == 42
    assert float(r["T"]) == 0.5 and float(r["tau"]) == 1 / 64
    assert float(r["diff_norm"]) == 2.934e-6
    assert float(r["order_two_point"]) == 2.06 and float(r["order_lsq"]) == 2.03


def test_table_layout_counts():
    Ts = (0.5, 0.25, 0.125, 0.0625)
    taus = (1 / 64, 1 / 128, 1 / 256, 1 / 512)
    cells = [Cell("exp_k2", T, tau, 10, 42, diff_norm=1e-6) for T in Ts for tau in taus]
    report = ConvergenceReport(cells=cells, orders={T: (2.0, 2.0) for T in Ts})
    text = emit(report, format="table")
    data_rows = [ln for ln in text.splitlines() if ln.strip().startswith("1/") and "e-06" in ln]
    order_rows = [ln for ln in text.splitlines() if "order of convergence" in ln]
    assert len(data_rows) == 16 and len(order_rows) == 4
    with pytest.raises(ValueError):
        emit(report, format="xml")


def test_emit_reports_path_on_failure(tmp_path):
    with pytest.raises(OSError, match="missing"):
        emit(ConvergenceReport(), path=tmp_path / "missing" / "x.csv")


@pytest.fixture(scope="module")
def small_study():
    return run_study(parse_config(SMALL)[0])


def test_small_study(small_study):
    r = small_study
    assert r.ok and len(r.cells) == 6
    for T in (0.5, 0.25):
        d = r.diffs(T)
        assert len(d) == 2 and d[0] > d[1] > 0
        assert r.orders[T] is not None


def test_determinism(small_study):
    again = run_study(parse_config(SMALL)[0], threads=2)

    def strip(text):
        return [row[:-1] for row in csv.reader(io.StringIO(text))]

    assert strip(emit(small_study)) == strip(emit(again))


def test_failed_cell_is_recorded():
    cfg = StudyConfig(method="radau2", T=(0.5,), tau=(0.25, 0.125, 0.0625), M=7, newton_tol=1e-300)
    report = run_study(cfg)
    assert not report.ok
    assert all("NewtonFailure" in c.error for c in report.failures())
    assert report.orders[0.5] is None
    assert "FAILED" in emit(report, format="table")


def test_cli_solve(tmp_path, capsys):
    out = tmp_path / "u.csv"
    mesh = tmp_path / "mesh.csv"
    assert main(["solve", "--method", "exp_k2", "--T", "1/8", "--tau", "1/16", "--M", "31",
                 "--out", str(out), "--dump-mesh", str(mesh)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["x", "u"] and len(rows) == 32
    assert float(rows[1][0]) == 1 / 32
    assert mesh.read_text().startswith("n,t_n,tau_n")
    assert main(["solve", "--method", "radau2", "--T", "1/8", "--tau", "1/16", "--M", "15"]) == 0
    assert capsys.readouterr().out.startswith("x,u\n")


def test_cli_study(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text(SMALL.replace("T = 1/2, 1/4", "T = 1/4").replace("M = 63", "M = 15"))
    out = tmp_path / "r.csv"
    assert main(["study", "--config", str(cfg), "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3 and rows[0]["method"] == "exp_k2"
    assert main(["study", "--config", str(cfg), "--format", "table"]) == 0
    assert "order of convergence" in capsys.readouterr().out

    bad = tmp_path / "bad.cfg"
    bad.write_text("schema = 1\nmethod = radau2\nT = 1/2\ntau = 1/4, 1/8, 1/16\nM = 7\nnewton_tol = 1e-300\n")
    assert main(["study", "--config", str(bad)]) == 1
    assert "failed" in capsys.readouterr().err


def test_cli_contour_diag(tmp_path, capsys):
    out = tmp_path / "nodes.csv"
    assert main(["contour-diag", "--tau", "0.01", "--K", "16", "--M", "31", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "lambda=" in text and text.count("e-") >= 6
    assert len(out.read_text().splitlines()) == 34
