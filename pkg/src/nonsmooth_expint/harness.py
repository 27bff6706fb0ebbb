"""Convergence studies by successive refinement.

A study solves one problem for a list of horizons ``T`` and a halving list of
stepsizes ``tau``, then reports ``||u_N^(tau) - u_N^(tau/2)||_inf`` for each
consecutive pair together with observed orders.

Config files are flat ``key = value`` text, one entry per line, ``#`` starts a
comment.  Lists are comma separated and numbers may be written as fractions::

    schema = 1
    problem = allen_cahn
    initial = step
    method = exp_k2
    T = 1/2, 1/4, 1/8, 1/16
    tau = 1/64, 1/128, 1/256, 1/512
    beta = 3/4
    alpha = pi/4
    K_mult = 10
    M = 1023

``method`` may list several methods; one study is run per method.
"""

from __future__ import annotations

import ast
import csv
import math
import operator
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from .contour import k_schedule
from .integrator import SolutionHistory, solve
from .laplacian import DirichletLaplacian1D
from .problems import INITIAL_DATA, PROBLEMS, ProblemSpec
from .reference import METHODS as IMPLICIT_METHODS
from .reference import ImplicitStepperConfig, solve_uniform
from .time_mesh import build_graded_mesh, steps_for_target

__all__ = [
    "StudyConfig",
    "Cell",
    "ConvergenceReport",
    "successive_difference",
    "estimate_order",
    "run_study",
    "emit",
    "load_configs",
    "parse_config",
    "EXP_METHODS",
    "CSV_COLUMNS",
]

EXP_METHODS = {"exp_k1": 1, "exp_k2": 2, "exp_k3": 3}
ALL_METHODS = tuple(EXP_METHODS) + IMPLICIT_METHODS
CSV_COLUMNS = ["method", "T", "tau", "N", "K", "diff_norm", "order_two_point", "order_lsq", "wall_seconds"]
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class StudyConfig:
    method: str = "exp_k2"
    T: tuple[float, ...] = (0.5,)
    tau: tuple[float, ...] = (1 / 64, 1 / 128, 1 / 256, 1 / 512)
    problem: str = "allen_cahn"
    initial: str = "step"
    beta: float = 0.75
    alpha: float = math.pi / 4
    K_mult: float = 10.0
    M: int = 1023
    # time unit in which the grading tau_n ~ tau (t_n / ref)^beta is measured;
    # None means the horizon T itself
    mesh_reference_time: float | None = 1.0
    newton_tol: float = 1e-12
    output: str | None = None
    label: str = ""

    def __post_init__(self):
        if self.method not in ALL_METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {ALL_METHODS}")
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.initial not in INITIAL_DATA:
            raise ValueError(f"unknown initial data {self.initial!r}")
        if len(self.tau) < 3:
            raise ValueError("at least three stepsizes are needed for order estimation")
        for coarse, fine in zip(self.tau, self.tau[1:]):
            if not math.isclose(fine, coarse / 2, rel_tol=1e-12):
                raise ValueError(f"tau list must halve at each entry: {coarse} -> {fine}")
        if not self.T or any(t <= 0 for t in self.T):
            raise ValueError("T list must hold positive horizons")
        if self.M < 1:
            raise ValueError("M must be positive")

    @property
    def is_exponential(self) -> bool:
        return self.method in EXP_METHODS

    def spec(self, T: float) -> ProblemSpec:
        return PROBLEMS[self.problem](T, INITIAL_DATA[self.initial])

    def steps(self, T: float, tau: float) -> int:
        if not self.is_exponential:
            return max(1, round(T / tau))
        ref = T if self.mesh_reference_time is None else self.mesh_reference_time
        return steps_for_target(T, tau * (T / ref) ** self.beta, self.beta)

    def nodes(self, tau: float) -> int | None:
        return k_schedule(tau, self.K_mult) if self.is_exponential else None


@dataclass
class Cell:
    method: str
    T: float
    tau: float
    N: int
    K: int | None
    diff_norm: float | None = None
    wall_seconds: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class ConvergenceReport:
    config: StudyConfig | None = None
    cells: list[Cell] = field(default_factory=list)
    # per T: (two_point, lsq) or None when fewer than two differences exist
    orders: dict[float, tuple[float, float] | None] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cells)

    def diffs(self, T: float) -> list[float]:
        return [c.diff_norm for c in self.cells if c.T == T and c.diff_norm is not None]

    def failures(self) -> list[Cell]:
        return [c for c in self.cells if not c.ok]


def successive_difference(u_coarse: SolutionHistory, u_fine: SolutionHistory) -> float:
    """``max |u_N^(tau) - u_N^(tau/2)|`` between the final states."""
    tc, tf = u_coarse.times[-1], u_fine.times[-1]
    if not math.isclose(tc, tf, rel_tol=1e-12, abs_tol=1e-15):
        raise ValueError(f"histories end at different times: {tc} vs {tf}")
    a, b = u_coarse.final, u_fine.final
    if a.shape != b.shape:
        raise ValueError(f"spatial grids differ: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b)))


def estimate_order(diffs) -> tuple[float, float]:
    """Observed orders from successive differences ordered coarse to fine.

    Returns ``(two_point, lsq)``: ``log2`` of the ratio of the last two
    differences, and the negated least-squares slope of ``log2(diff)`` against
    the refinement index.
    """
    d = np.asarray(diffs, dtype=float)
    if d.size < 2:
        raise ValueError("need at least two differences")
    if np.any(~(d > 0)):
        raise ValueError("differences must be positive")
    logs = np.log2(d)
    two_point = float(logs[-2] - logs[-1])
    slope = np.polyfit(np.arange(d.size), logs, 1)[0]
    return two_point, float(-slope)


def _solve_cell(config: StudyConfig, op: DirichletLaplacian1D, T: float, tau: float) -> SolutionHistory:
    spec = config.spec(T)
    N = config.steps(T, tau)
    if config.is_exponential:
        mesh = build_graded_mesh(T, N, config.beta)
        return solve(op, spec, mesh, EXP_METHODS[config.method], config.nodes(tau), config.alpha)
    stepper = ImplicitStepperConfig(config.method, newton_tol=config.newton_tol)
    return solve_uniform(stepper, op, spec, N)


def run_study(config: StudyConfig, threads: int = 1) -> ConvergenceReport:
    """Solve every ``(T, tau)`` cell and assemble differences and orders.

    Cells are independent and run on up to ``threads`` workers (0 means one
    per CPU).  A failing cell is recorded with its error message; differences
    that would involve it are left empty.
    """
    op = DirichletLaplacian1D(config.M)
    jobs = [(T, tau) for T in config.T for tau in config.tau]
    finals: dict[tuple[float, float], SolutionHistory] = {}
    cells: dict[tuple[float, float], Cell] = {}

    def work(job):
        T, tau = job
        cell = Cell(config.method, T, tau, config.steps(T, tau), config.nodes(tau))
        start = time.perf_counter()
        try:
            hist = _solve_cell(config, op, T, tau)
        except Exception as exc:  # noqa: BLE001 - a failed cell must not stop the study
            hist = None
            cell.error = f"{type(exc).__name__}: {exc}"
        cell.wall_seconds = time.perf_counter() - start
        return job, cell, hist

    workers = (os.cpu_count() or 1) if threads == 0 else max(1, threads)
    if workers == 1:
        results = [work(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))
    for job, cell, hist in results:
        cells[job] = cell
        if hist is not None:
            # keep only the final state to bound memory
            finals[job] = SolutionHistory(times=hist.times[-1:], states=hist.states[-1:])

    report = ConvergenceReport(config=config)
    for T in config.T:
        for coarse, fine in zip(config.tau, config.tau[1:]):
            cell = cells[(T, coarse)]
            if (T, coarse) in finals and (T, fine) in finals:
                cell.diff_norm = successive_difference(finals[(T, coarse)], finals[(T, fine)])
        for tau in config.tau:
            report.cells.append(cells[(T, tau)])
        diffs = report.diffs(T)
        ok = len(diffs) >= 2 and all(d > 0 for d in diffs)
        report.orders[T] = estimate_order(diffs) if ok else None
    return report


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def emit(report: ConvergenceReport, path=None, format: str = "csv") -> str:
    """Render the report as CSV or an aligned text table; write it if ``path`` is given."""
    if format == "csv":
        text = _to_csv(report)
    elif format in ("table", "text", "text-table"):
        text = _to_table(report)
    else:
        raise ValueError(f"unknown format {format!r}")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"could not write report to {path}: {exc}") from exc
    return text


def _to_csv(report: ConvergenceReport) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for c in report.cells:
        orders = report.orders.get(c.T)
        writer.writerow([
            c.method, _fmt(c.T), _fmt(c.tau), c.N, "" if c.K is None else c.K,
            _fmt(c.diff_norm),
            "" if orders is None else _fmt(orders[0]),
            "" if orders is None else _fmt(orders[1]),
            f"{c.wall_seconds:.3f}",
        ])
    return buf.getvalue()


def _frac(x: float) -> str:
    f = Fraction(x).limit_denominator(1 << 20)
    return str(f) if abs(float(f) - x) < 1e-15 * max(1.0, abs(x)) else f"{x:.6g}"


def _to_table(report: ConvergenceReport) -> str:
    lines = []
    by_T: dict[float, list[Cell]] = {}
    for c in report.cells:
        by_T.setdefault(c.T, []).append(c)
    for T, cells in by_T.items():
        method = cells[0].method
        lines.append(f"{method}  T = {_frac(T)}")
        lines.append(f"  {'tau':>8}  {'N':>6}  {'K':>4}  {'||u^(tau) - u^(tau/2)||':>24}")
        for c in cells:
            if not c.ok:
                diff = "FAILED"
            elif c.diff_norm is None:
                diff = "-"
            else:
                diff = f"{c.diff_norm:.3e}"
            K = "-" if c.K is None else str(c.K)
            lines.append(f"  {_frac(c.tau):>8}  {c.N:>6}  {K:>4}  {diff:>24}")
        orders = report.orders.get(T)
        if orders is None:
            lines.append("  order of convergence: n/a")
        else:
            lines.append(f"  order of convergence: {orders[0]:.2f} (finest pair), {orders[1]:.2f} (least squares)")
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# config files


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def _number(text: str) -> float:
    """Evaluate a numeric literal such as ``3/4``, ``1e-12`` or ``pi/4``."""

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        raise ValueError(f"not a numeric expression: {text!r}")

    return float(ev(ast.parse(text.strip().replace("π", "pi"), mode="eval").body))


def _numbers(text: str) -> tuple[float, ...]:
    return tuple(_number(p) for p in text.split(",") if p.strip())


_FLOAT_KEYS = {"beta", "alpha", "K_mult", "newton_tol"}
_INT_KEYS = {"M"}
_STR_KEYS = {"problem", "initial", "output", "label"}


def parse_config(text: str) -> list[StudyConfig]:
    """Parse config text into one ``StudyConfig`` per listed method."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value

    schema = values.pop("schema", None)
    if schema is None or int(schema) != SCHEMA_VERSION:
        raise ValueError(f"config must declare schema = {SCHEMA_VERSION}")

    kwargs: dict = {}
    methods = [m.strip() for m in values.pop("method", "exp_k2").split(",") if m.strip()]
    for key, value in values.items():
        if key in ("T", "tau"):
            kwargs[key] = _numbers(value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = _number(value)
        elif key in _INT_KEYS:
            kwargs[key] = int(value)
        elif key in _STR_KEYS:
            kwargs[key] = value
        elif key == "mesh_reference_time":
            kwargs[key] = None if value in ("T", "horizon") else _number(value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    base = StudyConfig(method=methods[0], **kwargs)
    return [replace(base, method=m) for m in methods]


def load_configs(path) -> list[StudyConfig]:
    return parse_config(Path(path).read_text())
