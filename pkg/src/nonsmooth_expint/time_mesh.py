"""Graded time partitions refined toward t = 0."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TimeMesh",
    "build_graded_mesh",
    "check_order_compatibility",
    "steps_for_target",
    "write_mesh_csv",
]


@dataclass(frozen=True)
class TimeMesh:
    """Partition ``0 = t_0 < t_1 < ... < t_N = T`` with grading exponent ``beta``.

    The points follow ``t_n = T * (n / N) ** gamma`` with ``gamma = 1 / (1 - beta)``,
    so that ``tau_n <= gamma * (T / N) * (t_n / T) ** beta``.
    """

    T: float
    N: int
    beta: float
    points: np.ndarray = field(repr=False)

    @property
    def gamma(self) -> float:
        return 1.0 / (1.0 - self.beta)

    @property
    def steps(self) -> np.ndarray:
        """Stepsizes ``tau_n = t_n - t_{n-1}`` for ``n = 1..N``."""
        return np.diff(self.points)

    @property
    def max_step(self) -> float:
        return float(self.points[-1] - self.points[-2])

    def __len__(self) -> int:
        return self.N + 1


def build_graded_mesh(T: float, N: int, beta: float) -> TimeMesh:
    """Build the graded mesh ``t_n = T (n/N)^{1/(1-beta)}``.

    Parameters
    ----------
    T : float
        Final time, positive.
    N : int
        Number of steps, at least 2.
    beta : float
        Grading exponent in ``[0, 1)``; ``beta = 0`` gives a uniform mesh.
    """
    if not 0.0 <= beta < 1.0:
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N}")
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    N = int(N)
    gamma = 1.0 / (1.0 - beta)
    points = T * (np.arange(N + 1) / N) ** gamma
    # pin the endpoints so that t_N == T bit-for-bit
    points[0] = 0.0
    points[-1] = T
    points.setflags(write=False)
    return TimeMesh(T=float(T), N=N, beta=float(beta), points=points)


def check_order_compatibility(mesh: TimeMesh | float, k: int) -> bool:
    """True iff the grading exponent satisfies ``beta > 1 - 1/k`` strictly."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    beta = mesh.beta if isinstance(mesh, TimeMesh) else float(mesh)
    return beta > 1.0 - 1.0 / k


def steps_for_target(T: float, tau: float, beta: float) -> int:
    """Step count ``N = ceil(gamma T / tau)`` giving a largest step close to ``tau``."""
    gamma = 1.0 / (1.0 - beta)
    # guard against ceil(4.000000000001) on exact ratios
    return max(2, math.ceil(gamma * T / tau - 1e-9))


def write_mesh_csv(mesh: TimeMesh, path) -> None:
    """Dump the mesh as CSV with columns ``n, t_n, tau_n`` (``tau_0`` is empty)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "t_n", "tau_n"])
        writer.writerow([0, repr(float(mesh.points[0])), ""])
        for n in range(1, mesh.N + 1):
            writer.writerow([n, repr(float(mesh.points[n])), repr(float(mesh.points[n] - mesh.points[n - 1]))])
