"""Semilinear heat problems ``u_t - u_xx = f(t, u)`` on (0, 1) with Dirichlet data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .laplacian import DirichletLaplacian1D

__all__ = [
    "ProblemSpec",
    "step_initial_data",
    "allen_cahn",
    "heat",
    "sample_initial_data",
    "PROBLEMS",
    "INITIAL_DATA",
]


@dataclass(frozen=True)
class ProblemSpec:
    """Horizon, initial data and a pointwise nonlinearity.

    ``f(t, u)`` and ``df_du(t, u)`` act elementwise on arrays of grid values.
    """

    T: float
    u0: Callable[[np.ndarray], np.ndarray]
    f: Callable[[float, np.ndarray], np.ndarray]
    df_du: Callable[[float, np.ndarray], np.ndarray]
    label: str = ""

    def with_horizon(self, T: float) -> "ProblemSpec":
        return ProblemSpec(T=T, u0=self.u0, f=self.f, df_du=self.df_du, label=self.label)


def step_initial_data(x):
    """0 on (0, 0.5], 1 on (0.5, 1); the jump point itself takes the value 0."""
    return np.where(np.asarray(x) > 0.5, 1.0, 0.0)


def sine_initial_data(x):
    return np.sin(np.pi * np.asarray(x))


def zero_initial_data(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _cubic(t, u):
    return u - u**3


def _cubic_prime(t, u):
    return 1.0 - 3.0 * u**2


def _zero(t, u):
    return np.zeros_like(u)


def allen_cahn(T: float = 0.5, u0=step_initial_data) -> ProblemSpec:
    """``u_t - u_xx = u - u^3`` with the discontinuous step as default initial data."""
    return ProblemSpec(T=T, u0=u0, f=_cubic, df_du=_cubic_prime, label="allen_cahn")


def heat(T: float = 0.5, u0=step_initial_data) -> ProblemSpec:
    """The linear heat equation (``f = 0``)."""
    return ProblemSpec(T=T, u0=u0, f=_zero, df_du=_zero, label="heat")


def sample_initial_data(spec: ProblemSpec, op: DirichletLaplacian1D | int) -> np.ndarray:
    if not isinstance(op, DirichletLaplacian1D):
        op = DirichletLaplacian1D(int(op))
    return op.sample(spec.u0)


PROBLEMS = {"allen_cahn": allen_cahn, "heat": heat}
INITIAL_DATA = {"step": step_initial_data, "sine": sine_initial_data, "zero": zero_initial_data}
