"""Fully implicit one-step baselines: Crank-Nicolson, 2-stage Gauss and Radau IIA.

Stage equations are solved by Newton's method with the exact Jacobian
``A + diag(f_u)``.  For the two-stage methods the unknowns of both stages are
interleaved point by point, which makes the Newton matrix banded with three
sub- and super-diagonals.

Tableaux
--------
Gauss-Legendre, order 4::

    1/2 - sqrt(3)/6 | 1/4               1/4 - sqrt(3)/6
    1/2 + sqrt(3)/6 | 1/4 + sqrt(3)/6   1/4
    ----------------+----------------------------------
                    | 1/2               1/2

Radau IIA, order 3::

    1/3 | 5/12  -1/12
    1   | 3/4    1/4
    ----+------------
        | 3/4    1/4
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .integrator import SolutionHistory
from .laplacian import DirichletLaplacian1D
from .problems import ProblemSpec, sample_initial_data

__all__ = [
    "ImplicitStepperConfig",
    "NewtonFailure",
    "TABLEAUX",
    "implicit_step",
    "solve_uniform",
    "stability_function",
]

_S3 = np.sqrt(3.0)
TABLEAUX = {
    "gauss2": (
        np.array([[0.25, 0.25 - _S3 / 6], [0.25 + _S3 / 6, 0.25]]),
        np.array([0.5, 0.5]),
        np.array([0.5 - _S3 / 6, 0.5 + _S3 / 6]),
    ),
    "radau2": (
        np.array([[5 / 12, -1 / 12], [0.75, 0.25]]),
        np.array([0.75, 0.25]),
        np.array([1 / 3, 1.0]),
    ),
}
METHODS = ("crank_nicolson", "gauss2", "radau2")


class NewtonFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class ImplicitStepperConfig:
    method: str = "radau2"
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be >= 1")


def stability_function(method: str, z):
    """Rational stability function ``r(z)`` of the baseline (closed form)."""
    z = np.asarray(z, dtype=complex)
    if method == "crank_nicolson":
        return (1 + z / 2) / (1 - z / 2)
    if method == "gauss2":
        return (1 + z / 2 + z**2 / 12) / (1 - z / 2 + z**2 / 12)
    if method == "radau2":
        return (1 + z / 3) / (1 - 2 * z / 3 + z**2 / 6)
    raise ValueError(method)


def _crank_nicolson(config, op, spec, t, tau, u_prev):
    s = op.scale
    M = op.M
    # explicit half is fixed during the Newton loop
    known = u_prev + 0.5 * tau * (op.apply(u_prev) + spec.f(t, u_prev))
    u = u_prev.copy()
    ab = np.empty((3, M))
    for it in range(config.newton_max_iter):
        R = u - 0.5 * tau * (op.apply(u) + spec.f(t + tau, u)) - known
        ab[0, 1:] = -0.5 * tau * s
        ab[2, :-1] = -0.5 * tau * s
        ab[1] = 1.0 - 0.5 * tau * (-2.0 * s + spec.df_du(t + tau, u))
        delta = solve_banded((1, 1), ab, -R, check_finite=False)
        u += delta
        if not np.all(np.isfinite(u)):
            break
        if np.max(np.abs(delta)) <= config.newton_tol:
            return u
    raise NewtonFailure(
        f"crank_nicolson Newton did not converge at t={t:.6g}: "
        f"|delta|={np.max(np.abs(delta)):.3e}, |R|={np.max(np.abs(R)):.3e}")


def _stage_matrix(op, tau, a, fprime) -> np.ndarray:
    """Banded storage of ``I - tau * (a kron J)`` with stage-interleaved unknowns."""
    M = op.M
    s = op.scale
    ab = np.zeros((7, 2 * M))
    for p in range(2):
        for q in range(2):
            coeff = tau * a[p, q]
            ab[3 + p - q, q::2] = (1.0 if p == q else 0.0) - coeff * (-2.0 * s + fprime[q])
            # coupling to the right neighbour lives in columns 2(i+1)+q
            ab[1 + p - q, 2 + q::2] = -coeff * s
            # coupling to the left neighbour lives in columns 2(i-1)+q
            ab[5 + p - q, q:2 * M - 2:2] = -coeff * s
    return ab


def _two_stage(config, op, spec, t, tau, u_prev):
    a, b, c = TABLEAUX[config.method]
    d = np.linalg.solve(a.T, b)  # u_next = u_prev + d . Z
    M = op.M
    Z = np.zeros((2, M))
    for it in range(config.newton_max_iter):
        U = u_prev + Z
        F = np.stack([op.apply(U[q]) + spec.f(t + c[q] * tau, U[q]) for q in range(2)])
        R = Z - tau * (a @ F)
        fprime = [spec.df_du(t + c[q] * tau, U[q]) for q in range(2)]
        ab = _stage_matrix(op, tau, a, fprime)
        rhs = -R.T.reshape(-1)
        delta = solve_banded((3, 3), ab, rhs, check_finite=False).reshape(M, 2).T
        Z += delta
        if not np.all(np.isfinite(Z)):
            break
        if np.max(np.abs(delta)) <= config.newton_tol:
            return u_prev + d @ Z
    raise NewtonFailure(
        f"{config.method} Newton did not converge at t={t:.6g}: "
        f"|delta|={np.max(np.abs(delta)):.3e}, |R|={np.max(np.abs(R)):.3e}")


def implicit_step(config: ImplicitStepperConfig, op: DirichletLaplacian1D, spec: ProblemSpec,
                  t_prev: float, tau: float, u_prev) -> np.ndarray:
    """Advance ``u_prev`` from ``t_prev`` by ``tau`` with the configured method."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    u_prev = np.asarray(u_prev, dtype=float)
    if config.method == "crank_nicolson":
        return _crank_nicolson(config, op, spec, t_prev, tau, u_prev)
    return _two_stage(config, op, spec, t_prev, tau, u_prev)


def solve_uniform(config: ImplicitStepperConfig, op: DirichletLaplacian1D, spec: ProblemSpec,
                  N_steps: int, *, u0=None) -> SolutionHistory:
    """Uniform sweep with ``tau = T / N_steps``."""
    if N_steps < 1:
        raise ValueError(f"N_steps must be >= 1, got {N_steps}")
    times = spec.T * np.arange(N_steps + 1) / N_steps
    times[-1] = spec.T
    states = np.empty((N_steps + 1, op.M))
    states[0] = sample_initial_data(spec, op) if u0 is None else u0
    for n in range(1, N_steps + 1):
        states[n] = implicit_step(config, op, spec, times[n - 1], times[n] - times[n - 1], states[n - 1])
    return SolutionHistory(times=times, states=states, method=config.method)
