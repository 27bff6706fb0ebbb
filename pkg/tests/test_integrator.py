import math

import numpy as np
import pytest

from nonsmooth_expint.contour import build_contour
from nonsmooth_expint.extrapolation import build_stencil
from nonsmooth_expint.integrator import (
    SolverDivergence,
    exp_euler_step,
    multistep_step,
    regularity_probe,
    solve,
)
from nonsmooth_expint.laplacian import DirichletLaplacian1D
from nonsmooth_expint.problems import ProblemSpec, allen_cahn, heat, step_initial_data, zero_initial_data
from nonsmooth_expint.time_mesh import build_graded_mesh


def linear_source(c=None):
    # f(u) = u, or the constant c when given
    if c is None:
        return ProblemSpec(T=1.0, u0=step_initial_data, f=lambda t, u: u, df_du=lambda t, u: np.ones_like(u))
    return ProblemSpec(T=1.0, u0=step_initial_data, f=lambda t, u: np.full_like(u, c),
                       df_du=lambda t, u: np.zeros_like(u))


def test_exp_euler_propagates_eigenvector():
    op = DirichletLaplacian1D(127)
    tau = 0.01
    rule = build_contour(tau, 48)
    for m in (1, 5, 60):
        v = op.eigenvector(m)
        out = exp_euler_step(op, rule, tau, v, np.zeros(op.M))
        assert np.max(np.abs(out - math.exp(tau * op.eigenvalues[m - 1]) * v)) <= 1e-9


def test_exp_euler_zero():
    op = DirichletLaplacian1D(15)
    rule = build_contour(0.1, 16)
    np.testing.assert_array_equal(exp_euler_step(op, rule, 0.1, np.zeros(15), np.zeros(15)), 0)


def test_exp_euler_scalar_closed_form():
    op = DirichletLaplacian1D(1)
    tau = 0.01
    out = exp_euler_step(op, build_contour(tau, 48), tau, np.array([1.0]), np.array([1.0]))
    e = math.exp(-0.08)
    expected = e + (1 - e) / 8
    assert expected == pytest.approx(0.9327268030883062, rel=1e-15)
    assert out[0] == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("k", [2, 3])
def test_multistep_constant_source_scalar(k):
    op = DirichletLaplacian1D(1)
    tau, c = 0.02, 2.5
    stencil = build_stencil(np.linspace(0.0, 0.01 * (k - 1), k) if k > 1 else [0.0], k)
    out = multistep_step(op, build_contour(tau, 48), tau, stencil, np.array([1.0]), np.full((k, 1), c))
    e = math.exp(-8 * tau)
    assert out[0] == pytest.approx(e + c * (1 - e) / 8, abs=1e-12)


def test_multistep_with_zero_source_is_pure_propagation():
    op = DirichletLaplacian1D(63)
    u = op.sample(step_initial_data)
    rule = build_contour(0.01, 32)
    stencil = build_stencil([0.0, 0.004, 0.01])
    a = multistep_step(op, rule, 0.01, stencil, u, np.zeros((3, op.M)))
    b = exp_euler_step(op, rule, 0.01, u, np.zeros(op.M))
    np.testing.assert_array_equal(a, b)


def test_single_node_stencil_matches_exp_euler():
    op = DirichletLaplacian1D(63)
    u = op.sample(step_initial_data)
    f = u - u**3 + 0.3
    rule = build_contour(0.01, 32)
    a = multistep_step(op, rule, 0.01, build_stencil([0.5], 1), u, f[None])
    b = exp_euler_step(op, rule, 0.01, u, f)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)


def test_linear_problem_matches_spectral_oracle():
    op = DirichletLaplacian1D(255)
    mesh = build_graded_mesh(1 / 16, 64, 0.75)
    hist = solve(op, heat(1 / 16), mesh, 2, 48)
    exact = op.exact_propagator(1 / 16, op.sample(step_initial_data))
    assert np.max(np.abs(hist.final - exact)) <= 1e-8
    assert hist.N == 64 and hist.states.shape == (65, 255)
    assert list(hist.K_used) == [48] * 64


def test_zero_data_is_a_fixed_point():
    op = DirichletLaplacian1D(31)
    hist = solve(op, allen_cahn(0.5, zero_initial_data), build_graded_mesh(0.5, 32, 0.75), 2, 16)
    np.testing.assert_array_equal(hist.states, 0)


def test_k1_solver_equals_exp_euler_loop():
    op = DirichletLaplacian1D(31)
    spec = allen_cahn(0.25)
    mesh = build_graded_mesh(0.25, 20, 0.5)
    hist = solve(op, spec, mesh, 1, 16)
    u = op.sample(step_initial_data)
    for n in range(1, mesh.N + 1):
        tau = mesh.points[n] - mesh.points[n - 1]
        u = exp_euler_step(op, build_contour(tau, 16), tau, u, spec.f(0, u))
        np.testing.assert_allclose(hist.states[n], u, rtol=0, atol=1e-15)


def test_argument_checks():
    op = DirichletLaplacian1D(7)
    with pytest.raises(ValueError, match="too weak"):
        solve(op, allen_cahn(), build_graded_mesh(0.5, 16, 0.5), 3, 16)
    with pytest.raises(ValueError, match="K must be"):
        solve(op, allen_cahn(), build_graded_mesh(0.5, 16, 0.75), 2, 7)
    # strict=False lets a weakly graded mesh through
    solve(op, allen_cahn(), build_graded_mesh(0.5, 16, 0.0), 2, 8, strict=False)


def test_divergence_reports_step():
    op = DirichletLaplacian1D(7)
    blowup = ProblemSpec(T=1.0, u0=step_initial_data, f=lambda t, u: np.where(t > 0.2, np.nan, u),
                         df_du=lambda t, u: np.ones_like(u))
    with pytest.raises(SolverDivergence) as info:
        solve(op, blowup, build_graded_mesh(1.0, 16, 0.75), 2, 16)
    assert info.value.n >= 1
    assert info.value.t > 0.2


def test_regularity_probe_stays_bounded():
    op = DirichletLaplacian1D(255)
    hist = solve(op, allen_cahn(0.5), build_graded_mesh(0.5, 256, 0.75), 2, 40)
    probe = regularity_probe(hist)
    assert np.all(np.isfinite(probe))
    half = len(probe) // 2
    # no growth trend: later values do not exceed the early ones
    assert probe[half:].max() <= 2 * probe[:half].max()
