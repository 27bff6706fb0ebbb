"""Exponential multistep integration of semilinear parabolic problems with nonsmooth data."""

from .contour import ContourRule, build_contour, k_schedule, quadrature_apply
from .extrapolation import ExtrapolationStencil, build_stencil, ghat_at, laplace_at
from .harness import ConvergenceReport, StudyConfig, emit, estimate_order, load_configs, run_study
from .integrator import SolutionHistory, SolverDivergence, exp_euler_step, multistep_step, solve
from .laplacian import DirichletLaplacian1D, SingularShiftError
from .problems import ProblemSpec, allen_cahn, heat, sample_initial_data, step_initial_data
from .reference import ImplicitStepperConfig, implicit_step, solve_uniform, stability_function
from .time_mesh import TimeMesh, build_graded_mesh, check_order_compatibility, steps_for_target

__version__ = "0.1.0"
