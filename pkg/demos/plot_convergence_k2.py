"""
Second-order convergence from a discontinuous start
===================================================

The Allen-Cahn equation ``u_t - u_xx = u - u^3`` with a step initial profile
is solved by the two-step exponential method for halving step sizes.  The
successive differences ``||u^(tau) - u^(tau/2)||`` drop by about four at each
halving.

This runs a reduced grid (``M = 255``) so it finishes in seconds; the full
table is ``nonsmooth-expint study --config configs/table_k2.cfg``.
"""

from nonsmooth_expint import StudyConfig, emit, run_study

config = StudyConfig(method="exp_k2", T=(0.5, 0.125), tau=(1 / 32, 1 / 64, 1 / 128, 1 / 256), M=255)
report = run_study(config)
print(emit(report, format="table"))

# %%
# The same study with ``k = 3`` needs no change of mesh since
# ``beta = 3/4 > 1 - 1/3``.
report3 = run_study(StudyConfig(method="exp_k3", T=(0.5,), tau=config.tau, M=255))
print(emit(report3, format="table"))
