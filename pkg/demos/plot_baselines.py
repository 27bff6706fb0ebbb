"""
Classical implicit methods on nonsmooth data
============================================

Crank-Nicolson and the two-stage Gauss method are A-stable but have
``|r(-inf)| = 1``: the highest grid modes of the jump are never damped, so
successive differences stay at the size of the jump.  Radau IIA damps them
(``r(-inf) = 0``) but loses its classical order.
"""

import numpy as np

from nonsmooth_expint import StudyConfig, emit, run_study
from nonsmooth_expint.reference import stability_function

# %%
# The behaviour follows from the stability functions at large negative ``z``.
for method in ("crank_nicolson", "gauss2", "radau2"):
    print(f"{method:>15}: r(-1e8) = {stability_function(method, -1e8).real:+.6f}")

# %%
# A coarse version of the comparison (``M = 1023`` instead of ``16383``).  The
# differences stay at the size of the jump however small the step.  Radau is
# left out here: on this grid its differences are already near the spatial
# resolution limit and the order estimate is not meaningful.  Run
# ``configs/comparison.cfg`` for the full-resolution table.
for method in ("crank_nicolson", "gauss2"):
    report = run_study(StudyConfig(method=method, T=(0.5,), tau=(1 / 64, 1 / 128, 1 / 256, 1 / 512), M=1023))
    print(emit(report, format="table"))

# %%
# With smooth data the same Radau solver shows its classical order, which
# separates the loss of order from an implementation defect.
report = run_study(StudyConfig(method="radau2", initial="sine", T=(0.5,), tau=(1 / 8, 1 / 16, 1 / 32, 1 / 64), M=63))
print("smooth data, radau2 orders:", np.round(report.orders[0.5], 2))
