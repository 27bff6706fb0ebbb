"""
Graded time meshes
==================

A step function as initial data makes ``u'(t)`` blow up like ``1/t`` at the
origin.  Steps of the form ``t_n = T (n/N)^gamma`` put many small steps near
zero and keep the step size proportional to ``t_n^beta`` afterwards.
"""

import numpy as np

from nonsmooth_expint import build_graded_mesh, check_order_compatibility

# %%
# With ``beta = 3/4`` the exponent is ``gamma = 4``: the first step is
# ``N^-4`` times the horizon, the last one roughly ``gamma T / N``.
mesh = build_graded_mesh(0.5, 64, 0.75)
print("gamma           ", mesh.gamma)
print("first step      ", mesh.steps[0])
print("last step       ", mesh.max_step, " gamma*T/N =", mesh.gamma * 0.5 / 64)

# %%
# The steps respect ``tau_n <= gamma (T/N) (t_n/T)^beta`` everywhere, and the
# bound is almost attained away from the origin.
bound = mesh.gamma * (mesh.T / mesh.N) * (mesh.points[1:] / mesh.T) ** mesh.beta
ratio = mesh.steps / bound
print("tau_n / bound at n = 1, N/4, N/2, N:", np.round(ratio[[0, 15, 31, 63]], 4))

# %%
# An order-k method needs ``beta > 1 - 1/k``.  Both experiments below use 3/4.
for k in (1, 2, 3, 4):
    print(f"k={k}: compatible with beta=3/4 -> {check_order_compatibility(0.75, k)}")
