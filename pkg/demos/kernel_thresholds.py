# %% [markdown]
# # Where the corner sign argument breaks down
#
# Near the corner of the quadrant the velocity generated by the "good" part of
# a patch has a leading coefficient whose sign depends on beta and on the
# opening slope m.  Below a critical beta the signs point inward, which is what
# drives the corner collapse.

# %%
import numpy as np

from alphapatch.singularity import (
    bad_bound,
    combined_coefficient,
    rectangle,
    region_velocity,
    sign_threshold,
)

m = 5.0
for axis in (1, 2):
    print(f"axis {axis}: critical beta at m={m:g} is {sign_threshold(axis, m):.6f}")

# %%
for beta in (0.05, 0.1, 0.15, 0.17, 0.2):
    c1 = combined_coefficient(1, m, beta)
    c2 = combined_coefficient(2, m, beta)
    print(f"beta={beta:.2f}  coef1={c1: .4f}  coef2={c2: .4f}")

# %% [markdown]
# The threshold as a function of the slope.

# %%
for m in (1.5, 2.0, 3.0, 5.0, 8.0):
    print(f"m={m:4.1f}  beta1*={sign_threshold(1, m):.5f}  beta2*={sign_threshold(2, m):.5f}")

# %% [markdown]
# The remaining "bad" part is controlled by an explicit bound.  Compare it with
# region quadrature over a rectangle patch.

# %%
rng = np.random.default_rng(3)
m, beta = 5.0, 0.1
for _ in range(5):
    x1 = rng.uniform(0.05, 1.0)
    x = (x1, rng.uniform(0.05, 1.0) * m * x1)
    val = region_velocity(1, "bad", x, [rectangle(0, 2 * x[0], 0, 2 * x[1])], beta)
    print(f"x=({x[0]:.3f}, {x[1]:.3f})  value={val: .4f}  bound={bad_bound(1, x, m, beta): .4f}")
