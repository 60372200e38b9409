# %% [markdown]
# # A disc is a steady state
#
# A single circular patch rotates rigidly, so its boundary should not move
# at all in the normal direction.  The tangential reparametrization term
# lambda should vanish too, which makes this the cleanest check of the
# contour velocity and the time stepper.

# %%
import numpy as np

from alphapatch.config import preset
from alphapatch.evolve import build_initial, run

cfg = preset("steady-circle", t_end=0.2)
res = run(cfg, build_initial(cfg))
print(res.stop_reason, res.final.time, res.final.step_count, "steps")

# %% [markdown]
# Area, radius and lambda over the run.  Everything should sit at roundoff.

# %%
a0 = res.records[0].patches[0].area
for rec in res.records[:: max(1, len(res.records) // 8)]:
    pd = rec.patches[0]
    print(f"t={rec.time:.4f}  area drift={pd.area / a0 - 1: .2e}  "
          f"sup F={pd.sup_F:.12f}  |lambda|={pd.lambda_inf:.1e}")

radius = np.hypot(*res.final.system.contours[0].points.T)
print("max radial deviation", np.max(np.abs(radius - 1.0)))

# %% [markdown]
# The blow-up criterion integrand is constant on a steady state, so its
# running integral grows linearly.

# %%
last = res.records[-1]
print("integrand", last.criterion_integrand)
print("integral / (integrand * t) - 1 =",
      last.cumulative_criterion / (last.criterion_integrand * last.time) - 1)
