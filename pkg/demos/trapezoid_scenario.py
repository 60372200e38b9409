# %% [markdown]
# # Odd patch pair in the half plane
#
# The initial patch sits between two boxes near the origin corner and is
# mirrored with opposite sign across the vertical axis.  A shrinking trapezoid
# barrier whose tip reaches the origin in finite time must stay inside the
# patch, and at t = 0 this comes down to two sign conditions on the velocity.

# %%
import warnings

import numpy as np

from alphapatch.config import preset
from alphapatch.evolve import build_initial, mirror_defect, run
from alphapatch.singularity import (
    TrapezoidBarrier,
    barrier_X,
    barrier_containment,
    check_scenario_inclusions,
    scenario_sign_check,
)

eps, m, beta = 0.05, 5.0, 0.15
cfg = preset("krzy-scenario", t_end=0.02, snapshot_times=[])
sys = build_initial(cfg)
print("inclusions", check_scenario_inclusions(sys.contours[0], eps))
print("mirror defect", mirror_defect(sys))

# %%
barrier = TrapezoidBarrier(eps, m, 0.5, 1.0, beta)
print("barrier collapses at T =", barrier.collision_time)
for t in np.linspace(0, barrier.collision_time, 5):
    print(f"  X({t:.3f}) = {barrier_X(t, barrier):.5f}")

# %%
sc = scenario_sign_check(sys, barrier)
print("u1 on vertical side:", np.round(sc.u1, 3))
print("u2 on sloped side:  ", np.round(sc.u2, 3))
print("u1 < 0:", sc.u1_negative, " u2 > 0:", sc.u2_positive)

# %% [markdown]
# A short evolution.  The pair stays odd and the barrier stays inside.

# %%
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    res = run(cfg, sys)
ok, margin = barrier_containment(res.final.system, barrier, res.final.time, quad_n=0)
print(res.stop_reason, "t =", res.final.time)
print("mirror defect", mirror_defect(res.final.system))
print("barrier contained", ok, "margin", margin)
