import numpy as np
import pytest

from alphapatch.config import make_config, preset
from alphapatch.curve import (
    SampledField,
    area,
    circle,
    contour_from_function,
    length,
    speed_defect,
)
from alphapatch.dynamics import PatchSystem, VelocityBundle, rhs
from alphapatch.errors import VelocityBlowup
from alphapatch.evolve import (
    SimulationState,
    build_initial,
    choose_dt,
    enforce_parametrization,
    mirror_defect,
    run,
    step_rk4,
)


def bundle_with(values_list):
    fields = tuple(SampledField(v) for v in values_list)
    zeros = tuple(SampledField(np.zeros(len(v))) for v in values_list)
    return VelocityBundle(fields, zeros, fields)


# -- step size -----------------------------------------------------------------

def test_dt_for_uniform_rotation():
    c = circle(64)
    v = 0.7
    d = c.dz(1)
    vel = v * np.column_stack([d.real, d.imag])  # rigid rotation, |rhs| = v
    dt = choose_dt(PatchSystem((c,), (1.0,)), bundle_with([vel]), 0.5, dt_max=10.0)
    s = length(c) / c.n_nodes
    assert 0.5 * (0.5 * s / v) <= dt <= 2 * (0.5 * s / v)


def test_dt_zero_velocity_hits_cap():
    c = circle(32)
    dt = choose_dt(PatchSystem((c,), (1.0,)), bundle_with([np.zeros((32, 2))]), 0.5, dt_max=0.01)
    assert dt == 0.01


def test_dt_inverse_to_spike():
    c = circle(64)
    sys = PatchSystem((c,), (1.0,))
    dts = []
    for big in (1e3, 1e4):
        vel = np.zeros((64, 2))
        vel[10, 0] = big
        dts.append(choose_dt(sys, bundle_with([vel]), 0.5, dt_max=10.0))
    assert abs(dts[0] / dts[1] - 10.0) < 0.5


def test_dt_blowup_and_bad_cfl():
    c = circle(32)
    vel = np.zeros((32, 2))
    vel[0, 0] = 1e9
    with pytest.raises(VelocityBlowup):
        choose_dt(PatchSystem((c,), (1.0,)), bundle_with([vel]), 0.5)
    with pytest.raises(ValueError):
        choose_dt(PatchSystem((c,), (1.0,)), bundle_with([vel * 0]), 1.5)


# -- RK4 -----------------------------------------------------------------------

def test_single_step_keeps_circle():
    sys = PatchSystem((circle(128),), (1.0,), alpha=0.5)
    st = step_rk4(SimulationState(0.0, sys), 0.005)
    c = st.system.contours[0]
    assert abs(area(c) / np.pi - 1) < 1e-10
    assert np.max(np.abs(np.hypot(*c.points.T) - 1.0)) < 1e-8
    assert st.time == 0.005 and st.step_count == 1
    assert st.cumulative_criterion > 0


def test_zero_step_is_identity():
    sys = PatchSystem((circle(32),), (1.0,))
    st = SimulationState(0.3, sys, 4, 1.5)
    assert step_rk4(st, 0.0) is st


# -- parametrization -----------------------------------------------------------

def test_enforce_keeps_constant_speed_system():
    sys = PatchSystem((circle(64),), (1.0,))
    assert enforce_parametrization(sys, 1e-3) is sys


def test_enforce_fixes_perturbed_circle():
    c = contour_from_function(lambda g: (np.cos(g + 0.2 * np.sin(g)), np.sin(g + 0.2 * np.sin(g))), 128)
    sys = enforce_parametrization(PatchSystem((c,), (1.0,)), 1e-6)
    out = sys.contours[0]
    assert speed_defect(out) < 1e-6
    assert abs(area(out) / area(c) - 1) < 1e-10


# -- driver --------------------------------------------------------------------

def test_short_circle_run():
    cfg = make_config(n_nodes=64, t_end=0.1, snapshot_times=[0.05, 0.1])
    res = run(cfg, build_initial(cfg))
    assert res.stop_reason == "t_end"
    assert res.final.time == 0.1
    assert [t for t, _ in res.snapshots] == [0.05, 0.1]
    first, last = res.records[0].patches[0], res.records[-1].patches[0]
    assert abs(last.area / first.area - 1) < 1e-6
    assert abs(last.sup_F / first.sup_F - 1) < 1e-4
    cum = [r.cumulative_criterion for r in res.records]
    assert all(b >= a for a, b in zip(cum, cum[1:]))


def test_zero_end_time_gives_one_record():
    cfg = make_config(n_nodes=32, t_end=0.0)
    res = run(cfg, build_initial(cfg))
    assert res.stop_reason == "t_end"
    assert len(res.records) == 1 and res.final.step_count == 0


def test_approaching_patches_stop_on_distance():
    cfg = preset("two-patch-approach", n_nodes=64)
    res = run(cfg, build_initial(cfg))
    assert res.stop_reason == "min_distance"
    assert res.mirror_defects and max(d for _, d in res.mirror_defects) < 1e-10


def test_max_steps_stop():
    cfg = make_config(n_nodes=32, t_end=1.0, max_steps=3)
    res = run(cfg, build_initial(cfg))
    assert res.stop_reason == "max_steps" and res.final.step_count == 3


def test_replay_is_bitwise_identical():
    cfg = make_config(n_nodes=32, t_end=0.05, initial={"kind": "ellipse", "a": 1.5, "b": 1.0})
    a = run(cfg, build_initial(cfg))
    b = run(cfg, build_initial(cfg))
    assert np.array_equal(a.final.system.contours[0].points, b.final.system.contours[0].points)
    assert [r.to_row() for r in a.records] == [r.to_row() for r in b.records]


def test_mirror_defect_none_for_single_patch():
    assert mirror_defect(PatchSystem((circle(16),), (1.0,))) is None
