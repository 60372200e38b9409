"""Time integration of the contour system (classical RK4 with CFL step control)."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import SimulationConfig
from .curve import (
    Contour,
    arc_chord,
    circle,
    ellipse,
    length,
    reparametrize_constant_speed,
    spectral_diff,
    speed_defect,
)
from .diagnostics import DiagnosticsRecord, blowup_integrand, collect, default_p, min_patch_distance
from .dynamics import Geometry, PatchSystem, VelocityBundle, rhs
from .errors import (
    AlphaPatchError,
    ChordBelowFloor,
    PatchOverlap,
    SelfIntersection,
    StepRejected,
    VelocityBlowup,
    WallSingularity,
)


@dataclass(frozen=True)
class SimulationState:
    time: float
    system: PatchSystem
    step_count: int = 0
    cumulative_criterion: float = 0.0


@dataclass
class RunResult:
    records: list[DiagnosticsRecord]
    snapshots: list[tuple[float, PatchSystem]]
    final: SimulationState
    stop_reason: str
    mirror_defects: list[tuple[float, float]] = field(default_factory=list)
    message: str = ""


def _quiet_rhs(sys: PatchSystem, max_defect: float) -> VelocityBundle:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WallSingularity)
        return rhs(sys, max_defect)


def choose_dt(sys: PatchSystem, bundle: VelocityBundle, cfl: float, dt_max: float = 0.01,
              floor: float = 1e-12, velocity_max: float = 1e8) -> float:
    """cfl * min_k (arclength spacing) / max(|rhs| + |d rhs| h, floor), capped by dt_max."""
    if not 0.0 < cfl <= 1.0:
        raise ValueError(f"cfl must lie in (0, 1], got {cfl}")
    dt = dt_max
    for c, r in zip(sys.contours, bundle.rhs):
        v = r.values
        speed = np.hypot(v[:, 0], v[:, 1])
        vmax = float(speed.max()) if speed.size else 0.0
        if not math.isfinite(vmax) or vmax > velocity_max:
            raise VelocityBlowup(f"|rhs| = {vmax:.3e} exceeds {velocity_max:.3e}")
        dv = spectral_diff(v, 1)
        rate = float(np.max(speed + np.hypot(dv[:, 0], dv[:, 1]) * c.h))
        spacing = length(c) / c.n_nodes
        dt = min(dt, cfl * spacing / max(rate, floor))
    return dt


def enforce_parametrization(sys: PatchSystem, tol: float) -> PatchSystem:
    """Reparametrize to constant speed every contour whose speed defect exceeds tol."""
    out = []
    changed = False
    for c in sys.contours:
        if speed_defect(c) > tol:
            c = reparametrize_constant_speed(c, tol=min(1e-10, tol))
            changed = True
        out.append(c)
    return sys.with_contours(out) if changed else sys


def _advance(sys: PatchSystem, k: Sequence[np.ndarray], scale: float) -> PatchSystem:
    return sys.with_contours([c.with_points(c.points + scale * kk)
                              for c, kk in zip(sys.contours, k)])


def step_rk4(state: SimulationState, dt: float, *, bundle: VelocityBundle | None = None,
             reparam_tol: float = 1e-3, max_speed_defect: float = 0.05,
             p: float | None = None, step_growth_factor: float = 10.0) -> SimulationState:
    """One classical RK4 step of all node positions.

    The criterion integral is advanced with the integrand at the start of the
    step (left-endpoint rule).  Raises StepRejected if the arc-chord sup grows
    by more than ``step_growth_factor`` within the step.
    """
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    if dt == 0:
        return state
    sys = state.system
    if bundle is None:
        bundle = _quiet_rhs(sys, max_speed_defect)
    p = default_p(sys.alpha) if p is None else p
    sup0 = max(arc_chord(c, sys.floor_rel).sup_value for c in sys.contours)
    integrand = blowup_integrand(sys, p, sup0)
    k1 = [r.values for r in bundle.rhs]
    k2 = [r.values for r in _quiet_rhs(_advance(sys, k1, 0.5 * dt), max_speed_defect).rhs]
    k3 = [r.values for r in _quiet_rhs(_advance(sys, k2, 0.5 * dt), max_speed_defect).rhs]
    k4 = [r.values for r in _quiet_rhs(_advance(sys, k3, dt), max_speed_defect).rhs]
    incr = [(a + 2.0 * b + 2.0 * c + d) / 6.0 for a, b, c, d in zip(k1, k2, k3, k4)]
    new = _advance(sys, incr, dt)
    new = enforce_parametrization(new, reparam_tol)
    sup1 = max(arc_chord(c, new.floor_rel).sup_value for c in new.contours)
    if sup1 > step_growth_factor * sup0:
        raise StepRejected(f"arc-chord sup grew from {sup0:.3e} to {sup1:.3e} in one step")
    return SimulationState(state.time + dt, new, state.step_count + 1,
                           state.cumulative_criterion + dt * integrand)


def mirror_defect(sys: PatchSystem) -> float | None:
    """max_i |x_2(gamma_i) - M x_1(-gamma_i)| for an odd-symmetric pair, else None."""
    if sys.n_patches != 2 or sys.strengths[0] != -sys.strengths[1]:
        return None
    a, b = sys.contours
    if a.n_nodes != b.n_nodes:
        return None
    idx = (-np.arange(a.n_nodes)) % a.n_nodes
    mirrored = a.points[idx] * np.array([-1.0, 1.0])
    return float(np.max(np.hypot(*(b.points - mirrored).T)))


def build_initial(config: SimulationConfig, contours: Sequence[Contour] | None = None) -> PatchSystem:
    """Initial PatchSystem described by ``config.initial`` (or explicit contours)."""
    from .singularity import build_scenario_initial_data

    init = dict(config.initial)
    kind = init.get("kind")
    n = config.n_nodes
    if kind == "scenario":
        return build_scenario_initial_data(config.epsilon, config.m, config.a, n,
                                           config.smoothing, config.alpha,
                                           config.normalization)
    if kind == "files" or contours is not None:
        if not contours:
            raise ValueError("initial.kind 'files' needs contour files")
        cs = list(contours)
    elif kind == "circle":
        cs = [circle(n, init.get("radius", 1.0), tuple(init.get("center", (0.0, 0.0))))]
    elif kind == "ellipse":
        c = ellipse(n, init.get("a", 2.0), init.get("b", 1.0), tuple(init.get("center", (0.0, 0.0))))
        cs = [reparametrize_constant_speed(c, tol=1e-10)]
    elif kind == "two-circles":
        r = init.get("radius", 0.4)
        cx, cy = init.get("center", (0.6, 0.5))
        right = circle(n, r, (cx, cy), label="right")
        idx = (-np.arange(n)) % n
        left = right.with_points(right.points[idx] * np.array([-1.0, 1.0]))
        cs = [right, Contour(left.points, "left")]
    else:
        raise ValueError(f"unknown initial kind {kind!r}")
    strengths = config.strengths or tuple([1.0] * len(cs))
    if len(strengths) != len(cs):
        raise ValueError("strengths must match the number of contours")
    return PatchSystem(tuple(cs), strengths, Geometry(config.geometry), config.alpha,
                       config.normalization, config.floor_rel)


def run(config: SimulationConfig, initial: PatchSystem,
        observer: Callable[[SimulationState], None] | None = None) -> RunResult:
    """Integrate to ``t_end`` or until a stop condition fires.

    Diagnostics are recorded every ``output_cadence`` steps and at the final
    state; steps are shortened to land exactly on snapshot times and t_end.
    ``observer`` is called with the state at every recorded step.
    """
    state = SimulationState(0.0, initial)
    records: list[DiagnosticsRecord] = []
    snapshots: list[tuple[float, PatchSystem]] = []
    defects: list[tuple[float, float]] = []
    targets = sorted({float(t) for t in config.snapshot_times if 0.0 <= t <= config.t_end})
    if targets and targets[0] == 0.0:
        snapshots.append((0.0, initial))
        targets.pop(0)

    sup_init = max(arc_chord(c, initial.floor_rel).sup_value for c in initial.contours)
    dist_init = min_patch_distance(initial).delta
    p = config.p

    def record(st: SimulationState, bundle: VelocityBundle) -> None:
        rec = collect(st.system, bundle, st.time, st.cumulative_criterion, p, config.holder_delta)
        records.append(rec)
        md = mirror_defect(st.system)
        if md is not None:
            defects.append((st.time, md))
        if observer is not None:
            observer(st)

    stop = None
    message = ""
    bundle = None
    last_recorded = -1
    while True:
        try:
            bundle = _quiet_rhs(state.system, config.max_speed_defect)
        except AlphaPatchError as exc:
            stop, message = _stop_reason(exc), str(exc)
            break
        if state.step_count % config.output_cadence == 0:
            record(state, bundle)
            last_recorded = state.step_count
        if state.time >= config.t_end:
            stop = "t_end"
            break
        if state.step_count >= config.max_steps:
            stop = "max_steps"
            break
        sup_now = max(arc_chord(c, state.system.floor_rel).sup_value
                      for c in state.system.contours)
        if sup_now > config.arc_chord_factor * sup_init:
            stop = "arc_chord"
            break
        if math.isfinite(dist_init):
            if min_patch_distance(state.system).delta < config.min_distance_factor * dist_init:
                stop = "min_distance"
                break
        try:
            dt = choose_dt(state.system, bundle, config.cfl, config.dt_max,
                           velocity_max=config.velocity_max)
        except VelocityBlowup as exc:
            stop, message = "velocity_blowup", str(exc)
            break
        nxt = min([config.t_end] + targets)
        if state.time + dt >= nxt * (1 - 1e-12):
            dt = nxt - state.time
        try:
            state = step_rk4(state, dt, bundle=bundle, reparam_tol=config.reparam_tol,
                             max_speed_defect=config.max_speed_defect, p=p,
                             step_growth_factor=config.step_growth_factor)
        except StepRejected as exc:
            stop, message = "step_rejected", str(exc)
            break
        except AlphaPatchError as exc:
            stop, message = _stop_reason(exc), str(exc)
            break
        if state.time >= nxt * (1 - 1e-12):
            state = SimulationState(nxt, state.system, state.step_count, state.cumulative_criterion)
            if targets and nxt == targets[0]:
                snapshots.append((nxt, state.system))
                targets.pop(0)
    if bundle is not None and last_recorded != state.step_count:
        record(state, bundle)
    return RunResult(records, snapshots, state, stop, defects, message)


def _stop_reason(exc: Exception) -> str:
    if isinstance(exc, (SelfIntersection, ChordBelowFloor)):
        return "self_intersection"
    if isinstance(exc, PatchOverlap):
        return "patch_overlap"
    if isinstance(exc, VelocityBlowup):
        return "velocity_blowup"
    return "numerical_failure"
