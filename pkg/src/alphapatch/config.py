"""Run configuration: JSON parsing, validation and the shipped presets."""
from __future__ import annotations

import difflib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .errors import ParseError, ValidationError

GEOMETRIES = ("full-plane", "half-plane")
INITIAL_KINDS = ("circle", "ellipse", "two-circles", "scenario", "files")


@dataclass(frozen=True)
class SimulationConfig:
    geometry: str = "full-plane"
    alpha: float = 0.5
    n_nodes: int = 256
    cfl: float = 0.5
    dt_max: float = 0.01
    t_end: float = 1.0
    output_cadence: int = 1
    p: float | None = None              # default max(2, 1.1 (1 - alpha/2)^-1)
    holder_delta: float | None = None   # default alpha/2 + 0.05
    arc_chord_factor: float = 1e4
    min_distance_factor: float = 1e-3
    velocity_max: float = 1e8
    step_growth_factor: float = 10.0
    max_steps: int = 100000
    quad_n: int = 4096
    quad_order: int = 8
    reparam_tol: float = 1e-3
    max_speed_defect: float = 0.05
    normalization: float = 1.0
    floor_rel: float = 1e-8
    snapshot_times: tuple[float, ...] = ()
    seed: int = 0
    output_dir: str = "out"
    strengths: tuple[float, ...] | None = None
    initial: dict = field(default_factory=lambda: {"kind": "circle", "radius": 1.0})
    # singularity scenario
    epsilon: float = 0.05
    m: float = 5.0
    a: float = 0.5
    barrier_C: float = 1.0
    smoothing: float = 0.5
    scenario_samples: int = 10

    @property
    def beta(self) -> float:
        return self.alpha / 2.0

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["snapshot_times"] = list(self.snapshot_times)
        if self.strengths is not None:
            d["strengths"] = list(self.strengths)
        return d


KNOWN_KEYS = tuple(f.name for f in fields(SimulationConfig))


def _validate(cfg: SimulationConfig) -> None:
    problems = []
    if cfg.geometry not in GEOMETRIES:
        problems.append(f"geometry must be one of {GEOMETRIES}, got {cfg.geometry!r}")
    if not 0.0 < cfg.alpha < 2.0:
        problems.append(f"alpha must lie in (0, 2), got {cfg.alpha}")
    if not 0.0 < cfg.cfl <= 1.0:
        problems.append(f"cfl must lie in (0, 1], got {cfg.cfl}")
    if cfg.n_nodes < 16 or cfg.n_nodes % 2:
        problems.append(f"n_nodes must be even and >= 16, got {cfg.n_nodes}")
    if cfg.p is not None and not cfg.p > 1.0:
        problems.append(f"p must be > 1, got {cfg.p}")
    if cfg.holder_delta is not None and not 0.0 < cfg.holder_delta <= 1.0:
        problems.append(f"holder_delta must lie in (0, 1], got {cfg.holder_delta}")
    for name in ("dt_max", "arc_chord_factor", "min_distance_factor", "velocity_max",
                 "step_growth_factor", "reparam_tol", "max_speed_defect", "normalization",
                 "floor_rel", "epsilon", "m", "a", "barrier_C", "smoothing"):
        v = getattr(cfg, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            problems.append(f"{name} must be a positive number, got {v!r}")
    if cfg.t_end < 0:
        problems.append(f"t_end must be >= 0, got {cfg.t_end}")
    for name in ("output_cadence", "max_steps", "quad_n", "quad_order", "scenario_samples"):
        if int(getattr(cfg, name)) < 1:
            problems.append(f"{name} must be a positive integer")
    if any(t < 0 for t in cfg.snapshot_times):
        problems.append("snapshot_times must be nonnegative")
    kind = cfg.initial.get("kind") if isinstance(cfg.initial, dict) else None
    if kind not in INITIAL_KINDS:
        problems.append(f"initial.kind must be one of {INITIAL_KINDS}, got {kind!r}")
    if problems:
        raise ValidationError(problems)


def make_config(**kwargs) -> SimulationConfig:
    """Build and validate a config from keyword values (unknown keys rejected)."""
    for key in kwargs:
        if key not in KNOWN_KEYS:
            raise ParseError(_unknown_key_message(key))
    if "snapshot_times" in kwargs:
        kwargs["snapshot_times"] = tuple(float(t) for t in kwargs["snapshot_times"])
    if kwargs.get("strengths") is not None:
        kwargs["strengths"] = tuple(float(s) for s in kwargs["strengths"])
    cfg = SimulationConfig(**kwargs)
    _validate(cfg)
    return cfg


def _unknown_key_message(key: str) -> str:
    close = difflib.get_close_matches(key, KNOWN_KEYS, n=1)
    hint = f"; did you mean {close[0]!r}?" if close else ""
    return f"unknown key {key!r}{hint}"


def parse_config_text(text: str, base: SimulationConfig | None = None) -> SimulationConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")
    for key in doc:
        if key not in KNOWN_KEYS:
            raise ParseError(_unknown_key_message(key))
    merged = (base or SimulationConfig()).to_dict()
    merged.update(doc)
    return make_config(**merged)


def parse_config(path: str | Path, base: SimulationConfig | None = None) -> SimulationConfig:
    text = Path(path).read_text()
    return parse_config_text(text, base)


PRESETS: dict[str, dict[str, Any]] = {
    "steady-circle": {
        "geometry": "full-plane", "alpha": 0.5, "n_nodes": 256, "t_end": 0.5,
        "snapshot_times": [0.25, 0.5], "initial": {"kind": "circle", "radius": 1.0},
    },
    "ellipse-relaxation": {
        "geometry": "full-plane", "alpha": 0.5, "n_nodes": 256, "t_end": 1.0,
        "output_cadence": 5, "initial": {"kind": "ellipse", "a": 2.0, "b": 1.0},
    },
    "two-patch-approach": {
        "geometry": "half-plane", "alpha": 0.5, "n_nodes": 128, "t_end": 5.0,
        "min_distance_factor": 0.5, "output_cadence": 5,
        "initial": {"kind": "two-circles", "radius": 0.4, "center": [0.6, 0.5]},
        "strengths": [1.0, -1.0],
    },
    "krzy-scenario": {
        "geometry": "half-plane", "alpha": 0.3, "n_nodes": 256, "t_end": 0.05,
        "epsilon": 0.05, "m": 5.0, "a": 0.5, "smoothing": 0.5,
        "reparam_tol": 0.5, "max_speed_defect": 0.5, "snapshot_times": [0.025, 0.05],
        "initial": {"kind": "scenario"},
    },
}


def preset(name: str, **overrides) -> SimulationConfig:
    if name not in PRESETS:
        close = difflib.get_close_matches(name, PRESETS, n=1)
        hint = f"; did you mean {close[0]!r}?" if close else ""
        raise ParseError(f"unknown preset {name!r}{hint}")
    values = dict(PRESETS[name])
    values.update(overrides)
    return make_config(**values)


def with_overrides(cfg: SimulationConfig, **kwargs) -> SimulationConfig:
    new = replace(cfg, **kwargs)
    _validate(new)
    return new
