"""Contour dynamics for generalized SQG alpha-patches in the plane and half-plane."""
from .config import PRESETS, SimulationConfig, make_config, parse_config, preset
from .curve import Contour, circle, ellipse, make_contour
from .dynamics import Geometry, PatchSystem, nl_velocity, point_velocity, rhs
from .evolve import SimulationState, run, step_rk4

__version__ = "0.1.0"

__all__ = [
    "PRESETS", "SimulationConfig", "make_config", "parse_config", "preset",
    "Contour", "circle", "ellipse", "make_contour",
    "Geometry", "PatchSystem", "nl_velocity", "point_velocity", "rhs",
    "SimulationState", "run", "step_rk4",
]
