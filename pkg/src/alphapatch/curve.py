"""Periodic planar curves sampled on a uniform parameter grid.

A :class:`Contour` holds one period of a closed curve ``x(gamma)`` sampled at
``gamma_j = -pi + j*h``, ``h = 2*pi/n``.  Everything else in this module works
on the trigonometric interpolant of those samples: derivatives, resampling,
evaluation off the grid, constant-speed reparametrization.  Internally a curve
is handled as the complex signal ``z = x1 + i*x2``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    BadExponent,
    DegenerateCurve,
    DegenerateSegment,
    NoConvergence,
    OrderTooHigh,
    SelfIntersection,
    TooFewNodes,
)

FloatArray = NDArray[np.float64]

MIN_NODES = 16
CONTOUR_SCHEMA = "alphapatch.contour/1"


def _check_count(n: int) -> None:
    if n < MIN_NODES or n % 2:
        raise TooFewNodes(f"need an even node count >= {MIN_NODES}, got {n}")


def wavenumbers(n: int) -> NDArray[np.float64]:
    """Integer wavenumbers in FFT order; the Nyquist mode is ``-n/2``."""
    return np.fft.fftfreq(n, d=1.0 / n)


def spectral_diff(values: ArrayLike, order: int = 1) -> np.ndarray:
    """Derivative of the trigonometric interpolant of periodic samples (axis 0).

    Works for real or complex samples.  The Nyquist mode is dropped for odd
    orders, where it vanishes on the grid anyway.
    """
    v = np.asarray(values)
    n = v.shape[0]
    k = wavenumbers(n)
    mult = (1j * k) ** order
    if order % 2:
        mult[n // 2] = 0.0
    shape = (n,) + (1,) * (v.ndim - 1)
    out = np.fft.ifft(np.fft.fft(v, axis=0) * mult.reshape(shape), axis=0)
    return out if np.iscomplexobj(v) else out.real


def periodic_antiderivative(values: ArrayLike) -> np.ndarray:
    """Spectral antiderivative of a zero-mean periodic signal, zero at node 0."""
    v = np.asarray(values, dtype=float)
    n = v.shape[0]
    k = wavenumbers(n)
    vh = np.fft.fft(v)
    vh[0] = 0.0
    vh[n // 2] = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ih = np.where(k != 0, vh / (1j * np.where(k != 0, k, 1.0)), 0.0)
    out = np.fft.ifft(ih).real
    return out - out[0]


def _resize_spectrum(coef: np.ndarray, n_new: int) -> np.ndarray:
    """Map normalised FFT coefficients of length n onto length n_new."""
    n = coef.shape[0]
    out = np.zeros(n_new, dtype=complex)
    if n_new >= n:
        half = n // 2
        out[:half] = coef[:half]
        out[n_new - half + 1:] = coef[half + 1:]
        if n_new > n:
            # split the Nyquist term symmetrically so the interpolant stays real
            out[half] += 0.5 * coef[half]
            out[n_new - half] += 0.5 * coef[half]
        else:
            out[half] = coef[half]
        return out
    half = n_new // 2
    out[:half] = coef[:half]
    out[half + 1:] = coef[n - half + 1:]
    out[half] = coef[half] + coef[n - half]
    return out


@dataclass(frozen=True)
class SampledField:
    """Per-node values aligned with a contour grid (scalars or planar vectors)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def n_nodes(self) -> int:
        return int(self.values.shape[0])

    def magnitude(self) -> FloatArray:
        v = self.values
        return np.abs(v) if v.ndim == 1 else np.hypot(v[:, 0], v[:, 1])


def _field_values(f: SampledField | ArrayLike) -> np.ndarray:
    return f.values if isinstance(f, SampledField) else np.asarray(f, dtype=float)


def _magnitude(f: SampledField | ArrayLike) -> FloatArray:
    v = _field_values(f)
    return np.abs(v) if v.ndim == 1 else np.hypot(v[:, 0], v[:, 1])


@dataclass(frozen=True)
class Contour:
    """Uniformly sampled closed curve; ``points`` has shape (n_nodes, 2)."""

    points: np.ndarray
    label: str = "patch"
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n_nodes(self) -> int:
        return int(self.points.shape[0])

    @property
    def h(self) -> float:
        return 2.0 * np.pi / self.n_nodes

    @property
    def gamma(self) -> FloatArray:
        return -np.pi + self.h * np.arange(self.n_nodes)

    @cached_property
    def z(self) -> np.ndarray:
        return self.points[:, 0] + 1j * self.points[:, 1]

    @cached_property
    def coefficients(self) -> np.ndarray:
        """Normalised FFT coefficients of ``z`` (FFT order)."""
        return np.fft.fft(self.z) / self.n_nodes

    def dz(self, order: int = 1) -> np.ndarray:
        """Complex samples of the ``order``-th derivative (cached for 1..3)."""
        if order <= 3:
            return self._dz_cache[order - 1]
        return spectral_diff(self.z, order)

    @cached_property
    def _dz_cache(self) -> tuple:
        return tuple(spectral_diff(self.z, k) for k in (1, 2, 3))

    @cached_property
    def speed(self) -> FloatArray:
        return np.abs(self.dz(1))

    def with_points(self, points: ArrayLike) -> "Contour":
        return Contour(points, self.label, dict(self.metadata))


def make_contour(points: ArrayLike, label: str = "patch") -> Contour:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must have shape (n, 2)")
    _check_count(pts.shape[0])
    if not np.isfinite(pts).all():
        raise ValueError("points contain non-finite values")
    step = np.roll(pts, -1, axis=0) - pts
    if np.any(np.all(step == 0.0, axis=1)):
        raise DegenerateSegment("two consecutive points coincide")
    return Contour(pts, label)


def contour_from_function(func, n: int, label: str = "patch") -> Contour:
    """Sample ``func(gamma) -> (x1, x2)`` on the standard grid."""
    g = -np.pi + 2.0 * np.pi * np.arange(n) / n
    x1, x2 = func(g)
    return make_contour(np.column_stack([np.broadcast_to(x1, g.shape),
                                         np.broadcast_to(x2, g.shape)]), label)


def circle(n: int, radius: float = 1.0, center=(0.0, 0.0), clockwise: bool = False,
           label: str = "circle") -> Contour:
    s = -1.0 if clockwise else 1.0
    return contour_from_function(
        lambda g: (center[0] + radius * np.cos(s * g), center[1] + radius * np.sin(s * g)),
        n, label)


def ellipse(n: int, a: float = 2.0, b: float = 1.0, center=(0.0, 0.0), label: str = "ellipse") -> Contour:
    return contour_from_function(
        lambda g: (center[0] + a * np.cos(g), center[1] + b * np.sin(g)), n, label)


def spectral_derivative(c: Contour, order: int = 1) -> SampledField:
    if order < 1:
        raise OrderTooHigh("order must be >= 1")
    if order > c.n_nodes // 4:
        raise OrderTooHigh(f"order {order} exceeds n_nodes/4 = {c.n_nodes // 4}")
    d = c.dz(order)
    return SampledField(np.column_stack([d.real, d.imag]))


def evaluate(c: Contour, gamma: ArrayLike) -> FloatArray:
    """Trigonometric interpolant of ``c`` at arbitrary parameters, shape (m, 2)."""
    w = _evaluate_complex(c.coefficients, np.asarray(gamma, dtype=float) + np.pi)
    return np.column_stack([w.real, w.imag])


def _evaluate_complex(coef: np.ndarray, tau: np.ndarray, order: int = 0) -> np.ndarray:
    n = coef.shape[0]
    k = wavenumbers(n)
    c = coef.copy()
    ny = c[n // 2]
    c[n // 2] = 0.0
    mult = (1j * k) ** order
    phase = np.exp(1j * np.outer(tau, k))
    out = phase @ (c * mult)
    # symmetric Nyquist term ny*cos(n tau/2) and its derivatives
    half = n / 2
    out = out + ny * half ** order * np.cos(half * tau + order * np.pi / 2)
    return out


def resample(c: Contour, n_new: int) -> Contour:
    _check_count(n_new)
    coef = _resize_spectrum(c.coefficients, n_new)
    w = np.fft.ifft(coef * n_new)
    return Contour(np.column_stack([w.real, w.imag]), c.label, dict(c.metadata))


def length(c: Contour) -> float:
    return float(c.h * c.speed.sum())


def speed_defect(c: Contour) -> float:
    """max |(|dx|^2 - mean)| / mean over the grid."""
    s2 = c.speed ** 2
    mean = s2.mean()
    return float(np.max(np.abs(s2 - mean)) / mean)


def _reparametrize_once(c: Contour, max_iter: int, newton_tol: float) -> Contour:
    n = c.n_nodes
    speed = c.speed
    if speed.min() <= 1e-14 * max(speed.max(), 1e-300):
        raise DegenerateCurve("curve speed vanishes at some node")
    sh = np.fft.fft(speed) / n
    mean_speed = sh[0].real
    total = 2.0 * np.pi * mean_speed
    k = wavenumbers(n)
    sh_osc = sh.copy()
    sh_osc[0] = 0.0
    ny = sh_osc[n // 2].real
    sh_osc[n // 2] = 0.0
    nz = k != 0
    anti = np.zeros(n, dtype=complex)
    anti[nz] = sh_osc[nz] / (1j * k[nz])

    def arclength(tau):
        e = np.exp(1j * np.outer(tau, k))
        val = (e - 1.0) @ anti
        return mean_speed * tau + val.real + ny * np.sin(0.5 * n * tau) / (0.5 * n)

    def local_speed(tau):
        e = np.exp(1j * np.outer(tau, k))
        return (e @ sh_osc).real + mean_speed + ny * np.cos(0.5 * n * tau)

    target = total * np.arange(n) / n
    tau = 2.0 * np.pi * np.arange(n) / n
    for _ in range(max_iter):
        step = (arclength(tau) - target) / local_speed(tau)
        tau = tau - step
        if np.max(np.abs(step)) < newton_tol:
            break
    else:
        raise NoConvergence("arclength inversion did not converge")
    w = _evaluate_complex(c.coefficients, tau)
    return Contour(np.column_stack([w.real, w.imag]), c.label, dict(c.metadata))


def reparametrize_constant_speed(c: Contour, tol: float = 1e-10, max_iter: int = 100,
                                 max_passes: int = 6) -> Contour:
    """Resample ``c`` at equal arclength, keeping node 0 fixed.

    Each pass inverts the arclength of the current interpolant by Newton
    iteration (``max_iter`` steps, tolerance 1e-12).  Passes repeat until the
    speed defect is at most ``tol``; under-resolved curves may stall above it,
    in which case the best contour found is returned (check
    :func:`speed_defect`).
    """
    best = c
    best_defect = speed_defect(c)
    cur = c
    for _ in range(max_passes):
        if best_defect <= tol:
            break
        cur = _reparametrize_once(cur, max_iter, 1e-12)
        d = speed_defect(cur)
        if d < best_defect:
            best, best_defect = cur, d
        else:
            break
    return best


def reflect(c: Contour) -> Contour:
    """Image across the wall: (x1, x2) -> (x1, -x2)."""
    return Contour(c.points * np.array([1.0, -1.0]), c.label, dict(c.metadata))


def area(c: Contour) -> float:
    """Signed area; positive for counterclockwise curves."""
    x = c.points
    d = c.dz(1)
    return float(0.5 * c.h * np.sum(x[:, 0] * d.imag - x[:, 1] * d.real))


def centroid(c: Contour) -> FloatArray:
    x = c.points
    d = c.dz(1)
    a = area(c)
    cross = x[:, 0] * d.imag - x[:, 1] * d.real
    cx = np.sum(x[:, 0] * cross) * c.h / (3.0 * a)
    cy = np.sum(x[:, 1] * cross) * c.h / (3.0 * a)
    return np.array([cx, cy])


@dataclass(frozen=True)
class ArcChordReport:
    """F(gamma_i, eta_j) on the full grid; ``eta`` runs over [-pi, pi)."""

    grid: FloatArray
    gamma: FloatArray
    eta: FloatArray
    sup_value: float
    argmax: tuple[float, float]

    @property
    def diagonal(self) -> FloatArray:
        return self.grid[:, self.eta.shape[0] // 2]


def chord_floor(c: Contour, rel: float = 1e-8) -> float:
    return rel * length(c)


def arc_chord(c: Contour, floor_rel: float = 1e-8) -> ArcChordReport:
    n = c.n_nodes
    h = c.h
    j = np.arange(n)
    eta = -np.pi + h * j
    shift = j - n // 2  # eta_j = shift * h
    src = (j[:, None] - shift[None, :]) % n
    chord = np.abs(c.z[:, None] - c.z[src])
    floor = chord_floor(c, floor_rel)
    off = shift != 0
    if np.any(chord[:, off] < floor):
        i, jj = np.argwhere(chord[:, off] < floor)[0]
        raise SelfIntersection(
            f"chord below floor {floor:.3e} at gamma={c.gamma[i]:.6f}, eta={eta[off][jj]:.6f}")
    grid = np.empty((n, n))
    grid[:, off] = np.abs(eta[off])[None, :] / chord[:, off]
    grid[:, n // 2] = 1.0 / c.speed
    flat = int(np.argmax(grid))
    i, jj = divmod(flat, n)
    return ArcChordReport(grid, c.gamma, eta, float(grid[i, jj]), (float(c.gamma[i]), float(eta[jj])))


def lp_seminorm(f: SampledField | ArrayLike, p: float) -> float:
    """Trapezoidal L^p norm over the periodic grid; ``p=inf`` gives the max."""
    if not (p == np.inf or p >= 1):
        raise BadExponent(f"p must be >= 1 or inf, got {p}")
    mag = _magnitude(f)
    if p == np.inf:
        return float(mag.max())
    h = 2.0 * np.pi / mag.shape[0]
    return float((h * np.sum(mag ** p)) ** (1.0 / p))


def holder_seminorm(f: SampledField | ArrayLike, delta: float) -> float:
    """Discrete sup_{i != j} |f_i - f_j| / d(gamma_i, gamma_j)^delta, periodic d."""
    if not 0.0 < delta <= 1.0:
        raise BadExponent(f"delta must lie in (0, 1], got {delta}")
    v = _field_values(f)
    n = v.shape[0]
    h = 2.0 * np.pi / n
    if v.ndim == 1:
        diff = np.abs(v[:, None] - v[None, :])
    else:
        diff = np.hypot(v[:, None, 0] - v[None, :, 0], v[:, None, 1] - v[None, :, 1])
    k = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    dist = h * np.minimum(k, n - k)
    np.fill_diagonal(dist, 1.0)
    ratio = diff / dist ** delta
    np.fill_diagonal(ratio, 0.0)
    return float(ratio.max())


# -- serialization -----------------------------------------------------------

def fmt(v: float) -> str:
    """17 significant digits: round-trip exact."""
    return format(float(v), ".17g")


def contour_to_csv(c: Contour) -> str:
    buf = io.StringIO()
    buf.write("gamma,x1,x2\n")
    for g, (a, b) in zip(c.gamma, c.points):
        buf.write(f"{fmt(g)},{fmt(a)},{fmt(b)}\n")
    return buf.getvalue()


def contour_from_csv(text: str, label: str = "patch") -> Contour:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or set(rows[0]) != {"gamma", "x1", "x2"}:
        raise ValueError("contour CSV needs columns gamma,x1,x2")
    pts = [(float(r["x1"]), float(r["x2"])) for r in rows]
    return make_contour(pts, label)


def contour_to_json(c: Contour, metadata: dict[str, Any] | None = None) -> dict[str, Any]:
    meta = dict(c.metadata)
    meta.update(metadata or {})
    return {
        "schema": CONTOUR_SCHEMA,
        "label": c.label,
        "n_nodes": c.n_nodes,
        "points": [float(v) for v in c.points.ravel()],
        "metadata": meta,
    }


def contour_from_json(doc: dict[str, Any] | str) -> Contour:
    if isinstance(doc, str):
        doc = json.loads(doc)
    pts = np.asarray(doc["points"], dtype=float).reshape(-1, 2)
    if pts.shape[0] != doc["n_nodes"]:
        raise ValueError("n_nodes does not match the number of points")
    c = make_contour(pts, doc.get("label", "patch"))
    c.metadata.update(doc.get("metadata", {}))
    return c


def as_points(seq: Sequence[Sequence[float]]) -> FloatArray:
    return np.asarray(seq, dtype=float).reshape(-1, 2)
