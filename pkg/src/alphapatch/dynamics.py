"""Patch velocity from the symmetrized contour equation.

For target node ``gamma_i`` of patch k the non-tangential part is

    NL_k = sum_j theta_j/(2 alpha) int (dx_k(gamma) - dx_j(gamma - eta)) / |x_k(gamma) - x_j(gamma - eta)|^alpha deta
         + (half-plane)  same integral with x_j replaced by its reflection xbar_j,

and the evolution is ``dx/dt = NL + lambda * dx`` with ``lambda`` chosen so
that ``|dx|^2`` stays constant along the curve.  Integrals are discretized on
the source grid (``eta = gamma_i - xi_l``), so no off-grid evaluation occurs.

Self-interaction quadrature.  The self integrand is ``|eta|^-alpha * H(eta)``
with ``H`` smooth and ``H(0) = 0``.  The punctured trapezoidal rule (the
singular node dropped) has a generalized Euler-Maclaurin expansion in which the
odd Taylor terms of ``H`` cancel and the first surviving error is

    T - I = 2 zeta(alpha - 2) c_2 h^(3 - alpha),
    c_2 = -x'''/2 |x'|^-alpha + x'' (alpha/2) |x'|^(-alpha-2) (x' . x''),

with ``c_2`` the eta^2 coefficient of ``H``.  We subtract it, which leaves an
O(h^(5-alpha)) error for every alpha in (0, 2).
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import zeta

from . import _polar
from .curve import Contour, SampledField, chord_floor, evaluate, resample, spectral_diff
from .curve import periodic_antiderivative
from .errors import (
    BadExponent,
    ChordBelowFloor,
    PatchOverlap,
    PointOnBoundary,
    SpeedDefectTooLarge,
    WallSingularity,
)

# u_kernel = KERNEL_CONVERSION * u_contour for unit normalization: the kernel
# representation integrates grad(|x-y|^-alpha)/alpha, the contour equation
# carries theta/(2 alpha).
KERNEL_CONVERSION = 2.0


class Geometry(str, enum.Enum):
    FULL_PLANE = "full-plane"
    HALF_PLANE = "half-plane"


@dataclass(frozen=True)
class PatchSystem:
    contours: tuple[Contour, ...]
    strengths: tuple[float, ...]
    geometry: Geometry = Geometry.FULL_PLANE
    alpha: float = 0.5
    normalization: float = 1.0
    floor_rel: float = 1e-8

    def __post_init__(self) -> None:
        object.__setattr__(self, "contours", tuple(self.contours))
        object.__setattr__(self, "strengths", tuple(float(s) for s in self.strengths))
        object.__setattr__(self, "geometry", Geometry(self.geometry))
        if len(self.contours) != len(self.strengths):
            raise ValueError("one strength per contour is required")
        if not 0.0 < self.alpha < 2.0:
            raise BadExponent(f"alpha must lie in (0, 2), got {self.alpha}")

    @property
    def n_patches(self) -> int:
        return len(self.contours)

    def with_contours(self, contours: Sequence[Contour]) -> "PatchSystem":
        return PatchSystem(tuple(contours), self.strengths, self.geometry, self.alpha,
                           self.normalization, self.floor_rel)


@dataclass(frozen=True)
class VelocityBundle:
    nl: tuple[SampledField, ...]
    lam: tuple[SampledField, ...]
    rhs: tuple[SampledField, ...]
    wall_contacts: tuple[np.ndarray, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.rhs)


def _c(v: np.ndarray) -> np.ndarray:
    return v[..., 0] + 1j * v[..., 1]


def _pts(z: np.ndarray) -> np.ndarray:
    return np.column_stack([z.real, z.imag])


def kernel_g(c: Contour, gamma_index: int, eta: float, alpha: float,
             floor_rel: float = 1e-8) -> float:
    """|x(gamma_i) - x(gamma_i - eta)|^-alpha with trigonometric interpolation."""
    if not 0.0 < alpha < 2.0:
        raise BadExponent(f"alpha must lie in (0, 2), got {alpha}")
    g = c.gamma[gamma_index]
    other = evaluate(c, [g - eta])[0]
    chord = float(np.hypot(*(c.points[gamma_index] - other)))
    if chord < chord_floor(c, floor_rel):
        raise ChordBelowFloor(f"chord {chord:.3e} below floor at eta={eta}")
    return chord ** (-alpha)


def _self_correction(c: Contour, alpha: float) -> np.ndarray:
    """Per-node quadrature correction I - T for the self integral."""
    z1, z2, z3 = c.dz(1), c.dz(2), c.dz(3)
    a = np.abs(z1) ** 2
    dot = (z1.conj() * z2).real
    c2 = -0.5 * z3 * a ** (-alpha / 2) + z2 * (alpha / 2) * a ** (-alpha / 2 - 1) * dot
    return -2.0 * zeta(alpha - 2.0) * c2 * c.h ** (3.0 - alpha)


def nl_velocity(sys: PatchSystem, k: int, *, return_contacts: bool = False):
    """Non-tangential velocity NL_k at every node of patch k (complex-free output)."""
    ck = sys.contours[k]
    zk, dzk = ck.z, ck.dz(1)
    alpha = sys.alpha
    n = ck.n_nodes
    total = np.zeros(n, dtype=complex)
    contacts = np.zeros(n, dtype=bool)
    half = sys.geometry is Geometry.HALF_PLANE
    floor_k = chord_floor(ck, sys.floor_rel)
    for j, (cj, th) in enumerate(zip(sys.contours, sys.strengths)):
        if th == 0.0:
            continue
        zj, dzj = cj.z, cj.dz(1)
        pref = th / (2.0 * alpha)
        floor = min(floor_k, chord_floor(cj, sys.floor_rel))
        d = np.abs(zk[:, None] - zj[None, :])
        num = dzk[:, None] - dzj[None, :]
        if j == k:
            diag = np.arange(n)
            d[diag, diag] = 1.0
            if np.any(d < floor):
                raise ChordBelowFloor(f"self chord below floor in patch {k}")
            w = d ** (-alpha)
            w[diag, diag] = 0.0
            direct = cj.h * np.sum(num * w, axis=1) + _self_correction(ck, alpha)
        else:
            if np.min(d) < floor:
                raise PatchOverlap(f"patches {k} and {j} closer than {floor:.3e}")
            direct = cj.h * np.sum(num * d ** (-alpha), axis=1)
        total += pref * direct
        if not half:
            continue
        zr, dzr = zj.conj(), dzj.conj()
        dr = np.abs(zk[:, None] - zr[None, :])
        numr = dzk[:, None] - dzr[None, :]
        low = dr < floor
        corr = np.zeros(n, dtype=complex)
        if np.any(low):
            if j != k:
                raise PatchOverlap(f"patch {k} meets the reflection of patch {j}")
            ii, ll = np.nonzero(low)
            if np.any(ii != ll):
                raise PatchOverlap(f"patch {k} meets its own reflection away from the wall")
            # a node on the wall: the reflected integrand is the conjugate of the
            # self integrand near the singular point, so it takes the mirrored correction
            contacts[ii] = True
            dr[ii, ll] = 1.0
            corr[ii] = np.conj(_self_correction(ck, alpha)[ii])
        wr = dr ** (-alpha)
        wr[low] = 0.0
        total += pref * (cj.h * np.sum(numr * wr, axis=1) + corr)
    if contacts.any():
        warnings.warn(f"{int(contacts.sum())} node(s) of patch {k} touch the wall",
                      WallSingularity, stacklevel=2)
    out = SampledField(_pts(sys.normalization * total))
    return (out, contacts) if return_contacts else out


def lambda_coefficient(sys: PatchSystem, k: int, nl: SampledField,
                       max_defect: float = 0.05) -> SampledField:
    """Tangential coefficient keeping |dx|^2 uniform; normalized so lambda(-pi) = 0."""
    c = sys.contours[k]
    z1 = c.dz(1)
    s2 = np.abs(z1) ** 2
    a = s2.mean()
    defect = float(np.max(np.abs(s2 - a)) / a)
    if defect > max_defect:
        raise SpeedDefectTooLarge(f"speed defect {defect:.3e} exceeds {max_defect:.3e}")
    dnl = spectral_diff(_c(nl.values), 1)
    g = (z1.conj() * dnl).real / a
    return SampledField(-periodic_antiderivative(g - g.mean()))


def rhs(sys: PatchSystem, max_defect: float = 0.05) -> VelocityBundle:
    nls, lams, rhss, contacts = [], [], [], []
    for k, c in enumerate(sys.contours):
        nl, touch = nl_velocity(sys, k, return_contacts=True)
        lam = lambda_coefficient(sys, k, nl, max_defect)
        z1 = c.dz(1)
        r = nl.values + lam.values[:, None] * np.column_stack([z1.real, z1.imag])
        nls.append(nl)
        lams.append(lam)
        rhss.append(SampledField(r))
        contacts.append(touch)
    return VelocityBundle(tuple(nls), tuple(lams), tuple(rhss), tuple(contacts))


def contour_polygon(c: Contour, quad_n: int) -> np.ndarray:
    """Vertices of the interpolated boundary, resampled to ``quad_n`` points."""
    if quad_n <= c.n_nodes:
        return np.asarray(c.points)
    n_new = quad_n + (quad_n % 2)
    return np.asarray(resample(c, n_new).points)


def point_velocity(sys: PatchSystem, point, quad_n: int = 4096, q: int = 8) -> np.ndarray:
    """Velocity at an off-contour point from 2D quadrature over the patch interiors.

    Uses the same normalization as :func:`nl_velocity`,
    ``u = norm * sum_j (theta_j / 2) perp J_alpha(x; D_j)`` with
    ``J_a(x; D) = int_D (y - x)/|y - x|^(2 + a) dy``; in the half plane the
    reflected domains enter with the opposite sign.
    """
    x = np.asarray(point, dtype=float)
    total = np.zeros(2)
    for c, th in zip(sys.contours, sys.strengths):
        poly = contour_polygon(c, quad_n)
        floor = chord_floor(c, sys.floor_rel)
        if _polar.boundary_distance(x, poly) < floor:
            raise PointOnBoundary(f"point {tuple(x)} lies on a patch boundary")
        total += th * _polar.polar_moment(x, poly, sys.alpha, q)
        if sys.geometry is Geometry.HALF_PLANE:
            refl = poly * np.array([1.0, -1.0])
            if _polar.boundary_distance(x, refl) < floor and x[1] > floor:
                raise PointOnBoundary(f"point {tuple(x)} lies on a reflected boundary")
            total -= th * _polar.polar_moment(x, refl, sys.alpha, q)
    j = 0.5 * sys.normalization * total
    return np.array([-j[1], j[0]])
