"""Velocity estimates behind the finite-time singularity of odd-symmetric patches.

Conventions: ``beta = alpha/2``; the patch lives in the upper-right quadrant
with an odd mirror copy on the left, the wall is ``x2 = 0``.  The velocity is

    u_i(x) = (-1)^i int_{quadrant} K_i(x, y) theta(y) dy,

where K_1, K_2 sum the direct kernel over the four images of y.  Every image
term is a first moment of ``|y - x|^-(2 + 2 beta)`` over a reflected copy of
the region, so region integrals reduce to :func:`alphapatch._polar.polar_moment`
on polygons (clipped to the quadrant and to the good/bad half-plane).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import _polar
from .curve import Contour, make_contour, reparametrize_constant_speed, resample
from .dynamics import Geometry, PatchSystem
from .errors import (
    BadParameters,
    CoincidentPoints,
    ConstraintInfeasible,
    NoSignChange,
    OutsideApplicabilityRegion,
    PointOnBoundary,
    TimeOutOfRange,
)

DELTA_BETA = 0.05
BETA_MAX = 0.5  # kernels and lemmas are finite for 0 < beta < 1/2


def _check_beta(beta: float) -> None:
    if not 0.0 < beta < BETA_MAX:
        raise BadParameters(f"beta must lie in (0, {BETA_MAX}), got {beta}")


# ---------------------------------------------------------------- kernels

def kernel_components(axis: int, x, y, beta: float):
    """The four image terms of K_axis(x, y) and their sum."""
    _check_beta(beta)
    x1, x2 = map(float, x)
    y1, y2 = map(float, y)
    p = 1.0 + beta
    d_direct = (x1 - y1) ** 2 + (x2 - y2) ** 2
    d_tilde = (x1 + y1) ** 2 + (x2 - y2) ** 2   # |x - (-y1, y2)|^2
    d_minus = (x1 + y1) ** 2 + (x2 + y2) ** 2   # |x + y|^2
    d_bar = (x1 - y1) ** 2 + (x2 + y2) ** 2     # |x - (y1, -y2)|^2
    if min(d_direct, d_tilde, d_minus, d_bar) == 0.0:
        raise CoincidentPoints("x coincides with y or one of its images")
    if axis == 1:
        comps = ((y2 - x2) / d_direct ** p, -(y2 - x2) / d_tilde ** p,
                 -(y2 + x2) / d_minus ** p, (y2 + x2) / d_bar ** p)
    elif axis == 2:
        comps = ((y1 - x1) / d_direct ** p, (y1 + x1) / d_tilde ** p,
                 -(y1 + x1) / d_minus ** p, -(y1 - x1) / d_bar ** p)
    else:
        raise BadParameters("axis must be 1 or 2")
    return comps, float(sum(comps))


def kernel_sum_vectorized(axis: int, x: np.ndarray, y: np.ndarray, beta: float):
    """(K_axis, partial) for arrays of points; partial is K11+K12 or K21+K24."""
    x1, x2 = x[..., 0], x[..., 1]
    y1, y2 = y[..., 0], y[..., 1]
    p = 1.0 + beta
    dd = ((x1 - y1) ** 2 + (x2 - y2) ** 2) ** p
    dt = ((x1 + y1) ** 2 + (x2 - y2) ** 2) ** p
    dm = ((x1 + y1) ** 2 + (x2 + y2) ** 2) ** p
    db = ((x1 - y1) ** 2 + (x2 + y2) ** 2) ** p
    if axis == 1:
        k = ((y2 - x2) / dd, -(y2 - x2) / dt, -(y2 + x2) / dm, (y2 + x2) / db)
        return sum(k), k[0] + k[1]
    k = ((y1 - x1) / dd, (y1 + x1) / dt, -(y1 + x1) / dm, -(y1 - x1) / db)
    return sum(k), k[0] + k[3]


# ---------------------------------------------------------------- regions

@dataclass(frozen=True)
class PatchRegion:
    polygon: np.ndarray
    strength: float = 1.0

    def __post_init__(self) -> None:
        poly = np.array(self.polygon, dtype=float)
        if poly.ndim != 2 or poly.shape[1] != 2 or poly.shape[0] < 3:
            raise BadParameters("polygon needs at least three planar vertices")
        object.__setattr__(self, "polygon", poly)


def rectangle(x0: float, x1: float, y0: float, y1: float, strength: float = 1.0) -> PatchRegion:
    return PatchRegion(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]), strength)


def region_from_contour(c: Contour, quad_n: int = 8192, strength: float = 1.0) -> PatchRegion:
    poly = c.points if quad_n <= c.n_nodes else resample(c, quad_n + quad_n % 2).points
    return PatchRegion(np.asarray(poly), strength)


def clip_halfplane(poly: np.ndarray, normal, offset: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a polygon to {y : normal . y >= offset}."""
    if poly.shape[0] == 0:
        return poly
    nrm = np.asarray(normal, dtype=float)
    s = poly @ nrm - offset
    nxt = np.roll(np.arange(poly.shape[0]), -1)
    out = []
    for i in range(poly.shape[0]):
        j = nxt[i]
        a_in, b_in = s[i] >= 0.0, s[j] >= 0.0
        if a_in:
            out.append(poly[i])
        if a_in != b_in:
            t = s[i] / (s[i] - s[j])
            out.append(poly[i] + t * (poly[j] - poly[i]))
    return np.array(out).reshape(-1, 2)


# (axis, part) -> inward normal of the half-plane through x that defines the part
_PART_CUT = {
    (1, "good"): np.array([0.0, 1.0]),
    (1, "bad"): np.array([0.0, -1.0]),
    (2, "good"): np.array([1.0, 0.0]),
    (2, "bad"): np.array([-1.0, 0.0]),
}


def region_velocity(axis: int, part: str, x, regions, beta: float, quad: int = 8) -> float:
    """Good, bad or full part of u_axis at x induced by theta on ``regions``.

    ``quad`` is the Gauss-Legendre order per angular panel.  Regions are
    clipped to the closed upper-right quadrant: the mirror patch enters
    through the images inside K_axis.
    """
    _check_beta(beta)
    if axis not in (1, 2):
        raise BadParameters("axis must be 1 or 2")
    if part not in ("good", "bad", "full"):
        raise BadParameters("part must be 'good', 'bad' or 'full'")
    if quad < 2:
        raise BadParameters("quad must be at least 2")
    x = np.asarray(x, dtype=float)
    comp = 1 if axis == 1 else 0  # K1 pairs with the y2 moment, K2 with y1
    total = 0.0
    for reg in regions:
        if reg.strength == 0.0:
            continue
        poly = reg.polygon
        scale = float(np.max(np.abs(poly))) + float(np.max(np.abs(x)))
        if _polar.boundary_distance(x, poly) < 1e-12 * scale:
            raise PointOnBoundary(f"point {tuple(x)} lies on a region boundary")
        poly = clip_halfplane(poly, (1.0, 0.0), 0.0)
        poly = clip_halfplane(poly, (0.0, 1.0), 0.0)
        if part != "full":
            nrm = _PART_CUT[(axis, part)]
            poly = clip_halfplane(poly, nrm, float(nrm @ x))
        if poly.shape[0] < 3 or abs(_polar.signed_area(poly)) == 0.0:
            continue
        images = (
            (poly, 1.0),
            (poly * np.array([-1.0, 1.0]), -1.0),
            (-poly, 1.0),
            (poly * np.array([1.0, -1.0]), -1.0),
        )
        acc = 0.0
        for img, sgn in images:
            acc += sgn * _polar.polar_moment(x, img, 2.0 * beta, quad)[comp]
        total += reg.strength * acc
    return float((-1.0) ** axis * total)


# ---------------------------------------------------------------- closed-form bounds

def _check_m(m: float) -> None:
    if not m > 0.0:
        raise BadParameters(f"slope m must be positive, got {m}")


def bad_bound(axis: int, x, m: float, beta: float) -> float:
    """Upper bound of u1_bad (axis 1) or lower bound of u2_bad (axis 2)."""
    _check_beta(beta)
    _check_m(m)
    x1, x2 = map(float, x)
    if x1 < 0 or x2 < 0:
        raise OutsideApplicabilityRegion("x must lie in the closed upper-right quadrant")
    if axis == 1:
        if x2 > m * x1:
            raise OutsideApplicabilityRegion("axis-1 bound needs x2 <= m x1")
        return (1.0 / (1.0 - 2 * beta) - (1.0 + m * m) ** -beta) / beta * x1 ** (1 - 2 * beta)
    if axis == 2:
        if m * x1 > x2:
            raise OutsideApplicabilityRegion("axis-2 bound needs m x1 <= x2")
        return -(1.0 / (1.0 - 2 * beta) - (1.0 + 1.0 / (m * m)) ** -beta) / beta * x2 ** (1 - 2 * beta)
    raise BadParameters("axis must be 1 or 2")


def _bad_coefficient(axis: int, m: float, beta: float) -> float:
    if axis == 1:
        return (1.0 / (1.0 - 2 * beta) - (1.0 + m * m) ** -beta) / beta
    return -(1.0 / (1.0 - 2 * beta) - (1.0 + 1.0 / (m * m)) ** -beta) / beta


def _good_coefficient(axis: int, m: float, beta: float) -> float:
    q = m * m + 1.0
    if axis == 1:
        first = ((1.0 - q ** -beta) / (1.0 - 2 * beta)
                 + 1.0 / (m ** (2 * beta) * (1.0 + 4.0 / (m * m)) ** (1 + beta)))
        return (-first / (beta * 2.0 ** (2 * beta))
                - ((9.0 + m * m) ** -beta - (4.0 + 4.0 * m * m) ** -beta) / (2 * beta))
    return ((1.0 - q ** (-1 - beta)) / (2 * beta * q ** beta)
            * (1.0 + (2.0 ** (1 - 2 * beta) - 1.0) / (1.0 - 2 * beta)))


def good_bound(axis: int, x, m: float, beta: float, a: float,
               delta_beta: float = DELTA_BETA) -> tuple[float, float]:
    """(leading coefficient of x^(1-2 beta), explicit O(x) remainder magnitude).

    Axis 1 gives an upper bound u1_good <= c x1^(1-2b) + r, axis 2 a lower
    bound u2_good >= c x2^(1-2b) - r; only the remainder pieces with explicit
    constants are included in ``r``.
    """
    _check_beta(beta)
    _check_m(m)
    if not a > 0.0:
        raise BadParameters(f"width a must be positive, got {a}")
    if axis not in (1, 2):
        raise BadParameters("axis must be 1 or 2")
    xv = float(x[axis - 1])
    if not 0.0 <= xv < delta_beta:
        raise OutsideApplicabilityRegion(
            f"x{axis} = {xv} is outside [0, delta_beta = {delta_beta})")
    coef = _good_coefficient(axis, m, beta)
    if axis == 1:
        rem = xv / beta * (a ** (-2 * beta) - ((m * m + 1.0) * a * a) ** -beta)
    else:
        rem = (1.0 - (m * m + 1.0) ** (-1 - beta)) / (2 * beta) * 2.0 * xv * a ** (-2 * beta)
    return coef, rem


def combined_coefficient(axis: int, m: float, beta: float) -> float:
    """Good plus bad leading coefficient; negative (axis 1) or positive (axis 2) is favourable."""
    _check_beta(beta)
    _check_m(m)
    if axis not in (1, 2):
        raise BadParameters("axis must be 1 or 2")
    return _good_coefficient(axis, m, beta) + _bad_coefficient(axis, m, beta)


def sign_threshold(axis: int, m: float, lo: float = 0.01, hi: float = 0.25,
                   tol: float = 1e-6) -> float:
    """Smallest-bracket root of the combined coefficient in beta, by bisection."""
    f_lo = combined_coefficient(axis, m, lo)
    f_hi = combined_coefficient(axis, m, hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoSignChange(f"combined coefficient keeps its sign on ({lo}, {hi}) for m={m}")
    return float(optimize.bisect(lambda b: combined_coefficient(axis, m, b), lo, hi, xtol=tol))


# ---------------------------------------------------------------- barrier

@dataclass(frozen=True)
class TrapezoidBarrier:
    epsilon: float
    m: float
    a: float
    C: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("epsilon", "m", "a", "C"):
            if not getattr(self, name) > 0.0:
                raise BadParameters(f"{name} must be positive")
        _check_beta(self.beta)

    @property
    def collision_time(self) -> float:
        return (3.0 * self.epsilon) ** (2 * self.beta) / (2 * self.beta * self.C)


def barrier_X(t: float, barrier: TrapezoidBarrier) -> float:
    T = barrier.collision_time
    if not 0.0 <= t <= T * (1 + 1e-14):
        raise TimeOutOfRange(f"t={t} outside [0, {T}]")
    b = barrier.beta
    base = max((3.0 * barrier.epsilon) ** (2 * b) - 2 * b * barrier.C * t, 0.0)
    return base ** (1.0 / (2 * b))


def trapezoid_samples(barrier: TrapezoidBarrier, t: float, n: int = 24) -> np.ndarray:
    """Points of K(t) = {X < x1 < a, 0 < x2 < m x1}, closed except at the wall."""
    X = barrier_X(t, barrier)
    a, m = barrier.a, barrier.m
    s = np.linspace(0.0, 1.0, n)
    lift = s[1:]  # skip x2 = 0
    x1 = X + (a - X) * s
    pts = [np.column_stack([np.full(lift.size, X), m * X * lift]),          # left edge
           np.column_stack([np.full(lift.size, a), m * a * lift]),          # right edge
           np.column_stack([x1, m * x1])]                                   # sloped edge
    g1, g2 = np.meshgrid(s[1:-1], lift[:-1])
    inner1 = X + (a - X) * g1
    pts.append(np.column_stack([inner1.ravel(), (m * inner1 * g2).ravel()]))
    return np.concatenate(pts)


def _signed_distance(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    inside = _polar.winding_number(points, poly) != 0
    dist = np.array([_polar.boundary_distance(p, poly) for p in points])
    return np.where(inside, dist, -dist)


def barrier_containment(sys: PatchSystem, barrier: TrapezoidBarrier, t: float,
                        patch: int = 0, n_samples: int = 24,
                        quad_n: int = 4096) -> tuple[bool, float]:
    """Whether K(t) lies inside patch ``patch``; margin is the worst signed distance."""
    c = sys.contours[patch]
    poly = c.points if quad_n <= c.n_nodes else resample(c, quad_n + quad_n % 2).points
    pts = trapezoid_samples(barrier, t, n_samples)
    sd = _signed_distance(pts, np.asarray(poly))
    margin = float(sd.min())
    return margin > 0.0, margin


# ---------------------------------------------------------------- initial data

def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        g = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return f / (f + g)


def _turn_integral(frac: float, order: int = 160) -> complex:
    """int_0^frac exp(i pi/2 S(u)) du for the C-infinity quarter turn."""
    if frac <= 0.0:
        return 0j
    u, w = np.polynomial.legendre.leggauss(order)
    u = 0.5 * frac * (u + 1.0)
    return complex(0.5 * frac * np.sum(w * np.exp(0.5j * np.pi * _smoothstep(u))))


TURN_CUT = _turn_integral(1.0).real  # a turn of length w cuts the corner by w*TURN_CUT


def rounded_box(left: float, right: float, top: float, turns, n_nodes: int,
                label: str = "D0") -> Contour:
    """Counterclockwise box on the wall with smooth quarter-turn corners.

    ``turns`` gives the turn lengths for the corners (bottom-left,
    bottom-right, top-right, top-left).  Nodes are placed at equal arclength,
    so the parametrization has constant speed up to interpolation error; the
    bottom side lies exactly on x2 = 0.
    """
    w = np.asarray(turns, dtype=float)
    d = w * TURN_CUT
    corners = np.array([left + 0j, right + 0j, right + 1j * top, left + 1j * top])
    heading = np.array([1.0, 1j, -1.0, -1j])
    # segment k: straight side leaving corner k, then the turn at corner k+1
    side_len = np.array([right - left, top, right - left, top]) - d - np.roll(d, -1)
    if np.any(side_len < 0):
        raise ConstraintInfeasible("corner turns longer than the box sides")
    pieces = []
    for k in range(4):
        start = corners[k] + heading[k] * d[k]
        pieces.append(("line", start, heading[k], side_len[k]))
        kn = (k + 1) % 4
        pieces.append(("turn", corners[kn] - heading[k] * d[kn], heading[k], w[kn]))
    lengths = np.array([p[3] for p in pieces])
    total = lengths.sum()
    edges = np.concatenate([[0.0], np.cumsum(lengths)])
    s = total * np.arange(n_nodes) / n_nodes
    z = np.empty(n_nodes, dtype=complex)
    for i, si in enumerate(s):
        k = min(int(np.searchsorted(edges, si, side="right")) - 1, len(pieces) - 1)
        kind, start, head, ln = pieces[k]
        loc = si - edges[k]
        if kind == "line":
            z[i] = start + head * loc
        else:
            z[i] = start + head * ln * _turn_integral(loc / ln)
    pts = np.column_stack([z.real, z.imag])
    pts[np.abs(pts[:, 1]) < 1e-15 * top, 1] = 0.0
    return make_contour(pts, label)


def mirror_contour(c: Contour, label: str = "mirror") -> Contour:
    """(x1, x2) -> (-x1, x2) with reversed node order, keeping node 0 fixed."""
    idx = (-np.arange(c.n_nodes)) % c.n_nodes
    return make_contour(c.points[idx] * np.array([-1.0, 1.0]), label)


def check_scenario_inclusions(c: Contour, epsilon: float, n_check: int = 200) -> dict:
    """Check (2 eps, 3) x (0, 3) inside and the patch within (eps, 4) x [0, 4).

    The check uses the node polygon.  A sharp corner resolved by few nodes
    makes the trigonometric interpolant ring, so the interpolant can cross
    the wall by O(h) between nodes even when the nodes satisfy both bounds.
    """
    poly = np.asarray(c.points)
    tau = 1e-6
    s = np.linspace(0.0, 1.0, n_check)
    lo1, hi1, lo2, hi2 = 2 * epsilon + tau, 3.0 - tau, tau, 3.0 - tau
    border = np.concatenate([
        np.column_stack([lo1 + (hi1 - lo1) * s, np.full(n_check, lo2)]),
        np.column_stack([lo1 + (hi1 - lo1) * s, np.full(n_check, hi2)]),
        np.column_stack([np.full(n_check, lo1), lo2 + (hi2 - lo2) * s]),
        np.column_stack([np.full(n_check, hi1), lo2 + (hi2 - lo2) * s]),
    ])
    inner_ok = bool(np.all(_polar.winding_number(border, poly) != 0))
    outer_ok = bool(np.all((poly[:, 0] > epsilon) & (poly[:, 0] < 4.0)
                           & (poly[:, 1] >= -1e-12) & (poly[:, 1] < 4.0)))
    return {"inner": inner_ok, "outer": outer_ok,
            "min_x1": float(poly[:, 0].min()), "min_x2": float(poly[:, 1].min())}


def build_scenario_initial_data(epsilon: float = 0.05, m: float = 5.0, a: float = 0.5,
                                n_nodes: int = 256, smoothing: float = 0.5,
                                alpha: float = 0.3, normalization: float = 1.0,
                                reparam_tol: float | None = None) -> PatchSystem:
    """Odd-symmetric pair: a rounded box D0 on the wall and its mirror with strength -1.

    D0 has left side at 1.25 eps and right/top sides at 3.5, so it contains
    (2 eps, 3) x (0, 3) and sits inside (eps, 4) x (0, 4).  The bottom-left
    corner turn is limited so that it stays left of x1 = 2 eps; the other
    corners use ``smoothing``.  Nodes are placed at exact equal arclength;
    pass ``reparam_tol`` to additionally reproject the interpolant.
    """
    if not (epsilon > 0 and 3 * epsilon < a and m * a < 3.0):
        raise ConstraintInfeasible("need 3 eps < a and m a < 3 for the trapezoid to fit")
    if 2 * epsilon >= 3.0 or smoothing <= 0:
        raise ConstraintInfeasible("epsilon too large or smoothing not positive")
    left, right, top = 1.25 * epsilon, 3.5, 3.5
    w_bl = min(smoothing, 0.95 * (2 * epsilon - left) / TURN_CUT)
    w_other = min(smoothing, 0.45 / TURN_CUT)
    c = rounded_box(left, right, top, (w_bl, w_other, w_other, w_other), n_nodes)
    if reparam_tol is not None:
        c = reparametrize_constant_speed(c, tol=reparam_tol)
        pts = np.array(c.points)
        pts[:, 1] = np.maximum(pts[:, 1], 0.0)
        c = make_contour(pts, "D0")
    checks = check_scenario_inclusions(c, epsilon)
    if not (checks["inner"] and checks["outer"]):
        raise ConstraintInfeasible(f"inclusion constraints fail: {checks}")
    mirror = mirror_contour(c, "D0_mirror")
    return PatchSystem((c, mirror), (1.0, -1.0), Geometry.HALF_PLANE, alpha, normalization)


@dataclass
class SignCheck:
    vertical_points: np.ndarray
    u1: np.ndarray
    sloped_points: np.ndarray
    u2: np.ndarray
    coefficient_warnings: list[str]

    @property
    def u1_negative(self) -> bool:
        return bool(np.all(self.u1 < 0.0))

    @property
    def u2_positive(self) -> bool:
        return bool(np.all(self.u2 > 0.0))


def scenario_sign_check(sys: PatchSystem, barrier: TrapezoidBarrier, n: int = 10,
                        patch: int = 0, quad_n: int = 8192, quad: int = 8,
                        lift: float = 1e-3) -> SignCheck:
    """u1 on the vertical side and u2 just above the sloped side of K(0).

    Velocities come from region quadrature over the right patch; its mirror
    enters through the kernel images.  Sloped-side samples sit ``lift``
    (relative) above the line x2 = m x1, so that m x1 <= x2.
    """
    beta, m, X, a = barrier.beta, barrier.m, barrier_X(0.0, barrier), barrier.a
    reg = [region_from_contour(sys.contours[patch], quad_n, sys.strengths[patch])]
    s = (np.arange(n) + 0.5) / n
    vert = np.column_stack([np.full(n, X), m * X * s])
    x1 = X + (a - X) * s
    slope = np.column_stack([x1, m * x1 * (1.0 + lift)])
    u1 = np.array([region_velocity(1, "full", p, reg, beta, quad) for p in vert])
    u2 = np.array([region_velocity(2, "full", p, reg, beta, quad) for p in slope])
    notes = []
    if combined_coefficient(1, m, beta) >= 0.0:
        notes.append(f"u1 coefficient is nonnegative at m={m:g}, beta={beta:g}: "
                     "the u1 sign guarantee does not apply")
    if combined_coefficient(2, m, beta) <= 0.0:
        notes.append(f"u2 coefficient is nonpositive at m={m:g}, beta={beta:g}: "
                     "the u2 sign guarantee does not apply")
    return SignCheck(vert, u1, slope, u2, notes)
