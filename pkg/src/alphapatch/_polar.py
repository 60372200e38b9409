"""Area integrals of the homogeneous kernel (z - x)/|z - x|^(2+a) over polygons.

Integrals are taken in polar coordinates about the evaluation point.  Along a
ray the radial integral of r^(-a) is exact, so the 2D integral collapses to an
angular one,

    J(x; R) = int dphi e(phi) sum_c sigma_c P_a(r_c),

where r_c are the ray/boundary crossings (sigma = +1 leaving the region, -1
entering) and P_a is the antiderivative of r^(-a).  The angular integral is
composite Gauss-Legendre on panels bounded by every vertex direction, so the
set of crossed edges is fixed on each panel; edges passing close to the point
are additionally split geometrically about their foot point.
"""
from __future__ import annotations

import numpy as np

_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss(q: int):
    if q not in _GAUSS_CACHE:
        _GAUSS_CACHE[q] = np.polynomial.legendre.leggauss(q)
    return _GAUSS_CACHE[q]


def radial_antiderivative(r: np.ndarray, a: float) -> np.ndarray:
    """Antiderivative of r^-a with the finite-part convention P(0) = 0."""
    if abs(a - 1.0) < 1e-14:
        return np.log(r)
    return r ** (1.0 - a) / (1.0 - a)


def signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def boundary_distance(x: np.ndarray, poly: np.ndarray) -> float:
    p = poly - x
    q = np.roll(p, -1, axis=0)
    e = q - p
    ee = np.einsum("ij,ij->i", e, e)
    t = np.clip(-np.einsum("ij,ij->i", p, e) / np.where(ee > 0, ee, 1.0), 0.0, 1.0)
    foot = p + t[:, None] * e
    return float(np.min(np.hypot(foot[:, 0], foot[:, 1])))


def winding_number(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Winding number of a closed polygon about each query point."""
    pts = np.atleast_2d(points)
    p0 = poly[None, :, :] - pts[:, None, :]
    p1 = np.roll(poly, -1, axis=0)[None, :, :] - pts[:, None, :]
    cross = p0[..., 0] * p1[..., 1] - p0[..., 1] * p1[..., 0]
    up = (p0[..., 1] <= 0) & (p1[..., 1] > 0) & (cross > 0)
    down = (p0[..., 1] > 0) & (p1[..., 1] <= 0) & (cross < 0)
    return up.sum(axis=1) - down.sum(axis=1)


def polar_moment(x, poly, a: float, q: int = 8, chunk: int = 65536) -> np.ndarray:
    """J(x; poly) = int_poly (z - x)/|z - x|^(2+a) dz as a 2-vector.

    ``poly`` is a simple polygon (any orientation).  For ``a >= 1`` and x
    inside, the value is the Hadamard finite part (principal value for the
    odd kernel).
    """
    x = np.asarray(x, dtype=float)
    poly = np.asarray(poly, dtype=float)
    if signed_area(poly) < 0:
        poly = poly[::-1]
    rel = poly - x
    edge = np.roll(rel, -1, axis=0) - rel
    elen = np.hypot(edge[:, 0], edge[:, 1])
    keep = elen > 0
    rel, edge, elen = rel[keep], edge[keep], elen[keep]
    scale = float(np.max(np.hypot(rel[:, 0], rel[:, 1])))
    tiny = 1e-13 * scale
    cross_pe = rel[:, 0] * edge[:, 1] - rel[:, 1] * edge[:, 0]
    dline = np.abs(cross_pe) / elen
    active = dline > tiny  # edges on a line through x are never crossed at r > 0

    # breakpoints: vertex directions plus graded points on edges near x
    pts = [rel[np.hypot(rel[:, 0], rel[:, 1]) > tiny]]
    tf_all = -np.einsum("ij,ij->i", rel, edge) / elen ** 2
    foot = rel + np.clip(tf_all, 0.0, 1.0)[:, None] * edge
    dseg = np.hypot(foot[:, 0], foot[:, 1])
    close = active & (dseg < 4.0 * elen)
    for k in np.nonzero(close)[0]:
        tf = tf_all[k]
        steps = dline[k] * 2.0 ** np.arange(0, 64) / elen[k]
        steps = steps[steps < 1.0 + abs(tf)]
        ts = np.concatenate([[tf], tf - steps, tf + steps])
        ts = ts[(ts > 0.0) & (ts < 1.0)]
        if ts.size:
            pts.append(rel[k] + ts[:, None] * edge[k])
    allpts = np.concatenate(pts)
    ang = np.unique(np.arctan2(allpts[:, 1], allpts[:, 0]))
    lo = ang
    hi = np.append(ang[1:], ang[0] + 2.0 * np.pi)
    width = hi - lo
    ok = width > 1e-15
    lo, width = lo[ok], width[ok]
    mid = lo + 0.5 * width
    npan = mid.shape[0]

    # each active edge covers a contiguous run of panels (cyclically)
    ap, ae, cpe = rel[active], edge[active], cross_pe[active]
    a0 = np.arctan2(ap[:, 1], ap[:, 0])
    aq = ap + ae
    sweep = np.angle(np.exp(1j * (np.arctan2(aq[:, 1], aq[:, 0]) - a0)))
    start = np.where(sweep > 0, a0, a0 + sweep)
    start = np.mod(start + np.pi, 2.0 * np.pi) - np.pi
    mid_ext = np.concatenate([mid, mid + 2.0 * np.pi])
    first = np.searchsorted(mid_ext, start)
    last = np.searchsorted(mid_ext, start + np.abs(sweep))
    count = last - first
    ei = np.repeat(np.arange(ap.shape[0]), count)
    offs = np.arange(ei.shape[0]) - np.repeat(np.cumsum(count) - count, count)
    pidx = (np.repeat(first, count) + offs) % npan

    ga, gw = _gauss(q)
    total = np.zeros(2)
    for s in range(0, ei.shape[0], chunk):
        e_, p_ = ei[s:s + chunk], pidx[s:s + chunk]
        phi = (lo[p_] + 0.5 * width[p_])[:, None] + 0.5 * width[p_][:, None] * ga[None, :]
        w = 0.5 * width[p_][:, None] * gw[None, :]
        cx, cy = np.cos(phi), np.sin(phi)
        cross_e = cx * ae[e_, 1][:, None] - cy * ae[e_, 0][:, None]
        r = cpe[e_][:, None] / cross_e
        # leaving the region when the ray points to the right of the ccw edge
        sigma = np.where(cross_e > 0, 1.0, -1.0)
        val = w * sigma * radial_antiderivative(r, a)
        total[0] += np.sum(val * cx)
        total[1] += np.sum(val * cy)
    return total
