"""Monitored quantities: distances, norms, arc-chord sup and the regularity criterion."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .curve import (
    SampledField,
    _field_values,
    arc_chord,
    area,
    fmt,
    holder_seminorm,
    lp_seminorm,
    spectral_diff,
)
from .dynamics import Geometry, PatchSystem, VelocityBundle
from .errors import BadExponent, NegativeInput, NonpositiveInput

DIAGNOSTICS_SCHEMA = "alphapatch.diagnostics/1"
THIRD_DERIVATIVE_MIN_NODES = 128


def default_p(alpha: float) -> float:
    return max(2.0, 1.1 / (1.0 - alpha / 2.0))


def default_delta(alpha: float) -> float:
    return min(1.0, alpha / 2.0 + 0.05)


def p_threshold(alpha: float) -> float:
    return 1.0 / (1.0 - alpha / 2.0)


@dataclass(frozen=True)
class DistanceReport:
    delta: float                 # min distance between distinct patches
    single_patch: bool
    reflected: float = math.inf  # min distance from a patch to any reflected patch (half plane)


def min_patch_distance(sys: PatchSystem) -> DistanceReport:
    """Node-pair minimum distance between distinct patches.

    The grid value overestimates the continuum distance by at most one chord
    length.  In the half plane the distance to every reflected patch other
    than a patch's own reflection is reported too.
    """
    cs = sys.contours
    best = math.inf
    for i in range(len(cs)):
        for j in range(i + 1, len(cs)):
            d = np.abs(cs[i].z[:, None] - cs[j].z[None, :]).min()
            best = min(best, float(d))
    refl = math.inf
    if sys.geometry is Geometry.HALF_PLANE:
        for i in range(len(cs)):
            for j in range(len(cs)):
                if i != j:
                    d = np.abs(cs[i].z[:, None] - cs[j].z.conj()[None, :]).min()
                    refl = min(refl, float(d))
    return DistanceReport(best, len(cs) < 2, refl)


def blowup_integrand(sys: PatchSystem, p: float, sup_f: float | None = None) -> float:
    """(||x''||_p + ||F||_inf) ||x''||_p ||F||_inf^(2+alpha) with system-wide maxima."""
    if not (p == math.inf or p >= 1):
        raise BadExponent(f"p must be >= 1, got {p}")
    d2 = max(lp_seminorm(np.abs(c.dz(2)), p) for c in sys.contours)
    if sup_f is None:
        sup_f = max(arc_chord(c, sys.floor_rel).sup_value for c in sys.contours)
    return (d2 + sup_f) * d2 * sup_f ** (2.0 + sys.alpha)


def interpolation_check(f: SampledField | np.ndarray, sigma: float) -> float:
    """max_i |f'| - 2 ||f'||_{C^sigma}^(1/(1+sigma)) f^(sigma/(1+sigma)) on the grid.

    ``||g||_{C^sigma}`` is the sup norm for sigma = 0 and the Hoelder seminorm
    otherwise.  A nonpositive return value certifies the inequality nodewise.
    Derivative values at the FFT roundoff level are treated as zero, so that
    zeros of f (where both sides vanish) do not report spurious violations.
    """
    v = np.asarray(_field_values(f), dtype=float)
    if np.any(v < 0):
        raise NegativeInput("interpolation_check needs a nonnegative field")
    if not 0.0 <= sigma <= 1.0:
        raise BadExponent(f"sigma must lie in [0, 1], got {sigma}")
    df = spectral_diff(v, 1)
    noise = 100.0 * np.finfo(float).eps * v.size * float(np.max(np.abs(v)))
    df = np.where(np.abs(df) <= noise, 0.0, df)
    if sigma == 0.0:
        norm = float(np.max(np.abs(df)))
    else:
        norm = holder_seminorm(df, sigma)
    bound = 2.0 * norm ** (1.0 / (1.0 + sigma)) * v ** (sigma / (1.0 + sigma))
    return float(np.max(np.abs(df) - bound))


def quartic_quotient(f: SampledField | np.ndarray, beta: float) -> float:
    """Trapezoidal value of int f'^4 / f^beta over the period."""
    v = np.asarray(_field_values(f), dtype=float)
    if np.any(v <= 0):
        raise NonpositiveInput("quartic_quotient needs a positive field")
    if not 1.0 < beta <= 2.0:
        raise BadExponent(f"beta must lie in (1, 2], got {beta}")
    df = spectral_diff(v, 1)
    return float(2.0 * np.pi / v.size * np.sum(df ** 4 / v ** beta))


def h2_norm_sq(f: SampledField | np.ndarray) -> float:
    v = np.asarray(_field_values(f), dtype=float)
    h = 2.0 * np.pi / v.size
    return float(h * np.sum(v ** 2 + spectral_diff(v, 1) ** 2 + spectral_diff(v, 2) ** 2))


@dataclass
class PatchDiagnostics:
    area: float
    sup_F: float
    d1_inf: float
    d2_l2: float
    d2_lp: float
    d3_l2: float | None
    d1_holder: float
    lambda_inf: float
    dlambda_inf: float


@dataclass
class DiagnosticsRecord:
    time: float
    patches: list[PatchDiagnostics]
    delta: float
    criterion_integrand: float
    cumulative_criterion: float
    p: float
    holder_delta: float
    warnings: list[str] = field(default_factory=list)

    def to_row(self) -> dict[str, str]:
        row = {"time": fmt(self.time)}
        for k, pd in enumerate(self.patches):
            for key, val in asdict(pd).items():
                row[f"p{k}_{key}"] = "" if val is None else fmt(val)
        row["delta"] = fmt(self.delta)
        row["criterion_integrand"] = fmt(self.criterion_integrand)
        row["cumulative_criterion"] = fmt(self.cumulative_criterion)
        row["warnings"] = ";".join(self.warnings)
        return row


def collect(sys: PatchSystem, bundle: VelocityBundle, time: float = 0.0,
            cumulative: float = 0.0, p: float | None = None,
            holder_delta: float | None = None) -> DiagnosticsRecord:
    """One record of every monitored quantity for the current state."""
    p = default_p(sys.alpha) if p is None else float(p)
    hd = default_delta(sys.alpha) if holder_delta is None else float(holder_delta)
    notes = []
    if p <= p_threshold(sys.alpha):
        notes.append(f"p={p:g} is not above (1-alpha/2)^-1={p_threshold(sys.alpha):g}")
    if hd <= sys.alpha / 2:
        notes.append(f"delta={hd:g} is not above alpha/2")
    patches = []
    sups = []
    for k, c in enumerate(sys.contours):
        d1, d2 = c.dz(1), c.dz(2)
        sup_f = arc_chord(c, sys.floor_rel).sup_value
        sups.append(sup_f)
        lam = bundle.lam[k].values
        d3 = None
        if c.n_nodes >= THIRD_DERIVATIVE_MIN_NODES:
            d3 = lp_seminorm(np.abs(c.dz(3)), 2)
        patches.append(PatchDiagnostics(
            area=area(c),
            sup_F=sup_f,
            d1_inf=float(np.max(np.abs(d1))),
            d2_l2=lp_seminorm(np.abs(d2), 2),
            d2_lp=lp_seminorm(np.abs(d2), p),
            d3_l2=d3,
            d1_holder=holder_seminorm(np.column_stack([d1.real, d1.imag]), hd),
            lambda_inf=float(np.max(np.abs(lam))),
            dlambda_inf=float(np.max(np.abs(spectral_diff(lam, 1)))),
        ))
    dist = min_patch_distance(sys)
    integrand = blowup_integrand(sys, p, max(sups)) if sups else 0.0
    return DiagnosticsRecord(time, patches, dist.delta, integrand, cumulative, p, hd, notes)


def records_to_csv(records: list[DiagnosticsRecord]) -> str:
    """CSV with a schema comment line; one row per record."""
    buf = io.StringIO()
    buf.write(f"# schema={DIAGNOSTICS_SCHEMA}\n")
    if not records:
        return buf.getvalue()
    rows = [r.to_row() for r in records]
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
