import numpy as np
import pytest

from alphapatch.curve import circle, ellipse, reflect, reparametrize_constant_speed, resample, spectral_diff
from alphapatch.dynamics import (
    Geometry,
    PatchSystem,
    kernel_g,
    lambda_coefficient,
    nl_velocity,
    point_velocity,
    rhs,
)
from alphapatch.errors import BadExponent, PatchOverlap, PointOnBoundary, WallSingularity
from alphapatch.singularity import mirror_contour


def outward_normal(c):
    d = c.dz(1)
    n = np.column_stack([d.imag, -d.real])
    return n / np.hypot(n[:, 0], n[:, 1])[:, None]


def normal_part(values, c):
    return np.einsum("ij,ij->i", values, outward_normal(c))


# -- kernel --------------------------------------------------------------------

@pytest.mark.parametrize("eta,alpha,expected", [
    (np.pi, 1.0, 0.5),
    (np.pi / 2, 1.0, 2 ** -0.5),
    (np.pi, 0.5, 2 ** -0.5),
])
def test_kernel_g_on_unit_circle(eta, alpha, expected):
    assert abs(kernel_g(circle(64), 5, eta, alpha) - expected) < 1e-12


def test_kernel_g_rejects_alpha():
    with pytest.raises(BadExponent):
        kernel_g(circle(16), 0, 1.0, 2.0)


# -- NL velocity ---------------------------------------------------------------

@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.5])
def test_circle_nl_is_tangential(alpha):
    c = circle(256)
    nl = nl_velocity(PatchSystem((c,), (1.0,), alpha=alpha), 0).values
    assert np.max(np.abs(normal_part(nl, c))) < 1e-6


def test_circle_nl_normal_matches_point_quadrature():
    # normal component at an inward offset tends to the boundary value
    c = circle(64)
    sys = PatchSystem((c,), (1.0,), alpha=0.5)
    n = outward_normal(c)
    for i in (0, 17, 40):
        u = point_velocity(sys, c.points[i] - 1e-4 * n[i], quad_n=4096)
        assert abs(u @ n[i]) < 1e-8


def test_half_plane_superposition():
    c = circle(128, 1.0, (0.0, 10.0))
    half = PatchSystem((c,), (1.0,), Geometry.HALF_PLANE, alpha=0.5)
    full = PatchSystem((c,), (1.0,), Geometry.FULL_PLANE, alpha=0.5)
    image = PatchSystem((reflect(c),), (-1.0,), Geometry.FULL_PLANE, alpha=0.5)
    nh = normal_part(nl_velocity(half, 0).values, c)
    nf = normal_part(nl_velocity(full, 0).values, c)
    img = np.array([point_velocity(image, p, quad_n=1024) for p in c.points])
    assert np.max(np.abs(nh - (nf + normal_part(img, c)))) < 1e-3


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0])
def test_far_field_cross_term_bound(alpha):
    a = circle(64, 1.0, (50.0, 0.0))
    b = circle(64, 1.0, (-50.0, 0.0))
    pair = nl_velocity(PatchSystem((a, b), (1.0, 1.0), alpha=alpha), 0).values
    alone = nl_velocity(PatchSystem((a,), (1.0,), alpha=alpha), 0).values
    cross = np.max(np.hypot(*(pair - alone).T))
    assert cross <= 2 * np.pi * 2 * 98.0 ** -alpha * np.max(a.speed)


def test_overlapping_patches_rejected():
    a = circle(32)
    b = a.with_points(a.points[::-1] * 1.0)
    with pytest.raises(PatchOverlap):
        nl_velocity(PatchSystem((a, b), (1.0, 1.0)), 0)


def test_wall_contact_warns_and_wall_velocity_converges():
    # box resting on the wall: u2 on the flat bottom vanishes up to the
    # interpolant's slope there, which decays spectrally with resolution
    from alphapatch.singularity import rounded_box
    errs = []
    for n in (256, 512):
        c = rounded_box(0.5, 2.5, 1.0, (0.8, 0.8, 0.8, 0.8), n)
        sys = PatchSystem((c,), (1.0,), Geometry.HALF_PLANE, alpha=0.5)
        with pytest.warns(WallSingularity):
            nl = nl_velocity(sys, 0).values
        on_wall = c.points[:, 1] == 0.0
        assert on_wall.sum() > 40
        errs.append(np.max(np.abs(nl[on_wall, 1])))
    assert errs[1] < 1e-8
    assert errs[1] < errs[0] / 100


# -- lambda --------------------------------------------------------------------

@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.9])
def test_lambda_vanishes_on_circle(alpha):
    sys = PatchSystem((circle(128),), (1.0,), alpha=alpha)
    nl = nl_velocity(sys, 0)
    assert np.max(np.abs(lambda_coefficient(sys, 0, nl).values)) < 1e-8


def test_lambda_derivative_integrates_to_zero():
    c = reparametrize_constant_speed(ellipse(128), 1e-10)
    sys = PatchSystem((c,), (1.0,), alpha=0.7)
    lam = rhs(sys).lam[0].values
    assert abs(np.sum(spectral_diff(lam, 1)) * c.h) < 1e-10


def test_lambda_two_fold_symmetry_on_ellipse():
    c = reparametrize_constant_speed(ellipse(128), 1e-10)
    lam = rhs(PatchSystem((c,), (1.0,), alpha=0.5)).lam[0].values
    assert np.max(np.abs(lam - np.roll(lam, 64))) < 1e-8


# -- rhs -----------------------------------------------------------------------

def test_circle_rhs_is_tangential():
    c = circle(256)
    b = rhs(PatchSystem((c,), (1.0,), alpha=0.5))
    assert np.max(np.abs(normal_part(b.rhs[0].values, c))) < 1e-6


def test_odd_pair_rhs_is_mirror_image():
    right = circle(128, 0.4, (0.7, 0.6))
    left = mirror_contour(right)
    sys = PatchSystem((right, left), (1.0, -1.0), Geometry.HALF_PLANE, alpha=0.5)
    b = rhs(sys)
    idx = (-np.arange(128)) % 128
    mirrored = b.rhs[0].values[idx] * np.array([-1.0, 1.0])
    assert np.max(np.abs(b.rhs[1].values - mirrored)) < 1e-8


def test_empty_system_gives_empty_bundle():
    b = rhs(PatchSystem((), ()))
    assert len(b) == 0


# -- point velocity ------------------------------------------------------------

def test_point_velocity_far_field_decay():
    alpha = 0.6
    sys = PatchSystem((circle(64, 0.05),), (1.0,), alpha=alpha)
    d = 20.0
    u1 = np.hypot(*point_velocity(sys, (d, 0.0), quad_n=512))
    u2 = np.hypot(*point_velocity(sys, (2 * d, 0.0), quad_n=512))
    assert abs(u1 / u2 / 2 ** (1 + alpha) - 1) < 0.05


def test_point_velocity_vanishing_normal_flux_on_wall():
    c = circle(128, 0.5, (0.3, 1.0))
    sys = PatchSystem((c,), (1.0,), Geometry.HALF_PLANE, alpha=0.5)
    for x1 in (-2.0, 0.0, 0.3, 1.7):
        assert abs(point_velocity(sys, (x1, 0.0), quad_n=1024)[1]) < 1e-12


def test_point_velocity_mirror_identity():
    right = circle(128, 0.4, (0.7, 0.6))
    sys = PatchSystem((right, mirror_contour(right)), (1.0, -1.0), Geometry.HALF_PLANE, alpha=0.5)
    for p in [(0.2, 0.3), (1.5, 0.9), (0.05, 2.0)]:
        u = point_velocity(sys, p, quad_n=1024)
        v = point_velocity(sys, (-p[0], p[1]), quad_n=1024)
        assert np.allclose(v, [-u[0], u[1]], atol=1e-6)


def test_point_on_boundary_rejected():
    c = circle(64)
    with pytest.raises(PointOnBoundary):
        point_velocity(PatchSystem((c,), (1.0,)), c.points[3], quad_n=64)


def test_oracle_equivalence_improves_with_refinement():
    c = reparametrize_constant_speed(ellipse(256), 1e-10)
    sys = PatchSystem((c,), (1.0,), alpha=0.5)
    nl = nl_velocity(sys, 0).values
    n = outward_normal(c)
    idx = np.arange(0, 256, 8)
    ref = normal_part(nl, c)[idx]
    errs = []
    for quad_n in (1024, 4096):
        pv = np.array([point_velocity(sys, c.points[i] - 1e-3 * n[i], quad_n=quad_n) for i in idx])
        errs.append(np.max(np.abs(np.einsum("ij,ij->i", pv, n[idx]) - ref)) / np.max(np.abs(ref)))
    assert errs[1] < 0.02
    assert errs[1] <= errs[0]
