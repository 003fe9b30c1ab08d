import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize_scalar

from schwarzgeom.dynamics import (MobiusFlow, StationaryPoint, VelocityField, check_sjk, davis_iterate,
                                  integrate_reflection, local_conjugation, pde_residuals, rate_measurement,
                                  reciprocal_field, stationary_points, time_derivatives, trace_equipotential)
from schwarzgeom.errors import GridTooCoarse, InsufficientResolution, SingularityHit
from schwarzgeom.geometry import SchwarzFn
from schwarzgeom.moebius import MobiusMap, adj, circle_of, mobius_distance, pencil_solution
from schwarzgeom.series import PolyRat

seeds = st.integers(0, 2 ** 31 - 1)
IDENT = MobiusMap.identity()
PENCILS = [(1.0, 0.0, 1.0), (0.0, 0.0, 1.0), (1.0, 0.0, -1.0)]


def pencil_velocity(a):
    # g = -2i v = i(a0 + a1 z + a2 z^2)
    return VelocityField.poly([-0.5 * c for c in a])


# Davis iteration

def test_davis_parallel_lines():
    it = davis_iterate(IDENT, MobiusMap([[1, -2j], [0, 1]]), 4)
    for k in range(5):
        assert mobius_distance(it[k].rep, MobiusMap([[1, -2j * k], [0, 1]])) < 1e-12


def test_davis_constant_sequence():
    S = MobiusMap([[0, 1], [1, 0]])
    it = davis_iterate(S, S, 6)
    assert all(mobius_distance(it[k].rep, S) < 1e-12 for k in range(7))


def test_davis_follows_elliptic_pencil():
    it = davis_iterate(IDENT, pencil_solution(1, 0, -1, 0.1), 20)
    for n in range(21):
        assert mobius_distance(it[n].rep, pencil_solution(1, 0, -1, 0.1 * n)) < 1e-10


def test_davis_backward_iterates():
    it = davis_iterate(IDENT, pencil_solution(1, 0, 1, 0.1), -5)
    assert mobius_distance(it[-5].rep, pencil_solution(1, 0, 1, -0.5)) < 1e-10


def test_davis_on_jets_matches_exact_lines():
    S0 = SchwarzFn(IDENT.jet(0.0, 24), 0.0)
    S1 = SchwarzFn(MobiusMap([[1, -0.2j], [0, 1]]).jet(0.1j, 24), 0.1j)
    it = davis_iterate(S0, S1, 3)
    z = 0.3j + 0.02
    assert abs(it[3](z) - (z - 0.6j)) < 1e-8


def test_sjk_examples():
    lines = davis_iterate(IDENT, MobiusMap([[1, -2j], [0, 1]]), 10)
    assert check_sjk(lines, 2, 3) < 1e-12
    assert all(check_sjk(lines, 0, k) < 1e-15 for k in range(6))
    ell = davis_iterate(IDENT, pencil_solution(1, 0, -1, 0.1), 10)
    assert check_sjk(ell, 2, 2) < 1e-10


# continuous reflection

def test_rotating_line():
    t = np.linspace(0, np.pi / 4, 11)
    F = integrate_reflection(VelocityField.poly([0, 1]), [1.0], t_eval=t)
    assert np.max(np.abs(F.S[:, 0] - np.exp(-2j * t))) < 1e-9


def test_translation():
    z = np.array([-1.0, 0.5, 2.0])
    t = np.linspace(-1, 1, 21)
    F = integrate_reflection(VelocityField.poly([-0.5]), z, t_eval=t)
    assert np.max(np.abs(F.S - (z[None, :] + 1j * t[:, None]))) < 1e-12


@pytest.mark.parametrize("a", PENCILS)
def test_integration_matches_closed_form_pencils(a):
    z = np.linspace(-2, 2, 9)
    t = np.linspace(-1, 1, 41)
    F = integrate_reflection(pencil_velocity(a), z, t_eval=t)
    exact = np.array([pencil_solution(*a, s)(z) for s in t])
    assert np.max(np.abs(F.S - exact)) < 1e-8


def test_singularity_is_reported():
    # v = z^2 + 1/4: the trajectory from 0 converges to the zero of v at -i/2
    with pytest.raises(SingularityHit):
        integrate_reflection(VelocityField.poly([0.25, 0, 1]), [0.0], t_span=(0, 8), num=81)


# PDE residuals

def test_rotating_line_pde_by_differences():
    F = MobiusFlow.pencil(0, -2, 0).family(np.linspace(-2, 2, 5), np.linspace(-0.5, 0.5, 1001))
    r = pde_residuals(F, use_exact=False)
    assert r.first_order < 1e-5 and r.second_order < 1e-5


def test_translation_pde():
    F = MobiusFlow.pencil(1, 0, 0).family(np.linspace(-2, 2, 5), np.linspace(-0.5, 0.5, 1001))
    r = pde_residuals(F)
    assert r.first_order < 1e-10 and r.second_order < 1e-10
    # S is linear in t, so differences only carry rounding (eps / h^2 in the second derivative)
    r = pde_residuals(F, use_exact=False)
    assert r.first_order < 1e-10 and r.second_order < 1e-9


def test_integrated_elliptic_pde():
    F = integrate_reflection(pencil_velocity((1, 0, -1)), np.linspace(-2, 2, 9), t_span=(-1, 1), num=2001)
    r = pde_residuals(F, use_exact=False)
    assert r.first_order < 1e-4 and r.second_order < 1e-4


def test_coarse_grid_rejected():
    F = integrate_reflection(pencil_velocity((1, 0, -1)), [0.5], t_span=(-1, 1), num=21)
    with pytest.raises(GridTooCoarse):
        time_derivatives(F, use_exact=False)


# structural properties of the flow

@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.sampled_from(PENCILS))
def test_group_property_mobius(t, u, a):
    lhs = pencil_solution(*a, t + u)
    rhs = MobiusMap(pencil_solution(*a, t).m @ pencil_solution(*a, u).m)
    assert mobius_distance(lhs, rhs) < 1e-10


def test_group_property_numeric():
    v = VelocityField.poly([0, 0, 1, 1])
    x = np.linspace(-0.8, 0.8, 5) + 0.3
    u, t = 0.2, 0.3
    Fu = integrate_reflection(v, x, t_eval=[u], tol=1e-11)
    Ft = integrate_reflection(v, Fu.S[0], t_eval=[t], tol=1e-11)
    Fs = integrate_reflection(v, x, t_eval=[t + u], tol=1e-11)
    assert np.max(np.abs(Ft.S[0] - Fs.S[0])) < 1e-9


def test_normal_motion():
    for v in (VelocityField.poly([0, 0, 1, 1]), VelocityField.poly([0.5, 0, -0.5]), VelocityField.poly([1, 0.3])):
        F = integrate_reflection(v, np.linspace(-0.9, 0.9, 13), t_span=(-0.5, 0.5), num=21)
        assert F.normal_motion_residual() < 1e-6


def test_z_derivative_equals_velocity_ratio():
    v = VelocityField.poly([0.3, 1, 0.5])
    x = np.linspace(-0.5, 0.5, 201)
    F = integrate_reflection(v, x, t_eval=np.array([-0.4, 0.3]), tol=1e-11)
    h = x[1] - x[0]
    fd = (F.S[:, 2:] - F.S[:, :-2]) / (2 * h)
    ratio = v(F.S[:, 1:-1]) / v(x[1:-1])
    assert np.max(np.abs(fd - ratio)) < 1e-4
    assert np.max(np.abs(F.S_z - v(F.S) / v(x))) < 1e-8


def test_stationary_points_stay_fixed():
    v = VelocityField.poly([0, -1, 0, 1])  # zeros at 0, +-1
    x = np.linspace(-1.5, 1.5, 7)
    F = integrate_reflection(v, x, t_span=(-0.5, 0.5), num=21)
    for x0 in (-1.0, 0.0, 1.0):
        j = int(np.argmin(np.abs(x - x0)))
        assert np.max(np.abs(F.gamma[:, j] - x0)) < 1e-8
        assert np.max(np.abs(F.S[:, j] - x0)) < 1e-8


@pytest.mark.parametrize("a", PENCILS)
def test_conformal_covariance_of_generator(a):
    flow = MobiusFlow.pencil(*a)
    phi = MobiusMap([[1 + 0.5j, 0.3], [0.2j, 1.0]])
    z = np.array([0.3 + 0.2j, -0.7 + 0.1j, 1.1 - 0.4j])
    w = phi.inverse()(z)
    g_new = phi.deriv(w) * flow.g(w)
    for t in (-0.4, 0.0, 0.5):
        M, dM, _ = flow.matrices(t)
        T = MobiusMap(np.conj(phi.m) @ M @ adj(phi.m))
        dT = np.conj(phi.m) @ dM @ adj(phi.m)
        (p, q), (r, s) = T.m
        (dp, dq), (dr, ds) = dT
        N, D = p * z + q, r * z + s
        T_t = ((dp * z + dq) * D - N * (dr * z + ds)) / D ** 2
        assert np.max(np.abs(T_t - g_new * T.deriv(z))) < 1e-8


# stationary points and rates

def test_stationary_point_of_rotation():
    (sp,) = stationary_points(VelocityField.poly([0, 1]))
    assert (sp.x0, sp.multiplicity, sp.theta_rate) == (0.0, 1, 1.0)
    assert abs(sp.lam - 1) < 1e-15


def test_stationary_points_of_elliptic_field():
    sps = sorted(stationary_points(VelocityField.poly([0.5, 0, -0.5])), key=lambda s: s.x0)
    assert [round(s.x0, 12) for s in sps] == [-1.0, 1.0]
    assert [round(s.theta_rate, 12) for s in sps] == [1.0, -1.0]


def test_stationary_point_of_tangency():
    sps = {round(s.x0, 12): s for s in stationary_points(VelocityField.poly([0, 0, 1, 1]))}
    assert sorted(sps) == [-1.0, 0.0]
    sp = sps[0.0]
    assert sp.multiplicity == 2
    assert abs(sp.lam + 1) < 1e-12
    assert abs(sp.kasner_rate - 2 / 3) < 1e-15


def test_rotation_rate_measured():
    v = VelocityField.poly([0, 1])
    F = integrate_reflection(v, np.linspace(-1, 1, 5), t_span=(-1, 1), num=201)
    m = rate_measurement(F, stationary_points(v)[0])
    assert abs(m.rate - 1) < 1e-4


def test_kasner_rate_measured():
    v = VelocityField.poly([0, 0, 1, 1])
    F = integrate_reflection(v, np.linspace(-0.5, 0.5, 5), t_span=(-1, 1), num=201)
    sp = [s for s in stationary_points(v) if s.multiplicity == 2][0]
    m = rate_measurement(F, sp)
    assert abs(m.rate - 2 / 3) < 1e-3


def test_translation_has_no_rate():
    v = VelocityField.poly([-0.5])
    assert stationary_points(v) == []
    F = integrate_reflection(v, np.linspace(-1, 1, 5), num=11)
    with pytest.raises(InsufficientResolution):
        rate_measurement(F, StationaryPoint(0.0, 1, 1.0, theta_rate=1.0))


def test_rate_needs_straddling_seeds():
    v = VelocityField.poly([0, 1])
    F = integrate_reflection(v, np.linspace(0.5, 1, 5), num=11)
    with pytest.raises(InsufficientResolution):
        rate_measurement(F, stationary_points(v)[0])


# equipotentials

def test_equipotential_of_rotation_is_a_ray():
    e = trace_equipotential(VelocityField.poly([0, 1]), 1.0, s_span=0.5, num=11)
    assert np.max(np.abs(e.z.imag)) < 1e-10
    assert np.allclose(e.z.real, 1 - e.s, atol=1e-9)
    assert e.drift < 1e-10


def test_equipotential_of_translation_is_horizontal():
    e = trace_equipotential(VelocityField.poly([-0.5]), 0.0, s_span=2.0, num=11)
    assert np.max(np.abs(e.z.imag)) < 1e-12
    assert e.drift < 1e-12


def test_equipotential_of_hyperbolic_field_is_a_pencil_circle():
    a = (-1.0, 0.0, -1.0)  # g = -2i v for v = (1 + z^2)/2
    z0 = 0.4 + 0.3j
    miss = lambda t: abs(pencil_solution(*a, t)(z0) - np.conj(z0))
    ts = np.r_[np.linspace(-3, -1e-3, 300), np.linspace(1e-3, 3, 300)]
    t0 = ts[int(np.argmin([miss(s) for s in ts]))]
    t_star = minimize_scalar(miss, bounds=(t0 - 0.02, t0 + 0.02), method="bounded",
                             options={"xatol": 1e-14}).x
    assert miss(t_star) < 1e-7
    shape = circle_of(pencil_solution(*a, t_star))
    e = trace_equipotential(VelocityField.poly([0.5, 0, 0.5]), z0, s_span=1.0, num=51)
    assert np.max(np.abs(np.abs(e.z - shape.center) - shape.radius)) < 1e-6


# reciprocal fields

def test_point_source_and_expanding_circles():
    f = reciprocal_field(lambda z: -1j * z)
    z = np.array([0.3 + 0.4j, -2 + 1j])
    assert np.allclose(f.W(z), z)
    assert np.allclose(f.Y(z), z / np.abs(z) ** 2)


def test_point_vortex_and_rotating_lines():
    f = reciprocal_field(VelocityField.poly([0, 1]))
    z = np.array([0.3 + 0.4j, -2 + 1j])
    x, y = z.real, z.imag
    assert np.allclose(f.W(z), -y + 1j * x)
    assert np.allclose(f.Y(z), 1j * z / np.abs(z) ** 2)


@given(seeds)
def test_reciprocal_norm_product(seed):
    rng = np.random.default_rng(seed)
    v = VelocityField.poly(rng.normal(size=4))
    lam2 = lambda z: 1 + np.abs(z) ** 2
    z = rng.normal(size=6) + 1j * rng.normal(size=6)
    if np.min(np.abs(v(z))) < 1e-6:
        return
    assert np.allclose(reciprocal_field(v, lam2).norm_product(z), 1.0, rtol=1e-12)


# local conjugation

def test_local_conjugation_translation():
    assert abs(local_conjugation(VelocityField.poly([-0.5]), 0.0, 0.3, 0.2 + 0.1j) - (0.2 + 0.4j)) < 1e-12


def test_local_conjugation_rotation():
    for t, z in ((0.05, 1.02 + 0.01j), (-0.1, 0.97)):
        assert abs(local_conjugation(VelocityField.poly([0, 1]), 1.0, t, z) - np.exp(-2j * t) * z) < 1e-9


def test_local_conjugation_confocal():
    # this sign of the square root gives cos(it + arccos z); the other reverses time
    v = lambda z: np.sqrt(1 - z * z + 0j) / 2
    for t, z in ((0.1, 0.5), (-0.2, 0.45 + 0.02j), (0.3, 0.6)):
        exact = z * np.cosh(t) - 1j * np.sqrt(1 - z * z + 0j) * np.sinh(t)
        assert abs(local_conjugation(v, 0.5, t, z) - exact) < 1e-9
        assert abs(local_conjugation(v, 0.5, t, z) - np.cos(1j * t + np.arccos(z + 0j))) < 1e-9
