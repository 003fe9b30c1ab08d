import numpy as np
import pytest
from hypothesis import given, strategies as st

from schwarzgeom.dynamics import MobiusFlow
from schwarzgeom.errors import BoundaryRoot, PoleOnCircle
from schwarzgeom.geodesics import (CurveSamples, HoloFamily, Reparam, connection_identity_residual,
                                   evaluate_family, exceptional_times, homotopy_segments, invariance_check,
                                   normal_motion_residual, perturbed_sampler, q_operator, q_residual,
                                   rotation_index)
from schwarzgeom.moebius import MobiusMap
from schwarzgeom.series import PolyRat
from schwarzgeom.suites import GALLERY

seeds = st.integers(0, 2 ** 31 - 1)
THETA = np.linspace(0, 2 * np.pi, 256, endpoint=False)
CONFOCAL = PolyRat([1, 0, 1], [0, 2])
CUSP = PolyRat([4, -4, 1])
CELTIC = PolyRat([5], [0, -5, 0, 0, 0, 1])


def test_confocal_ellipse():
    s = evaluate_family(HoloFamily(CONFOCAL), 1.0, THETA)
    assert np.allclose(s.w, np.cos(THETA) * np.cosh(1) + 1j * np.sin(THETA) * np.sinh(1), atol=1e-14)


def test_expanding_circle():
    for t in (-0.5, 0.0, 0.8):
        s = evaluate_family(HoloFamily(PolyRat([0, 1])), t, THETA)
        assert np.allclose(np.abs(s.w), np.exp(t), rtol=1e-14)


def test_cusp_loop_birth():
    t0 = np.log(2)
    assert rotation_index(CUSP, np.exp(t0 - 0.05)).index == 1
    assert rotation_index(CUSP, np.exp(t0 + 0.05)).index == 2


def test_pole_on_curve_is_refused():
    with pytest.raises(PoleOnCircle):
        HoloFamily(CELTIC).evaluate(np.log(5) / 4, THETA)


# the quartic operator

def test_planar_square_family_has_vanishing_operator():
    s = HoloFamily(PolyRat([0, 0, 1]), planar=True).evaluate(0.7, np.linspace(-2, 2, 41))
    assert np.max(np.abs(q_operator(s))) < 1e-13


def test_expanding_circle_is_geodesic():
    assert q_residual(HoloFamily(PolyRat([0, 1])), 0.3, THETA).max_abs < 1e-12


def test_celtic_cross_is_geodesic():
    assert q_residual(HoloFamily(CELTIC), 0.1, THETA).max_rel < 1e-9


@pytest.mark.parametrize("name", sorted(GALLERY))
def test_gallery_families_are_geodesic(name):
    F = HoloFamily(GALLERY[name])
    ts = exceptional_times(F)
    for t in np.linspace(-0.6, 1.2, 10):
        if ts and min(abs(t - s) for s in ts) < 1e-3:
            continue
        assert q_residual(F, t, THETA).max_rel < 1e-9


def test_perturbed_family_is_not_geodesic():
    s = perturbed_sampler(HoloFamily(CONFOCAL), 0.1)(0.5, THETA)
    assert np.max(np.abs(q_operator(s).imag)) > 1e-3


# normal motion

def test_expanding_circle_moves_normally():
    r = normal_motion_residual(HoloFamily(PolyRat([0, 1])), 0.4, THETA)
    assert r.geodesic < 1e-12 and r.normal < 1e-12


def test_confocal_family_moves_normally():
    r = normal_motion_residual(HoloFamily(CONFOCAL), 0.6, THETA)
    assert q_residual(HoloFamily(CONFOCAL), 0.6, THETA).max_abs < 1e-10
    assert r.is_normal(1e-10)


def test_rotating_line_moves_normally():
    t, x = 0.3, np.linspace(-2, 2, 9)
    e = np.exp(1j * t)
    s = CurveSamples(t, x, e * x, e * np.ones_like(x), 1j * e * x, 0 * x, -e * x, 1j * e * np.ones_like(x))
    r = normal_motion_residual(s)
    assert r.geodesic < 1e-10 and r.normal < 1e-10


# rotation index

def test_cusp_index():
    assert rotation_index(CUSP, 3.0).index == 2
    assert rotation_index(CUSP, 1.0).index == 1


def test_identity_index():
    assert all(rotation_index(PolyRat([0, 1]), r).index == 1 for r in (0.1, 1.0, 7.0))


@pytest.mark.parametrize("r, index, zeros, poles", [(0.5, -1, 0, 2), (1.2, 3, 4, 2), (2.0, -5, 4, 10)])
def test_celtic_cross_index(r, index, zeros, poles):
    rep = rotation_index(CELTIC, r)
    assert (rep.index, rep.zeros, rep.poles, rep.winding) == (index, zeros, poles, index)


def test_exceptional_times():
    assert np.allclose(exceptional_times(HoloFamily(CONFOCAL)), [0.0])
    assert np.allclose(exceptional_times(HoloFamily(CUSP)), [np.log(2)])
    assert np.allclose(exceptional_times(HoloFamily(CELTIC)), [0.0, np.log(5) / 4])


@pytest.mark.parametrize("name", sorted(GALLERY))
def test_index_constant_between_exceptional_times(name):
    F = HoloFamily(GALLERY[name])
    ts = exceptional_times(F)
    lo, hi = ts[0] - 0.5, ts[-1] + 0.5
    segs = homotopy_segments(F, lo, hi)
    for seg in segs:
        a, b = seg.t_interval
        for u in np.linspace(a, b, 7)[1:-1]:
            assert rotation_index(F.h, np.exp(u)).index == seg.index


def test_simple_critical_point_adds_a_loop():
    rng = np.random.default_rng(7)
    for _ in range(10):
        c = 0.5 + 1.5 * rng.uniform()
        h = PolyRat.from_roots([c * np.exp(2j * np.pi * rng.uniform())] * 2)  # h' has a simple zero
        t0 = np.log(c)
        assert rotation_index(h, np.exp(t0 + 0.01)).index - rotation_index(h, np.exp(t0 - 0.01)).index == 1


def random_rational(rng):
    p, q = rng.integers(0, 7, size=2)
    zeros = rng.uniform(0.2, 2.5, p) * np.exp(2j * np.pi * rng.uniform(size=p))
    poles = rng.uniform(0.2, 2.5, q) * np.exp(2j * np.pi * rng.uniform(size=q))
    return PolyRat.from_roots(zeros, poles, scale=rng.uniform(0.5, 2.0))


def test_index_formula_matches_winding_on_random_maps():
    rng = np.random.default_rng(2024)
    done = 0
    while done < 100:
        h = random_rational(rng)
        try:
            rep = rotation_index(h, rng.uniform(0.3, 2.5))
        except BoundaryRoot:
            continue
        assert rep.index == rep.winding
        done += 1


# invariance of the operator

def test_dilation_ratio():
    rep = invariance_check(perturbed_sampler(HoloFamily(CONFOCAL)), 0.5, THETA, phi=MobiusMap([[2, 0], [0, 1]]))
    assert np.max(np.abs(rep.ratios - 16)) < 1e-7 * 16


def test_identity_reparametrization_ratio():
    rep = invariance_check(perturbed_sampler(HoloFamily(CONFOCAL)), 0.5, THETA, sigma=Reparam.identity())
    assert np.max(np.abs(rep.ratios - 1)) < 1e-12


def test_sine_reparametrization_ratio():
    sample = perturbed_sampler(HoloFamily(CONFOCAL))
    rep = invariance_check(sample, 0.5, THETA, sigma=Reparam.from_expr("x + 0.1*sin(x)"))
    assert rep.max_rel_err < 1e-7
    kept = np.abs(q_operator(sample(0.5, THETA)).imag) >= 1e-14
    assert np.allclose(rep.expected, (1 + 0.1 * np.cos(THETA[kept])) ** 3)


@given(seeds)
def test_mobius_ratio_is_fourth_power_of_derivative(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    m[1, 0] *= 0.05  # keep the pole away from the sampled curve
    sample = perturbed_sampler(HoloFamily(CUSP))
    rep = invariance_check(sample, 0.3, THETA, phi=MobiusMap(m))
    assert rep.max_rel_err < 1e-7


# connection identity

@pytest.mark.parametrize("flow", [MobiusFlow.pencil(1, 0, -1), MobiusFlow.pencil(1, 0, 1), MobiusFlow.pencil(0, -2, 0),
                                  MobiusFlow.planted()])
def test_connection_identity_on_canonical_families(flow):
    x = np.linspace(-2, 2, 17)
    for t in (0.15, 0.6, 1.0):
        s = flow.samples(t, x)
        S, S_t, S_tt, S_z, _, S_tz = flow.derivatives(t, s.w)
        assert connection_identity_residual(s, S_tt - S_t * S_tz / S_z) < 1e-6


@pytest.mark.parametrize("name", sorted(GALLERY))
def test_connection_identity_on_gallery(name):
    assert connection_identity_residual(HoloFamily(GALLERY[name]).evaluate(0.9, THETA)) < 1e-6
