import numpy as np
import pytest
from hypothesis import given, strategies as st

from schwarzgeom.checks import (axiom_suite, connection_residual, jet_space, mobius_space, orthogonal_fixed_points,
                                power_table, powers, quadric_space, random_fixed_point_pair, random_mobius_triples,
                                random_quadric_triples)
from schwarzgeom.dynamics import MobiusFlow, VelocityField, integrate_reflection
from schwarzgeom.errors import NotAFixedPoint
from schwarzgeom.geometry import SchwarzFn, schwarz_from_curve
from schwarzgeom.moebius import (CircleCoord, MobiusMap, lorentz_dot, mobius_distance, pencil_solution, quadric_product,
                                 random_circle)
from schwarzgeom.series import Jet

seeds = st.integers(0, 2 ** 31 - 1)
IDENT = MobiusMap.identity()


def test_mobius_axioms():
    rep = axiom_suite(mobius_space(), random_mobius_triples(np.random.default_rng(0), 300))
    assert rep.passed and rep.count == 300


def test_quadric_axioms():
    rep = axiom_suite(quadric_space(), random_quadric_triples(np.random.default_rng(0), 300))
    assert max(rep.idempotent, rep.involutive, rep.distributive) < 1e-12


def test_jet_axioms_near_real_axis():
    curves = [Jet.polynomial(c, 0.0, 24) for c in ([0, 1, 0.02j], [0.01j, 1, 0, 0.015j], [-0.01j, 1, -0.01j])]
    P, Q, R = (schwarz_from_curve(g) for g in curves)
    rep = axiom_suite(jet_space(), [(P, Q, R), (Q, R, P), (R, P, Q)])
    assert max(rep.idempotent, rep.involutive, rep.distributive) < 1e-6


# axiom (4)

def test_real_axis_and_unit_circle_are_orthogonal():
    rep = orthogonal_fixed_points(IDENT, MobiusMap([[0, 1], [1, 0]]), z0=1.0)
    assert rep.kind == "orthogonal"
    assert rep.deriv_sum < 1e-15


def test_equal_circles():
    S = MobiusMap([[1, -2j], [0, 1]])
    assert orthogonal_fixed_points(S, MobiusMap(3j * S.m)).kind == "equal"


def test_non_fixed_pair_rejected():
    Q = MobiusMap([[-1j, 0], [1, -1j]]).to_schwarz_form()  # |z - i| = 1
    with pytest.raises(NotAFixedPoint):
        orthogonal_fixed_points(IDENT, Q)


@given(seeds, st.booleans())
def test_fixed_point_dichotomy(seed, orth):
    P, Q = random_fixed_point_pair(np.random.default_rng(seed), orth)
    rep = orthogonal_fixed_points(P, Q)
    assert rep.kind == ("orthogonal" if orth else "equal")
    if orth:
        assert rep.deriv_sum < 1e-8
        assert abs(rep.lorentz) < 1e-9


def test_quadric_fixed_points_are_plus_or_minus():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = random_circle(rng)
        for y in (x, CircleCoord(-x.x)):
            assert np.allclose(quadric_product(x, y).x, y.x, atol=1e-14)
        v = rng.normal(size=4)
        # orthogonal y is sent to -y, which is y only up to the sign identification
        y = v - lorentz_dot(v, x) / lorentz_dot(x, x) * x.x
        assert np.allclose(quadric_product(x, CircleCoord(y)).x, -y, atol=1e-12)


# powers

def test_line_powers():
    tab = power_table(mobius_space(), IDENT, MobiusMap([[1, -2j], [0, 1]]), 5)
    for n in range(-5, 6):
        assert mobius_distance(tab.powers[n], MobiusMap([[1, -2j * n], [0, 1]])) < 1e-12
    assert mobius_distance(mobius_space().product(tab.powers[2], tab.powers[3]), tab.powers[1]) < 1e-12
    assert all(v < 1e-10 for v in tab.residuals.values())


def test_powers_of_base_point_are_constant():
    S = MobiusMap([[0, 1], [1, 0]])
    tab = powers(mobius_space(), S, S, -4, 4)
    assert all(mobius_distance(tab[n], S) < 1e-12 for n in tab)


@pytest.mark.parametrize("a", [(1, 0, -1), (1, 0, 1), (0, 0, 1)])
def test_pencil_powers(a):
    tab = power_table(mobius_space(), IDENT, pencil_solution(*a, 0.2), 5)
    for n in range(-5, 6):
        assert mobius_distance(tab.powers[n], pencil_solution(*a, 0.2 * n)) < 1e-10
    assert tab.residuals["homomorphism"] < 1e-10


def test_quadric_powers():
    rng = np.random.default_rng(5)
    o, p = random_circle(rng), random_circle(rng)
    tab = power_table(quadric_space(), o, p, 3)
    assert tab.residuals["homomorphism"] < 1e-9


# canonical connection

def test_rotating_line_connection():
    F = MobiusFlow.pencil(0, -2, 0).family(np.linspace(-2, 2, 9), np.linspace(-1, 1, 21))
    assert connection_residual(F).max_abs < 1e-10


def test_integrated_elliptic_connection():
    v = VelocityField.poly([-0.5, 0, 0.5])
    F = integrate_reflection(v, np.linspace(-2, 2, 9), t_span=(-1, 1), num=2001)
    assert connection_residual(F, use_exact=False).max_abs < 1e-5


def test_planted_family_is_not_geodesic():
    F = MobiusFlow.planted().family(np.linspace(-1, 1, 5), np.linspace(0.1, 1, 10))
    rep = connection_residual(F)
    assert rep.max_abs > 1e-2
    # S = z - 2i t^2: S_tt = -4i, S_tz = 0
    assert np.allclose(rep.field, -4j)


def test_translation_family_violating_first_order_equation():
    # S = z + i t^2 solves no first-order equation S_t = g S_z with g fixed
    flow = MobiusFlow(lambda t: np.array([[1, -0.5j * t * t], [0, 1]]),
                      lambda t: np.array([[0, -1j * t], [0, 0]]),
                      lambda t: np.array([[0, -1j], [0, 0]]))
    F = flow.family(np.linspace(-1, 1, 5), np.linspace(-1, 1, 11))
    assert connection_residual(F).max_abs > 1e-2
