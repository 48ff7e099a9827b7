import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy import integrate

from conftest import random_disc, random_halfplane, random_mobius_d, random_mobius_h
from hypcontract import (DISC_DENSITY, HALFPLANE_DENSITY, INTERVAL_DENSITY, RAY_DENSITY, Domain,
                         DomainPoint, MobiusD, MobiusH, cayley, cayley_inverse, dist_disc, dist_halfplane,
                         dist_interval, dist_ray)
from hypcontract.core import halfplane_geodesic_bbox, same_point
from hypcontract.errors import BoundaryProximityError, DomainError

halfplane_points = st.builds(complex, st.floats(-20, 20), st.floats(1e-3, 20))
disc_points = st.builds(lambda r, a: r * complex(math.cos(a), math.sin(a)),
                        st.floats(0, 0.999), st.floats(0, 2 * math.pi))


def quad(f, a, b):
    return integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-13)[0]


# --------------------------------------------------------------------------
# points and domains


class TestDomainPoint:
    @pytest.mark.parametrize("factory,bad", [
        (DomainPoint.disc, 1.0), (DomainPoint.disc, 0.6 + 0.8j),
        (DomainPoint.halfplane, 2.0), (DomainPoint.halfplane, 1 - 1j),
        (DomainPoint.ray, 0.0), (DomainPoint.ray, -1.0),
        (DomainPoint.interval, 1.0), (DomainPoint.interval, 0.5j),
        (DomainPoint.halfplane, complex(math.nan, 1.0)),
    ])
    def test_rejects_points_outside(self, factory, bad):
        with pytest.raises(DomainError):
            factory(bad)

    def test_accepts_interior(self):
        assert DomainPoint.halfplane(1j).value == 1j
        assert DomainPoint.ray(2).value == 2.0

    def test_close_to(self):
        p = DomainPoint.disc(0.5)
        assert p.close_to(DomainPoint.disc(0.5 * (1 + 1e-14)))
        assert not p.close_to(DomainPoint.disc(0.5001))
        assert not p.close_to(DomainPoint.interval(0.5))

    def test_distances_reject_wrong_domain(self):
        with pytest.raises(DomainError):
            dist_halfplane(DomainPoint.disc(0.1), 1j)
        with pytest.raises(DomainError):
            dist_disc(0.0, 1.5)


# --------------------------------------------------------------------------
# closed-form distances against path-integral oracles


def test_disc_examples():
    assert dist_disc(0, 0) == 0.0
    oracle = quad(lambda t: 2.0 / (1.0 - t * t), 0.0, 0.5)
    assert dist_disc(0, 0.5) == pytest.approx(oracle, rel=1e-13)
    assert dist_disc(0, 0.5) == pytest.approx(math.log(3.0), rel=1e-14)


def test_halfplane_examples():
    assert dist_halfplane(1j, 1j) == 0.0
    assert dist_halfplane(1j, 2j) == pytest.approx(quad(lambda y: 1.0 / y, 1.0, 2.0), rel=1e-13)
    assert dist_halfplane(1j, 1 + 1j) == pytest.approx(dist_disc(cayley(1j), cayley(1 + 1j)), rel=1e-13)


def test_halfplane_oracle_along_geodesic_semicircle():
    # the geodesic through x0 +- r is a semicircle; integrate 1/Im along it
    x0, r, a, b = 0.7, 2.0, 0.4, 2.1
    z = x0 + r * np.exp(1j * a)
    w = x0 + r * np.exp(1j * b)
    oracle = quad(lambda th: 1.0 / math.sin(th), a, b)
    assert dist_halfplane(z, w) == pytest.approx(oracle, rel=1e-12)


def test_ray_examples(rng):
    assert dist_ray(1, 1) == 0.0
    assert dist_ray(1, 2) == pytest.approx(dist_halfplane(1j, 2j), rel=1e-15)
    a, b = rng.uniform(0.01, 100, 2)
    assert dist_ray(a, b) == dist_ray(b, a)


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_ray_matches_imaginary_axis(x, y):
    assert dist_ray(x, y) == pytest.approx(dist_halfplane(1j * x, 1j * y), rel=5e-14, abs=1e-15)


def test_interval_examples():
    assert dist_interval(0, 0) == 0.0
    assert dist_interval(0, 0.5) == pytest.approx(math.log(3.0), rel=1e-14)
    assert dist_interval(0, 0.5) == pytest.approx(dist_disc(0, 0.5), rel=1e-15)
    r = 0.37
    assert dist_interval(-r, r) == pytest.approx(2 * dist_interval(0, r), rel=1e-14)
    assert dist_interval(-0.2, 0.6) == pytest.approx(quad(INTERVAL_DENSITY, -0.2, 0.6), rel=1e-12)


def test_vectorised_distances(rng):
    z, w = random_halfplane(rng, 50), random_halfplane(rng, 50)
    batch = dist_halfplane(z, w)
    assert batch.shape == (50,)
    assert np.allclose(batch, [dist_halfplane(a, b) for a, b in zip(z, w)], rtol=0, atol=0)


@given(halfplane_points, halfplane_points, halfplane_points)
def test_halfplane_triangle_inequality(a, b, c):
    assert dist_halfplane(a, c) <= dist_halfplane(a, b) + dist_halfplane(b, c) + 1e-9


@given(disc_points, disc_points)
def test_disc_symmetry_and_positivity(a, b):
    d = dist_disc(a, b)
    assert d == pytest.approx(dist_disc(b, a), rel=1e-12, abs=1e-15)
    assert d >= 0.0
    if abs(a - b) > 1e-150:
        assert d > 0.0


# --------------------------------------------------------------------------
# stability near the boundary, against mpmath at 50 digits


def _mp_halfplane(z, w):
    with mpmath.workdps(50):
        z, w = mpmath.mpc(z), mpmath.mpc(w)
        return float(2 * mpmath.atanh(abs((z - w) / (mpmath.conj(z) - w))))


def _mp_disc(z, w):
    with mpmath.workdps(50):
        z, w = mpmath.mpc(z), mpmath.mpc(w)
        return float(2 * mpmath.atanh(abs((z - w) / (1 - mpmath.conj(z) * w))))


@pytest.mark.parametrize("z,w", [(1j, 1e12j), (1e-3j, 1e3 + 1j), (3 + 1e-5j, -2 + 1e-5j), (1e-9j, 5e-9j)])
def test_halfplane_far_apart_matches_high_precision(z, w):
    assert dist_halfplane(z, w) == pytest.approx(_mp_halfplane(z, w), rel=1e-12)


@pytest.mark.parametrize("z,w", [(0.0, 1 - 1e-12), (-(1 - 1e-7), 1 - 1e-7), (0.3j, (1 - 1e-11) * np.exp(2j)),
                                 (0.5 * np.exp(1j), (1 - 1e-10) * np.exp(-2.5j))])
def test_disc_near_boundary_matches_high_precision(z, w):
    assert dist_disc(z, w) == pytest.approx(_mp_disc(z, w), rel=1e-12)


@pytest.mark.parametrize("dist,z,w", [
    (dist_halfplane, 1e-10j, 1e10j), (dist_halfplane, 1e-6j, 1e6 + 1j), (dist_halfplane, 3 + 1e-7j, -2 + 1e-7j),
    (dist_disc, -(1 - 1e-9), 1 - 1e-9), (dist_interval, -(1 - 1e-9), 1 - 1e-9),
])
def test_boundary_proximity_error(dist, z, w):
    # pseudo-hyperbolic distance beyond 1 - 1e-15 is refused rather than saturated
    with pytest.raises(BoundaryProximityError):
        dist(z, w)


# --------------------------------------------------------------------------
# Cayley transform


def test_cayley_normalisation_and_round_trip():
    assert cayley(1j) == 0
    assert abs(cayley_inverse(cayley(2 + 3j)) - (2 + 3j)) <= 1e-14


def test_cayley_isometry(rng):
    z, w = random_halfplane(rng, 100), random_halfplane(rng, 100)
    np.testing.assert_allclose(dist_disc(cayley(z), cayley(w)), dist_halfplane(z, w), rtol=1e-12)


def test_cayley_rejects_outside():
    with pytest.raises(DomainError):
        cayley(-1j)


# --------------------------------------------------------------------------
# Möbius maps


class TestMobiusH:
    def test_examples(self, rng):
        z = random_halfplane(rng, 20)
        assert np.all(MobiusH.identity()(z) == z)
        assert MobiusH(0, -1, 1, 0)(1j) == pytest.approx(1j, abs=1e-15)
        a, b, c, d = 2.0, 1.0, 0.5, 3.0
        m = MobiusH(a, b, c, d)
        np.testing.assert_allclose(np.imag(m(z)), (a * d - b * c) * z.imag / abs(c * z + d) ** 2,
                                   rtol=1e-13)

    def test_normalised_determinant(self):
        m = MobiusH(2, 1, 0.5, 3)
        assert m.a * m.d - m.b * m.c == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("coeffs", [(1, 0, 0, -1), (0, 1, 1, 0), (1, 1, 1, 1), (math.inf, 0, 0, 1)])
    def test_rejects_bad_coefficients(self, coeffs):
        with pytest.raises(DomainError):
            MobiusH(*coeffs)

    def test_isometry_and_group_laws(self, rng):
        z, w = random_halfplane(rng, 100), random_halfplane(rng, 100)
        m, n = random_mobius_h(rng), random_mobius_h(rng)
        np.testing.assert_allclose(dist_halfplane(m(z), m(w)), dist_halfplane(z, w), rtol=1e-10)
        np.testing.assert_allclose((m @ n)(z), m(n(z)), rtol=1e-11)
        np.testing.assert_allclose(m.inverse()(m(z)), z, rtol=1e-10)
        assert (m @ m.inverse()).close_to(MobiusH.identity(), tol=1e-12)

    def test_derivative_matches_difference_quotient(self, rng):
        m = random_mobius_h(rng)
        z, h = 0.3 + 1.2j, 1e-6
        fd = (m(z + h) - m(z - h)) / (2 * h)
        assert m.derivative(z) == pytest.approx(fd, rel=1e-8)


class TestMobiusD:
    def test_examples(self, rng):
        z = random_disc(rng, 20)
        np.testing.assert_array_equal(MobiusD.identity()(z), z)
        a = 0.3 - 0.4j
        assert abs(MobiusD(1.0, a)(a)) == 0.0

    def test_rejects_bad_parameters(self):
        with pytest.raises(DomainError):
            MobiusD(2.0, 0)
        with pytest.raises(DomainError):
            MobiusD(1.0, 1.0)

    def test_isometry_and_composition(self, rng):
        z, w = random_disc(rng, 100), random_disc(rng, 100)
        m, n = random_mobius_d(rng), random_mobius_d(rng)
        np.testing.assert_allclose(dist_disc(m(z), m(w)), dist_disc(z, w), rtol=1e-12)
        np.testing.assert_allclose(m.compose(n)(z), m(n(z)), atol=1e-13)
        np.testing.assert_allclose(m.inverse()(m(z)), z, atol=1e-13)
        assert np.all(np.abs(m(z)) < 1)

    def test_derivative_matches_difference_quotient(self, rng):
        m = random_mobius_d(rng)
        z, h = 0.2 + 0.1j, 1e-6
        assert m.derivative(z) == pytest.approx((m(z + h) - m(z - h)) / (2 * h), rel=1e-8)


# --------------------------------------------------------------------------
# densities


def test_densities_positive_and_matching(rng):
    z = random_halfplane(rng, 50)
    u = random_disc(rng, 50)
    assert np.all(HALFPLANE_DENSITY(z) > 0) and np.all(DISC_DENSITY(u) > 0)
    assert RAY_DENSITY(2.0) == 0.5
    # the disc density is the pullback of the half-plane density under the Cayley map
    dc = np.abs(2j / (z + 1j) ** 2)
    np.testing.assert_allclose(DISC_DENSITY(cayley(z)) * dc, HALFPLANE_DENSITY(z), rtol=1e-12)


def test_density_gradients(rng):
    h = 1e-6
    for density, z in ((HALFPLANE_DENSITY, 0.4 + 0.9j), (DISC_DENSITY, 0.3 - 0.2j)):
        fd = complex((density(z + h) - density(z - h)) / (2 * h), (density(z + 1j * h) - density(z - 1j * h)) / (2 * h))
        assert density.gradient(z) == pytest.approx(fd, rel=1e-7)


@given(halfplane_points, halfplane_points)
def test_geodesic_bbox_contains_endpoints(z, w):
    assume(abs(z - w) > 1e-6)
    x0, x1, y0, y1 = halfplane_geodesic_bbox(z, w)
    for p in (z, w):
        assert x0 - 1e-9 <= p.real <= x1 + 1e-9 and y0 - 1e-9 <= p.imag <= y1 + 1e-9
