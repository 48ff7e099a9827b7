import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from conftest import random_halfplane
from hypcontract import (DISC_DENSITY, HALFPLANE_DENSITY, RAY_DENSITY, Curve, Domain, HerglotzMix, LinearIm,
                         MetricDensity, PoissonAtom, Region, dist_disc, dist_halfplane, lipschitz_modulus,
                         rho_distance, rho_length)
from hypcontract.errors import DomainError
from hypcontract.paths import (pushforward_distance_check, search_region, stratified_samples,
                               variational_distance, wavy_test_function)
from hypcontract.verify import sample_pairs

BOX = Region(-2.0, 2.0, 0.2, 3.0)


def euclidean_halfplane():
    """Constant density on the half-plane: distances are Euclidean whenever the segment fits."""
    return MetricDensity(Domain.HALFPLANE, lambda z: np.ones(np.shape(z)), None, "euclidean")


# --------------------------------------------------------------------------
# lengths


def test_degenerate_curve_has_zero_length():
    curve = Curve([1j, 1j + 1e-15], Domain.HALFPLANE)
    assert rho_length(curve, HALFPLANE_DENSITY) == pytest.approx(0.0, abs=1e-12)


def test_segment_lengths():
    assert rho_length(Curve([1j, 2j], Domain.HALFPLANE), HALFPLANE_DENSITY) == pytest.approx(math.log(2), rel=1e-12)
    assert rho_length(Curve([0, 0.5], Domain.DISC), DISC_DENSITY) == pytest.approx(math.log(3), rel=1e-12)
    assert rho_length(Curve([1.0, 2.0], Domain.RAY), RAY_DENSITY) == pytest.approx(math.log(2), rel=1e-12)


def test_polyline_length_against_scipy(rng):
    verts = random_halfplane(rng, 6)
    curve = Curve(verts, Domain.HALFPLANE)
    ref = 0.0
    for a, b in zip(verts[:-1], verts[1:]):
        ref += integrate.quad(lambda s: abs(b - a) / (a + s * (b - a)).imag, 0, 1, epsabs=1e-14, epsrel=1e-13)[0]
    assert rho_length(curve, HALFPLANE_DENSITY) == pytest.approx(ref, rel=1e-10)


def test_length_additive_and_orientation_free(rng):
    a, b = Curve(random_halfplane(rng, 4), Domain.HALFPLANE), None
    b = Curve(np.concatenate([[a.vertices[-1]], random_halfplane(rng, 3)]), Domain.HALFPLANE)
    la, lb = rho_length(a, HALFPLANE_DENSITY), rho_length(b, HALFPLANE_DENSITY)
    assert rho_length(a + b, HALFPLANE_DENSITY) == pytest.approx(la + lb, rel=1e-11)
    assert rho_length(a.reversed(), HALFPLANE_DENSITY) == pytest.approx(la, rel=1e-11)
    assert rho_length(a.refined(3), HALFPLANE_DENSITY) == pytest.approx(la, rel=1e-11)


def test_curve_validation():
    with pytest.raises(DomainError):
        Curve([1j], Domain.HALFPLANE)
    with pytest.raises(DomainError):
        Curve([1j, 1j, 2j], Domain.HALFPLANE)
    with pytest.raises(DomainError):
        Curve([1j, -1j], Domain.HALFPLANE)
    with pytest.raises(DomainError):
        rho_length(Curve([0.1, 0.2], Domain.DISC), HALFPLANE_DENSITY)


# --------------------------------------------------------------------------
# distances


def test_rho_distance_trivial_cases():
    assert rho_distance(1j, 1j, HALFPLANE_DENSITY) == 0.0
    assert rho_distance(0.3j, 0.3j, DISC_DENSITY, variational=True) == 0.0
    assert rho_distance(1j, 2j, HALFPLANE_DENSITY) == dist_halfplane(1j, 2j)


def test_variational_matches_closed_form_on_axis():
    est = rho_distance(1j, 2j, HALFPLANE_DENSITY, variational=True)
    assert abs(est - math.log(2)) / math.log(2) <= 1e-4


@pytest.mark.parametrize("z,w", [(1j, 3 + 0.5j), (-1 + 0.2j, 2 + 2j)])
def test_variational_halfplane_off_axis(z, w):
    est = variational_distance(z, w, HALFPLANE_DENSITY)
    exact = dist_halfplane(z, w)
    assert exact - 1e-12 <= est.value <= exact * (1 + 1e-4)
    assert est.value <= est.lattice_value + 1e-12


@pytest.mark.parametrize("z,w", [(0.0, 0.6 + 0.3j), (-0.7, 0.7), (0.5j, -0.4 - 0.4j)])
def test_variational_disc(z, w):
    est = rho_distance(z, w, DISC_DENSITY, variational=True)
    exact = dist_disc(z, w)
    assert abs(est - exact) <= 1e-4 * exact


def test_variational_without_closed_form_recovers_straight_segment():
    density = euclidean_halfplane()
    z, w = 1 + 1j, 3 + 2.5j
    assert rho_distance(z, w, density) == pytest.approx(abs(z - w), rel=1e-6)


@settings(max_examples=6)
@given(st.integers(0, 2 ** 32 - 1))
def test_distance_never_exceeds_competitor_curves(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    z, w = random_halfplane(rng, 2, xlim=1.5, ymin=0.5, ymax=2.5)
    mid = random_halfplane(rng, 3, xlim=1.5, ymin=0.5, ymax=2.5)
    curve = Curve(np.concatenate([[z], mid, [w]]), Domain.HALFPLANE)
    for d in (rho_distance(z, w, HALFPLANE_DENSITY), rho_distance(z, w, HALFPLANE_DENSITY, variational=True)):
        assert d <= rho_length(curve, HALFPLANE_DENSITY) + 1e-9


def test_search_region_is_clipped():
    r = search_region(0.05j, 3 + 0.05j, Domain.HALFPLANE)
    assert r.ymin > 0
    d = search_region(0.9, -0.9, Domain.DISC)
    assert d.radius < 1


def test_variational_rejects_outside_endpoints():
    with pytest.raises(DomainError):
        variational_distance(1j, -1j, HALFPLANE_DENSITY)


# --------------------------------------------------------------------------
# modulus and the pushforward inequality


def test_stratified_samples_cover_region(rng):
    pts = stratified_samples(BOX, 400, rng)
    assert len(pts) == 400
    assert np.all(BOX.contains(pts))
    # one point per cell of the 20 x 20 stratification
    ix = np.floor((pts.real - BOX.xmin) / (BOX.xmax - BOX.xmin) * 20).astype(int)
    iy = np.floor((pts.imag - BOX.ymin) / (BOX.ymax - BOX.ymin) * 20).astype(int)
    assert len(set(zip(ix, iy))) == 400


@pytest.mark.parametrize("u", [LinearIm(2.0), PoissonAtom(1.5, 0.4)])
def test_modulus_of_extremals_is_one(u):
    rep = lipschitz_modulus(u, HALFPLANE_DENSITY, RAY_DENSITY, BOX, n=512, seed=1, refine=False)
    assert rep.sup_estimate == pytest.approx(1.0, abs=1e-12)


def test_modulus_of_mixture_is_strictly_below_one():
    u = HerglotzMix(0.0, ((1.0, -1.0), (1.0, 1.0)))
    rep = lipschitz_modulus(u, HALFPLANE_DENSITY, RAY_DENSITY, BOX, n=1024, seed=3)
    assert 0.5 < rep.sup_estimate < 1.0


def test_modulus_is_reproducible_and_refinement_only_raises_it():
    u = wavy_test_function()
    a = lipschitz_modulus(u, HALFPLANE_DENSITY, RAY_DENSITY, BOX, n=256, seed=7, refine=False)
    b = lipschitz_modulus(u, HALFPLANE_DENSITY, RAY_DENSITY, BOX, n=256, seed=7, refine=False)
    c = lipschitz_modulus(u, HALFPLANE_DENSITY, RAY_DENSITY, BOX, n=256, seed=7, refine=True)
    assert a.sup_estimate == b.sup_estimate and a.witness == b.witness
    assert c.sup_estimate >= a.sup_estimate


def test_modulus_reports_escape_from_target_domain():
    bad = wavy_test_function(amplitude=5.0)  # becomes negative for some x
    with pytest.raises(DomainError):
        lipschitz_modulus(bad, HALFPLANE_DENSITY, RAY_DENSITY, Region(-4, 4, 0.1, 1.0), n=256)


def test_pushforward_linear_on_imaginary_axis():
    pairs = np.array([[1j, 2j], [0.3j, 5j], [2j, 0.1j]])
    rep = pushforward_distance_check(LinearIm(1.0), HALFPLANE_DENSITY, RAY_DENSITY, pairs, 1.0)
    assert abs(rep.max_ratio - 1.0) <= 1e-12
    assert rep.passed


def test_pushforward_two_atom_mix_is_strict(rng):
    u = HerglotzMix(0.0, ((1.0, -1.0), (0.5, 2.0)))
    pairs = sample_pairs(Domain.HALFPLANE, 1000, rng)
    rep = pushforward_distance_check(u, HALFPLANE_DENSITY, RAY_DENSITY, pairs, 1.0, tol=0.0)
    assert rep.passed and rep.max_ratio < 1.0


def test_pushforward_smooth_function_respects_modulus(rng):
    u = wavy_test_function(0.1)
    mod = lipschitz_modulus(u, HALFPLANE_DENSITY, RAY_DENSITY, BOX, n=2048, seed=5)
    assert mod.sup_estimate > 1.0  # not harmonic, so the contraction constant is exceeded
    pairs = sample_pairs(Domain.HALFPLANE, 400, rng, Region(-1.0, 1.0, 1.0, 2.0))
    rep = pushforward_distance_check(u, HALFPLANE_DENSITY, RAY_DENSITY, pairs, mod.sup_estimate)
    assert rep.passed
    assert rep.max_ratio <= mod.sup_estimate + 1e-6
