import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contactlab import dual as dn
from contactlab.chart import split
from contactlab.constructions import bourgeois as bg
from contactlab.constructions import geiges as gg
from contactlab.constructions import holonomy as hol
from contactlab.constructions import milnor as mil
from contactlab.constructions import prescription as pre
from contactlab.constructions import symmetric_loop as sl
from contactlab.constructions.catalog import catalog_names, std_product_form, std_r3
from contactlab.constructions.paths import signed_area
from contactlab.contact import verify_contact
from contactlab.fibration import constant_path, transport
from contactlab.sampling import SampleSet

BOX = [(-1, 1)] * 3


def test_catalog_lists_forms():
    names = catalog_names()
    assert {"std-r3", "ot-r3", "ot-r3-cart"} <= set(names)


# -- cutoffs and prescription -------------------------------------------------

def test_xi_certificate():
    cert = pre.xi_certificate(20001)
    assert cert["one_inside"] and cert["zero_outside"] and cert["in_unit_interval"]
    assert cert["max_abs_derivative"] <= cert["derivative_bound"]


@given(st.floats(-10, 10, allow_nan=False))
def test_smooth_step_range_and_symmetry(x):
    s = pre.smooth_step(x)
    assert 0.0 <= s <= 1.0
    assert s + pre.smooth_step(1 - x) == pytest.approx(1.0, abs=1e-12)


def test_reparam_endpoints_and_derivative():
    beta = 0.1
    assert pre.reparam(0.05, beta) == 0.0 and pre.reparam(0.95, beta) == 1.0
    s = np.linspace(0.02, 0.98, 97)
    d = dn.tangent(pre.reparam(dn.seed(s), beta))
    np.testing.assert_allclose(d, pre.reparam_prime(s, beta), atol=1e-12)


def test_prescription_parameter_validation():
    with pytest.raises(ValueError):
        pre.MonodromyPrescription(lambda t, p: p[0], beta_r=0.6)
    with pytest.raises(ValueError):
        pre.MonodromyPrescription(lambda t, p: p[0], delta=0.0)


def test_constant_family_shifts_along_reeb():
    fiber = std_r3()
    c = 0.02
    fib = pre.prescribe_monodromy(pre.MonodromyPrescription(lambda t, p: c + 0.0 * p[0]), fiber)
    pts = SampleSet(tuple(BOX), 10).points() * 0.5
    end = transport(fib, pre.radial_path(1.0), pts, 400)
    np.testing.assert_allclose(end, pts + [0, 0, c], atol=1e-10)


def test_linear_family_matches_hamiltonian_flow():
    fiber = std_r3()
    fam = lambda t, p: 0.03 * (1 + t) * p[0]  # noqa: E731
    fib = pre.prescribe_monodromy(pre.MonodromyPrescription(fam), fiber)
    pts = SampleSet(tuple(BOX), 10).points() * 0.5
    end = transport(fib, pre.radial_path(1.0), pts, 400)
    ref = pre.hamiltonian_flow(fiber, fam, pts, 2000)
    assert np.max(np.abs(end - ref)) <= 1e-8


def test_form_unchanged_outside_support():
    fiber = std_r3()
    fib = pre.prescribe_monodromy(pre.MonodromyPrescription(lambda t, p: 0.05 * p[1]), fiber)
    prod = std_product_form(fiber)
    pts = pre.total_samples(BOX, 1.0, 3000, 3)
    r, th = pts[:, 3], pre.wrap_angle(pts[:, 4])
    out = (r <= 0.25) | (r >= 0.75) | (np.abs(th) >= math.pi / 4)
    assert out.sum() > 1000
    a = np.asarray(fib.total.alpha_at(split(pts[out])))
    b = np.asarray(prod.total.alpha_at(split(pts[out])))
    assert np.array_equal(a, b)


def test_epsilon_bisection_brackets_failure():
    fiber = std_r3()
    bounds = pre.family_bounds(lambda t, p: p[0], BOX)
    assert bounds["sup_g"] == pytest.approx(1.0, abs=1e-3) and bounds["sup_dg"] == pytest.approx(1.0)
    unit = pre.MonodromyPrescription(lambda t, p: p[0])
    samples = pre.total_samples(BOX, 1.0, 1000, 0)
    eb = pre.measure_epsilon(unit, fiber, samples, iterations=16)
    assert 0 < eb.epsilon < eb.failed_at
    ok = lambda c: verify_contact(pre.prescribe_monodromy(unit.scaled(c), fiber).total,  # noqa: E731
                                  samples).passed
    assert ok(0.5 * eb.epsilon) and not ok(2 * eb.failed_at)


# -- Bourgeois -----------------------------------------------------------------

@pytest.mark.parametrize("eps", [0.05, -0.05, 0.3])
def test_bourgeois_contact(eps):
    assert bg.check_contact(eps, 2000).passed


def test_bourgeois_degenerate():
    assert not bg.check_contact(0.0, 500).passed
    with pytest.raises(ValueError):
        bg.bourgeois_form(bg.hopf_open_book(), 0.0)


def test_bourgeois_torus_invariance():
    cf = bg.bourgeois_form(bg.hopf_open_book(), 0.05)
    pts = bg.samples(100).points()
    moved = pts.copy()
    moved[:, 3:] = (moved[:, 3:] + np.array([0.25, 0.6])) % 1.0
    assert np.array_equal(np.asarray(cf.alpha_at(split(pts))), np.asarray(cf.alpha_at(split(moved))))


def test_open_book_compatibility():
    comp = bg.compatibility(bg.hopf_open_book())
    assert comp["pages_symplectic"] and comp["reeb_tangent_to_binding"]


def test_bourgeois_holonomy_is_linear():
    ob = bg.hopf_open_book()
    pts = SampleSet(((0.1, 1.4), (0, 2 * np.pi), (0, 2 * np.pi)), 10).points()
    fit = hol.estimate_holonomy_bound(lambda e: bg.bourgeois_fibration(ob, e), [0.01, 0.02, 0.04],
                                      bg.arc_path(), pts, steps=60, checkpoints=4)
    assert fit.linear and fit.slope > 0


def test_constant_path_has_zero_hamiltonian():
    fib = bg.bourgeois_fibration(bg.hopf_open_book(), 0.05)
    pts = SampleSet(((0.1, 1.4), (0, 2 * np.pi), (0, 2 * np.pi)), 5).points()
    assert hol.hamiltonian_norms(fib, constant_path([0.3, 0.4]), pts, 4, 2)["sup_H"] == 0.0


def test_fit_through_origin():
    M, res = hol.fit_through_origin([1, 2, 3], [2, 4, 6])
    assert M == pytest.approx(2.0) and res == pytest.approx(0.0, abs=1e-15)
    _, res = hol.fit_through_origin([1, 2, 3], [1, 1, 1])
    assert res > 0.1


# -- Geiges --------------------------------------------------------------------

def test_profile_grid_certificate():
    cert = gg.geiges_profile(0.05).grid_certificate(200)
    assert cert["passed"], cert


def test_neck_function_solves_profile():
    prof = gg.geiges_profile(0.05)
    z = np.linspace(-0.99, 0.99, 101)
    R = prof.R(z)
    assert np.max(np.abs(prof.F(R, z))) <= 1e-12
    dR = dn.tangent(prof.R(dn.seed(z)))
    np.testing.assert_allclose(dR, -prof.F_z(R, z) / prof.F_r(R, z), atol=1e-10)


@pytest.mark.parametrize("sign", [1, -1])
def test_sheet_restriction_is_normal_model(sign):
    assert gg.restriction_error(std_r3(), gg.geiges_profile(0.05), sign, BOX) <= 1e-12


def test_closed_neck_form_equals_pullback():
    assert gg.neck_pullback_error(std_r3(), gg.geiges_profile(0.05), BOX, count=100) <= 1e-12


def test_glued_form_contact_and_degenerate_rho():
    ok = gg.glued_contact(std_r3(), gg.geiges_profile(0.05), BOX, 1000)
    assert all(c.passed for c in ok.values())
    zero = gg.glued_contact(std_r3(), gg.geiges_profile(0.0), BOX, 200)
    assert not zero["neck"].passed


def test_neck_holonomy_is_linear_in_rho():
    pts = SampleSet(tuple([(-0.5, 0.5)] * 3), 6).points()
    fit = hol.estimate_holonomy_bound(
        lambda r: gg.neck_fibration(std_r3(), gg.geiges_profile(r)), [0.01, 0.02, 0.04],
        gg.neck_path(), pts, steps=10, order=2, checkpoints=2)
    assert fit.linear and fit.slope > 0


# -- Milnor --------------------------------------------------------------------

def test_milnor_checks_pass():
    rep = mil.milnor_checks(mil.MilnorData(), 500)
    assert rep.passed(), rep.to_dict()
    assert rep.hessian_det == pytest.approx(2.0, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=6, max_size=6))
def test_composite_is_holomorphic(v):
    x = tuple(np.array([c]) for c in v)
    assert np.max(np.abs(mil.wirtinger_dbar(mil.g_of_e, x))) <= 1e-12


def test_restriction_to_c2_is_exact():
    pts = mil.sphere_samples(100, dim=4)
    x = tuple(pts[:, i] for i in range(4)) + (np.zeros(100), np.zeros(100))
    assert np.array_equal(mil.g_poly(x), mil.f_of(x[:4]))


# -- symmetric loop ------------------------------------------------------------

def test_symmetric_loop_point_symmetry_and_area():
    loop = sl.symmetric_loop(1.0, 0.1)
    for t in np.arange(64) / 128.0:
        assert np.array_equal(loop.path(t + 0.5), -loop.path(t))
    assert loop.path.closed(1e-12)
    assert signed_area(loop.path) == pytest.approx(2 * loop.half_area, rel=1e-4)
    radii = sl.arc_radii(1.0)
    assert np.all((radii > 0.75) & (radii < 1.0))


def test_rerouted_loop_avoids_small_disk():
    loop = sl.symmetric_loop(1.0, 0.1, rerouted=True)
    d = [np.linalg.norm(loop.path(t)) for t in np.linspace(0, 1, 4001)]
    assert min(d) > 0.1
    with pytest.raises(ValueError):
        sl.symmetric_loop(1.0, 0.3)
