import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contactlab import dual as dn
from contactlab.chart import ExcludedRegionError, cylindrical, euclidean, split, torus
from contactlab.forms import (DiffBackend, DifferentialForm, ScalarField, SmoothMap, VectorField,
                              exterior_derivative, interior_product, lie_derivative,
                              lie_derivative_by_flow, one_form, pullback, wedge)
from contactlab.sampling import SampleSet

finite = st.floats(-2, 2, allow_nan=False)


# -- dual numbers --------------------------------------------------------------

@given(finite, finite)
def test_dual_product_and_chain_rule(a, b):
    x = dn.Dual(a, 1.0)
    y = dn.sin(x * x) * dn.exp(b * x)
    expect = (2 * a * np.cos(a * a) + b * np.sin(a * a)) * np.exp(b * a)
    assert dn.tangent(y) == pytest.approx(expect, rel=1e-12, abs=1e-12)


def test_nested_duals_give_second_derivative():
    x = dn.Dual(dn.Dual(0.7, 1.0), dn.Dual(1.0, 0.0))
    y = dn.cos(x) * x
    # d^2/dx^2 (x cos x) = -2 sin x - x cos x
    assert dn.tangent(dn.tangent(y)) == pytest.approx(-2 * np.sin(0.7) - 0.7 * np.cos(0.7), rel=1e-14)


def test_dual_division_and_sqrt():
    x = dn.Dual(np.array([1.0, 4.0]), 1.0)
    y = dn.sqrt(x) / (1.0 + x)
    v = np.array([1.0, 4.0])
    expect = (0.5 / np.sqrt(v)) / (1 + v) - np.sqrt(v) / (1 + v) ** 2
    np.testing.assert_allclose(dn.tangent(y), expect, rtol=1e-14)


@pytest.mark.parametrize("f, ref", [
    (dn.sinc_sq, lambda q: np.sin(np.sqrt(q)) / np.sqrt(q)),
    (dn.cos_sq, lambda q: np.cos(np.sqrt(q))),
])
def test_axis_safe_helpers(f, ref):
    q = np.array([1e-9, 5e-5, 2e-4, 0.3, 4.0])
    np.testing.assert_allclose(f(q), ref(q), rtol=1e-13)
    # the series branch and the closed form give the same derivative across the switch
    d_mixed = dn.tangent(f(dn.seed(q)))
    d_far = dn.tangent(f(dn.seed(q[2:])))
    np.testing.assert_allclose(d_mixed[2:], d_far, rtol=1e-13)
    h = 1e-6
    np.testing.assert_allclose(d_mixed[2:], (ref(q[2:] + h) - ref(q[2:] - h)) / (2 * h), rtol=1e-6)
    assert np.all(np.isfinite(d_mixed))


def test_backends_agree():
    f = lambda x: x[0] * dn.sin(x[1]) + x[2] ** 3  # noqa: E731
    pts = split(SampleSet(((-1, 1),) * 3, 50).points())
    g_dual = DiffBackend("dual").gradient(f, pts)
    g_fd = DiffBackend("central", 1e-5).gradient(f, pts)
    for a, b in zip(g_dual, g_fd):
        np.testing.assert_allclose(a, b, atol=1e-8)


def test_backend_rejects_bad_mode():
    with pytest.raises(ValueError):
        DiffBackend("spectral")
    with pytest.raises(ValueError):
        DiffBackend("central", 0.0)


# -- forms ---------------------------------------------------------------------

def _alpha():
    return one_form(3, {0: lambda x: x[1] * dn.cos(x[2]), 1: lambda x: x[0] * x[2],
                        2: lambda x: dn.exp(x[0] * x[1])})


def test_multi_index_validation():
    with pytest.raises(ValueError):
        DifferentialForm(3, 2, {(1, 0): 1.0})
    with pytest.raises(ValueError):
        DifferentialForm(3, 1, {(3,): 1.0})


def test_dd_vanishes():
    a = _alpha()
    dda = exterior_derivative(exterior_derivative(a))
    x = split(SampleSet(((-1, 1),) * 3, 100).points())
    for idx in dda.terms:
        assert np.max(np.abs(dda.coefficient(idx, x))) <= 1e-12


def test_d_of_standard_form():
    # d(dz - y dx) = dx ^ dy
    a = one_form(3, {2: 1.0, 0: lambda x: -x[1]})
    da = exterior_derivative(a)
    pts = SampleSet(((-1, 1),) * 3, 20).points()
    e = np.eye(3)
    np.testing.assert_allclose(da.evaluate(pts, e[0], e[1]), 1.0)
    np.testing.assert_allclose(da.evaluate(pts, e[1], e[2]), 0.0)


@settings(max_examples=30, deadline=None)
@given(st.lists(finite, min_size=9, max_size=9))
def test_wedge_antisymmetry_and_leibniz(v):
    a = _alpha()
    b = one_form(3, {0: lambda x: x[2], 2: lambda x: x[0] * x[1]})
    p = np.array(v[:3])
    u, w = np.array(v[3:6]), np.array(v[6:9])
    ab = wedge(a, b).evaluate(p, u, w)
    ba = wedge(b, a).evaluate(p, u, w)
    assert ab == pytest.approx(-ba, abs=1e-12)
    # d(a ^ b) = da ^ b - a ^ db, evaluated on a 3-vector frame
    lhs = exterior_derivative(wedge(a, b)).evaluate(p, *np.eye(3))
    rhs = (wedge(exterior_derivative(a), b) - wedge(a, exterior_derivative(b))).evaluate(p, *np.eye(3))
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_wedge_past_top_degree_is_degenerate_zero():
    a = _alpha()
    top = wedge(exterior_derivative(a), exterior_derivative(a))
    assert top.degenerate and top.is_zero


def test_interior_product_matches_evaluation():
    a = _alpha()
    da = exterior_derivative(a)
    X = VectorField.constant([0.3, -1.0, 2.0])
    pts = SampleSet(((-1, 1),) * 3, 30).points()
    v = np.array([1.0, 0.5, -0.2])
    np.testing.assert_allclose(interior_product(X, da).evaluate(pts, v),
                               da.evaluate(pts, [0.3, -1.0, 2.0], v), atol=1e-13)


def test_cartan_matches_flow_at_second_order():
    a = _alpha()
    X = VectorField(lambda x: (x[1], -x[0], 0.2 + 0.0 * x[0]), 3)
    pts = SampleSet(((-1, 1),) * 3, 10, seed=3).points()
    v = np.array([0.4, 0.1, -0.7])
    cart = lie_derivative(X, a).evaluate(pts, v)
    e1 = np.max(np.abs(lie_derivative_by_flow(X, a, pts, [v], h=2e-2) - cart))
    e2 = np.max(np.abs(lie_derivative_by_flow(X, a, pts, [v], h=1e-2) - cart))
    assert e2 < 1e-3
    assert np.log2(e1 / e2) > 1.8


def test_pullback_along_polar_map():
    # (r, t) -> (r cos t, r sin t); pull back x dy - y dx = r^2 dt
    polar = SmoothMap(2, 2, lambda x: (x[0] * dn.cos(x[1]), x[0] * dn.sin(x[1])))
    a = one_form(2, {0: lambda x: -x[1], 1: lambda x: x[0]})
    pb = pullback(polar, a)
    pts = SampleSet(((0.1, 2), (0, 6)), 40).points()
    np.testing.assert_allclose(pb.evaluate(pts, [0, 1]), pts[:, 0] ** 2, rtol=1e-13)
    np.testing.assert_allclose(pb.evaluate(pts, [1, 0]), 0.0, atol=1e-13)


def test_scalar_field_gradient_check():
    f = ScalarField(lambda x: x[0] * x[1] + dn.sin(x[2]))
    pts = SampleSet(((-1, 1),) * 3, 30).points()
    assert f.check_gradient(pts) < 1e-8


# -- charts and sampling -------------------------------------------------------

def test_chart_periodic_normalization_and_exclusion():
    cyl = cylindrical()
    out = cyl.normalize(np.array([[1.0, 7.0, 0.0]]))
    assert 0 <= out[0, 1] < 2 * np.pi
    with pytest.raises(ExcludedRegionError):
        cyl.check(np.array([[0.0, 0.0, 0.0]]))


def test_chart_round_trip_serialization():
    for ch in (cylindrical(), torus(), euclidean(("x", "y", "z"))):
        assert type(ch).from_dict(ch.to_dict()) == ch


@pytest.mark.parametrize("strategy", ["halton", "uniform", "grid"])
def test_samples_reproducible_and_in_domain(strategy):
    box = ((0, 1), (-2, 2))
    keep = lambda p: p[:, 0] > 0.2  # noqa: E731
    a = SampleSet(box, 64, strategy, seed=5, predicate=keep).points()
    b = SampleSet(box, 64, strategy, seed=5, predicate=keep).points()
    assert np.array_equal(a, b)
    assert np.all(keep(a))
    assert np.all((a[:, 1] >= -2) & (a[:, 1] <= 2))
    if strategy != "grid":
        assert len(a) == 64


def test_unknown_strategy_rejected():
    with pytest.raises(ValueError):
        SampleSet(((0, 1),), 4, "sobol")
