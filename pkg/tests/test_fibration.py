import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contactlab import dual as dn
from contactlab.constructions.catalog import ot_r3_cartesian, std_product_form, std_r3
from contactlab.constructions.paths import (circle_cartesian, circle_polar, circles_polar,
                                            ellipse, fourier_loop, lemniscate, lissajous13,
                                            signed_area)
from contactlab.fibration import (MonodromyMap, TransportError, constant_path, horizontal_lift,
                                  horizontality_defect, lift_path, lift_residual, monodromy,
                                  segment, transport, transport_submanifold)
from contactlab.sampling import SampleSet
from contactlab.scenarios.registry import reeb_flow_cartesian

BOX = ((-1, 1),) * 3


def test_product_fibration_validates():
    fib = std_product_form(std_r3())
    pts = np.concatenate([SampleSet(BOX, 50).points(), np.tile([0.5, 1.0], (50, 1))], -1)
    assert fib.validate(pts)["passed"]


def test_horizontal_lift_is_in_kernel_and_projects():
    fib = std_product_form(ot_r3_cartesian(), base="cartesian")
    pts = np.concatenate([SampleSet(BOX, 40).points(), np.tile([0.2, -0.3], (40, 1))], -1)
    X = horizontal_lift(fib, pts, [0.7, -1.1])
    np.testing.assert_allclose(X[:, 3:], np.tile([0.7, -1.1], (40, 1)))
    assert max(lift_residual(fib, pts, X)) <= 1e-12


def test_constant_path_gives_identity():
    fib = std_product_form(std_r3())
    p = SampleSet(BOX, 20).points()
    end = transport(fib, constant_path([0.5, 0.3]), p, 50)
    assert np.array_equal(end, p)


@pytest.mark.parametrize("radius", [0.3, 0.5, 0.7])
def test_circle_monodromy_is_reeb_flow(radius):
    fib = std_product_form(ot_r3_cartesian())
    p = SampleSet(((-1.5, 1.5), (-1.5, 1.5), (-1, 1)), 8).points()
    end = transport(fib, circle_polar(radius), p, 1000)
    ref = reeb_flow_cartesian(p, -2 * np.pi * radius ** 2)
    assert np.max(np.abs(end - ref)) <= 1e-9


def test_batched_circles_match_single_runs():
    fib = std_product_form(ot_r3_cartesian())
    p = SampleSet(((-1, 1),) * 3, 4).points()
    y0 = np.repeat(p[:, None, :], 2, axis=1)
    both = transport(fib, circles_polar([0.3, 0.6]), y0, 200)
    one = transport(fib, circle_polar(0.6), p, 200)
    np.testing.assert_allclose(both[:, 1], one, atol=1e-14)


def test_reversed_path_inverts_transport():
    fib = std_product_form(ot_r3_cartesian(), base="cartesian")
    path = segment([0.1, 0.2], [0.6, -0.4])
    p = SampleSet(BOX, 10).points()
    there = transport(fib, path, p, 400)
    back = transport(fib, path.reversed(), there, 400)
    assert np.max(np.abs(back - p)) <= 1e-10


def test_lift_stays_horizontal():
    fib = std_product_form(ot_r3_cartesian(), base="cartesian")
    traj = lift_path(fib, ellipse(0.5, 0.3), SampleSet(BOX, 5).points(), 400)
    assert traj.complete
    assert horizontality_defect(fib, ellipse(0.5, 0.3), traj) <= 1e-6


@pytest.mark.parametrize("path", [lemniscate(0.5), lissajous13(0.4, 0.3)])
def test_zero_area_loops(path):
    assert abs(signed_area(path)) <= 1e-12
    fib = std_product_form(ot_r3_cartesian(), base="cartesian")
    p = SampleSet(((-1.5, 1.5), (-1.5, 1.5), (-1, 1)), 20).points()
    assert np.max(np.abs(transport(fib, path, p, 1000) - p)) <= 1e-6


def test_signed_area_of_ellipse():
    assert signed_area(ellipse(0.5, 0.3)) == pytest.approx(np.pi * 0.15, rel=1e-10)
    assert signed_area(ellipse(0.5, 0.3).reversed()) == pytest.approx(-np.pi * 0.15, rel=1e-10)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10_000))
def test_random_loop_monodromy_preserves_form(seed):
    fib = std_product_form(ot_r3_cartesian(), base="cartesian")
    _, rep = monodromy(fib, fourier_loop(seed), SampleSet(BOX, 6).points(), 200)
    assert rep.max_kernel_violation <= 1e-6
    assert rep.max_lambda_deviation <= 1e-6


def test_monodromy_requires_closed_loop():
    fib = std_product_form(std_r3(), base="cartesian")
    with pytest.raises(ValueError):
        monodromy(fib, segment([0, 0], [1, 0]), SampleSet(BOX, 3).points())


def test_monodromy_map_cache_and_dual_inputs():
    fib = std_product_form(ot_r3_cartesian(), base="cartesian")
    m = MonodromyMap(fib, circle_cartesian(0.4), 100)
    p = SampleSet(BOX, 4).points()
    a = m(p)
    assert m.cache_size() == 4
    assert np.array_equal(m(p), a)
    d = m(dn.Dual(p, np.zeros_like(p)))
    np.testing.assert_allclose(dn.value(d), a, atol=1e-14)


def test_sweep_of_legendrian_curve_stays_isotropic():
    fib = std_product_form(ot_r3_cartesian(), base="cartesian")

    def curve(s):
        s = s[..., 0]
        return dn.stack([0.0 * s, s, 0.0 * s], -1)  # radial segment in the y-axis at z = 0

    rep = transport_submanifold(fib, lemniscate(0.4), curve, np.linspace(0.2, 1.0, 9), 400, 5)
    assert rep.isotropic(1e-8)


def test_non_isotropic_start_is_rejected():
    fib = std_product_form(std_r3(), base="cartesian")
    with pytest.raises(TransportError):
        transport_submanifold(fib, lemniscate(0.4),
                              lambda s: dn.stack([s[..., 0], s[..., 0], s[..., 0]], -1),
                              np.linspace(0.2, 1.0, 5), 50, 3)
