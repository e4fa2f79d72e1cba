"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (the lines appear in the terminal
summary) or directly as ``python3 tests/test_acceptance.py``.
"""

import math
import time

import numpy as np

from contactlab import dual as dn
from contactlab.chart import split
from contactlab.constructions import bourgeois as bg
from contactlab.constructions import geiges as gg
from contactlab.constructions import holonomy as hol
from contactlab.constructions import milnor as mil
from contactlab.constructions.catalog import (ot_r3_cartesian, ot_r3_cylindrical,
                                              ot_reeb_closed_form, std_product_form, std_r3)
from contactlab.constructions.paths import (circles_polar, fourier_loop, lemniscate, lissajous13,
                                            signed_area)
from contactlab.contact import hamiltonian_field, reeb_field
from contactlab.fibration import monodromy, transport
from contactlab.forms import lie_derivative
from contactlab.plastikstufe import (overtwisted_disk_mesh, transport_plastikstufe,
                                     verify_plastikstufe)
from contactlab.sampling import SampleSet
from contactlab.scenarios import registry
from contactlab.scenarios.report import strip_wall_time

RESULTS: dict = {}
TITLES = {
    1: "Reeb closed form",
    2: "area-monodromy law",
    3: "zero-area loop identity",
    4: "monodromy is a contactomorphism",
    5: "Hamiltonian solver",
    6: "monodromy prescription",
    7: "Bourgeois contactness",
    8: "Geiges gluing",
    9: "holonomy bounds",
    10: "Milnor checks",
    11: "plastikstufe suite",
    12: "calculus kernel and determinism",
}


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d} [{TITLES[n]}]: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def test_criterion_01_reeb_closed_form():
    t0 = time.perf_counter()
    pts = SampleSet(((0.1, 3.0), (0, 2 * math.pi), (-1, 1)), 1000).points()
    R = reeb_field(ot_r3_cylindrical())(pts)
    ref = np.stack(np.broadcast_arrays(*ot_reeb_closed_form(pts[:, 0])), -1)
    err = float(np.max(np.abs(R - ref)))
    dt = time.perf_counter() - t0
    record(1, err <= 1e-8 and dt < 1.0, f"max component error {err:.2e} (<= 1e-8), {dt:.2f}s (< 1s)")


def test_criterion_02_area_law():
    t0 = time.perf_counter()
    radii = [0.3, 0.5, 0.7]
    err, _, _ = registry.area_law(radii, 16, 0, 2000)
    e10, e20, e40 = (registry.area_law(radii, 16, 0, n)[0] for n in (10, 20, 40))
    # the literal cylindrical chart as a cross-check (its lift ODE is exact under RK4)
    fib = std_product_form(ot_r3_cylindrical())
    p = SampleSet(((0.5, 2.5), (0, 2 * math.pi), (-1, 1)), 8).points()
    y0 = np.repeat(p[:, None, :], len(radii), axis=1)
    end = transport(fib, circles_polar(radii), y0, 2000)
    T = -2 * math.pi * np.asarray(radii) ** 2
    _, Rt, Rz = ot_reeb_closed_form(y0[..., 0])
    ref = np.stack([y0[..., 0], y0[..., 1] + T * Rt, y0[..., 2] + T * Rz], -1)
    d = end - ref
    d[..., 1] = (d[..., 1] + math.pi) % (2 * math.pi) - math.pi
    cyl = float(np.max(np.abs(d)))
    dt = time.perf_counter() - t0
    ratio = e10 / e40
    ok = err <= 1e-3 and cyl <= 1e-3 and ratio >= 8 and dt < 10
    record(2, ok, f"error {err:.2e} (cyl {cyl:.2e}) <= 1e-3; 10->40 steps ratio {ratio:.0f} (>= 8), "
                  f"order {math.log2(e10 / e20):.2f}; {dt:.1f}s (< 10s)")


def test_criterion_03_zero_area_loop():
    fib = std_product_form(ot_r3_cartesian(), base="cartesian")
    pts = SampleSet(((-1.5, 1.5), (-1.5, 1.5), (-1, 1)), 200).points()
    worst, areas = 0.0, []
    for path in (lemniscate(0.5), lissajous13(0.4, 0.3)):
        areas.append(abs(signed_area(path)))
        worst = max(worst, float(np.max(np.abs(transport(fib, path, pts, 2000) - pts))))
    record(3, worst <= 1e-3, f"max displacement {worst:.2e} (<= 1e-3) over 200 points; "
                             f"|area| <= {max(areas):.1e}")


def test_criterion_04_contactomorphism():
    fib = std_product_form(ot_r3_cartesian(), base="cartesian")
    pts = SampleSet(((-1, 1),) * 3, 12).points()
    kv, lmin, ldev = 0.0, np.inf, 0.0
    for seed in range(5):
        _, rep = monodromy(fib, fourier_loop(seed), pts, 300)
        kv = max(kv, rep.max_kernel_violation)
        lmin = min(lmin, rep.min_lambda)
        ldev = max(ldev, rep.max_lambda_deviation)
    ok = kv <= 1e-4 and lmin > 0 and ldev <= 1e-4
    record(4, ok, f"kernel violation {kv:.1e} (<= 1e-4), min lambda {lmin:.6f} (> 0), "
                  f"|lambda - 1| {ldev:.1e} (<= 1e-4)")


def test_criterion_05_hamiltonian_solver():
    cf = std_r3()
    pts = SampleSet(((-1, 1),) * 3, 500).points()
    reeb = float(np.max(np.abs(hamiltonian_field(cf, 1.0)(pts) - reeb_field(cf)(pts))))
    H1 = lambda x: x[0] * x[1] + dn.sin(x[2])  # noqa: E731
    H2 = lambda x: x[0] * x[0] - x[2]  # noqa: E731
    lin = float(np.max(np.abs(hamiltonian_field(cf, lambda x: 0.7 * H1(x) - 1.3 * H2(x))(pts)
                              - 0.7 * hamiltonian_field(cf, H1)(pts)
                              + 1.3 * hamiltonian_field(cf, H2)(pts))))
    # L_X alpha = (dH(R)) alpha; R = d/dz for this form
    L = lie_derivative(hamiltonian_field(cf, H1), cf.alpha)
    dRH = np.asarray(dn.tangent(H1(split(dn.Dual(pts, np.array([0.0, 0.0, 1.0]))))))
    lie = max(float(np.max(np.abs(L.evaluate(pts, e) - dRH * cf.alpha.evaluate(pts, e))))
              for e in np.eye(3))
    X = hamiltonian_field(cf, lambda x: x[0])(pts)
    hand = float(np.max(np.abs(X - np.stack([0 * pts[:, 0], 1 + 0 * pts[:, 0], pts[:, 0]], -1))))
    ok = reeb == 0.0 and lin <= 1e-10 and lie <= 1e-6 and hand <= 1e-10
    record(5, ok, f"H=1 vs Reeb {reeb:.1e} (exact), linearity {lin:.1e} (<= 1e-10), "
                  f"Lie residual {lie:.1e} (<= 1e-6), X = d/dy + x d/dz {hand:.1e} (<= 1e-10)")


def test_criterion_06_prescription():
    parts, ok = [], True
    for fam in ("linear-x", "time-dependent"):
        res = registry.prescription_run(fam, 1.0, 0.5, 20, 0, 400)
        good = res["error"] <= 1e-3 and res["contact"].passed and res["outside_equal"]
        ok &= good
        parts.append(f"{fam}: eps {res['epsilon']['epsilon']:.4f}, c = eps/2, "
                     f"error {res['error']:.1e}, contact {res['contact'].passed}, "
                     f"unchanged outside {res['outside_equal']}")
    record(6, ok, "; ".join(parts) + " (error <= 1e-3)")


def test_criterion_07_bourgeois():
    t0 = time.perf_counter()
    plus = bg.check_contact(0.05, 10_000)
    minus = bg.check_contact(-0.05, 10_000)
    zero = bg.check_contact(0.0, 10_000)
    dt = time.perf_counter() - t0
    ok = plus.passed and minus.passed and not zero.passed and dt < 30
    record(7, ok, f"eps=+0.05 min|vol| {plus.min_abs_volume:.1e}, eps=-0.05 "
                  f"{minus.min_abs_volume:.1e} (> 0, 1e4 samples); eps=0 rejected: "
                  f"{not zero.passed}; {dt:.1f}s (< 30s)")


def test_criterion_08_geiges():
    box = [(-1, 1)] * 3
    prof = gg.geiges_profile(0.05)
    cert = prof.grid_certificate(200)
    glued = gg.glued_contact(std_r3(), prof, box, 2000)
    restr = max(gg.restriction_error(std_r3(), prof, s, box) for s in (1, -1))
    ok = cert["passed"] and all(c.passed for c in glued.values()) and restr <= 1e-12
    record(8, ok, f"profile conditions {cert['passed']} (200x200), glued contact "
                  f"{all(c.passed for c in glued.values())} at rho 0.05, "
                  f"sheet restriction error {restr:.1e} (<= 1e-12)")


def test_criterion_09_holonomy():
    ob = bg.hopf_open_book()
    pts = SampleSet(((0.1, 1.4), (0, 2 * math.pi), (0, 2 * math.pi)), 30).points()
    fb = hol.estimate_holonomy_bound(lambda e: bg.bourgeois_fibration(ob, e), [0.01, 0.02, 0.04],
                                     bg.arc_path(), pts, steps=100)
    fpts = SampleSet(((-0.5, 0.5),) * 3, 20).points()
    fg = hol.estimate_holonomy_bound(lambda r: gg.neck_fibration(std_r3(), gg.geiges_profile(r)),
                                     [0.01, 0.02, 0.04, 0.08], gg.neck_path(), fpts, steps=40,
                                     order=2, checkpoints=4)
    ok = fb.residual <= 0.10 and fg.residual <= 0.10 and fb.slope > 0 and fg.slope > 0
    record(9, ok, f"eps-sweep fit residual {fb.residual:.1%} (M {fb.slope:.3f}), rho-sweep C^2 "
                  f"fit residual {fg.residual:.1%} (M {fg.slope:.3f}) (<= 10%)")


def test_criterion_10_milnor():
    rep = mil.milnor_checks(mil.MilnorData(), 1000)
    ok = (rep.dbar_residual <= 1e-12 and abs(rep.hessian_det - 2) <= 1e-12
          and rep.submersion_rank_ok and rep.restriction_residual == 0.0)
    record(10, ok, f"dbar {rep.dbar_residual:.1e} (<= 1e-12), det {rep.hessian_det.real:g} (= 2), "
                   f"submersion on {rep.samples_used} samples off the link "
                   f"(min {rep.submersion_min_rank_value:.3f}), restriction {rep.restriction_residual:g}")


def test_criterion_11_plastikstufe():
    cf = ot_r3_cartesian()
    disk = verify_plastikstufe(cf, overtwisted_disk_mesh())
    fib = std_product_form(cf, base="cartesian")
    swept = verify_plastikstufe(fib.total, transport_plastikstufe(
        fib, lemniscate(0.5), overtwisted_disk_mesh(ns=7, nphi=12), steps=600))

    def good(r):
        return (max(r.core_tangency, r.leaf_isotropy, r.boundary_legendrian) <= 1e-4
                and r.winding == 1)

    worst = max(disk.core_tangency, disk.leaf_isotropy, disk.boundary_legendrian,
                swept.core_tangency, swept.leaf_isotropy, swept.boundary_legendrian)
    record(11, good(disk) and good(swept),
           f"disk and swept mesh: worst (i)/(iii)/(iv) violation {worst:.1e} (<= 1e-4), "
           f"winding {disk.winding}/{swept.winding} (= +1)")


def test_criterion_12_calculus_and_determinism():
    dd = max(registry.dd_residual(a, box, 200, 0) for a, box in registry.catalog_forms().values())
    cv = registry.cartan_vs_flow()
    order = min(cv["orders"])
    a = registry.run_scenario("calculus-kernel").to_json()
    b = registry.run_scenario("calculus-kernel").to_json()
    same = strip_wall_time(a) == strip_wall_time(b)
    ok = dd <= 1e-12 and order >= 1.8 and same
    record(12, ok, f"d o d {dd:.1e} (<= 1e-12) on {len(registry.catalog_forms())} forms, "
                   f"Cartan vs flow order {order:.2f} (~2), reports identical: {same}")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
