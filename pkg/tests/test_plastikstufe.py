import numpy as np
import pytest

from contactlab.constructions.catalog import (ot_r3_cartesian, ot_r3_cylindrical,
                                              std_product_form, std_r3)
from contactlab.constructions.paths import circle_cartesian, lemniscate
from contactlab.fibration import TransportError
from contactlab.plastikstufe import (PlastikstufeMesh, flat_disk_mesh, legendrian_boundary_radius,
                                     overtwisted_disk_mesh, reeb_disk_overlap,
                                     transport_plastikstufe, verify_plastikstufe, winding_number)


def test_legendrian_boundary_radius_is_pi():
    # r sin r vanishes at r = pi: the circle there is Legendrian
    assert legendrian_boundary_radius() == pytest.approx(np.pi, abs=1e-12)


def test_overtwisted_disk_passes():
    rep = verify_plastikstufe(ot_r3_cartesian(), overtwisted_disk_mesh())
    assert rep.passed
    assert rep.winding == 1
    assert max(rep.core_tangency, rep.leaf_isotropy, rep.boundary_legendrian) <= 1e-4


def test_flat_disk_fails_boundary_condition():
    rep = verify_plastikstufe(std_r3(), flat_disk_mesh())
    assert not rep.conditions["iv"]
    assert not rep.passed


def test_winding_is_elliptic_for_every_mesh_resolution():
    for ns, nphi in ((5, 8), (9, 16), (13, 24)):
        mesh = overtwisted_disk_mesh(ns=ns, nphi=nphi)
        assert winding_number(ot_r3_cartesian(), mesh) == 1


def test_mesh_shape_validation():
    mesh = overtwisted_disk_mesh(ns=5, nphi=8)
    with pytest.raises(ValueError):
        PlastikstufeMesh(mesh.s[::-1], mesh.phi, mesh.core, mesh.points, mesh.d_s,
                         mesh.d_phi, mesh.d_core)
    with pytest.raises(ValueError):
        PlastikstufeMesh(mesh.s, mesh.phi, mesh.core, mesh.points[:, :-1], mesh.d_s,
                         mesh.d_phi, mesh.d_core)


def test_mesh_rows_layout():
    mesh = overtwisted_disk_mesh(ns=5, nphi=8)
    rows = mesh.rows()
    assert rows.shape == (5 * 8, 3 + 3)


def test_transport_around_figure_eight():
    fib = std_product_form(ot_r3_cartesian(), base="cartesian")
    swept = transport_plastikstufe(fib, lemniscate(0.5), overtwisted_disk_mesh(ns=5, nphi=8),
                                   steps=400, checkpoints=5)
    assert swept.core_is_circle
    assert swept.max_displacement <= 1e-3
    rep = verify_plastikstufe(fib.total, swept)
    assert rep.passed, rep.to_dict()


def test_transport_around_circle_is_rejected():
    fib = std_product_form(ot_r3_cartesian(), base="cartesian")
    with pytest.raises(TransportError):
        transport_plastikstufe(fib, circle_cartesian(0.4), overtwisted_disk_mesh(ns=5, nphi=8),
                               steps=100)


def test_reeb_disk_overlap():
    rep = reeb_disk_overlap(ot_r3_cylindrical(), ot_r3_cartesian(), 0.1)
    assert rep.intersects
    assert rep.rz_at_0 == pytest.approx(1.0, abs=1e-12)
    assert rep.rz_at_pi == pytest.approx(-1.0, abs=1e-12)
    assert rep.rz_at_2pi == pytest.approx(1.0, abs=1e-12)
    # R_z vanishes where tan r + r = 0 on (pi/2, pi)
    (r0,) = rep.sign_changes
    assert np.tan(r0) + r0 == pytest.approx(0.0, abs=1e-9)


def test_overlap_needs_nonzero_time():
    with pytest.raises(ValueError):
        reeb_disk_overlap(ot_r3_cylindrical(), ot_r3_cartesian(), 0.0)
