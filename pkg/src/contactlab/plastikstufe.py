"""Plastikstufe meshes: construction, verification and transport.

A mesh is an explicit leaf parametrization ``(core, s, phi) -> point`` with
radial leaves ``s -> point``.  The singular core sits at ``s = 0`` and the
boundary at ``s = 1``.  Because the leaves are given explicitly, the singular
set structure and the leaf topology hold by construction; the tangency
conditions and the elliptic index are measured.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import dual as dn
from .chart import split
from .contact import ContactForm
from .fibration import (BasePath, ContactFibration, TransportError, _rhs, horizontal_lift)
from .ode import rk4

TOL_MESH = 1e-4


@dataclass
class PlastikstufeMesh:
    """Sampled immersion of ``D^2 x S`` with its parameter tangents.

    ``points`` and the tangent arrays have shape ``(ncore, ns, nphi, dim)``;
    ``s[0]`` must be 0 (core) and ``s[-1]`` 1 (boundary).
    """

    s: np.ndarray
    phi: np.ndarray
    core: np.ndarray
    points: np.ndarray = field(repr=False)
    d_s: np.ndarray = field(repr=False)
    d_phi: np.ndarray = field(repr=False)
    d_core: np.ndarray = field(repr=False)
    label: str = "plastikstufe"
    core_is_circle: bool = False

    def __post_init__(self):
        shape = (len(self.core), len(self.s), len(self.phi))
        for name in ("points", "d_s", "d_phi", "d_core"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape[:3] != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape} + (dim,)")
            setattr(self, name, arr)
        if self.s[0] != 0.0 or self.s[-1] != 1.0:
            raise ValueError("radial parameter must run from 0 (core) to 1 (boundary)")

    @property
    def dim(self) -> int:
        return self.points.shape[-1]

    def rows(self) -> np.ndarray:
        """Flat ``(core, s, phi, coords...)`` rows for export."""
        C, S, P = np.meshgrid(self.core, self.s, self.phi, indexing="ij")
        return np.column_stack([C.ravel(), S.ravel(), P.ravel(),
                                self.points.reshape(-1, self.dim)])


@dataclass
class PlastikstufeReport:
    core_tangency: float  # (i)
    leaf_isotropy: float  # (iii)
    boundary_legendrian: float  # (iv)
    winding: int  # (v)
    structural: bool = True  # (ii), (vi)
    degenerate_cells: int = 0
    tol: float = TOL_MESH

    @property
    def conditions(self) -> dict:
        return {
            "i": self.core_tangency <= self.tol,
            "ii": self.structural,
            "iii": self.leaf_isotropy <= self.tol,
            "iv": self.boundary_legendrian <= self.tol,
            "v": self.winding == 1,
            "vi": self.structural,
        }

    @property
    def passed(self) -> bool:
        return all(self.conditions.values()) and self.degenerate_cells == 0

    def to_dict(self) -> dict:
        return {"core_tangency": self.core_tangency, "leaf_isotropy": self.leaf_isotropy,
                "boundary_legendrian": self.boundary_legendrian, "winding": self.winding,
                "structural": self.structural, "degenerate_cells": self.degenerate_cells,
                "tol": self.tol, "conditions": self.conditions, "passed": self.passed}


def _alpha_on(cf: ContactForm, pts, vecs) -> np.ndarray:
    a = np.asarray(cf.jet(split(pts))[0])
    return np.sum(a * vecs, axis=-1)


def winding_number(cf: ContactForm, mesh: PlastikstufeMesh, ring: int = 1) -> int:
    """Index of the characteristic line field around the core, per core slice.

    Uses disk coordinates ``(u, v) = s (cos phi, sin phi)``; the line field
    direction in those coordinates is ``(-alpha(T_v), alpha(T_u))``.  Returns
    the minimum over core slices so one bad slice is never hidden.
    """
    s = mesh.s[ring]
    pts = mesh.points[:, ring]
    As = _alpha_on(cf, pts, mesh.d_s[:, ring])
    Ap = _alpha_on(cf, pts, mesh.d_phi[:, ring]) / s
    c, sn = np.cos(mesh.phi), np.sin(mesh.phi)
    a = c * As - sn * Ap
    b = sn * As + c * Ap
    ang = np.arctan2(a, -b)
    closed = np.concatenate([ang, ang[:, :1]], axis=1)
    total = np.sum(np.diff(np.unwrap(closed, axis=1), axis=1), axis=1)
    return int(np.min(np.rint(total / (2 * np.pi))))


def verify_plastikstufe(cf: ContactForm, mesh: PlastikstufeMesh, tol: float = TOL_MESH,
                        ring: int = 1) -> PlastikstufeReport:
    cf.check(mesh.points.reshape(-1, mesh.dim))
    core = np.abs(_alpha_on(cf, mesh.points[:, 0], mesh.d_core[:, 0]))
    leaves = np.maximum(np.abs(_alpha_on(cf, mesh.points, mesh.d_s)),
                        np.abs(_alpha_on(cf, mesh.points, mesh.d_core)))
    bnd = np.maximum(np.abs(_alpha_on(cf, mesh.points[:, -1], mesh.d_phi[:, -1])),
                     np.abs(_alpha_on(cf, mesh.points[:, -1], mesh.d_core[:, -1])))
    # immersion: d_s and d_phi independent away from the core
    frame = np.stack([mesh.d_s[:, 1:], mesh.d_phi[:, 1:]], axis=-1)
    sv = np.linalg.svd(frame, compute_uv=False)
    degenerate = int(np.sum(sv[..., -1] <= 1e-10 * np.maximum(sv[..., 0], 1e-300)))
    return PlastikstufeReport(float(core.max()), float(leaves.max()), float(bnd.max()),
                              winding_number(cf, mesh, ring), True, degenerate, tol)


# -- constructions ----------------------------------------------------------

def legendrian_boundary_radius(lo: float = 2.0, hi: float = 4.0) -> float:
    """First positive radius where ``r sin r`` vanishes, i.e. the circle is Legendrian."""
    return float(brentq(lambda r: r * np.sin(r), lo, hi, xtol=1e-15))


def ot_height(r, c):
    """Leaf height profile with ``h' = c r^2 sin r`` and ``h(0) = 0``."""
    return c * (2 * dn.cos(r) - 2 + 2 * r * dn.sin(r) - r * r * dn.cos(r))


def ot_twist(r, c):
    """Angular drift keeping each leaf Legendrian: ``psi' = -c r cos r``."""
    return -c * (dn.cos(r) + r * dn.sin(r) - 1)


def _mesh_from(func, s, phi, label) -> PlastikstufeMesh:
    S, P = np.meshgrid(s, phi, indexing="ij")
    pts = np.asarray(func(S, P))
    one = np.ones_like(S)
    d_s = np.asarray(dn.tangent(func(dn.Dual(S, one), P), like=pts))
    d_p = np.asarray(dn.tangent(func(S, dn.Dual(P, one)), like=pts))
    zero = np.zeros_like(pts)
    return PlastikstufeMesh(np.asarray(s), np.asarray(phi), np.zeros(1), pts[None],
                            d_s[None], d_p[None], zero[None], label)


def overtwisted_disk_mesh(c: float = 0.05, ns: int = 9, nphi: int = 16,
                          r_b: Optional[float] = None) -> PlastikstufeMesh:
    """Overtwisted disk of ``alpha_ot`` in Cartesian ``(x, y, z)``.

    Leaves ``r -> (r, phi + psi(r), h(r))`` are Legendrian; ``c = 0`` is the
    flat disk.  ``r_b`` defaults to the Legendrian boundary radius.
    """
    rb = legendrian_boundary_radius() if r_b is None else r_b
    s = np.linspace(0.0, 1.0, ns)
    phi = np.linspace(0.0, 2 * np.pi, nphi, endpoint=False)

    def f(S, P):
        r = rb * S
        ang = P + ot_twist(r, c)
        return dn.stack([r * dn.cos(ang), r * dn.sin(ang), ot_height(r, c)], axis=-1)

    return _mesh_from(f, s, phi, f"ot-disk(c={c:g}, r_b={rb:.6g})")


def flat_disk_mesh(radius: float = 1.0, ns: int = 9, nphi: int = 16) -> PlastikstufeMesh:
    """The disk ``z = 0`` of the given radius, radially parametrized."""
    s = np.linspace(0.0, 1.0, ns)
    phi = np.linspace(0.0, 2 * np.pi, nphi, endpoint=False)

    def f(S, P):
        r = radius * S
        return dn.stack([r * dn.cos(P), r * dn.sin(P), 0.0 * S], axis=-1)

    return _mesh_from(f, s, phi, f"flat-disk(R={radius:g})")


def transport_plastikstufe(fib: ContactFibration, path: BasePath, mesh: PlastikstufeMesh,
                           steps: int = 1000, checkpoints: int = 9,
                           tol_mono: float = 1e-3) -> PlastikstufeMesh:
    """Sweep a fiber plastikstufe around a loop with trivial monodromy on it.

    The result has core ``S x S^1`` sampled at ``checkpoints`` loop times and
    lives in the total chart.
    """
    if mesh.points.shape[0] != 1:
        raise ValueError("expected a mesh with a point core")
    pts = mesh.points[0]
    ns, nphi, k = pts.shape
    flat = pts.reshape(-1, k)
    n = len(flat)
    y0 = dn.Dual(np.concatenate([flat, flat]),
                 np.concatenate([mesh.d_s[0].reshape(-1, k), mesh.d_phi[0].reshape(-1, k)]))
    every = max(1, steps // (checkpoints - 1))
    ts, ys, stopped = rk4(_rhs(fib, path), y0, 0.0, 1.0, steps, every)
    if stopped:
        raise TransportError(stopped)
    end = np.asarray(dn.value(ys[-1]))[:n]
    disp = float(np.max(np.abs(end - flat)))
    if disp > tol_mono:
        raise TransportError(f"monodromy is not the identity on the mesh: max displacement "
                             f"{disp:.3g} > {tol_mono:g}")
    P, DS, DP, DC = [], [], [], []
    for t, y in zip(ts, ys):
        val = np.asarray(y.real)[:n]
        tan = np.asarray(y.eps)
        total = fib.total_point(val, path(t))
        zb = np.zeros((n, fib.base_dim))
        P.append(total.reshape(ns, nphi, -1))
        DS.append(np.concatenate([tan[:n], zb], -1).reshape(ns, nphi, -1))
        DP.append(np.concatenate([tan[n:], zb], -1).reshape(ns, nphi, -1))
        DC.append(horizontal_lift(fib, total, path.velocity(t)).reshape(ns, nphi, -1))
    out = PlastikstufeMesh(mesh.s, mesh.phi, np.array(ts), np.array(P), np.array(DS),
                           np.array(DP), np.array(DC), f"swept({mesh.label})", True)
    out.max_displacement = disp
    return out


# -- Reeb flow versus the disk ----------------------------------------------

@dataclass
class OverlapReport:
    t: float
    radii: np.ndarray = field(repr=False)
    z_displacement: np.ndarray = field(repr=False)
    sign_changes: list
    rz_at_0: float
    rz_at_pi: float
    rz_at_2pi: float

    @property
    def intersects(self) -> bool:
        return len(self.sign_changes) > 0

    def to_dict(self) -> dict:
        return {"t": self.t, "sign_changes": self.sign_changes, "intersects": self.intersects,
                "rz_at_0": self.rz_at_0, "rz_at_pi": self.rz_at_pi,
                "rz_at_2pi": self.rz_at_2pi}


def reeb_z(cf_cyl: ContactForm, cf_cart: ContactForm, r) -> np.ndarray:
    """``R_z`` of the numerically solved Reeb field along ``theta = z = 0``.

    Radii below the polar core are evaluated in the Cartesian chart.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(r)
    core = r < 10 * cf_cyl.chart.excluded[0].upper if cf_cyl.chart.excluded else r < 0
    if np.any(~core):
        p = np.stack([r[~core], np.zeros((~core).sum()), np.zeros((~core).sum())], -1)
        out[~core] = cf_cyl.reeb(p)[:, 2]
    if np.any(core):
        p = np.stack([r[core], np.zeros(core.sum()), np.zeros(core.sum())], -1)
        out[core] = cf_cart.reeb(p)[:, 2]
    return out


def reeb_disk_overlap(cf_cyl: ContactForm, cf_cart: ContactForm, t: float,
                      r_max: float = np.pi, n: int = 2001) -> OverlapReport:
    """Sign scan of the z-displacement of the disk ``z = 0`` under the time-``t`` Reeb flow.

    The Reeb field of this form has no radial component and depends on ``r``
    only, so the flowed disk sits at height ``t R_z(r)`` over radius ``r``.
    """
    if t == 0:
        raise ValueError("flow time must be nonzero")
    radii = np.linspace(0.0, r_max, n)
    dz = t * reeb_z(cf_cyl, cf_cart, radii)
    sgn = np.sign(dz)
    idx = np.flatnonzero(sgn[:-1] * sgn[1:] < 0)
    changes = []
    for i in idx:
        f = lambda r: float(reeb_z(cf_cyl, cf_cart, r)[0])  # noqa: E731
        changes.append(float(brentq(f, radii[i], radii[i + 1], xtol=1e-13)))
    vals = reeb_z(cf_cyl, cf_cart, [0.0, np.pi, 2 * np.pi])
    return OverlapReport(t, radii, dz, changes, float(vals[0]), float(vals[1]), float(vals[2]))
