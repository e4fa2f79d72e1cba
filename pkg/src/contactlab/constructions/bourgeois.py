"""T^2-invariant contact forms on ``S^3 x T^2`` built from the open book ``f = z_1``.

Chart on ``S^3``: ``z_1 = cos(eta) e^{i phi_1}``, ``z_2 = sin(eta) e^{i phi_2}``
with ``eta in (0, pi/2)``.  The standard form is
``beta = cos^2(eta) d phi_1 + sin^2(eta) d phi_2``; the binding ``{z_1 = 0}``
is ``eta = pi/2`` and the pages are ``phi_1 = const``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import dual as dn
from ..chart import ChartManifold, ExcludedRegion, TWO_PI, torus
from ..contact import ContactForm, reeb_field, verify_contact
from ..fibration import BasePath, ContactFibration
from ..forms import embed, one_form
from ..sampling import SampleSet

ETA_MARGIN = 1e-3
RHO_MAX = 0.5
TORUS_PERIOD = 1.0


def s3_chart(margin: float = ETA_MARGIN) -> ChartManifold:
    """``(eta, phi1, phi2)``; the two polar circles of the chart are excluded."""
    return ChartManifold(
        "S3-hopf", ("eta", "phi1", "phi2"), (None, TWO_PI, TWO_PI),
        ((0.0, math.pi / 2), None, None),
        (ExcludedRegion("core-z2", 0, upper=margin),
         ExcludedRegion("binding", 0, lower=math.pi / 2 - margin)),
    )


def std_s3(margin: float = ETA_MARGIN) -> ContactForm:
    chart = s3_chart(margin)
    beta = one_form(3, {1: lambda x: dn.cos(x[0]) ** 2, 2: lambda x: dn.sin(x[0]) ** 2},
                    chart=chart, name="beta")
    return ContactForm(beta, chart, name="std-s3")


@dataclass(frozen=True)
class OpenBookData:
    """Open book on the fiber together with the smoothed map ``Phi = rho * phase``.

    Functions act on fiber coordinate tuples.
    """

    fiber: ContactForm
    rho: Callable
    phase: Callable
    rho_max: float

    def Phi(self, x) -> tuple:
        ph = self.phase(x)
        r = self.rho(x)
        return r * dn.cos(ph), r * dn.sin(ph)


def hopf_open_book(rho_max: float = RHO_MAX, margin: float = ETA_MARGIN) -> OpenBookData:
    """``f = z_1``: phase ``phi_1``; ``rho = rho_max tanh(|z_1| / rho_max)``.

    ``rho`` is ``|z_1|`` to first order at the binding, so ``Phi`` is the smooth map
    ``z_1 (1 - |z_1|^2 / (3 rho_max^2) + ...)`` there.
    """
    def rho(x):
        return rho_max * dn.tanh(dn.cos(x[0]) / rho_max)

    return OpenBookData(std_s3(margin), rho, lambda x: x[1], rho_max)


def bourgeois_chart(margin: float = ETA_MARGIN) -> ChartManifold:
    return s3_chart(margin).product(torus(TORUS_PERIOD), name="S3xT2")


def bourgeois_form(ob: OpenBookData, eps: float) -> ContactForm:
    """``eps (Phi_1 d theta_1 + Phi_2 d theta_2) + beta`` on ``(eta, phi1, phi2, theta1, theta2)``."""
    if eps == 0:
        raise ValueError("eps must be nonzero: the form degenerates on the 5-dimensional chart")
    return _bourgeois_form(ob, eps)


def _bourgeois_form(ob: OpenBookData, eps: float) -> ContactForm:
    chart = ob.fiber.chart.product(torus(TORUS_PERIOD), name="S3xT2")
    # the torus coordinates are never read, so coefficients are T^2-invariant bitwise
    terms = {3: lambda x: eps * ob.Phi(x[:3])[0], 4: lambda x: eps * ob.Phi(x[:3])[1]}
    alpha = embed(ob.fiber.alpha, 5, range(3), chart=chart) + one_form(5, terms, chart=chart)
    return ContactForm(alpha, chart, name=f"bourgeois(eps={eps:g})")


def degenerate_form(ob: OpenBookData) -> ContactForm:
    """The excluded ``eps = 0`` member, built only to exhibit its failure."""
    return _bourgeois_form(ob, 0.0)


def bourgeois_fibration(ob: OpenBookData, eps: float) -> ContactFibration:
    """The same form viewed as a contact fibration over ``T^2`` with fiber ``S^3``."""
    return ContactFibration(bourgeois_form(ob, eps), ob.fiber, torus(TORUS_PERIOD))


def samples(count: int = 10_000, seed: int = 0, margin: float = ETA_MARGIN) -> SampleSet:
    chart = bourgeois_chart(margin)
    box = [(margin, math.pi / 2 - margin), (0, TWO_PI), (0, TWO_PI),
           (0, TORUS_PERIOD), (0, TORUS_PERIOD)]
    return SampleSet.for_chart(chart, count, seed=seed, box=box)


def check_contact(eps: float, count: int = 10_000, seed: int = 0):
    ob = hopf_open_book()
    cf = bourgeois_form(ob, eps) if eps != 0 else degenerate_form(ob)
    return verify_contact(cf, samples(count, seed))


def compatibility(ob: OpenBookData, count: int = 2000, seed: int = 0) -> dict:
    """Numerical evidence that the open book supports ``beta``.

    Pages ``phi_1 = c`` carry ``d beta|_page = sin(2 eta) d eta ^ d phi_2``, which must
    not vanish, and the Reeb field must be tangent to the binding ``eta = pi/2``
    (its ``eta`` component must vanish as the binding is approached).
    """
    cf = ob.fiber
    pts = SampleSet.for_chart(cf.chart, count, seed=seed,
                              box=[(ETA_MARGIN, math.pi / 2 - ETA_MARGIN), (0, TWO_PI),
                                   (0, TWO_PI)]).points()
    x = tuple(pts[:, i] for i in range(3))
    om = np.asarray(cf.omega_at(x))
    page_area = np.abs(om[:, 0, 2])
    R = reeb_field(cf)(pts)
    near = pts.copy()
    near[:, 0] = math.pi / 2 - 2 * ETA_MARGIN
    Rb = reeb_field(cf)(near)
    return {
        "min_page_area_density": float(page_area.min()),
        "pages_symplectic": bool(page_area.min() > 0),
        "reeb_transverse_to_pages": float(np.min(R[:, 1])),
        "reeb_eta_component_near_binding": float(np.max(np.abs(Rb[:, 0]))),
        "reeb_tangent_to_binding": bool(np.max(np.abs(Rb[:, 0])) <= 1e-12),
    }


def arc_path(delta: float = 0.5, radius: float = 2.0, start=(0.1, 0.2),
             heading: float = 0.3) -> BasePath:
    """Unit-speed circular arc of length ``delta`` on ``T^2`` (curvature ``1/radius``).

    The path parameter runs over ``[0, 1]``, so the velocity has norm ``delta``.
    """
    c0 = np.asarray(start, dtype=float)
    center = c0 + radius * np.array([-math.sin(heading), math.cos(heading)])

    def c(t):
        a = heading + delta * t / radius
        return center + radius * np.array([math.sin(a), -math.cos(a)])

    def dc(t):
        a = heading + delta * t / radius
        return delta * np.array([math.cos(a), math.sin(a)])

    return BasePath(c, dc, name=f"arc(len={delta:g},R={radius:g})",
                    periods=(TORUS_PERIOD, TORUS_PERIOD))
