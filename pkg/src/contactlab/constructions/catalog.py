"""Named contact forms on standard charts."""

from __future__ import annotations

import math

from .. import dual as dn
from ..chart import (ChartManifold, POLAR_CORE, TWO_PI, ExcludedRegion, cylindrical,
                     euclidean)
from ..contact import ContactForm
from ..fibration import ContactFibration
from ..forms import embed, one_form


def std_r3(bound: float | None = None) -> ContactForm:
    """``dz - y dx`` on Cartesian ``(x, y, z)``."""
    chart = euclidean(("x", "y", "z"), "R3", bound)
    alpha = one_form(3, {0: lambda x: -x[1], 2: 1.0}, chart=chart, name="dz - y dx")
    return ContactForm(alpha, chart, name="std-r3")


def ot_r3_cylindrical(r_min: float = POLAR_CORE) -> ContactForm:
    """``r sin r d theta + cos r dz`` on ``(r, theta, z)``."""
    chart = cylindrical("R3-cyl", r_min)
    alpha = one_form(3, {1: lambda x: x[0] * dn.sin(x[0]), 2: lambda x: dn.cos(x[0])},
                     chart=chart, name="alpha_ot")
    return ContactForm(alpha, chart, name="ot-r3")


def ot_r3_cartesian() -> ContactForm:
    """The same form in ``(x, y, z)``, smooth through the axis."""
    chart = euclidean(("x", "y", "z"), "R3")

    def q(x):
        return x[0] * x[0] + x[1] * x[1]

    alpha = one_form(3, {
        0: lambda x: -x[1] * dn.sinc_sq(q(x)),
        1: lambda x: x[0] * dn.sinc_sq(q(x)),
        2: lambda x: dn.cos_sq(q(x)),
    }, chart=chart, name="alpha_ot")
    return ContactForm(alpha, chart, name="ot-r3-cart")


def ot_reeb_closed_form(r):
    """Printed Reeb field of ``alpha_ot`` in cylindrical components ``(R_r, R_theta, R_z)``."""
    den = r + dn.sin(r) * dn.cos(r)
    return (0.0 * r, dn.sin(r) / den, (dn.sin(r) + r * dn.cos(r)) / den)


def polar_base(radius: float = math.inf, r_min: float = POLAR_CORE) -> ChartManifold:
    return ChartManifold("D2-polar", ("r", "theta"), (None, TWO_PI), ((0.0, radius), None),
                         (ExcludedRegion("polar-core", 0, upper=r_min),))


def cartesian_base(bound: float | None = None) -> ChartManifold:
    return euclidean(("u", "v"), "D2", bound)


def std_product_form(fiber: ContactForm, sign: int = 1, base: str = "polar") -> ContactFibration:
    """``alpha_0 + sign * r^2 d theta`` over a disk; fiber coordinates come first.

    ``base="cartesian"`` writes the area term as ``sign * (u dv - v du)``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    k = fiber.dim
    bchart = polar_base() if base == "polar" else cartesian_base()
    if base not in ("polar", "cartesian"):
        raise ValueError(f"unknown base {base!r}")
    chart = fiber.chart.product(bchart, name=f"{fiber.chart.name}xD2")
    d = k + 2
    a0 = embed(fiber.alpha, d, range(k), chart=chart)
    if base == "polar":
        area = one_form(d, {k + 1: lambda x: sign * x[k] * x[k]}, chart=chart)
    else:
        area = one_form(d, {k: lambda x: -sign * x[k + 1], k + 1: lambda x: sign * x[k]},
                        chart=chart)
    label = "+" if sign > 0 else "-"
    total = ContactForm(a0 + area, chart, name=f"std-product({fiber.name},{label},{base})")
    return ContactFibration(total, fiber, bchart)


def catalog_names() -> tuple:
    return ("std-r3", "ot-r3", "ot-r3-cart", "std-product", "bourgeois", "geiges-glued",
            "prescribed")
