"""Rotationally symmetric profile hypersurface for the fibered sum.

The ambient form is ``alpha_0 + z rho r^2 d theta`` on ``F x R^3`` (cylindrical
``(r, theta, z)``).  The profile

    F(r, z) = A(r) - z^2 + b r k(z),
    A(r) = -1 + 2 S((r - r_a) / (1/2 - r_a)),   k(z) = exp(1 - 1/(1 - z^2)) on |z| < 1,

has zero set ``S`` = a neck ``r = R(z)`` over ``|z| < 1`` plus the sheets
``z = +-1, r >= 1/2``.  ``S`` is the smooth step of the prescription module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import dual as dn
from ..chart import ChartManifold, TWO_PI
from ..contact import ContactForm, verify_contact
from ..fibration import BasePath, ContactFibration
from ..forms import SmoothMap, embed, one_form, pullback
from ..sampling import SampleSet
from .prescription import smooth_step, smooth_step_prime

R_A = 0.2
B_NECK = 0.3
SHEET_R_MAX = 1.5
NECK_Z_MAX = 0.95


def _k(z):
    inside = (z > -1) & (z < 1)
    zs = dn.where(inside, z, 0.0)
    return dn.where(inside, dn.exp(1.0 - 1.0 / (1.0 - zs * zs)), 0.0)


def _dk(z):
    inside = (z > -1) & (z < 1)
    zs = dn.where(inside, z, 0.0)
    q = 1.0 - zs * zs
    return dn.where(inside, -2.0 * zs / (q * q) * dn.exp(1.0 - 1.0 / q), 0.0)


@dataclass(frozen=True)
class GluingProfile:
    rho: float
    r_a: float = R_A
    b: float = B_NECK
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.rho >= 0:
            raise ValueError("rho must be non-negative")
        if not 0 < self.r_a < 0.5 or not 0 < self.b * 0.5 < 1:
            raise ValueError("profile parameters out of range")

    # -- the function and its partials -----------------------------------
    def _u(self, r):
        return (r - self.r_a) / (0.5 - self.r_a)

    def A(self, r):
        return -1.0 + 2.0 * smooth_step(self._u(r))

    def F(self, r, z):
        return self.A(r) - z * z + self.b * r * _k(z)

    def F_r(self, r, z):
        return 2.0 * smooth_step_prime(self._u(r)) / (0.5 - self.r_a) + self.b * _k(z)

    def F_z(self, r, z):
        return -2.0 * z + self.b * r * _dk(z)

    # -- neck ------------------------------------------------------------
    def _R_plain(self, z):
        z = np.asarray(z, dtype=float)
        lo = np.full(z.shape, self.r_a)
        hi = np.full(z.shape, 0.5)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            neg = self.F(mid, z) < 0
            lo = np.where(neg, mid, lo)
            hi = np.where(neg, hi, mid)
        r = 0.5 * (lo + hi)
        for _ in range(2):
            r = r - self.F(r, z) / self.F_r(r, z)
        return r

    def R(self, z):
        """Neck radius for ``|z| < 1``, differentiable through any number of dual layers."""
        if isinstance(z, dn.Dual):
            r0 = self.R(z.real)
            return dn.Dual(r0, -self.F_z(r0, z.real) / self.F_r(r0, z.real) * z.eps)
        return self._R_plain(z)

    # -- certification ---------------------------------------------------
    def grid_certificate(self, n: int = 200, r_max: float = SHEET_R_MAX,
                         z_max: float = 1.5) -> dict:
        r = np.linspace(r_max / n, r_max, n)
        z = np.linspace(-z_max, z_max, n)
        Rg, Zg = np.meshgrid(r, z, indexing="ij")
        Fr = self.F_r(Rg, Zg)
        Fz = self.F_z(Rg, Zg)
        # transversality on S: sample points of S itself, neck and sheets
        zn = np.linspace(-0.999, 0.999, n)
        rn = self.R(zn)
        grad_neck = np.hypot(self.F_r(rn, zn), self.F_z(rn, zn))
        rs = np.linspace(0.5, r_max, n)
        grad_sheet = np.hypot(self.F_r(rs, np.ones(n)), self.F_z(rs, np.ones(n)))
        r0 = r
        Fr0 = self.F_r(r0, np.zeros(n))
        sheet_res = max(float(np.max(np.abs(self.F(rs, np.ones(n))))),
                        float(np.max(np.abs(self.F(rs, -np.ones(n))))))
        out = {
            "min_dF_dr": float(np.min(Fr)),
            "min_dF_dr_at_z0": float(np.min(Fr0)),
            "max_z_dF_dz": float(np.max(Zg * Fz)),
            "min_grad_on_S": float(min(grad_neck.min(), grad_sheet.min())),
            "sheet_residual": sheet_res,
            "grid": [n, n],
        }
        out["dF_dr_nonneg"] = out["min_dF_dr"] >= 0
        out["dF_dr_pos_at_z0"] = out["min_dF_dr_at_z0"] > 0
        out["z_dF_dz_nonpos"] = out["max_z_dF_dz"] <= 0
        out["transverse"] = out["min_grad_on_S"] > 0
        out["contains_sheets"] = sheet_res == 0.0
        out["passed"] = all(out[k] for k in ("dF_dr_nonneg", "dF_dr_pos_at_z0", "z_dF_dz_nonpos",
                                             "transverse", "contains_sheets"))
        return out


def geiges_profile(rho: float = 0.05, **kw) -> GluingProfile:
    return GluingProfile(rho, **kw)


# -- charts and forms -------------------------------------------------------

def ambient_form(fiber: ContactForm, rho: float) -> ContactForm:
    """``alpha_0 + z rho r^2 d theta`` on ``(fiber..., r, theta, z)``.

    It is not contact on all of ``F x R^3`` (it is even-dimensional); only its
    restriction to ``F x S`` is.  Returned as a 1-form holder for pullbacks.
    """
    k = fiber.dim
    d = k + 3
    chart = fiber.chart.product(ChartManifold("R3-cyl", ("r", "theta", "z"), (None, TWO_PI, None)))
    return (embed(fiber.alpha, d, range(k), chart=chart)
            + one_form(d, {k + 1: lambda x: rho * x[k + 2] * x[k] * x[k]}, chart=chart))


def neck_map(profile: GluingProfile, k: int) -> SmoothMap:
    """``(p, z, theta) -> (p, R(z), theta, z)``."""
    return SmoothMap(k + 2, k + 3,
                     lambda x: tuple(x[:k]) + (profile.R(x[k]), x[k + 1], x[k]))


def sheet_map(sign: int, k: int) -> SmoothMap:
    """``(p, r, theta) -> (p, r, theta, sign)``."""
    return SmoothMap(k + 2, k + 3, lambda x: tuple(x[:k]) + (x[k], x[k + 1], sign + 0.0 * x[k]))


def neck_chart(fiber: ContactForm) -> ChartManifold:
    return fiber.chart.product(ChartManifold("neck", ("z", "theta"), (None, TWO_PI),
                                             ((-NECK_Z_MAX, NECK_Z_MAX), None)))


def sheet_chart(fiber: ContactForm, sign: int) -> ChartManifold:
    label = "upper" if sign > 0 else "lower"
    return fiber.chart.product(ChartManifold(f"sheet-{label}", ("r", "theta"), (None, TWO_PI),
                                             ((0.5, SHEET_R_MAX), None)))


def neck_pullback(fiber: ContactForm, profile: GluingProfile) -> ContactForm:
    """Restriction of the ambient form to the neck, computed as a generic pullback."""
    k = fiber.dim
    chart = neck_chart(fiber)
    a = pullback(neck_map(profile, k), ambient_form(fiber, profile.rho), chart=chart)
    return ContactForm(a, chart, name=f"geiges-neck-pullback(rho={profile.rho:g})")


def neck_form(fiber: ContactForm, profile: GluingProfile) -> ContactForm:
    """``alpha_0 + rho z R(z)^2 d theta``: the same restriction written out.

    The ambient form has no ``dr`` or ``dz`` term, so the pullback only
    substitutes ``r = R(z)``; see :func:`neck_pullback_error`.
    """
    k = fiber.dim
    chart = neck_chart(fiber)
    rho, R = profile.rho, profile.R

    def coef(x):
        r = R(x[k])
        return rho * x[k] * r * r

    a = embed(fiber.alpha, k + 2, range(k), chart=chart) + one_form(k + 2, {k + 1: coef}, chart=chart)
    return ContactForm(a, chart, name=f"geiges-neck(rho={profile.rho:g})")


def neck_pullback_error(fiber: ContactForm, profile: GluingProfile, fiber_box,
                        count: int = 500, seed: int = 0) -> float:
    pts = chart_samples(fiber_box, "neck", count, seed)
    x = tuple(pts[:, i] for i in range(pts.shape[1]))
    a = np.asarray(neck_pullback(fiber, profile).alpha_at(x))
    b = np.asarray(neck_form(fiber, profile).alpha_at(x))
    return float(np.max(np.abs(a - b)))


def sheet_form(fiber: ContactForm, profile: GluingProfile, sign: int) -> ContactForm:
    k = fiber.dim
    chart = sheet_chart(fiber, sign)
    a = pullback(sheet_map(sign, k), ambient_form(fiber, profile.rho), chart=chart)
    return ContactForm(a, chart, name=f"geiges-sheet{sign:+d}(rho={profile.rho:g})")


def normal_model(fiber: ContactForm, rho: float, sign: int) -> ContactForm:
    """``alpha_0 + sign rho r^2 d theta`` on the sheet chart."""
    k = fiber.dim
    chart = sheet_chart(fiber, sign)
    a = embed(fiber.alpha, k + 2, range(k), chart=chart) + one_form(
        k + 2, {k + 1: lambda x: sign * rho * x[k] * x[k]}, chart=chart)
    return ContactForm(a, chart, name=f"normal-model{sign:+d}")


def restriction_error(fiber: ContactForm, profile: GluingProfile, sign: int,
                      fiber_box, count: int = 1000, seed: int = 0) -> float:
    """Max coefficient gap between the sheet pullback and the normal model."""
    sf = sheet_form(fiber, profile, sign)
    nm = normal_model(fiber, profile.rho, sign)
    box = list(fiber_box) + [(0.5, SHEET_R_MAX), (0, TWO_PI)]
    pts = SampleSet(tuple(box), count, seed=seed).points()
    x = tuple(pts[:, i] for i in range(pts.shape[1]))
    return float(np.max(np.abs(np.asarray(sf.alpha_at(x)) - np.asarray(nm.alpha_at(x)))))


def chart_samples(fiber_box, which: str, count: int, seed: int = 0) -> np.ndarray:
    tail = [(-NECK_Z_MAX, NECK_Z_MAX), (0, TWO_PI)] if which == "neck" else \
        [(0.5, SHEET_R_MAX), (0, TWO_PI)]
    return SampleSet(tuple(list(fiber_box) + tail), count, seed=seed).points()


def glued_contact(fiber: ContactForm, profile: GluingProfile, fiber_box, count: int = 2000,
                  seed: int = 0) -> dict:
    """verify_contact on the neck chart and both sheet charts."""
    out = {}
    out["neck"] = verify_contact(neck_form(fiber, profile), chart_samples(fiber_box, "neck", count, seed))
    for sign in (1, -1):
        cf = sheet_form(fiber, profile, sign)
        out[f"sheet{sign:+d}"] = verify_contact(cf, chart_samples(fiber_box, "sheet", count, seed))
    return out


def max_passing_rho(fiber: ContactForm, fiber_box, rhos, count: int = 1000, seed: int = 0) -> dict:
    """Largest ``rho`` in the sweep for which every chart passes; also the full table."""
    table = []
    best = None
    for rho in rhos:
        checks = glued_contact(fiber, geiges_profile(rho), fiber_box, count, seed)
        ok = all(c.passed for c in checks.values())
        table.append({"rho": float(rho), "passed": ok})
        if ok and (best is None or rho > best):
            best = float(rho)
    return {"max_passing_rho": best, "table": table}


def neck_fibration(fiber: ContactForm, profile: GluingProfile) -> ContactFibration:
    """The glued form on the neck viewed as a fibration over the ``(z, theta)`` annulus."""
    cf = neck_form(fiber, profile)
    base = ChartManifold("neck", ("z", "theta"), (None, TWO_PI), ((-NECK_Z_MAX, NECK_Z_MAX), None))
    return ContactFibration(cf, fiber, base)


def neck_path(z0: float = -0.8, z1: float = 0.8, theta0: float = 0.0,
              drift: float = 0.3) -> BasePath:
    """Crosses the neck from the lower to the upper sheet while turning by ``drift``."""
    return BasePath(lambda t: np.array([z0 + (z1 - z0) * t, theta0 + drift * t]),
                    lambda t: np.array([z1 - z0, drift]), name="neck-crossing",
                    periods=(None, TWO_PI))
