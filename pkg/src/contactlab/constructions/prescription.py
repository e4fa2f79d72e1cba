"""Deforming the standard product form so a radial segment has a prescribed monodromy.

Over the polar base ``(r, theta)`` the deformed form is
``alpha_0 + r^2 d theta - g~ dr`` with

    g~(p, r, theta) = xi(theta) * (2 / delta) * t'(s) * g_{t(s)}(p),
    s = (r - delta/4) / (delta/2),

so lifting ``d/dr`` along ``theta = 0`` produces the contact Hamiltonian
field of ``t'(s) g_{t(s)}``, whose time-one flow is that of ``g_t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import dual as dn
from ..contact import ContactForm, hamiltonian_field, verify_contact
from ..fibration import BasePath, ContactFibration
from ..forms import embed, one_form
from ..ode import integrate
from ..chart import join, split
from .catalog import polar_base

PHI_SCALE = 0.6


def _phi(x):
    pos = x > 0
    xs = dn.where(pos, x, 1.0)
    return dn.where(pos, dn.exp(-PHI_SCALE / xs), 0.0)


def _dphi(x):
    pos = x > 0
    xs = dn.where(pos, x, 1.0)
    return dn.where(pos, PHI_SCALE / (xs * xs) * dn.exp(-PHI_SCALE / xs), 0.0)


def smooth_step(x):
    """``C^inf`` step: 0 for ``x <= 0``, 1 for ``x >= 1``."""
    a = _phi(x)
    b = _phi(1.0 - x)
    return a / (a + b)


def smooth_step_prime(x):
    a, b = _phi(x), _phi(1.0 - x)
    da, db = _dphi(x), _dphi(1.0 - x)
    return (da * b + a * db) / ((a + b) * (a + b))


def wrap_angle(theta):
    """Angle reduced into ``(-pi, pi]``; the shift is locally constant."""
    k = np.round(np.asarray(dn.value(theta)) / (2 * np.pi))
    return theta - 2 * np.pi * k


def cutoff_xi(theta):
    """1 on ``|theta| <= pi/8``, 0 on ``|theta| >= pi/4``, monotone in between."""
    w = wrap_angle(theta)
    return smooth_step((math.pi / 4 - dn.absolute(w)) / (math.pi / 8))


def reparam(s, beta: float):
    """``t(s)``: flat 0 on ``[0, beta]``, flat 1 on ``[1 - beta, 1]``."""
    return smooth_step((s - beta) / (1.0 - 2 * beta))


def reparam_prime(s, beta: float):
    return smooth_step_prime((s - beta) / (1.0 - 2 * beta)) / (1.0 - 2 * beta)


def xi_certificate(n: int = 200001) -> dict:
    """Grid certification of the four cutoff constraints."""
    th = np.linspace(-np.pi, np.pi, n)
    xi = cutoff_xi(th)
    dxi = dn.tangent(cutoff_xi(dn.seed(th)))
    inner = np.abs(th) < np.pi / 8
    outer = np.abs(th) >= np.pi / 4
    return {
        "one_inside": bool(np.all(xi[inner] == 1.0)),
        "zero_outside": bool(np.all(xi[outer] == 0.0)),
        "in_unit_interval": bool(np.all((xi >= 0) & (xi <= 1))),
        "max_abs_derivative": float(np.max(np.abs(dxi))),
        "derivative_bound": 4.0,
    }


HamiltonianFamily = Callable  # (t, p_tuple) -> value, written with dual-aware math


@dataclass
class MonodromyPrescription:
    """Target family ``g_t`` on the fiber plus the deformation parameters."""

    family: HamiltonianFamily
    delta: float = 1.0
    beta_r: float = 0.1
    name: str = "g"
    bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 < self.beta_r < 0.5:
            raise ValueError("beta_r must lie in (0, 1/2)")
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    def g_tilde(self, k: int) -> Callable:
        """Coefficient ``g~`` on total coordinates (fiber first, then ``r, theta``)."""
        delta, beta, fam = self.delta, self.beta_r, self.family

        def g(x):
            r, th = x[k], x[k + 1]
            s = (r - delta / 4) / (delta / 2)
            inside = (s > 0) & (s < 1)
            sc = dn.where(inside, s, 0.5)
            val = cutoff_xi(th) * (2 / delta) * reparam_prime(sc, beta) * fam(reparam(sc, beta), x[:k])
            return dn.where(inside, val, 0.0)

        return g

    def scaled(self, c: float) -> "MonodromyPrescription":
        fam = self.family
        return MonodromyPrescription(lambda t, p: c * fam(t, p), self.delta, self.beta_r,
                                     f"{c:g}*{self.name}")


def family_bounds(family: HamiltonianFamily, fiber_box, n: int = 2000, seed: int = 0) -> dict:
    """``sup |g|`` and ``sup |dg|`` (with ``t`` as an extra coordinate) on a box."""
    from scipy.stats import qmc
    box = np.asarray(fiber_box, dtype=float)
    k = len(box)
    u = qmc.Halton(d=k + 1, scramble=True, seed=seed).random(n)
    pts = np.empty_like(u)
    pts[:, 0] = u[:, 0]
    pts[:, 1:] = box[:, 0] + (box[:, 1] - box[:, 0]) * u[:, 1:]
    x = tuple(pts[:, i] for i in range(k + 1))
    f = lambda y: family(y[0], y[1:]) + 0.0 * y[0]  # noqa: E731
    val, grad = dn.gradient_parts(f(dn.gradient_seed(x)), k + 1, (n,))
    gnorm = np.sqrt(sum(np.asarray(g) ** 2 for g in grad))
    return {"sup_g": float(np.max(np.abs(val))), "sup_dg": float(np.max(gnorm))}


def prescribe_monodromy(presc: MonodromyPrescription, fiber: ContactForm) -> ContactFibration:
    """The deformed product fibration over the polar disk of radius ``delta``."""
    k = fiber.dim
    base = polar_base(presc.delta)
    chart = fiber.chart.product(base, name=f"{fiber.chart.name}xD2")
    d = k + 2
    a0 = embed(fiber.alpha, d, range(k), chart=chart)
    g = presc.g_tilde(k)
    extra = one_form(d, {k: lambda x: -g(x), k + 1: lambda x: x[k] * x[k]}, chart=chart)
    total = ContactForm(a0 + extra, chart, name=f"prescribed({presc.name}, delta={presc.delta:g})")
    return ContactFibration(total, fiber, base)


def radial_path(delta: float) -> BasePath:
    """``r`` from ``delta/4`` to ``3 delta/4`` along ``theta = 0``."""
    return BasePath(lambda t: np.array([delta / 4 + delta / 2 * t, 0.0]),
                    lambda t: np.array([delta / 2, 0.0]), name=f"radial(delta={delta:g})",
                    periods=(None, 2 * np.pi))


def support_box(delta: float) -> tuple:
    """Closed ``(r, theta)`` box containing the deformation."""
    return ((delta / 4, 3 * delta / 4), (-math.pi / 4, math.pi / 4))


def hamiltonian_flow(fiber: ContactForm, family: HamiltonianFamily, points, steps: int = 2000,
                     t0: float = 0.0, t1: float = 1.0):
    """Time-dependent contact Hamiltonian flow of ``g_t`` (independent oracle)."""

    def rhs(t, y):
        X = hamiltonian_field(fiber, lambda p: family(t, p) + 0.0 * p[0])
        return join(X.components(split(y)))

    return integrate(rhs, np.asarray(points, dtype=float), t0, t1, steps)


def total_samples(fiber_box, delta: float, count: int, seed: int = 0,
                  r_min_frac: float = 0.05) -> np.ndarray:
    from scipy.stats import qmc
    box = [tuple(b) for b in fiber_box] + [(r_min_frac * delta, delta), (-math.pi, math.pi)]
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    u = qmc.Halton(d=len(box), scramble=True, seed=seed).random(count)
    return lo + (hi - lo) * u


@dataclass
class EpsilonBound:
    epsilon: float
    passed_at: float
    failed_at: Optional[float]
    iterations: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def measure_epsilon(unit: MonodromyPrescription, fiber: ContactForm, samples,
                    c_max: float = 64.0, iterations: int = 30) -> EpsilonBound:
    """Largest sup-norm scale ``c`` (bisected) for which the deformed form stays contact.

    ``unit`` should be normalized so its ``max(sup|g|, sup|dg|)`` is 1; then
    ``c`` is directly the bound on ``|g|`` and ``|dg|``.
    """

    def ok(c):
        return verify_contact(prescribe_monodromy(unit.scaled(c), fiber).total, samples).passed

    if ok(c_max):
        return EpsilonBound(c_max, c_max, None, 0)
    lo, hi = 0.0, c_max
    for i in range(iterations):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return EpsilonBound(lo, lo, hi, iterations)
