"""Base loops and segments with analytic velocities."""

from __future__ import annotations

import numpy as np

from ..fibration import BasePath, constant_path, segment  # noqa: F401  (re-exported)

TAU = 2 * np.pi


def circle_polar(radius: float) -> BasePath:
    """Counter-clockwise circle in polar base coordinates ``(r, theta)``."""
    return BasePath(lambda t: np.array([radius, TAU * t]),
                    lambda t: np.array([0.0, TAU]), name=f"circle(r={radius:g})",
                    periods=(None, TAU))


def circles_polar(radii) -> BasePath:
    """Several concentric circles at once: ``path(t)`` has shape ``(len(radii), 2)``.

    Pair it with fiber states whose leading axis runs over the radii.
    """
    radii = np.asarray(radii, dtype=float)
    ones = np.ones_like(radii)
    return BasePath(lambda t: np.stack([radii, TAU * t * ones], -1),
                    lambda t: np.stack([0 * radii, TAU * ones], -1),
                    name="circles", periods=(None, TAU))


def ellipse(a: float, b: float, center=(0.0, 0.0)) -> BasePath:
    """Counter-clockwise ellipse in Cartesian base coordinates; area ``pi a b``."""
    c = np.asarray(center, dtype=float)
    return BasePath(lambda t: c + np.array([a * np.cos(TAU * t), b * np.sin(TAU * t)]),
                    lambda t: TAU * np.array([-a * np.sin(TAU * t), b * np.cos(TAU * t)]),
                    name=f"ellipse({a:g},{b:g})")


def circle_cartesian(radius: float, center=(0.0, 0.0)) -> BasePath:
    return ellipse(radius, radius, center)


def lemniscate(a: float) -> BasePath:
    """Lemniscate of Bernoulli: a figure-eight whose two lobes cancel in signed area."""

    def c(t):
        s = TAU * t
        d = 1 + np.sin(s) ** 2
        return np.array([a * np.cos(s) / d, a * np.sin(s) * np.cos(s) / d])

    def dc(t):
        s = TAU * t
        sn, cs = np.sin(s), np.cos(s)
        d = 1 + sn * sn
        dd = 2 * sn * cs
        du = (-sn * d - cs * dd) / d ** 2
        dv = ((cs * cs - sn * sn) * d - sn * cs * dd) / d ** 2
        return TAU * a * np.array([du, dv])

    return BasePath(c, dc, name=f"lemniscate({a:g})")


def lissajous13(a: float, b: float) -> BasePath:
    """``(a cos 2 pi t, b sin 6 pi t)``: odd harmonics only, so ``gamma(t + 1/2) = -gamma(t)``.

    The two harmonics are orthogonal, hence the signed area is exactly zero.
    """
    return BasePath(lambda t: np.array([a * np.cos(TAU * t), b * np.sin(3 * TAU * t)]),
                    lambda t: TAU * np.array([-a * np.sin(TAU * t), 3 * b * np.cos(3 * TAU * t)]),
                    name=f"lissajous13({a:g},{b:g})")


def fourier_loop(seed: int, modes: int = 3, scale: float = 0.35,
                 center=(0.0, 0.0)) -> BasePath:
    """Random smooth closed loop ``c + sum_k (a_k cos 2 pi k t + b_k sin 2 pi k t)``."""
    rng = np.random.default_rng(seed)
    k = np.arange(1, modes + 1)
    A = rng.normal(size=(modes, 2)) * scale / k[:, None]
    B = rng.normal(size=(modes, 2)) * scale / k[:, None]
    c0 = np.asarray(center, dtype=float)

    def c(t):
        return c0 + np.cos(TAU * k * t) @ A + np.sin(TAU * k * t) @ B

    def dc(t):
        return (TAU * k * -np.sin(TAU * k * t)) @ A + (TAU * k * np.cos(TAU * k * t)) @ B

    return BasePath(c, dc, name=f"fourier(seed={seed})")


def signed_area(path: BasePath, n: int = 20000) -> float:
    """Shoelace-style quadrature of ``1/2 \\oint (u dv - v du)`` for Cartesian paths."""
    t = (np.arange(n) + 0.5) / n
    p = np.array([path(s) for s in t])
    v = np.array([path.velocity(s) for s in t])
    return float(0.5 * np.mean(p[:, 0] * v[:, 1] - p[:, 1] * v[:, 0]))
