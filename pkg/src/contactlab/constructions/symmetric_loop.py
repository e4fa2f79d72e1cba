"""The point-symmetric loop of the plastikstufe-transport construction on ``D^2(delta)``.

First half: out along the x-axis to ``3 delta/4``, the arc
``r(theta) = 3 delta/4 + (delta/8) sin 2 theta`` for ``theta in [0, pi/2]``, then back
down the y-axis.  The second half is the first one rotated by ``pi``.  Corners
are replaced by cubic Hermite fillets; the loop is then resampled by a periodic
cubic spline in arc length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from ..fibration import BasePath


def _hermite(p0, t0, p1, t1, n):
    s = np.linspace(0.0, 1.0, n)[:, None]
    h00 = 2 * s ** 3 - 3 * s ** 2 + 1
    h10 = s ** 3 - 2 * s ** 2 + s
    h01 = -2 * s ** 3 + 3 * s ** 2
    h11 = s ** 3 - s ** 2
    return h00 * p0 + h10 * t0 + h01 * p1 + h11 * t1


def _line(p0, p1, n):
    s = np.linspace(0.0, 1.0, n)[:, None]
    return (1 - s) * p0 + s * p1


def arc_radius(theta, delta: float):
    return 0.75 * delta + 0.125 * delta * np.sin(2 * theta)


def _arc(delta, th0, th1, n):
    th = np.linspace(th0, th1, n)
    r = arc_radius(th, delta)
    return np.stack([r * np.cos(th), r * np.sin(th)], -1)


def _arc_point(delta, th):
    r = arc_radius(th, delta)
    return np.array([r * math.cos(th), r * math.sin(th)])


def _arc_tangent(delta, th):
    r = arc_radius(th, delta)
    dr = 0.25 * delta * math.cos(2 * th)
    v = np.array([dr * math.cos(th) - r * math.sin(th), dr * math.sin(th) + r * math.cos(th)])
    return v / np.linalg.norm(v)


def first_half(delta: float, reroute: float | None = None, n: int = 400) -> np.ndarray:
    """Dense points of the first half, from the origin region to the origin region.

    ``reroute=None`` passes through the origin with tangent ``(1, 1)/sqrt 2``;
    otherwise the origin corner is a fillet whose closest approach is ``reroute``.
    """
    lam = delta / 16  # outer fillet size
    a = 0.75 * delta
    ex, ey = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    th_f = lam / a  # arc parameter consumed by each outer fillet
    pieces = []
    if reroute is None:
        lam0 = delta / 16
        bis = np.array([1.0, 1.0]) / math.sqrt(2)
        pieces.append(_hermite(np.zeros(2), lam0 * bis, lam0 * ex, lam0 * ex, n // 8))
    else:
        lam0 = reroute / (3 * math.sqrt(2) / 8)
        # a full origin fillet from (0, lam0) to (-lam0, 0) has its midpoint at
        # lam0 (-3/8, 3/8) with velocity 1.25 lam0 (-1, -1); this lobe owns the half
        # after the (negated) midpoint and the half before the midpoint
        m = lam0 * np.array([-0.375, 0.375])
        vm = 0.625 * lam0 * np.array([-1.0, -1.0])
        pieces.append(_hermite(-m, -vm, lam0 * ex, 0.5 * lam0 * ex, n // 8))
    pieces.append(_line(lam0 * ex, (a - lam) * ex, n // 4))
    p1 = _arc_point(delta, th_f)
    pieces.append(_hermite((a - lam) * ex, lam * ex, p1, lam * _arc_tangent(delta, th_f), n // 16))
    pieces.append(_arc(delta, th_f, math.pi / 2 - th_f, n // 2))
    p2 = _arc_point(delta, math.pi / 2 - th_f)
    pieces.append(_hermite(p2, lam * _arc_tangent(delta, math.pi / 2 - th_f), (a - lam) * ey,
                           -lam * ey, n // 16))
    pieces.append(_line((a - lam) * ey, lam0 * ey, n // 4))
    if reroute is None:
        pieces.append(_hermite(lam0 * ey, -lam0 * ey, np.zeros(2), lam0 * -bis, n // 8))
    else:
        pieces.append(_hermite(lam0 * ey, -0.5 * lam0 * ey, m, vm, n // 8))
    pts = [pieces[0]] + [p[1:] for p in pieces[1:]]
    return np.concatenate(pts)


@dataclass(frozen=True)
class SymmetricLoop:
    delta: float
    rho: float
    rerouted: bool
    path: BasePath
    half_area: float


def _spline_loop(half: np.ndarray):
    full = np.concatenate([half[:-1], -half[:-1]])
    seg = np.linalg.norm(np.diff(np.concatenate([full, full[:1]]), axis=0), axis=-1)
    L = seg.sum()
    u = np.concatenate([[0.0], np.cumsum(seg)]) / L
    half_n = len(half) - 1
    u[half_n:] = 0.5 + u[:half_n + 1]  # exact mirror knots
    closed = np.concatenate([full, full[:1]])
    return CubicSpline(u, closed, bc_type="periodic"), L


def symmetric_loop(delta: float, rho: float, rerouted: bool = False, n: int = 400) -> SymmetricLoop:
    if not 0 < rho < delta / 4:
        raise ValueError("need 0 < rho < delta/4")
    r_cut = 0.5 * (rho + delta / 4) if rerouted else None
    half = first_half(delta, r_cut, n)
    sp, _ = _spline_loop(half)
    dsp = sp.derivative()

    def c(t):
        t = float(t) % 1.0
        return sp(t) if t < 0.5 else -sp(t - 0.5)

    def dc(t):
        t = float(t) % 1.0
        return dsp(t) if t < 0.5 else -dsp(t - 0.5)

    x, y = half[:, 0], half[:, 1]
    half_area = 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))
    name = f"symmetric-loop({'rerouted' if rerouted else 'symmetric'}, delta={delta:g})"
    return SymmetricLoop(delta, rho, rerouted, BasePath(c, dc, name=name), half_area)


def arc_radii(delta: float, n: int = 1001) -> np.ndarray:
    """Radii of the outer arc at interior angles (excluding the two endpoints)."""
    th = np.linspace(0, math.pi / 2, n)[1:-1]
    return arc_radius(th, delta)
