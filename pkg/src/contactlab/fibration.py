"""Contact fibrations, horizontal lifts and monodromy.

Total charts put the fiber coordinates first and the base coordinates last.
Lifts are integrated in the fiber coordinates only, with the base point
pinned to ``path(t)``, so the projection of every trajectory is exact.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import dual as dn
from .chart import ChartManifold, split
from .contact import (ContactForm, IsotropyReport, check_contactomorphism,
                      check_isotropic, tangent_map, verify_contact, volume_from_dense,
                      _sample_points, _solve)
from .forms import _full
from .ode import rk4

DEFAULT_STEPS = 2000


class TransportError(RuntimeError):
    """A lift left the chart domain or a transport precondition failed."""


class ContactFibration:
    """Total contact form over a base chart with a given fiber contact form."""

    def __init__(self, total: ContactForm, fiber: ContactForm, base_chart: ChartManifold):
        if total.dim != fiber.dim + base_chart.dim:
            raise ValueError("total dimension must be fiber + base dimension")
        self.total = total
        self.fiber = fiber
        self.base_chart = base_chart

    def __repr__(self):
        return f"ContactFibration({self.total.name})"

    @property
    def k(self) -> int:
        return self.fiber.dim

    @property
    def base_dim(self) -> int:
        return self.base_chart.dim

    @property
    def fiber_coords(self) -> tuple:
        return tuple(range(self.k))

    @property
    def base_coords(self) -> tuple:
        return tuple(range(self.k, self.total.dim))

    def projection(self, points):
        return np.asarray(points)[..., self.k:]

    def total_point(self, fiber_pts, base_pt):
        fiber_pts = np.asarray(fiber_pts, dtype=float)
        base = np.broadcast_to(np.asarray(base_pt, dtype=float),
                               fiber_pts.shape[:-1] + (self.base_dim,))
        return np.concatenate([fiber_pts, base], axis=-1)

    def restricted_volume(self, points) -> np.ndarray:
        """Contact volume of the total form restricted to the fiber through each point."""
        pts = np.asarray(points, dtype=float)
        x = split(pts)
        k = self.k
        a, om = map(np.asarray, self.total.jet(x))
        a, om = a[..., :k], om[..., :k, :k]
        return volume_from_dense(a, om)

    def validate(self, points, tol: float = 1e-6) -> dict:
        """Fibers are contact and the distribution is transverse to them."""
        pts = np.asarray(points, dtype=float)
        vol = self.restricted_volume(pts)
        med = float(np.median(np.abs(vol)))
        fiber_check = verify_contact(self.fiber, pts[..., :self.k])
        ok = bool(fiber_check.passed and med > 0
                  and np.min(np.abs(vol)) > tol * med
                  and (np.all(vol > 0) or np.all(vol < 0)))
        return {"passed": ok, "fiber_contact": fiber_check.passed,
                "min_restricted_volume": float(np.min(np.abs(vol)))}


# -- horizontal lift ---------------------------------------------------------

def _lift_vertical(fib: ContactFibration, x, u):
    """Fiber part ``v`` of the horizontal lift of base vector ``u`` at ``x``.

    Solves ``[[W_FF^T, -a_F^T], [a_F, 0]] (v, s) = (-W_BF^T u, -a_B . u)``.
    """
    k = fib.k
    d = fib.total.dim
    shape = np.broadcast_shapes(*(np.shape(dn.value(c)) for c in x))
    a, om = fib.total.jet(x)
    if not any(isinstance(c, dn.Dual) for c in u) and _flat_dual(a) and _flat_dual(om):
        ub = np.stack(np.broadcast_arrays(*u), -1)
        ar, ae = dn.parts(a)
        omr, ome = dn.parts(om)
        A, rhs = _lift_system(ar, omr, ub, k, shape)
        if not isinstance(a, dn.Dual) and not isinstance(om, dn.Dual):
            return _solve(A, rhs, "horizontal lift", x)
        Ae, rhse = _lift_system(np.broadcast_to(ae, np.shape(ar)),
                                np.broadcast_to(ome, np.shape(omr)), ub, k, shape)
        Ae[..., k, k] = 0.0
        return _solve(dn.Dual(A, Ae), dn.Dual(rhs, rhse), "horizontal lift", x)
    aF = [_full(a[..., i], shape) for i in range(k)]
    u = [_full(c, shape) for c in u]
    rows = []
    for j in range(k):
        row = [om[..., i, j] for i in range(k)] + [-aF[j]]
        rows.append(row)
    rows.append(aF + [0.0 * aF[0]])
    A = dn.stack_matrix(rows)
    rhs = []
    for j in range(k):
        acc = 0.0
        for b, i in enumerate(range(k, d)):
            acc = acc - om[..., i, j] * u[b]
        rhs.append(_full(acc, shape))
    ab = 0.0
    for b, i in enumerate(range(k, d)):
        ab = ab - a[..., i] * u[b]
    rhs.append(_full(ab, shape))
    sol = _solve(A, dn.stack(rhs, axis=-1), "horizontal lift", x)
    return sol


def _flat_dual(v) -> bool:
    """Plain array, or a dual whose parts are plain arrays."""
    if not isinstance(v, dn.Dual):
        return True
    return not isinstance(v.real, dn.Dual) and not isinstance(v.eps, dn.Dual)


def _lift_system(a, om, u, k, shape):
    """Bordered matrix and right-hand side of the lift; linear in ``(a, om)``."""
    A = np.zeros(tuple(shape) + (k + 1, k + 1))
    A[..., :k, :k] = np.swapaxes(om[..., :k, :k], -1, -2)
    A[..., :k, k] = -a[..., :k]
    A[..., k, :k] = a[..., :k]
    u = np.broadcast_to(u, tuple(shape) + (u.shape[-1],))
    rhs = np.empty(tuple(shape) + (k + 1,))
    rhs[..., :k] = -np.einsum("...i,...ij->...j", u, om[..., k:, :k])
    rhs[..., k] = -np.sum(a[..., k:] * u, axis=-1)
    return A, rhs


def horizontal_lift(fib: ContactFibration, points, u) -> np.ndarray:
    """Full horizontal vector ``(v, u)`` at total ``points`` over base vector ``u``."""
    pts = fib.total.check(points)
    u = np.broadcast_to(np.asarray(u, dtype=float), pts.shape[:-1] + (fib.base_dim,))
    sol = np.asarray(_lift_vertical(fib, split(pts), split(u)))
    return np.concatenate([sol[..., :fib.k], u], axis=-1)


def lift_residual(fib: ContactFibration, points, X) -> tuple:
    """``(max |alpha(X)|, max |d alpha(X, w)|)`` over unit ``w`` in ``TF cap ker alpha``."""
    pts = np.asarray(points, dtype=float)
    x = split(pts)
    k = fib.k
    a, om = map(np.asarray, fib.total.jet(x))
    X = np.asarray(X, dtype=float)
    r1 = np.abs(np.sum(a * X, axis=-1))
    _, _, vt = np.linalg.svd(a[..., None, :k])
    W = vt[..., 1:, :]
    XO = np.einsum("...i,...ij->...j", X, om)[..., :k]
    r2 = np.abs(np.einsum("...j,...mj->...m", XO, W))
    return float(r1.max()), float(r2.max())


# -- paths -------------------------------------------------------------------

@dataclass(frozen=True)
class BasePath:
    """Curve ``t in [0, 1] -> base point``; ``derivative`` optional."""

    curve: Callable
    derivative: Optional[Callable] = None
    immersed: bool = True
    name: str = "path"
    periods: tuple = ()
    h: float = 1e-6

    def __call__(self, t):
        return np.asarray(self.curve(t), dtype=float)

    def velocity(self, t):
        if self.derivative is not None:
            return np.asarray(self.derivative(t), dtype=float)
        h = self.h
        return (np.asarray(self.curve(t + h)) - np.asarray(self.curve(t - h))) / (2 * h)

    def closed(self, tol: float = 1e-12) -> bool:
        diff = self(1.0) - self(0.0)
        for i, p in enumerate(self.periods or (None,) * len(diff)):
            if p is not None:
                diff[i] = (diff[i] + p / 2) % p - p / 2
        return bool(np.all(np.abs(diff) <= tol))

    def reversed(self) -> "BasePath":
        d = self.derivative
        return BasePath(lambda t: self.curve(1.0 - t),
                        None if d is None else (lambda t: -np.asarray(d(1.0 - t))),
                        self.immersed, f"reverse({self.name})", self.periods, self.h)

    def then(self, other: "BasePath") -> "BasePath":
        """Concatenation traversed at double speed."""

        def c(t):
            return self.curve(2 * t) if t <= 0.5 else other.curve(2 * t - 1)

        def dc(t):
            return 2 * (self.velocity(2 * t) if t < 0.5 else other.velocity(2 * t - 1))

        return BasePath(c, dc, self.immersed and other.immersed,
                        f"{self.name}*{other.name}", self.periods or other.periods)

    def length(self, n: int = 2000) -> float:
        t = (np.arange(n) + 0.5) / n
        v = np.array([self.velocity(s) for s in t])
        return float(np.mean(np.linalg.norm(v, axis=-1)))


def constant_path(point) -> BasePath:
    p = np.asarray(point, dtype=float)
    return BasePath(lambda t: p, lambda t: np.zeros_like(p), immersed=False, name="constant")


def segment(p0, p1, name: str = "segment") -> BasePath:
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    return BasePath(lambda t: p0 + t * (p1 - p0), lambda t: p1 - p0, name=name)


# -- lifting -----------------------------------------------------------------

@dataclass
class Trajectory:
    ts: np.ndarray
    fiber: np.ndarray  # (T, ..., k)
    base: np.ndarray  # (T, base_dim)
    stopped: Optional[str] = None

    @property
    def complete(self) -> bool:
        return self.stopped is None

    @property
    def end(self) -> np.ndarray:
        return self.fiber[-1]

    def rows(self) -> np.ndarray:
        """Flat ``(t, base..., fiber...)`` rows for a single start point."""
        f = self.fiber.reshape(len(self.ts), -1)
        return np.column_stack([self.ts, self.base, f])


def _rhs(fib: ContactFibration, path: BasePath):
    def f(t, y):
        b = path(t)
        v = path.velocity(t)
        shape = np.shape(dn.value(y))[:-1]
        base = [np.broadcast_to(b[..., i], shape) for i in range(fib.base_dim)]
        x = split(y) + tuple(base)
        sol = _lift_vertical(fib, x, [v[..., i] for i in range(fib.base_dim)])
        return sol[..., :fib.k]
    return f


def _guard(fib: ContactFibration, path: BasePath):
    chart = fib.total.chart

    def g(t, y):
        yv = np.asarray(dn.value(y))
        if not np.all(np.isfinite(yv)):
            return f"non-finite state at t={t:.6g}"
        if chart is not None:
            pts = fib.total_point(yv, path(t))
            bad = chart.excluded_mask(pts)
            if np.any(bad):
                names = [r.name for r in chart.excluded if np.any(r.contains(pts))]
                return f"entered excluded region {names[0]!r} at t={t:.6g}"
            if not np.all(chart.in_bounds(pts)):
                return f"left the chart bounds at t={t:.6g}"
        return None
    return g


def lift_path(fib: ContactFibration, path: BasePath, p0, steps: int = DEFAULT_STEPS,
              record_every: Optional[int] = 1) -> Trajectory:
    """Horizontal lift of ``path`` through fiber point(s) ``p0``."""
    y0 = np.asarray(p0, dtype=float)
    fib.total.check(fib.total_point(y0, path(0.0)))
    ts, ys, stopped = rk4(_rhs(fib, path), y0, 0.0, 1.0, steps, record_every,
                          guard=_guard(fib, path))
    base = np.array([path(t) for t in ts])
    return Trajectory(np.array(ts), np.array(ys), base, stopped)


def transport(fib: ContactFibration, path: BasePath, p0, steps: int = DEFAULT_STEPS,
              t1: float = 1.0):
    """Endpoint of the lift at time ``t1``; ``p0`` may be dual."""
    from .ode import integrate
    return integrate(_rhs(fib, path), p0, 0.0, t1, steps)


def horizontality_defect(fib: ContactFibration, path: BasePath, traj: Trajectory) -> float:
    """``max |alpha(velocity)|`` with the velocity read off the discrete trajectory.

    Uses a fourth-order central stencil over recorded states (every step), so the
    defect measures the integrator error rather than restating the ODE.
    """
    y = traj.fiber
    if len(y) < 5:
        raise ValueError("need at least 5 recorded states")
    h = traj.ts[1] - traj.ts[0]
    vel = (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * h)
    mid = y[2:-2]
    out = 0.0
    for m in range(len(mid)):
        t = traj.ts[m + 2]
        pts = fib.total_point(mid[m], path(t))
        X = np.concatenate([vel[m], np.broadcast_to(path.velocity(t),
                                                    vel[m].shape[:-1] + (fib.base_dim,))], -1)
        a = np.asarray(fib.total.alpha_at(split(pts)))
        out = max(out, float(np.max(np.abs(np.sum(a * X, axis=-1)))))
    return out


class MonodromyMap:
    """Fiber map ``p -> lift(p)(1)``, memoized per start point.

    Plain array queries are cached under a lock; fills are idempotent, so
    concurrent queries are safe.  Dual inputs bypass the cache.
    """

    def __init__(self, fib: ContactFibration, path: BasePath, steps: int = DEFAULT_STEPS):
        self.fib = fib
        self.path = path
        self.steps = steps
        self._cache: dict = {}
        self._lock = threading.Lock()

    def __call__(self, points):
        if isinstance(points, dn.Dual):
            return transport(self.fib, self.path, points, self.steps)
        pts = np.asarray(points, dtype=float)
        flat = pts.reshape(-1, self.fib.k)
        keys = [row.tobytes() for row in flat]
        with self._lock:
            missing = [i for i, kk in enumerate(keys) if kk not in self._cache]
        if missing:
            traj = lift_path(self.fib, self.path, flat[missing], self.steps, record_every=None)
            if traj.stopped:
                raise TransportError(traj.stopped)
            with self._lock:
                for i, end in zip(missing, traj.end):
                    self._cache.setdefault(keys[i], end.copy())
        with self._lock:
            out = np.stack([self._cache[kk] for kk in keys]) if keys else flat.copy()
        return out.reshape(pts.shape)

    def tangent(self, points) -> np.ndarray:
        return tangent_map(self, points)

    def displacement(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.max(np.abs(self(pts) - pts), axis=-1)

    def cache_size(self) -> int:
        with self._lock:
            return len(self._cache)


def monodromy(fib: ContactFibration, path: BasePath, fiber_points,
              steps: int = DEFAULT_STEPS, require_closed: bool = True):
    """Monodromy map of a closed loop and its conformal report on the fiber form."""
    if require_closed and not path.closed(1e-9):
        raise ValueError(f"path {path.name!r} is not closed")
    m = MonodromyMap(fib, path, steps)
    report = check_contactomorphism(fib.fiber, m, _sample_points(fiber_points))
    return m, report


# -- transport of submanifolds ------------------------------------------------

@dataclass
class SweepReport:
    max_violation: float
    legendrian: bool
    rank_deficient: int
    checkpoints: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)  # (T, M, d) total-chart points
    isotropy: Optional[IsotropyReport] = None

    def isotropic(self, tol: float) -> bool:
        return bool(self.max_violation <= tol and self.rank_deficient == 0)

    def to_dict(self) -> dict:
        return {"max_violation": self.max_violation, "legendrian": self.legendrian,
                "rank_deficient": self.rank_deficient,
                "checkpoints": int(len(self.checkpoints))}


def sweep_tangents(fib: ContactFibration, path: BasePath, immersion: Callable, params,
                   steps: int = DEFAULT_STEPS, checkpoints: int = 11):
    """Points and tangent frames of the swept immersion ``(s, t) -> (m_t(iota(s)), path(t))``.

    Returns ``(ts, points (T, M, d), frames (T, M, d, j + 1))``.
    """
    par = np.asarray(params, dtype=float)
    if par.ndim == 1:
        par = par[:, None]
    j = par.shape[-1]
    every = max(1, steps // (checkpoints - 1))
    seeded = []
    for a in range(j):
        e = np.zeros_like(par)
        e[:, a] = 1.0
        seeded.append(dn.Dual(par, e))
    # one integration per parameter direction carries that direction's tangent
    runs = []
    for s in seeded:
        y0 = immersion(s)
        ts, ys, stopped = rk4(_rhs(fib, path), y0, 0.0, 1.0, steps, every)
        if stopped:
            raise TransportError(stopped)
        runs.append(ys)
    if not seeded:
        y0 = np.asarray(immersion(par), dtype=float)
        ts, ys, _ = rk4(_rhs(fib, path), y0, 0.0, 1.0, steps, every)
        runs.append(ys)
    pts, frames = [], []
    for n, t in enumerate(ts):
        y = np.asarray(dn.value(runs[0][n]))
        b = path(t)
        total = fib.total_point(y, b)
        cols = []
        for a in range(j):
            dy = np.asarray(dn.tangent(runs[a][n], like=y))
            cols.append(np.concatenate([dy, np.zeros(dy.shape[:-1] + (fib.base_dim,))], -1))
        cols.append(horizontal_lift(fib, total, path.velocity(t)))
        pts.append(total)
        frames.append(np.stack(cols, axis=-1))
    return np.array(ts), np.array(pts), np.array(frames)


def transport_submanifold(fib: ContactFibration, path: BasePath, immersion: Callable, params,
                          steps: int = DEFAULT_STEPS, checkpoints: int = 11,
                          tol: float = 1e-6) -> SweepReport:
    """Sweep an isotropic immersion of the start fiber along ``path``."""
    start = check_isotropic(fib.fiber, immersion, params)
    if not start.isotropic(tol):
        raise TransportError(f"start immersion is not isotropic: max |alpha| = "
                             f"{start.max_violation:.3g} (tol {tol:g}), "
                             f"rank-deficient points: {start.rank_deficient}")
    ts, pts, frames = sweep_tangents(fib, path, immersion, params, steps, checkpoints)
    a = np.asarray(fib.total.alpha_at(split(pts)))
    vals = np.abs(np.einsum("tmi,tmij->tmj", a, frames))
    sv = np.linalg.svd(frames, compute_uv=False)
    deficient = int(np.sum(sv[..., -1] <= 1e-9 * sv[..., 0]))
    dimN = frames.shape[-1] - 1
    legendrian = dimN + 1 == fib.total.n - 1
    return SweepReport(float(vals.max()), legendrian, deficient, ts, pts, start)
