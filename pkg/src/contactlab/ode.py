"""Fixed-step classic Runge-Kutta integration.

States may be numpy arrays or duals; only ``+`` and scalar ``*`` are used, so
forward-mode tangents propagate through a whole integration.
"""

from __future__ import annotations

from typing import Callable, Optional


def rk4_step(f: Callable, t: float, y, h: float):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + (0.5 * h) * k1)
    k3 = f(t + 0.5 * h, y + (0.5 * h) * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4(f: Callable, y0, t0: float, t1: float, steps: int,
        record_every: Optional[int] = None, guard: Optional[Callable] = None):
    """Integrate ``y' = f(t, y)`` from ``t0`` to ``t1`` in ``steps`` steps.

    Returns ``(ts, ys, stopped)``.  ``ts``/``ys`` hold the recorded states
    (always including the first and last); ``stopped`` is ``None`` or the
    message returned by ``guard(t, y)`` when it asked to stop early.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = (t1 - t0) / steps
    ts, ys = [t0], [y0]
    y = y0
    for k in range(steps):
        t = t0 + k * h
        y = rk4_step(f, t, y, h)
        t_next = t0 + (k + 1) * h
        if guard is not None:
            msg = guard(t_next, y)
            if msg:
                ts.append(t_next)
                ys.append(y)
                return ts, ys, msg
        if record_every and (k + 1) % record_every == 0 and k + 1 < steps:
            ts.append(t_next)
            ys.append(y)
    ts.append(t1)
    ys.append(y)
    return ts, ys, None


def integrate(f: Callable, y0, t0: float, t1: float, steps: int):
    """Final state only."""
    h = (t1 - t0) / steps
    y = y0
    for k in range(steps):
        y = rk4_step(f, t0 + k * h, y, h)
    return y
