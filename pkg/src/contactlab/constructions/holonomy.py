"""Generating Hamiltonians of fiber transport and their scaling in a parameter.

Along a lift, the fiber part ``v`` of the horizontal vector field is a contact
vector field on the fiber; its generating Hamiltonian is ``H_t = alpha_F(v)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .. import dual as dn
from ..chart import split
from ..fibration import BasePath, ContactFibration, _lift_vertical, lift_path
from ..forms import _seeded


def generating_hamiltonian(fib: ContactFibration, fiber_pts, base_pt, u):
    """``H = alpha_F(v)`` at fiber points over ``base_pt`` with base velocity ``u``.

    ``fiber_pts`` may be dual (for derivatives in fiber directions).
    """
    k = fib.k
    shape = np.shape(dn.value(fiber_pts[0]))
    base = tuple(np.broadcast_to(np.float64(b), shape) for b in base_pt)
    x = tuple(fiber_pts) + base
    sol = _lift_vertical(fib, x, [float(c) for c in u])
    a = fib.total.alpha_at(x)
    H = 0.0
    for i in range(k):
        H = H + a[..., i] * sol[..., i]
    return H


def hamiltonian_jets(fib: ContactFibration, fiber_pts, base_pt, u, order: int = 1,
                     h: float = 1e-5) -> tuple:
    """``(|H|, |dH|, |d^2 H|)`` at each point; the Hessian uses central differences
    of the exact dual gradient."""
    pts = np.asarray(fiber_pts, dtype=float)
    x = split(pts)
    k = fib.k

    def grad(xx):
        return np.stack([dn.tangent(generating_hamiltonian(fib, _seeded(xx, i), base_pt, u))
                         for i in range(k)], -1)

    H = np.asarray(generating_hamiltonian(fib, x, base_pt, u), dtype=float)
    g = grad(x)
    out = [np.abs(H), np.linalg.norm(g, axis=-1)]
    if order >= 2:
        cols = []
        for i in range(k):
            xp = tuple(c + h if j == i else c for j, c in enumerate(x))
            xm = tuple(c - h if j == i else c for j, c in enumerate(x))
            cols.append((grad(xp) - grad(xm)) / (2 * h))
        hess = np.stack(cols, -1)
        out.append(np.linalg.norm(hess, axis=(-2, -1), ord=2))
    return tuple(out)


def hamiltonian_norms(fib: ContactFibration, path: BasePath, fiber_pts, steps: int = 200,
                      checkpoints: int = 10, order: int = 1) -> dict:
    """Sup of ``|H_t|``, ``|dH_t|`` (and ``|d^2 H_t|``) along the lifts of ``fiber_pts``."""
    every = max(1, steps // checkpoints)
    traj = lift_path(fib, path, fiber_pts, steps, record_every=every)
    if not traj.complete:
        raise RuntimeError(traj.stopped)
    sups = np.zeros(order + 1)
    for t, y in zip(traj.ts, traj.fiber):
        jets = hamiltonian_jets(fib, y, path(t), path.velocity(t), order)
        sups = np.maximum(sups, [float(np.max(j)) for j in jets])
    names = ("sup_H", "sup_dH", "sup_d2H")
    return {names[i]: float(sups[i]) for i in range(order + 1)}


@dataclass
class HolonomyFit:
    params: list
    norms: list  # per parameter, the measured C^order norm
    slope: float
    residual: float
    tol: float
    details: list = field(default_factory=list)

    @property
    def linear(self) -> bool:
        return bool(np.isfinite(self.slope) and self.residual <= self.tol)

    def to_dict(self) -> dict:
        return {"params": self.params, "norms": self.norms, "slope": self.slope,
                "residual": self.residual, "tol": self.tol, "linear": self.linear,
                "details": self.details}


def fit_through_origin(x: Sequence[float], y: Sequence[float]) -> tuple:
    """Least-squares ``y = M x``; relative residual ``|y - M x| / |y|`` (0 if ``y = 0``)."""
    x = np.abs(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    M = float(x @ y / (x @ x))
    ny = np.linalg.norm(y)
    res = float(np.linalg.norm(y - M * x) / ny) if ny > 0 else 0.0
    return M, res


def estimate_holonomy_bound(build: Callable[[float], ContactFibration], params: Sequence[float],
                            path: BasePath, fiber_pts, steps: int = 200, order: int = 1,
                            tol: float = 0.10, checkpoints: int = 10) -> HolonomyFit:
    """Sweep the parameter, measure the ``C^order`` norm of ``H_t`` and fit it linearly.

    The norm used for the fit is the max over the orders ``0..order``.
    """
    details, norms = [], []
    for p in params:
        d = hamiltonian_norms(build(p), path, fiber_pts, steps, checkpoints, order)
        d["param"] = float(p)
        details.append(d)
        norms.append(max(v for key, v in d.items() if key.startswith("sup")))
    M, res = fit_through_origin(params, norms)
    return HolonomyFit([float(p) for p in params], norms, M, res, tol, details)
