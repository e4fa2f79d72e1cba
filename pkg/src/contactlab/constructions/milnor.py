"""Milnor-type checks for ``g = z1 conj(z2) + z1 z3 + conj(z2) z3`` and ``e = (z1, conj z2, z3)``.

Complex coordinates are real pairs ``(x_j, y_j)``; Wirtinger derivatives
``d/d conj(z) = (d/dx + i d/dy) / 2`` are assembled from dual-number partials
of the complex-valued evaluators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import dual as dn
from ..forms import _seeded

LINK_MARGIN = 1e-2


def _c(x, j):
    """``j``-th complex coordinate from the real tuple."""
    return x[2 * j] + 1j * x[2 * j + 1]


def _conj(z):
    if isinstance(z, dn.Dual):
        return dn.Dual(_conj(z.real), _conj(z.eps))
    return np.conj(z)


def g_poly(x):
    z1, z2, z3 = _c(x, 0), _c(x, 1), _c(x, 2)
    w2 = _conj(z2)
    return z1 * w2 + z1 * z3 + w2 * z3


def e_map(x):
    """``(z1, conj z2, z3)`` as a real tuple."""
    return (x[0], x[1], x[2], -x[3], x[4], x[5])


def g_of_e(x):
    return g_poly(e_map(x))


def f_of(x):
    """``z1 conj(z2)`` on ``C^2``."""
    return _c(x, 0) * _conj(_c(x, 1))


def wirtinger_dbar(h, x) -> np.ndarray:
    """``(d h / d conj z_j)_j`` stacked on the last axis."""
    out = []
    for j in range(len(x) // 2):
        dx = dn.tangent(h(_seeded(x, 2 * j)))
        dy = dn.tangent(h(_seeded(x, 2 * j + 1)))
        out.append(0.5 * (dx + 1j * dy))
    return np.stack(out, -1)


def wirtinger_d(h, x) -> np.ndarray:
    out = []
    for j in range(len(x) // 2):
        dx = dn.tangent(h(_seeded(x, 2 * j)))
        dy = dn.tangent(h(_seeded(x, 2 * j + 1)))
        out.append(0.5 * (dx - 1j * dy))
    return np.stack(out, -1)


def complex_hessian(h, x) -> np.ndarray:
    """``d^2 h / dz_i dz_j`` for holomorphic ``h`` (nested duals)."""
    m = len(x) // 2
    H = np.empty(np.shape(dn.value(x[0])) + (m, m), dtype=complex)
    for i in range(m):
        def dh_i(y, i=i):
            # holomorphic: dh/dz_i = dh/dx_i
            return h(_seeded(y, 2 * i)).eps
        for j in range(m):
            H[..., i, j] = dn.tangent(dh_i(_seeded(x, 2 * j)))
    return H


@dataclass
class MilnorData:
    eps_sphere: float = 1.0
    delta_tube: float = 0.05
    link_margin: float = LINK_MARGIN


@dataclass
class MilnorReport:
    dbar_residual: float
    g_dbar_norm: float
    hessian: list
    hessian_det: complex
    submersion_min_rank_value: float
    submersion_rank_ok: bool
    samples_used: int
    samples_excluded: int
    restriction_residual: float
    tube_min_singular_value: float
    tube_points: int
    extra: dict = field(default_factory=dict)

    def passed(self, dbar_tol: float = 1e-12) -> bool:
        return bool(self.dbar_residual <= dbar_tol
                    and abs(self.hessian_det - 2) <= 1e-12
                    and self.submersion_rank_ok
                    and self.restriction_residual == 0.0
                    and self.tube_min_singular_value > 0)

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["hessian_det"] = [float(np.real(self.hessian_det)), float(np.imag(self.hessian_det))]
        d["passed"] = self.passed()
        return d


def sphere_samples(count: int, dim: int = 6, radius: float = 1.0, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(count, dim))
    return radius * v / np.linalg.norm(v, axis=-1, keepdims=True)


def _arg_gradient(h, x) -> np.ndarray:
    """Real gradient of ``arg h = Im log h``: ``Im(dh / h)`` per real coordinate."""
    hv = np.asarray(dn.value(h(x)))
    cols = [np.imag(dn.tangent(h(_seeded(x, i))) / hv) for i in range(len(x))]
    return np.stack(cols, -1)


def submersion_check(h, pts: np.ndarray, margin: float) -> tuple:
    """Norm of ``d arg h`` projected to the sphere's tangent space, off the link."""
    x = tuple(pts[:, i] for i in range(pts.shape[1]))
    hv = np.abs(np.asarray(h(x)))
    keep = hv > margin
    p = pts[keep]
    xk = tuple(p[:, i] for i in range(p.shape[1]))
    gr = _arg_gradient(h, xk)
    n = p / np.linalg.norm(p, axis=-1, keepdims=True)
    tang = gr - np.sum(gr * n, -1, keepdims=True) * n
    return np.linalg.norm(tang, axis=-1), int(keep.sum()), int((~keep).sum())


def tube_points(h, count: int, delta: float, radius: float, seed: int = 0) -> np.ndarray:
    """Points with ``|h| = delta`` inside the ball, found by radial scaling of random directions.

    Uses ``|h(s u)| = s^2 |h(u)|`` for the quadratic ``h``.
    """
    u = sphere_samples(4 * count, radius=1.0, seed=seed + 1)
    hu = np.abs(np.asarray(h(tuple(u[:, i] for i in range(u.shape[1])))))
    s = np.sqrt(delta / np.maximum(hu, 1e-300))
    ok = (hu > 0) & (s < radius)
    return (u[ok] * s[ok, None])[:count]


def tube_transversality(h, pts: np.ndarray) -> np.ndarray:
    """Smallest singular value of ``[Re dh; Im dh; d|z|^2]`` (rank 3 = transverse)."""
    x = tuple(pts[:, i] for i in range(pts.shape[1]))
    rows = np.stack([dn.tangent(h(_seeded(x, i))) for i in range(len(x))], -1)
    M = np.stack([np.real(rows), np.imag(rows), 2 * pts], -2)
    return np.linalg.svd(M, compute_uv=False)[..., -1]


def milnor_checks(md: MilnorData = MilnorData(), count: int = 1000, seed: int = 0) -> MilnorReport:
    pts = sphere_samples(count, radius=md.eps_sphere, seed=seed)
    x = tuple(pts[:, i] for i in range(6))
    dbar = wirtinger_dbar(g_of_e, x)
    g_dbar = wirtinger_dbar(g_poly, x)
    Hm = complex_hessian(g_of_e, tuple(np.zeros(1) for _ in range(6)))[0]
    det = np.linalg.det(Hm)
    tn, used, excluded = submersion_check(g_poly, pts, md.link_margin)
    # restriction to C^2 x {0}: exact equality with z1 conj(z2)
    p2 = pts.copy()
    p2[:, 4:] = 0.0
    x2 = tuple(p2[:, i] for i in range(6))
    restr = float(np.max(np.abs(np.asarray(g_poly(x2)) - np.asarray(f_of(x2[:4])))))
    tp = tube_points(g_of_e, count, md.delta_tube, md.eps_sphere, seed)
    sv = tube_transversality(g_of_e, tp)
    return MilnorReport(
        dbar_residual=float(np.max(np.abs(dbar))),
        g_dbar_norm=float(np.min(np.linalg.norm(g_dbar, axis=-1))),
        hessian=np.real(Hm).tolist(),
        hessian_det=complex(det),
        submersion_min_rank_value=float(tn.min()) if len(tn) else float("nan"),
        submersion_rank_ok=bool(len(tn) and tn.min() > 0),
        samples_used=used, samples_excluded=excluded,
        restriction_residual=restr,
        tube_min_singular_value=float(sv.min()) if len(sv) else 0.0,
        tube_points=int(len(tp)),
    )
