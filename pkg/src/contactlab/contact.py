"""Contact forms: contactness, Reeb and Hamiltonian fields, map checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import dual as dn
from .chart import ChartManifold, join, split
from .forms import (DEFAULT_BACKEND, DiffBackend, DifferentialForm, ScalarField,
                    VectorField, exterior_derivative, jet1, wedge, _batch_shape, _full)
from .sampling import SampleSet

TOL_CONTACT = 1e-6
TOL_REEB = 1e-8
TOL_HAM = 1e-8
TOL_FD = 1e-5


class SingularSystemError(ArithmeticError):
    """The defining linear system is singular at some sample point."""

    def __init__(self, what: str, point):
        self.point = np.asarray(point, dtype=float)
        super().__init__(f"{what}: singular system at {self.point.tolist()} "
                         "(contact condition fails there)")


class ContactForm:
    """A 1-form on an odd-dimensional chart, with its differential cached."""

    def __init__(self, alpha: DifferentialForm, chart: Optional[ChartManifold] = None,
                 orientation_sign: int = 1, name: str = "",
                 backend: DiffBackend = DEFAULT_BACKEND):
        if alpha.degree != 1:
            raise ValueError("a contact form has degree 1")
        if alpha.dim % 2 != 1:
            raise ValueError(f"contact forms live in odd dimension, got {alpha.dim}")
        if orientation_sign not in (1, -1):
            raise ValueError("orientation_sign must be +1 or -1")
        self.alpha = alpha
        self.chart = chart if chart is not None else alpha.chart
        self.orientation_sign = orientation_sign
        self.name = name or alpha.name
        self.backend = backend
        self.dalpha = exterior_derivative(alpha, backend)

    def __repr__(self):
        return f"ContactForm({self.name or '?'}, dim={self.dim})"

    @property
    def dim(self) -> int:
        return self.alpha.dim

    @property
    def n(self) -> int:
        return (self.dim + 1) // 2

    def alpha_at(self, x):
        return self.alpha.dense(x)

    def omega_at(self, x):
        return self.dalpha.dense(x)

    def jet(self, x):
        """``(alpha, d alpha)`` dense at coordinate tuple ``x``."""
        return jet1(self.alpha, self.dalpha, x)

    def check(self, points) -> np.ndarray:
        pts = np.asarray(dn.value(points), dtype=float)
        if self.chart is not None:
            self.chart.check(pts)
        return pts

    def __call__(self, points, vectors) -> np.ndarray:
        """``alpha_p(v)`` for arrays of points and vectors."""
        pts = self.check(points)
        a = np.asarray(self.alpha_at(split(pts)))
        return np.sum(a * np.asarray(vectors, dtype=float), axis=-1)

    @cached_property
    def reeb(self) -> "ReebField":
        return reeb_field(self)


def contact_volume(cf: ContactForm, points) -> np.ndarray:
    """``alpha ^ (d alpha)^(n-1)`` on the chart's coordinate frame."""
    pts = cf.check(points)
    if pts.shape[-1] != cf.dim:
        raise ValueError(f"expected {cf.dim} coordinates")
    a, om = cf.jet(split(pts))
    return volume_from_dense(np.asarray(a), np.asarray(om))


def volume_from_dense(a: np.ndarray, om: np.ndarray) -> np.ndarray:
    """``a ^ om^(n-1)`` on the coordinate frame from pointwise tensors.

    ``a`` is ``(..., d)`` and ``om`` the antisymmetric ``(..., d, d)`` matrix.
    """
    d = a.shape[-1]
    shape = a.shape[:-1]
    a1 = DifferentialForm(d, 1, {(i,): (lambda _x, v=a[..., i]: v) for i in range(d)})
    w = DifferentialForm(d, 2, {(i, j): (lambda _x, v=om[..., i, j]: v)
                                for i in range(d) for j in range(i + 1, d)})
    top = a1
    for _ in range((d - 1) // 2):
        top = wedge(top, w)
    return np.broadcast_to(top.coefficient(tuple(range(d)), ()), shape).copy()


@dataclass
class ContactCheck:
    passed: bool
    min_abs_volume: float
    argmin: list
    median_abs_volume: float
    sign: int
    sign_consistent: bool
    count: int
    tol: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _sample_points(sampler) -> np.ndarray:
    if isinstance(sampler, SampleSet):
        return sampler.points()
    return np.asarray(sampler, dtype=float)


def verify_contact(cf: ContactForm, sampler, tol: float = TOL_CONTACT) -> ContactCheck:
    """Pass iff ``min |vol| > tol * median |vol|`` and the volume keeps one sign.

    The sign requirement makes the check see a sign change that happens to
    avoid every sample point exactly.
    """
    pts = _sample_points(sampler)
    if pts.size == 0:
        raise ValueError("empty sample set")
    vol = np.asarray(contact_volume(cf, pts)).reshape(-1)
    flat = pts.reshape(-1, cf.dim)
    absv = np.abs(vol)
    k = int(np.argmin(absv))
    med = float(np.median(absv))
    positive = vol > 0
    consistent = bool(np.all(positive) or np.all(vol < 0))
    passed = bool(med > 0 and absv[k] > tol * med and consistent)
    sign = int(np.sign(np.median(vol))) * cf.orientation_sign
    return ContactCheck(passed, float(absv[k]), flat[k].tolist(), med, sign,
                        consistent, int(vol.size), tol)


def _bordered(a_comps, omega_rows, d):
    """``[[Omega^T, alpha^T], [alpha, 0]]`` as a nested list."""
    zero = 0.0 * a_comps[0]
    rows = [[omega_rows[i][j] for i in range(d)] + [a_comps[j]] for j in range(d)]
    rows.append(list(a_comps) + [zero])
    return rows


def _bordered_plain(a, om, d, shape):
    A = np.zeros(tuple(shape) + (d + 1, d + 1))
    A[..., :d, :d] = np.swapaxes(om, -1, -2)
    A[..., :d, d] = a
    A[..., d, :d] = a
    return A


def _system(cf: ContactForm, x):
    d = cf.dim
    shape = _batch_shape(x)
    a, om = cf.jet(x)
    if not isinstance(a, dn.Dual) and not isinstance(om, dn.Dual):
        return _bordered_plain(a, om, d, shape), [a[..., i] for i in range(d)], shape
    if all(not isinstance(p, dn.Dual) for v in (a, om) for p in dn.parts(v)):
        ar, ae = dn.parts(a)
        omr, ome = dn.parts(om)
        A = dn.Dual(_bordered_plain(ar, omr, d, shape),
                    _bordered_plain(np.broadcast_to(ae, np.shape(ar)),
                                    np.broadcast_to(ome, np.shape(omr)), d, shape))
        return A, [a[..., i] for i in range(d)], shape
    a_comps = [_full(a[..., i], shape) for i in range(d)]
    om_rows = [[om[..., i, j] for j in range(d)] for i in range(d)]
    return dn.stack_matrix(_bordered(a_comps, om_rows, d)), a_comps, shape


def _solve(A, b, what: str, x):
    try:
        sol = dn.solve(A, b)
    except np.linalg.LinAlgError:
        raise SingularSystemError(what, _first_bad(A, x)) from None
    bad = ~np.all(np.isfinite(dn.value(sol)), axis=-1)
    if np.any(bad):
        raise SingularSystemError(what, _first_bad(A, x))
    return sol


def _first_bad(A, x):
    M = np.asarray(dn.value(A))
    pts = np.asarray(dn.value(join([np.broadcast_to(dn.value(c), M.shape[:-2]) for c in x])))
    flat = M.reshape(-1, *M.shape[-2:])
    cond = np.array([np.linalg.cond(m) for m in flat])
    return pts.reshape(-1, pts.shape[-1])[int(np.argmax(cond))] if pts.ndim > 1 else pts


def reeb_components(cf: ContactForm, x) -> tuple:
    A, _, shape = _system(cf, x)
    rhs = np.zeros(shape + (cf.dim + 1,))
    rhs[..., cf.dim] = 1.0
    sol = _solve(A, rhs, "reeb field", x)
    return tuple(sol[..., i] for i in range(cf.dim))


@dataclass
class ReebField:
    field: VectorField
    source: ContactForm

    def __call__(self, points) -> np.ndarray:
        self.source.check(points)
        return self.field(points)

    def components(self, x):
        return self.field.components(x)

    def residual(self, points) -> tuple:
        """``(max |alpha(R) - 1|, max |i_R d alpha|)`` at ``points``."""
        return defining_residual(self.source, points, self(points))


def defining_residual(cf: ContactForm, points, R) -> tuple:
    pts = np.asarray(points, dtype=float)
    x = split(pts)
    a, om = map(np.asarray, cf.jet(x))
    R = np.asarray(R, dtype=float)
    r1 = np.abs(np.sum(a * R, axis=-1) - 1.0)
    r2 = np.abs(np.einsum("...i,...ij->...j", R, om))
    return float(np.max(r1)), float(np.max(r2))


def reeb_field(cf: ContactForm) -> ReebField:
    vf = VectorField(lambda x: reeb_components(cf, x), cf.dim, name=f"R[{cf.name}]")
    return ReebField(vf, cf)


def _as_scalar(H) -> ScalarField:
    if isinstance(H, ScalarField):
        return H
    if callable(H):
        return ScalarField(H)
    c = float(H)
    return ScalarField(lambda x: c, gradient=lambda x: [0.0] * len(x))


def hamiltonian_components(cf: ContactForm, H, x) -> tuple:
    """Solve ``i_X alpha = H`` and ``i_X d alpha = (d_R H) alpha - dH``."""
    H = _as_scalar(H)
    d = cf.dim
    A, a_comps, shape = _system(cf, x)
    rhs_b = np.zeros(shape + (d + 1,))
    rhs_b[..., d] = 1.0
    R = _solve(A, rhs_b, "reeb field", x)
    grad = [_full(g, shape) for g in H.grad(x, cf.backend)]
    dRH = 0.0
    for i in range(d):
        dRH = dRH + R[..., i] * grad[i]
    rhs = [dRH * a_comps[j] - grad[j] for j in range(d)] + [_full(H(x), shape)]
    sol = _solve(A, dn.stack(rhs, axis=-1), "hamiltonian field", x)
    return tuple(sol[..., i] for i in range(d))


def hamiltonian_field(cf: ContactForm, H) -> VectorField:
    H = _as_scalar(H)
    return VectorField(lambda x: hamiltonian_components(cf, H, x), cf.dim,
                       name=f"X[{H.name or 'H'}]")


def hamiltonian_residual(cf: ContactForm, H, points) -> tuple:
    """``(max |alpha(X) - H|, max |i_X d alpha - (d_R H) alpha + dH|)``."""
    H = _as_scalar(H)
    pts = np.asarray(points, dtype=float)
    x = split(pts)
    shape = pts.shape[:-1]
    X = np.asarray(hamiltonian_field(cf, H)(pts))
    R = np.asarray(reeb_field(cf)(pts))
    a, om = map(np.asarray, cf.jet(x))
    dH = np.stack([np.broadcast_to(g, shape) for g in H.grad(x, cf.backend)], axis=-1)
    h = np.broadcast_to(H(x), shape)
    r1 = np.abs(np.sum(a * X, axis=-1) - h)
    dRH = np.sum(R * dH, axis=-1)
    r2 = np.abs(np.einsum("...i,...ij->...j", X, om) - (dRH[..., None] * a - dH))
    return float(np.max(r1)), float(np.max(r2))


# -- maps ------------------------------------------------------------------

def tangent_map(mapping: Callable, points, fallback_h: float = 1e-6) -> np.ndarray:
    """Jacobian ``(N, d_out, d_in)`` of an array map via dual seeds.

    All ``d`` seed directions travel in one call, stacked along the batch
    axis.  Falls back to central differences if the map cannot carry duals.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, np.shape(points)[-1])
    n, d = pts.shape
    try:
        rep = np.tile(pts, (d, 1))
        eps = np.repeat(np.eye(d), n, axis=0)
        out = mapping(dn.Dual(rep, eps))
        tan = np.asarray(dn.tangent(out, like=dn.value(out)))
        cols = [tan[k * n:(k + 1) * n] for k in range(d)]
    except (TypeError, AttributeError):
        cols = []
        for k in range(d):
            step = fallback_h * np.maximum(1.0, np.abs(pts[:, k:k + 1]))
            e = np.zeros_like(pts)
            e[:, k:k + 1] = step
            cols.append((np.asarray(mapping(pts + e)) - np.asarray(mapping(pts - e))) / (2 * step))
    return np.stack(cols, axis=-1)


@dataclass
class ConformalReport:
    """Kernel preservation and conformal factor of a map at sample points."""

    max_kernel_violation: float
    lambdas: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    min_lambda: float = 0.0
    max_lambda_deviation: float = 0.0

    @property
    def conformal_factor_samples(self) -> list:
        return list(zip(self.points.tolist(), self.lambdas.tolist()))

    def accepted(self, tol: float) -> bool:
        return bool(self.max_kernel_violation <= tol and self.min_lambda > 0)

    def to_dict(self) -> dict:
        return {"max_kernel_violation": self.max_kernel_violation,
                "min_lambda": self.min_lambda,
                "max_lambda_deviation": self.max_lambda_deviation,
                "count": int(len(self.lambdas))}


def kernel_basis(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis ``(N, d-1, d)`` of ``ker a`` for covectors ``(N, d)``."""
    _, _, vt = np.linalg.svd(a[..., None, :])
    return vt[..., 1:, :]


def check_contactomorphism(cf: ContactForm, mapping: Callable, points,
                           tangent: Optional[Callable] = None,
                           target: Optional[ContactForm] = None) -> ConformalReport:
    """Compare ``m^* alpha`` with ``alpha`` at ``points``.

    ``mapping`` acts on arrays ``(N, d)``; its tangent map comes from
    ``tangent(points)`` when given, otherwise from dual seeding.
    """
    target = target or cf
    pts = cf.check(_sample_points(points)).reshape(-1, cf.dim)
    image = np.asarray(dn.value(mapping(pts)))
    target.check(image)
    Dm = tangent(pts) if tangent is not None else tangent_map(mapping, pts)
    a_src = np.asarray(cf.alpha_at(split(pts)))
    a_dst = np.asarray(target.alpha_at(split(image)))
    pulled = np.einsum("ni,nij->nj", a_dst, Dm)
    W = kernel_basis(a_src)
    viol = np.abs(np.einsum("nj,nkj->nk", pulled, W))
    lam = np.sum(pulled * a_src, axis=-1) / np.sum(a_src * a_src, axis=-1)
    return ConformalReport(float(viol.max()) if viol.size else 0.0, lam, pts,
                           float(lam.min()), float(np.max(np.abs(lam - 1.0))))


@dataclass
class IsotropyReport:
    max_violation: float
    per_direction: list
    rank_deficient: int
    count: int

    def isotropic(self, tol: float) -> bool:
        return bool(self.max_violation <= tol and self.rank_deficient == 0)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def check_isotropic(cf: ContactForm, immersion: Callable, params, rank_tol: float = 1e-9,
                    tangent: Optional[Callable] = None) -> IsotropyReport:
    """Max ``|alpha(d iota(e_j))|`` over parameter samples and directions."""
    par = np.asarray(_sample_points(params), dtype=float)
    if par.ndim == 1:
        par = par[:, None]
    pts = np.asarray(dn.value(immersion(par)))
    cf.check(pts)
    J = tangent(par) if tangent is not None else tangent_map(immersion, par)
    a = np.asarray(cf.alpha_at(split(pts)))
    vals = np.abs(np.einsum("ni,nij->nj", a, J))
    sv = np.linalg.svd(J, compute_uv=False)
    scale = np.maximum(sv[..., 0], 1e-300)
    deficient = int(np.sum(sv[..., -1] <= rank_tol * scale))
    return IsotropyReport(float(vals.max()), vals.max(axis=0).tolist(), deficient, len(par))


def flow(X: VectorField, points, t: float, steps: int = 200):
    """Time-``t`` RK4 flow of ``X`` on an array of points (dual-capable)."""
    from .ode import integrate

    def rhs(_t, y):
        return join(X.components(split(y)))

    return integrate(rhs, points, 0.0, t, steps)
