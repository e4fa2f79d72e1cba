"""Pointwise exterior calculus on a single chart.

Fields and forms are evaluators over *coordinate tuples*: a callable receives
``x = (x_0, ..., x_{d-1})`` where each entry is a float, an array of sample
values or a :class:`~contactlab.dual.Dual`.  Writing coefficients with
:mod:`contactlab.dual` functions makes them differentiable by the default
backend.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import dual as dn
from .chart import ChartManifold, join, split
from .ode import integrate

Index = Tuple[int, ...]


@dataclass(frozen=True)
class DiffBackend:
    """Differentiation of coordinate-tuple functions.

    ``dual`` uses forward-mode dual numbers (exact to rounding on closed-form
    coefficients); ``central`` uses central differences with step
    ``h * max(1, |x_i|)`` and works on black-box callables.
    """

    mode: str = "dual"
    h: float = 1e-5

    def __post_init__(self):
        if self.mode not in ("dual", "central"):
            raise ValueError(f"unknown backend mode {self.mode!r}")
        if not self.h > 0:
            raise ValueError("step h must be positive")

    def partial(self, f: Callable, x: Sequence, i: int):
        xs = list(x)
        if self.mode == "dual":
            return dn.tangent(f(_seeded(x, i)), like=dn.value(x[i]))
        hi = self.h * np.maximum(1.0, np.abs(dn.value(xs[i])))
        up = list(xs)
        up[i] = xs[i] + hi
        dw = list(xs)
        dw[i] = xs[i] - hi
        return (f(tuple(up)) - f(tuple(dw))) / (2.0 * hi)

    def gradient(self, f: Callable, x: Sequence) -> list:
        if self.mode == "dual" and _plain(x):
            return self.jet(f, x)[1]
        return [self.partial(f, x, i) for i in range(len(x))]

    def jet(self, f: Callable, x: Sequence):
        """``(f(x), gradient)``; one evaluation in dual mode on plain inputs."""
        if self.mode == "dual" and _plain(x):
            shape = _batch_shape(x)
            return dn.gradient_parts(f(dn.gradient_seed(tuple(x))), len(x), shape)
        return f(tuple(x)), [self.partial(f, x, i) for i in range(len(x))]

    def jacobian(self, f: Callable, x: Sequence) -> list:
        """``J[i][j] = d f_i / d x_j`` for a vector-valued ``f``."""
        cols = []
        for j in range(len(x)):
            if self.mode == "dual":
                out = f(_seeded(x, j))
                cols.append([dn.tangent(o, like=dn.value(x[j])) for o in out])
            else:
                cols.append(self.partial(lambda y: dn.stack(list(f(y)), axis=0), x, j))
        if self.mode == "central":
            cols = [[c[i] for i in range(len(c))] for c in cols]
        return [[cols[j][i] for j in range(len(x))] for i in range(len(cols[0]))]


DEFAULT_BACKEND = DiffBackend()


def _plain(x) -> bool:
    return not any(isinstance(c, dn.Dual) for c in x)


def _seeded(x: Sequence, i: int) -> tuple:
    """Open a fresh perturbation layer along coordinate ``i``.

    Every coordinate is lifted to the new layer so that inputs which are
    already dual (nested differentiation) never mix perturbations.
    """
    return tuple(dn.seed(c) if j == i else dn.Dual(c, 0.0) for j, c in enumerate(x))


def _batch_shape(x) -> tuple:
    shapes = [np.shape(dn.value(c)) for c in x]
    return np.broadcast_shapes(*shapes) if shapes else ()


def _call(c, x):
    return c(x) if callable(c) else c


def _full(v, shape):
    return dn.broadcast(v, shape) if np.shape(dn.value(v)) != shape else v


class ScalarField:
    """Function on a chart with an optional analytic gradient."""

    def __init__(self, func: Callable, gradient: Optional[Callable] = None, name: str = ""):
        self.func = func
        self.gradient = gradient
        self.name = name

    def __call__(self, x):
        return self.func(x)

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.asarray(_full(self.func(split(pts)), pts.shape[:-1]))

    def grad(self, x, backend: DiffBackend = DEFAULT_BACKEND) -> list:
        if self.gradient is not None:
            return list(self.gradient(x))
        return backend.gradient(self.func, x)

    def check_gradient(self, points, backend: DiffBackend = DiffBackend("central", 1e-6)) -> float:
        """Max deviation between the analytic gradient and ``backend``."""
        if self.gradient is None:
            return 0.0
        x = split(np.asarray(points, dtype=float))
        shape = _batch_shape(x)
        ga = self.gradient(x)
        gb = backend.gradient(self.func, x)
        return float(max(np.max(np.abs(_full(a, shape) - _full(b, shape)))
                         for a, b in zip(ga, gb)))

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(lambda x: self.func(x) + other.func(x))

    def scaled(self, c: float) -> "ScalarField":
        return ScalarField(lambda x: c * self.func(x))

    def as_form(self, dim: int, chart: Optional[ChartManifold] = None) -> "DifferentialForm":
        return DifferentialForm(dim, 0, {(): self.func}, chart=chart)


def constant_scalar(c: float) -> ScalarField:
    return ScalarField(lambda x: c, gradient=lambda x: [0.0] * len(x), name=f"const {c}")


class VectorField:
    """Chart-basis components as a function of a coordinate tuple."""

    def __init__(self, func: Callable, dim: int, name: str = ""):
        self.func = func
        self.dim = dim
        self.name = name

    def components(self, x) -> tuple:
        comps = tuple(self.func(x))
        if len(comps) != self.dim:
            raise ValueError(f"vector field returned {len(comps)} components, expected {self.dim}")
        return comps

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        comps = self.components(split(pts))
        return np.asarray(dn.stack([_full(c, pts.shape[:-1]) for c in comps], axis=-1))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(lambda x: tuple(a + b for a, b in
                                           zip(self.components(x), other.components(x))),
                           self.dim)

    def scaled(self, c) -> "VectorField":
        return VectorField(lambda x: tuple(c * a for a in self.components(x)), self.dim)

    @classmethod
    def constant(cls, vec: Sequence[float]) -> "VectorField":
        vec = tuple(float(v) for v in vec)
        return cls(lambda x: vec, len(vec), name="constant")

    @classmethod
    def coordinate(cls, i: int, dim: int) -> "VectorField":
        e = [0.0] * dim
        e[i] = 1.0
        return cls.constant(e)


def _det(M: Sequence[Sequence]):
    """Leibniz determinant of a small nested-list matrix of arrays/duals."""
    k = len(M)
    if k == 0:
        return 1.0
    if k == 1:
        return M[0][0]
    if k == 2:
        return M[0][0] * M[1][1] - M[0][1] * M[1][0]
    total = 0.0
    for perm in itertools.permutations(range(k)):
        term = _parity(perm)
        for r, c in enumerate(perm):
            term = term * M[r][c]
        total = total + term
    return total


def _parity(seq) -> int:
    inv = sum(1 for a, b in itertools.combinations(seq, 2) if a > b)
    return -1 if inv % 2 else 1


class DifferentialForm:
    """Degree-``k`` form stored sparsely by strictly increasing multi-index.

    Missing indices have zero coefficient.  ``degenerate`` flags a zero form
    produced by an operation whose degree exceeded the chart dimension.
    """

    def __init__(self, dim: int, degree: int, terms: Optional[Mapping[Index, object]] = None,
                 chart: Optional[ChartManifold] = None, name: str = "",
                 degenerate: bool = False):
        if chart is not None and chart.dim != dim:
            raise ValueError("chart dimension mismatch")
        if degree < 0:
            raise ValueError("degree must be non-negative")
        self.dim = dim
        self.degree = degree
        self.chart = chart
        self.name = name
        self.degenerate = degenerate
        self.terms: Dict[Index, object] = {}
        for idx, c in (terms or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != degree or any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"multi-index {idx} is not strictly increasing of length {degree}")
            if idx and (idx[0] < 0 or idx[-1] >= dim):
                raise ValueError(f"multi-index {idx} out of range for dim {dim}")
            self.terms[idx] = c

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<{self.degree}-form{label} on R^{self.dim}: {sorted(self.terms)}>"

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, idx: Index, x):
        c = self.terms.get(tuple(idx))
        if c is None:
            return 0.0
        return _call(c, x)

    def _like(self, terms, name="") -> "DifferentialForm":
        return DifferentialForm(self.dim, self.degree, terms, chart=self.chart, name=name)

    # -- evaluation ------------------------------------------------------

    def evaluate(self, points, *vectors) -> np.ndarray:
        """Value on ``degree`` tangent vectors at ``points``."""
        if len(vectors) != self.degree:
            raise ValueError(f"{self.degree}-form needs {self.degree} vectors, got {len(vectors)}")
        pts = np.asarray(points, dtype=float)
        if self.chart is not None:
            self.chart.check(pts)
        shape = pts.shape[:-1]
        x = split(pts)
        vecs = [np.broadcast_to(np.asarray(v, dtype=float), pts.shape) for v in vectors]
        total = np.zeros(shape)
        for idx, c in self.terms.items():
            coef = _full(_call(c, x), shape)
            if self.degree == 0:
                total = total + coef
                continue
            sub = np.stack([v[..., list(idx)] for v in vecs], axis=-1)
            total = total + coef * np.linalg.det(sub)
        return np.asarray(total)

    def dense(self, x):
        """Coefficient tensor at coordinate tuple ``x``: (..., d) or (..., d, d)."""
        shape = _batch_shape(x)
        d = self.dim
        if self.degree == 1:
            comps = [_full(self.coefficient((i,), x), shape) for i in range(d)]
            return dn.stack(comps, axis=-1)
        if self.degree == 2:
            src = getattr(self, "_d_source", None)
            if src is not None and src[1].mode == "dual" and _plain(x):
                return _dense_d1(src[0], x, shape)[1]
            zero = np.zeros(shape)
            rows = [[zero] * d for _ in range(d)]
            for (i, j), c in self.terms.items():
                v = _full(_call(c, x), shape)
                rows[i][j] = v
                rows[j][i] = -v
            return dn.stack_matrix(rows)
        raise ValueError("dense() is available for degrees 1 and 2")

    def frozen(self, points) -> "DifferentialForm":
        """Form with the coefficients evaluated once at ``points``."""
        x = split(np.asarray(points, dtype=float))
        shape = _batch_shape(x)
        vals = {idx: np.asarray(_full(_call(c, x), shape)) for idx, c in self.terms.items()}
        return DifferentialForm(self.dim, self.degree,
                                {k: (lambda _x, v=v: v) for k, v in vals.items()},
                                chart=self.chart, name=self.name)

    # -- algebra ---------------------------------------------------------

    def _check_same(self, other: "DifferentialForm"):
        if other.dim != self.dim:
            raise ValueError("forms live on charts of different dimension")
        if self.chart is not None and other.chart is not None and self.chart != other.chart:
            raise ValueError(f"forms live on different charts ({self.chart.name}, {other.chart.name})")

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        self._check_same(other)
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        terms = dict(self.terms)
        for idx, c in other.terms.items():
            if idx in terms:
                a = terms[idx]
                terms[idx] = lambda x, a=a, c=c: _call(a, x) + _call(c, x)
            else:
                terms[idx] = c
        return DifferentialForm(self.dim, self.degree, terms, chart=self.chart or other.chart)

    def scaled(self, s) -> "DifferentialForm":
        """Multiply by a constant or by a coordinate-tuple function."""
        terms = {}
        for idx, c in self.terms.items():
            if callable(s):
                terms[idx] = lambda x, c=c: s(x) * _call(c, x)
            else:
                terms[idx] = lambda x, c=c: s * _call(c, x)
        return self._like(terms)

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)


def zero_form(dim: int, degree: int, chart=None, degenerate: bool = False) -> DifferentialForm:
    return DifferentialForm(dim, degree, {}, chart=chart, degenerate=degenerate)


def coordinate_differential(i: int, dim: int, chart=None) -> DifferentialForm:
    return DifferentialForm(dim, 1, {(i,): 1.0}, chart=chart, name=f"dx{i}")


def one_form(dim: int, coeffs: Mapping[int, object], chart=None, name: str = "") -> DifferentialForm:
    return DifferentialForm(dim, 1, {(i,): c for i, c in coeffs.items()}, chart=chart, name=name)


def _shuffle_sign(a: Index, b: Index) -> int:
    return _parity(a + b)


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    a._check_same(b)
    deg = a.degree + b.degree
    chart = a.chart or b.chart
    if deg > a.dim:
        return zero_form(a.dim, deg, chart=chart, degenerate=True)
    contribs: Dict[Index, list] = {}
    for I, ca in a.terms.items():
        for J, cb in b.terms.items():
            if set(I) & set(J):
                continue
            K = tuple(sorted(I + J))
            contribs.setdefault(K, []).append((_shuffle_sign(I, J), ca, cb))

    def make(items):
        def coef(x):
            total = 0.0
            for s, ca, cb in items:
                total = total + s * (_call(ca, x) * _call(cb, x))
            return total
        return coef

    return DifferentialForm(a.dim, deg, {K: make(v) for K, v in contribs.items()}, chart=chart)


def exterior_derivative(a: DifferentialForm, backend: DiffBackend = DEFAULT_BACKEND) -> DifferentialForm:
    deg = a.degree + 1
    if deg > a.dim:
        return zero_form(a.dim, deg, chart=a.chart, degenerate=True)
    contribs: Dict[Index, list] = {}
    for I, c in a.terms.items():
        if not callable(c):
            continue  # constant coefficient
        for i in range(a.dim):
            if i in I:
                continue
            J = tuple(sorted(I + (i,)))
            sign = -1 if J.index(i) % 2 else 1
            contribs.setdefault(J, []).append((sign, c, i))

    def make(items):
        def coef(x):
            total = 0.0
            for s, c, i in items:
                total = total + s * backend.partial(c, x, i)
            return total
        return coef

    out = DifferentialForm(a.dim, deg, {J: make(v) for J, v in contribs.items()},
                           chart=a.chart, name=f"d{a.name}" if a.name else "")
    if a.degree == 1:
        out._d_source = (a, backend)
    return out


def _dense_d1(a: DifferentialForm, x, shape):
    """Dense ``a`` and ``da`` for a 1-form from one gradient pass per coefficient."""
    d = a.dim
    shape = tuple(shape)
    seeded = dn.gradient_seed(tuple(x))
    vals = np.zeros((d,) + shape)
    J = np.zeros((d, d) + shape)  # J[k, i] = d a_k / d x_i
    for (k,), c in a.terms.items():
        if not callable(c):
            vals[k] = float(c)
            continue
        y = c(seeded)
        if isinstance(y, dn.Dual):
            vals[k] = y.real
            J[k] = y.eps
        else:
            vals[k] = y
    om = J.swapaxes(0, 1) - J  # om[i, j] = d_i a_j - d_j a_i
    om = np.moveaxis(om, (0, 1), (-2, -1))
    return np.moveaxis(vals, 0, -1), om


def _single_layer(x) -> bool:
    for c in x:
        if isinstance(c, dn.Dual) and (isinstance(c.real, dn.Dual) or isinstance(c.eps, dn.Dual)):
            return False
    return True


def _dense_d1_dual(a: DifferentialForm, x, shape):
    """:func:`_dense_d1` for inputs carrying one plain perturbation layer.

    The gradient layer is placed *inside* the caller's layer, so one
    evaluation per coefficient yields ``a``, ``da`` and their perturbations.
    """
    d = a.dim
    shape = tuple(shape)
    zeros = np.zeros((d,) + shape)
    seeded = []
    for i, c in enumerate(x):
        r, e = dn.parts(c)
        E = np.zeros((d,) + shape)
        E[i] = 1.0
        r = np.broadcast_to(np.asarray(r, dtype=float), shape)
        e = np.broadcast_to(np.asarray(e, dtype=float), shape)
        seeded.append(dn.Dual(dn.Dual(r, E), dn.Dual(e, zeros)))
    seeded = tuple(seeded)
    vals = np.zeros((2, d) + shape)
    J = np.zeros((2, d, d) + shape)
    for (k,), c in a.terms.items():
        if not callable(c):
            vals[0, k] = float(c)
            continue
        y = c(seeded)
        for layer, part in enumerate(dn.parts(y)):
            v, g = dn.parts(part)
            vals[layer, k] = v
            J[layer, k] = g
    om = J.swapaxes(1, 2) - J
    om = np.moveaxis(om, (1, 2), (-2, -1))
    vals = np.moveaxis(vals, 1, -1)
    return dn.Dual(vals[0], vals[1]), dn.Dual(om[0], om[1])


def jet1(a: DifferentialForm, da: DifferentialForm, x):
    """``(a, da)`` as dense arrays, sharing work between the two."""
    src = getattr(da, "_d_source", None)
    if src is not None and src[0] is a and src[1].mode == "dual":
        if _plain(x):
            return _dense_d1(a, x, _batch_shape(x))
        if _single_layer(x):
            return _dense_d1_dual(a, x, _batch_shape(x))
    return a.dense(x), da.dense(x)


def interior_product(X: VectorField, a: DifferentialForm) -> DifferentialForm:
    if a.degree == 0:
        raise ValueError("interior product needs degree >= 1")
    if X.dim != a.dim:
        raise ValueError("vector field and form dimensions differ")
    contribs: Dict[Index, list] = {}
    for I, c in a.terms.items():
        for p, i in enumerate(I):
            J = I[:p] + I[p + 1:]
            contribs.setdefault(J, []).append((-1 if p % 2 else 1, i, c))

    def make(items):
        def coef(x):
            comps = X.components(x)
            total = 0.0
            for s, i, c in items:
                total = total + s * (comps[i] * _call(c, x))
            return total
        return coef

    return DifferentialForm(a.dim, a.degree - 1, {J: make(v) for J, v in contribs.items()},
                            chart=a.chart)


def lie_derivative(X: VectorField, a: DifferentialForm,
                   backend: DiffBackend = DEFAULT_BACKEND) -> DifferentialForm:
    """Cartan formula ``d i_X a + i_X d a``."""
    da = exterior_derivative(a, backend)
    inner = interior_product(X, da) if not da.degenerate else zero_form(a.dim, a.degree, a.chart)
    if a.degree == 0:
        return inner
    return exterior_derivative(interior_product(X, a), backend) + inner


@dataclass(frozen=True)
class SmoothMap:
    """Map between coordinate charts, ``func(x) -> target coordinates``.

    ``jacobian(x)[i][j] = d y_i / d x_j``; when absent the backend supplies it.
    """

    source_dim: int
    target_dim: int
    func: Callable
    jacobian: Optional[Callable] = None
    backend: DiffBackend = DEFAULT_BACKEND

    def __call__(self, x):
        return tuple(self.func(x))

    def jac(self, x):
        if self.jacobian is not None:
            return self.jacobian(x)
        return self.backend.jacobian(self.func, x)

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        out = self(split(pts))
        return np.asarray(join([_full(o, pts.shape[:-1]) for o in out]))


def pullback(phi: SmoothMap, a: DifferentialForm, chart: Optional[ChartManifold] = None) -> DifferentialForm:
    if phi.target_dim != a.dim:
        raise ValueError("map target dimension does not match the form")
    k = a.degree
    targets = list(itertools.combinations(range(phi.source_dim), k))
    items = list(a.terms.items())

    def make(J):
        def coef(x):
            y = phi(x)
            if k == 0:
                return sum((_call(c, y) for _, c in items), 0.0)
            Jm = phi.jac(x)
            total = 0.0
            for I, c in items:
                minor = [[Jm[i][j] for j in J] for i in I]
                total = total + _call(c, y) * _det(minor)
            return total
        return coef

    terms = {J: make(J) for J in targets} if items else {}
    return DifferentialForm(phi.source_dim, k, terms, chart=chart)


def identity_map(dim: int) -> SmoothMap:
    eye = [[1.0 if i == j else 0.0 for j in range(dim)] for i in range(dim)]
    return SmoothMap(dim, dim, lambda x: tuple(x), lambda x: eye)


def flow_map(X: VectorField, t: float, substeps: int = 8) -> Callable:
    """Time-``t`` RK4 flow of ``X`` acting on coordinate tuples."""

    def rhs(_t, y):
        return join(X.components(split(y)))

    def phi(x):
        y0 = join(list(x))
        return split(integrate(rhs, y0, 0.0, t, substeps))

    return phi


def lie_derivative_by_flow(X: VectorField, a: DifferentialForm, points, vectors: Sequence,
                           h: float = 1e-3, substeps: int = 8) -> np.ndarray:
    """Central difference in ``t`` of ``(phi_t^* a)(v_1..v_k)`` at ``t = 0``.

    Independent of the Cartan route: the flow and its tangent map come from
    integrating ``X`` with dual-seeded initial data.  Error is ``O(h^2)``.
    """
    pts = np.asarray(points, dtype=float)

    def pulled(t):
        phi = flow_map(X, t, substeps)
        image = np.asarray(dn.value(join(phi(split(pts)))))
        pushed = []
        for v in vectors:
            v = np.broadcast_to(np.asarray(v, dtype=float), pts.shape)
            seeded = split(dn.Dual(pts, v))
            out = phi(seeded)
            pushed.append(np.asarray(join([dn.tangent(o, like=pts[..., 0]) for o in out])))
        return a.evaluate(image, *pushed)

    return (pulled(h) - pulled(-h)) / (2.0 * h)


def embed(a: DifferentialForm, dim: int, indices: Sequence[int], chart=None) -> DifferentialForm:
    """Re-express ``a`` on a larger chart whose coordinates ``indices`` are ``a``'s.

    ``indices`` must be increasing so multi-indices stay sorted.
    """
    indices = tuple(indices)
    if len(indices) != a.dim or list(indices) != sorted(indices):
        raise ValueError("indices must list the source coordinates in increasing order")

    def wrap(c):
        if not callable(c):
            return c
        return lambda x: c(tuple(x[i] for i in indices))

    terms = {tuple(indices[i] for i in I): wrap(c) for I, c in a.terms.items()}
    return DifferentialForm(dim, a.degree, terms, chart=chart, name=a.name)
