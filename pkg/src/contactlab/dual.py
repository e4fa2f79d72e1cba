"""Forward-mode dual numbers over numpy arrays.

A :class:`Dual` carries a value and a single directional derivative.  Both
parts may be numpy arrays (vectorised over sample points) or, for higher
derivatives, Duals themselves.  Wrapping an already-dual quantity in a new
Dual always adds the *outermost* layer, so nested differentiation never mixes
perturbations as long as callers read ``.eps`` of the layer they created.

Coefficient functions that should be differentiable write their math with the
functions of this module (``sin``, ``where``, ...) instead of ``numpy``.
"""

from __future__ import annotations

import numpy as np


class Dual:
    """Value ``real`` plus first-order perturbation ``eps``."""

    __slots__ = ("real", "eps")
    # make ndarray (op) Dual defer to the reflected Dual method
    __array_ufunc__ = None

    def __init__(self, real, eps=0.0):
        self.real = real
        self.eps = eps

    @property
    def shape(self):
        return np.shape(value(self))

    @property
    def ndim(self):
        return len(self.shape)

    def __repr__(self):
        return f"Dual({self.real!r}, {self.eps!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.real + other.real, self.eps + other.eps)
        return Dual(self.real + other, self.eps)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.real - other.real, self.eps - other.eps)
        return Dual(self.real - other, self.eps)

    def __rsub__(self, other):
        return Dual(other - self.real, -self.eps)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.real * other.real,
                        self.real * other.eps + self.eps * other.real)
        return Dual(self.real * other, self.eps * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.real
            q = self.real * inv
            return Dual(q, (self.eps - q * other.eps) * inv)
        return Dual(self.real / other, self.eps / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.real
        q = other * inv
        return Dual(q, -q * inv * self.eps)

    def __neg__(self):
        return Dual(-self.real, -self.eps)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if isinstance(n, Dual):
            raise TypeError("dual exponents are not supported")
        if n == 0:
            return Dual(self.real ** 0, 0.0 * self.eps)
        return Dual(self.real ** n, n * self.real ** (n - 1) * self.eps)

    def __matmul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.real @ other.real,
                        self.real @ other.eps + self.eps @ other.real)
        return Dual(self.real @ other, self.eps @ other)

    def __rmatmul__(self, other):
        return Dual(other @ self.real, other @ self.eps)

    def __getitem__(self, idx):
        return Dual(_index(self.real, idx), _index(self.eps, idx))

    # comparisons deliberately act on the underlying value
    def __lt__(self, other):
        return value(self) < value(other)

    def __le__(self, other):
        return value(self) <= value(other)

    def __gt__(self, other):
        return value(self) > value(other)

    def __ge__(self, other):
        return value(self) >= value(other)


def _index(v, idx):
    if isinstance(v, Dual) or np.ndim(v) > 0:
        return v[idx]
    return v


def parts(x):
    """Split ``x`` into ``(real, eps)``; plain values have zero perturbation."""
    if isinstance(x, Dual):
        return x.real, x.eps
    return x, 0.0


def value(x):
    """Strip every dual layer and return the underlying float/array."""
    while isinstance(x, Dual):
        x = x.real
    return x


def is_dual(x) -> bool:
    return isinstance(x, Dual)


def seed(x, direction=1.0) -> Dual:
    """Start a new (outermost) perturbation of ``x``."""
    return Dual(x, np.ones_like(value(x), dtype=float) * direction)


def tangent(y, like=None):
    """Outermost perturbation of ``y`` (zero if ``y`` is not dual)."""
    if isinstance(y, Dual):
        return y.eps
    return np.zeros_like(np.asarray(y, dtype=float) if like is None else like)


def primal(y):
    """Value with the outermost perturbation removed."""
    return y.real if isinstance(y, Dual) else y


# -- elementary functions -------------------------------------------------

def sin(x):
    if isinstance(x, Dual):
        return Dual(sin(x.real), cos(x.real) * x.eps)
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(cos(x.real), -sin(x.real) * x.eps)
    return np.cos(x)


def tan(x):
    return sin(x) / cos(x)


def exp(x):
    if isinstance(x, Dual):
        e = exp(x.real)
        return Dual(e, e * x.eps)
    return np.exp(x)


def log(x):
    if isinstance(x, Dual):
        return Dual(log(x.real), x.eps / x.real)
    return np.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        s = sqrt(x.real)
        return Dual(s, 0.5 * x.eps / s)
    return np.sqrt(x)


def tanh(x):
    if isinstance(x, Dual):
        t = tanh(x.real)
        return Dual(t, (1.0 - t * t) * x.eps)
    return np.tanh(x)


def arctan2(y, x):
    if isinstance(y, Dual) or isinstance(x, Dual):
        yr, ye = parts(y)
        xr, xe = parts(x)
        den = xr * xr + yr * yr
        return Dual(arctan2(yr, xr), (xr * ye - yr * xe) / den)
    return np.arctan2(y, x)


def absolute(x):
    if isinstance(x, Dual):
        return Dual(absolute(x.real), np.sign(value(x)) * x.eps)
    return np.abs(x)


def where(cond, a, b):
    """Branch selection driven by a plain boolean mask."""
    cond = np.asarray(value(cond), dtype=bool)
    if isinstance(a, Dual) or isinstance(b, Dual):
        ar, ae = parts(a)
        br, be = parts(b)
        return Dual(where(cond, ar, br), where(cond, ae, be))
    return np.where(cond, a, b)


def lift(f, df):
    """Make a dual-aware function out of a real implementation ``f``.

    ``df`` is the derivative and must itself be dual-aware (it is called on
    inner layers when nesting).
    """

    def g(x):
        if isinstance(x, Dual):
            return Dual(g(x.real), df(x.real) * x.eps)
        return f(x)

    return g


def _smallseries(q, coeffs):
    out = 0.0
    for c in reversed(coeffs):
        out = out * q + c
    return out


def sinc_sq(q):
    """``sin(sqrt(q))/sqrt(q)``, smooth through ``q = 0``."""
    small = value(q) < 1e-4
    if not np.any(small):
        s = sqrt(q)
        return sin(s) / s
    series = _smallseries(q, [1.0, -1 / 6, 1 / 120, -1 / 5040])
    qs = where(small, 1.0, q)
    s = sqrt(qs)
    return where(small, series, sin(s) / s)


def cos_sq(q):
    """``cos(sqrt(q))``, smooth through ``q = 0``."""
    small = value(q) < 1e-4
    if not np.any(small):
        return cos(sqrt(q))
    series = _smallseries(q, [1.0, -1 / 2, 1 / 24, -1 / 720])
    qs = where(small, 1.0, q)
    return where(small, series, cos(sqrt(qs)))


# -- array helpers --------------------------------------------------------

def stack(seq, axis=-1):
    """Stack with broadcasting; perturbation parts may carry extra leading axes."""
    seq = list(seq)
    if any(isinstance(s, Dual) for s in seq):
        rs, es = zip(*(parts(s) for s in seq))
        return Dual(stack(rs, axis), stack(es, axis))
    shape = np.broadcast_shapes(*(np.shape(s) for s in seq))
    return np.stack([np.broadcast_to(s, shape) for s in seq], axis=axis)


def broadcast(x, shape):
    """Broadcast to ``shape``, keeping any extra leading axes of ``x``."""
    if isinstance(x, Dual):
        return Dual(broadcast(x.real, shape), broadcast(x.eps, shape))
    x = np.asarray(x, dtype=float) if np.isrealobj(x) else np.asarray(x)
    return np.broadcast_to(x, np.broadcast_shapes(x.shape, tuple(shape)))


def stack_matrix(rows):
    """Stack a nested list ``rows[i][j]`` into an array ``(..., m, n)``."""
    return stack([stack(r, axis=-1) for r in rows], axis=-2)


def swapaxes(x, a, b):
    if isinstance(x, Dual):
        return Dual(swapaxes(x.real, a, b), swapaxes(x.eps, a, b))
    return np.swapaxes(x, a, b)


def matvec(A, v):
    return (A @ v[..., None])[..., 0]


def dot(u, v):
    return dsum(u * v, -1)


def dsum(x, axis=None):
    if isinstance(x, Dual):
        return Dual(dsum(x.real, axis), dsum(x.eps, axis)
                    if np.ndim(value(x.eps)) else x.eps * _count(x, axis))
    return np.sum(x, axis=axis)


def _count(x, axis):
    shape = np.shape(value(x))
    if axis is None:
        return int(np.prod(shape))
    return shape[axis]


def solve(A, b):
    """Batched dense solve ``A x = b`` with forward-mode propagation.

    Uses LU with partial pivoting on the primal matrix; the perturbation is
    obtained by implicit differentiation ``A x' = b' - A' x``.
    """
    if not isinstance(A, Dual) and not isinstance(b, Dual):
        return np.linalg.solve(A, np.asarray(b)[..., None])[..., 0]
    Ar, Ae = parts(A)
    br, be = parts(b)
    x = solve(Ar, br)
    rhs = be - matvec(Ae, x) if np.ndim(value(Ae)) else be
    shape = np.shape(value(x))
    return Dual(x, solve(Ar, broadcast(rhs, shape)))


def gradient_seed(x: tuple) -> tuple:
    """Seed every coordinate of a plain tuple at once.

    The perturbation of coordinate ``i`` is the one-hot array ``e_i`` placed
    on a new *leading* axis of length ``len(x)``, so a single evaluation
    carries the whole gradient: ``tangent(f(seeded))[i] = df/dx_i``.  Only
    valid on plain inputs (one such layer, innermost).
    """
    d = len(x)
    shape = np.broadcast_shapes(*(np.shape(c) for c in x))
    out = []
    for i, c in enumerate(x):
        e = np.zeros((d,) + shape)
        e[i] = 1.0
        out.append(Dual(np.broadcast_to(np.asarray(c, dtype=float), shape), e))
    return tuple(out)


def gradient_parts(y, d: int, shape) -> tuple:
    """``(value, [df/dx_i])`` from the output of a :func:`gradient_seed` evaluation."""
    if not isinstance(y, Dual):
        v = np.broadcast_to(np.asarray(y, dtype=float), shape)
        z = np.zeros(shape)
        return v, [z] * d
    v = np.broadcast_to(y.real, shape)
    e = np.broadcast_to(y.eps, (d,) + tuple(shape))
    return v, [e[i] for i in range(d)]
