"""Coordinate charts, points and excluded regions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import dual as dn


class ExcludedRegionError(ValueError):
    """Raised when an evaluation touches a chart's excluded region."""

    def __init__(self, region: "ExcludedRegion", point):
        self.region = region
        self.point = np.asarray(point, dtype=float)
        super().__init__(f"point {self.point.tolist()} lies in excluded region "
                         f"'{region.name}'")


@dataclass(frozen=True)
class ExcludedRegion:
    """Open slab ``lower < x[coord] < upper`` removed from a chart."""

    name: str
    coord: int
    lower: float = -math.inf
    upper: float = math.inf

    def contains(self, points) -> np.ndarray:
        c = np.asarray(points, dtype=float)[..., self.coord]
        return (c > self.lower) & (c < self.upper)

    def to_dict(self) -> dict:
        return {"name": self.name, "coord": self.coord,
                "lower": _enc(self.lower), "upper": _enc(self.upper)}

    @classmethod
    def from_dict(cls, d: dict) -> "ExcludedRegion":
        return cls(d["name"], int(d["coord"]), _dec(d["lower"]), _dec(d["upper"]))


def _enc(v: float):
    """JSON-safe float: infinities become the strings ``"inf"`` / ``"-inf"``."""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return float(v)


def _dec(v) -> float:
    return float(v)


@dataclass(frozen=True)
class ChartManifold:
    """A single coordinate chart with optional periodic coordinates.

    ``periods[i]`` is ``None`` for an ordinary coordinate; ``bounds[i]`` is a
    closed interval or ``None`` for an unbounded coordinate.
    """

    name: str
    coord_names: tuple
    periods: tuple = ()
    bounds: tuple = ()
    excluded: tuple = ()

    def __post_init__(self):
        n = len(self.coord_names)
        if n == 0:
            raise ValueError("chart must have at least one coordinate")
        if not self.periods:
            object.__setattr__(self, "periods", (None,) * n)
        if not self.bounds:
            object.__setattr__(self, "bounds", (None,) * n)
        if len(self.periods) != n or len(self.bounds) != n:
            raise ValueError("periods/bounds must match the number of coordinates")
        for p in self.periods:
            if p is not None and not p > 0:
                raise ValueError(f"period must be positive, got {p}")
        for b in self.bounds:
            if b is not None and not b[0] <= b[1]:
                raise ValueError(f"bad bounds {b}")

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    def normalize(self, points) -> np.ndarray:
        """Reduce periodic coordinates into ``[0, period)``."""
        pts = np.array(points, dtype=float)
        for i, p in enumerate(self.periods):
            if p is not None:
                pts[..., i] = np.mod(pts[..., i], p)
        return pts

    def in_bounds(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        ok = np.ones(pts.shape[:-1], dtype=bool)
        for i, b in enumerate(self.bounds):
            if b is not None and self.periods[i] is None:
                ok &= (pts[..., i] >= b[0]) & (pts[..., i] <= b[1])
        return ok

    def excluded_mask(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        mask = np.zeros(pts.shape[:-1], dtype=bool)
        for reg in self.excluded:
            mask |= reg.contains(pts)
        return mask

    def check(self, points) -> None:
        """Raise :class:`ExcludedRegionError` if any point is excluded."""
        pts = np.asarray(dn.value(points), dtype=float)
        if pts.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim} coordinates, got {pts.shape[-1]}")
        for reg in self.excluded:
            bad = reg.contains(pts)
            if np.any(bad):
                first = pts.reshape(-1, self.dim)[np.flatnonzero(bad.ravel())[0]]
                raise ExcludedRegionError(reg, first)

    def point(self, coords: Sequence[float]) -> "Point":
        return Point(self, coords)

    def box(self, default: float = 1.0) -> np.ndarray:
        """Sampling box ``(dim, 2)``; unbounded coordinates get ``±default``."""
        out = np.empty((self.dim, 2))
        for i in range(self.dim):
            if self.periods[i] is not None:
                out[i] = (0.0, self.periods[i])
            elif self.bounds[i] is not None:
                out[i] = self.bounds[i]
            else:
                out[i] = (-default, default)
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "coords": list(self.coord_names),
            "periods": [None if p is None else float(p) for p in self.periods],
            "bounds": [None if b is None else [float(b[0]), float(b[1])]
                       for b in self.bounds],
            "excluded": [r.to_dict() for r in self.excluded],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChartManifold":
        return cls(
            d["name"], tuple(d["coords"]),
            tuple(d.get("periods") or ()),
            tuple(None if b is None else (b[0], b[1]) for b in d.get("bounds") or ()),
            tuple(ExcludedRegion.from_dict(r) for r in d.get("excluded", ())),
        )

    def product(self, other: "ChartManifold", name: Optional[str] = None) -> "ChartManifold":
        shift = self.dim
        moved = tuple(ExcludedRegion(r.name, r.coord + shift, r.lower, r.upper)
                      for r in other.excluded)
        return ChartManifold(
            name or f"{self.name}x{other.name}",
            self.coord_names + other.coord_names,
            self.periods + other.periods,
            self.bounds + other.bounds,
            self.excluded + moved,
        )


@dataclass(frozen=True)
class Point:
    chart: ChartManifold
    coords: np.ndarray = field(compare=False)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).reshape(-1)
        if c.shape != (self.chart.dim,):
            raise ValueError(f"{self.chart.name} needs {self.chart.dim} coordinates")
        c = self.chart.normalize(c)
        if not self.chart.in_bounds(c):
            raise ValueError(f"{c.tolist()} outside the bounds of {self.chart.name}")
        self.chart.check(c)
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    def __eq__(self, other):
        return (isinstance(other, Point) and other.chart == self.chart
                and np.array_equal(other.coords, self.coords))

    def __hash__(self):
        return hash((self.chart.name, self.coords.tobytes()))


def as_points(x, dim: Optional[int] = None) -> np.ndarray:
    """Coerce a Point, list of Points or array into a float array ``(..., dim)``."""
    if isinstance(x, Point):
        return x.coords
    if isinstance(x, (list, tuple)) and x and isinstance(x[0], Point):
        return np.stack([p.coords for p in x])
    arr = np.asarray(x, dtype=float)
    if dim is not None and arr.shape[-1] != dim:
        raise ValueError(f"expected trailing dimension {dim}, got {arr.shape}")
    return arr


def split(points) -> tuple:
    """Array ``(..., dim)`` (plain or dual) -> tuple of per-coordinate arrays."""
    d = np.shape(dn.value(points))[-1]
    return tuple(points[..., i] for i in range(d))


def join(coords) -> np.ndarray:
    return dn.stack(list(coords), axis=-1)


# -- standard charts ------------------------------------------------------

TWO_PI = 2.0 * math.pi
POLAR_CORE = 1e-3


def euclidean(names: Sequence[str], name: str = "R^n", bound: Optional[float] = None) -> ChartManifold:
    b = None if bound is None else (-bound, bound)
    return ChartManifold(name, tuple(names), (None,) * len(names), (b,) * len(names))


def cylindrical(name: str = "R3-cyl", r_min: float = POLAR_CORE) -> ChartManifold:
    return ChartManifold(
        name, ("r", "theta", "z"), (None, TWO_PI, None),
        ((0.0, math.inf), None, None),
        (ExcludedRegion("polar-core", 0, upper=r_min),),
    )


def polar_disk(radius: float, name: str = "D2-polar", r_min: float = POLAR_CORE,
               names=("r", "theta")) -> ChartManifold:
    return ChartManifold(
        name, tuple(names), (None, TWO_PI), ((0.0, radius), None),
        (ExcludedRegion("polar-core", 0, upper=r_min),),
    )


def torus(period: float = 1.0, name: str = "T2", names=("theta1", "theta2")) -> ChartManifold:
    return ChartManifold(name, tuple(names), (period, period), (None, None))
