"""Reproducible sample sets over chart boxes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

from .chart import ChartManifold

STRATEGIES = ("halton", "uniform", "grid")


@dataclass(frozen=True)
class SampleSet:
    """Points in an axis-aligned box, optionally filtered by a predicate.

    The result depends only on ``(strategy, count, seed, box, predicate)``.
    Rejected points are replaced by drawing further along the same sequence.
    """

    box: tuple
    count: int
    strategy: str = "halton"
    seed: int = 0
    predicate: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; use one of {STRATEGIES}")
        if self.count < 0:
            raise ValueError("count must be non-negative")
        object.__setattr__(self, "box", tuple(tuple(map(float, b)) for b in self.box))

    @classmethod
    def for_chart(cls, chart: ChartManifold, count: int, strategy: str = "halton",
                  seed: int = 0, box=None, predicate=None) -> "SampleSet":
        b = chart.box() if box is None else np.asarray(box, dtype=float)
        user = predicate

        def keep(pts):
            ok = ~chart.excluded_mask(pts)
            if user is not None:
                ok &= user(pts)
            return ok

        return cls(tuple(map(tuple, b)), count, strategy, seed, keep)

    @property
    def dim(self) -> int:
        return len(self.box)

    def points(self) -> np.ndarray:
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        if self.count == 0:
            return np.empty((0, self.dim))
        if self.strategy == "grid":
            pts = self._grid(lo, hi)
            if self.predicate is not None:
                pts = pts[self.predicate(pts)]
            return pts
        if self.strategy == "halton":
            gen = qmc.Halton(d=self.dim, scramble=True, seed=self.seed)
            draw = gen.random
        else:
            rng = np.random.default_rng(self.seed)
            draw = lambda n: rng.random((n, self.dim))  # noqa: E731
        out = []
        have = 0
        for _ in range(64):
            u = draw(max(2 * (self.count - have), 16))
            pts = lo + (hi - lo) * u
            if self.predicate is not None:
                pts = pts[self.predicate(pts)]
            out.append(pts)
            have += len(pts)
            if have >= self.count:
                break
        pts = np.concatenate(out)
        if len(pts) < self.count:
            raise ValueError("predicate rejects almost the whole sampling box")
        return pts[: self.count]

    def _grid(self, lo, hi) -> np.ndarray:
        per = max(2, int(round(self.count ** (1.0 / self.dim))))
        axes = [np.linspace(a, b, per) for a, b in zip(lo, hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def describe(self) -> dict:
        return {"strategy": self.strategy, "count": self.count, "seed": self.seed,
                "box": [list(b) for b in self.box]}
