"""Maps between finite metric spaces and their coarse data.

At finite scale every map is coarse and any two maps are close; what is
interesting is the size of the constants, so each operation returns the exact
sup rather than a yes/no answer.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .metric_space import FiniteMetricSpace, _freeze_label
from .report import StructuralError


class PointMap:
    """A total map ``source -> target`` given by the image label of each source point."""

    __slots__ = ("source", "target", "values", "idx")

    def __init__(self, source: FiniteMetricSpace, target: FiniteMetricSpace, values: Sequence):
        values = tuple(_freeze_label(v) for v in values)
        if len(values) != len(source):
            raise StructuralError(
                f"map has {len(values)} values for a source with {len(source)} points")
        idx = []
        for x, v in zip(source.labels, values):
            if v not in target:
                raise StructuralError(f"image {v!r} of {x!r} is not a target point")
            idx.append(target.index(v))
        self.source = source
        self.target = target
        self.values = values
        self.idx = np.array(idx, dtype=np.intp)
        self.idx.flags.writeable = False

    @classmethod
    def from_function(cls, source, target, fn) -> PointMap:
        return cls(source, target, [fn(x) for x in source.labels])

    @classmethod
    def identity(cls, space: FiniteMetricSpace) -> PointMap:
        return cls(space, space, space.labels)

    @classmethod
    def constant(cls, source, target, y) -> PointMap:
        return cls(source, target, [y] * len(source))

    def __call__(self, x):
        return self.values[self.source.index(x)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointMap):
            return NotImplemented
        return (self.values == other.values and self.source == other.source
                and self.target == other.target)

    def __hash__(self) -> int:
        return hash(self.values)

    def __repr__(self) -> str:
        return f"PointMap({dict(zip(self.source.labels, self.values))!r})"

    def image_distances(self) -> np.ndarray:
        """Matrix of dist(f(x), f(y)) over source pairs."""
        return self.target.dist[np.ix_(self.idx, self.idx)]

    def preimage(self, ys) -> list:
        ys = {_freeze_label(y) for y in ys}
        return [x for x, v in zip(self.source.labels, self.values) if v in ys]


@dataclass(frozen=True)
class ExpansionModulus:
    """Thresholds N (occurring source distances) -> M(N) = sup{dist(fx, fy) : dist(x, y) <= N}."""

    table: dict

    @cached_property
    def _steps(self) -> tuple[np.ndarray, np.ndarray]:
        keys = np.array(sorted(self.table), dtype=float)
        return keys, np.array([self.table[k] for k in keys], dtype=float)

    def __call__(self, N):
        """Evaluate the step function at N (scalar or array); 0 below the smallest threshold."""
        keys, vals = self._steps
        pos = np.searchsorted(keys, N, side="right") - 1
        out = np.where(pos >= 0, vals[np.maximum(pos, 0)] if len(vals) else 0.0, 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def is_monotone(self) -> bool:
        vals = [self.table[k] for k in sorted(self.table)]
        return all(a <= b for a, b in zip(vals, vals[1:]))

    def __le__(self, other: ExpansionModulus) -> bool:
        return all(self.table[k] <= other(k) for k in self.table)


def _modulus_from(src_dist: np.ndarray, img_dist: np.ndarray) -> ExpansionModulus:
    radii = np.unique(src_dist)
    flat_s = src_dist.ravel()
    flat_i = img_dist.ravel()
    order = np.argsort(flat_s, kind="stable")
    s_sorted = flat_s[order]
    running = np.maximum.accumulate(flat_i[order])
    ends = np.searchsorted(s_sorted, radii, side="right") - 1
    return ExpansionModulus({float(r): float(running[e]) for r, e in zip(radii, ends)})


def expansion_modulus(f: PointMap) -> ExpansionModulus:
    return _modulus_from(f.source.dist, f.image_distances())


def fiber_profile(f: PointMap) -> tuple[int, float]:
    """(max fiber cardinality, max fiber diameter) over the image points."""
    sizes = np.bincount(f.idx, minlength=len(f.target))
    diam = 0.0
    for y in np.flatnonzero(sizes > 1):
        members = np.flatnonzero(f.idx == y)
        diam = max(diam, float(f.source.dist[np.ix_(members, members)].max()))
    return int(sizes.max()), diam


def _same_ends(f: PointMap, g: PointMap) -> None:
    if f.source != g.source or f.target != g.target:
        raise StructuralError("maps must share source and target")


def closeness_distance(f: PointMap, g: PointMap) -> float:
    """sup_x dist(f(x), g(x))."""
    _same_ends(f, g)
    if len(f.source) == 0:
        return 0.0
    return float(f.target.dist[f.idx, g.idx].max())


def compose(g: PointMap, f: PointMap) -> PointMap:
    """g after f."""
    if f.target != g.source:
        raise StructuralError("cannot compose: target of f is not the source of g")
    return PointMap(f.source, g.target, [g.values[i] for i in f.idx])


def equibornologous_modulus(family: Sequence[PointMap]) -> ExpansionModulus:
    """Pointwise max of the individual moduli: one M(N) valid for every member."""
    if not family:
        raise StructuralError("empty family has no modulus")
    first = family[0]
    for f in family[1:]:
        _same_ends(first, f)
    sup_img = np.max(np.stack([f.image_distances() for f in family]), axis=0)
    return _modulus_from(first.source.dist, sup_img)
