"""Finite discrete metric spaces: axiom validation, closed balls, growth profiles.

Distances are doubles compared exactly.  Inputs are user constants (or exact
integer/dyadic values produced by the generators), so no epsilon is applied.
"""
from __future__ import annotations

from typing import Hashable, Sequence

import numpy as np

from .report import StructuralError, ValidationReport

Label = Hashable


def _freeze_label(label):
    # JSON turns tuple labels into lists; lists are unhashable.
    if isinstance(label, list):
        return tuple(_freeze_label(v) for v in label)
    return label


class FiniteMetricSpace:
    """Labelled points with a distance matrix; the label order is the enumeration order."""

    __slots__ = ("labels", "dist", "_pos")

    def __init__(self, labels: Sequence[Label], dist):
        labels = tuple(_freeze_label(v) for v in labels)
        dist = np.array(dist, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            raise StructuralError(f"distance matrix must be square, got shape {dist.shape}")
        if dist.shape[0] != len(labels):
            raise StructuralError(
                f"distance matrix has dimension {dist.shape[0]} but there are {len(labels)} labels")
        pos = {}
        for i, lab in enumerate(labels):
            if lab in pos:
                raise StructuralError(f"duplicate label {lab!r}")
            pos[lab] = i
        dist.flags.writeable = False
        self.labels = labels
        self.dist = dist
        self._pos = pos

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label) -> bool:
        return _freeze_label(label) in self._pos

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.dist, other.dist)

    def __hash__(self) -> int:
        return hash((self.labels, self.dist.tobytes()))

    def __repr__(self) -> str:
        return f"FiniteMetricSpace({len(self)} points)"

    def index(self, label) -> int:
        try:
            return self._pos[_freeze_label(label)]
        except KeyError:
            raise KeyError(f"unknown point {label!r}") from None

    def d(self, x, y) -> float:
        return float(self.dist[self.index(x), self.index(y)])

    def scaled(self, factor: float) -> FiniteMetricSpace:
        return FiniteMetricSpace(self.labels, self.dist * factor)

    def to_json(self) -> dict:
        return {"labels": list(self.labels), "dist": self.dist.tolist()}

    @classmethod
    def from_json(cls, doc: dict) -> FiniteMetricSpace:
        return cls(doc["labels"], doc["dist"])


def line(n: int, step: float = 1.0) -> FiniteMetricSpace:
    """Points 0..n-1 on the real line, dist(i, j) = step * |i - j|."""
    idx = np.arange(n)
    return FiniteMetricSpace(list(range(n)), step * np.abs(idx[:, None] - idx[None, :]))


def grid(rows: int, cols: int) -> FiniteMetricSpace:
    """rows x cols integer grid with the l1 metric; labels are (r, c)."""
    pts = [(r, c) for r in range(rows) for c in range(cols)]
    a = np.array(pts, dtype=float).reshape(-1, 2)
    dist = np.abs(a[:, None, :] - a[None, :, :]).sum(axis=2)
    return FiniteMetricSpace(pts, dist)


def point() -> FiniteMetricSpace:
    return FiniteMetricSpace([0], [[0.0]])


def validate_metric(space: FiniteMetricSpace) -> ValidationReport:
    """Check every metric axiom exactly and report the first witness of each violation."""
    D = space.dist
    n = len(space)
    if D.shape != (n, n):
        raise StructuralError(f"distance matrix shape {D.shape} does not match {n} labels")
    lab = space.labels
    rep = ValidationReport(title="validate-space")

    bad = np.argwhere(~np.isfinite(D) | (D < 0))
    rep.expect("non-negative", bad.size == 0, measured=int(len(bad)),
               witness=None if bad.size == 0 else (lab[bad[0][0]], lab[bad[0][1]]))

    diag = np.flatnonzero(np.diag(D) != 0)
    rep.expect("zero diagonal", diag.size == 0, measured=int(diag.size),
               witness=None if diag.size == 0 else lab[diag[0]])

    iu = np.triu_indices(n, 1)
    asym = np.argwhere(np.triu(D != D.T, 1))
    rep.expect("symmetry", asym.size == 0, measured=int(len(asym)),
               witness=None if asym.size == 0 else (lab[asym[0][0]], lab[asym[0][1]]))

    off = D[iu]
    nonpos = np.argwhere(np.triu(D <= 0, 1) | np.tril(D <= 0, -1))
    rep.expect("positive off-diagonal", nonpos.size == 0, measured=int(len(nonpos)),
               witness=None if nonpos.size == 0 else (lab[nonpos[0][0]], lab[nonpos[0][1]]))

    # viol[i, j, k]: dist(i, k) > dist(i, j) + dist(j, k)
    viol = D[:, None, :] > D[:, :, None] + D[None, :, :]
    tri = np.argwhere(viol)
    rep.expect("triangle inequality", tri.size == 0, measured=int(len(tri)),
               witness=None if tri.size == 0 else tuple(lab[v] for v in tri[0]))

    if n > 1:
        rep.info("minimum gap", measured=float(off.min()))
    rep.info("points", measured=n)
    return rep


def ball(space: FiniteMetricSpace, x, R: float) -> frozenset:
    """Closed ball {y : dist(x, y) <= R}."""
    if R < 0:
        raise ValueError("radius must be non-negative")
    i = space.index(x)
    return frozenset(space.labels[j] for j in np.flatnonzero(space.dist[i] <= R))


def max_ball_size(space: FiniteMetricSpace, R: float) -> int:
    return int((space.dist <= R).sum(axis=1).max())


def growth_profile(space: FiniteMetricSpace) -> dict[float, int]:
    """Map every occurring distance R to sup_x |B_R(x)|."""
    D = space.dist
    radii = np.unique(D)
    # sorting each row lets searchsorted count ball sizes for all radii at once
    rows = np.sort(D, axis=1)
    counts = np.stack([np.searchsorted(r, radii, side="right") for r in rows])
    best = counts.max(axis=0)
    return {float(R): int(c) for R, c in zip(radii, best)}
