"""p-cylinders, their face inclusions, coarse homotopies and the sliced family f_n.

Levels are numbered from 1: the cylinder over x has points (x, 1) .. (x, p(x) + 1),
the bottom face is level 1 and the top face over x is level p(x) + 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coarse_maps import PointMap, equibornologous_modulus, expansion_modulus
from .metric_space import FiniteMetricSpace
from .report import StructuralError, VerificationReport


@dataclass(frozen=True, eq=False)
class PCylinder:
    base: FiniteMetricSpace
    p: tuple
    space: FiniteMetricSpace

    def top(self, x) -> int:
        return self.p[self.base.index(x)] + 1


def build_cylinder(X: FiniteMetricSpace, p: Sequence[int]) -> PCylinder:
    p = tuple(int(v) for v in p)
    if len(p) != len(X):
        raise StructuralError(f"p has {len(p)} entries for {len(X)} base points")
    if any(v < 0 for v in p):
        raise StructuralError("p must be non-negative")
    pts = [(x, n) for x, px in zip(X.labels, p) for n in range(1, px + 2)]
    base_i = np.array([X.index(x) for x, _ in pts], dtype=np.intp)
    lvl = np.array([n for _, n in pts], dtype=float)
    dist = X.dist[np.ix_(base_i, base_i)] + np.abs(lvl[:, None] - lvl[None, :])
    return PCylinder(X, p, FiniteMetricSpace(pts, dist))


def inclusions(cyl: PCylinder) -> tuple[PointMap, PointMap]:
    X = cyl.base
    i0 = PointMap(X, cyl.space, [(x, 1) for x in X.labels])
    i1 = PointMap(X, cyl.space, [(x, px + 1) for x, px in zip(X.labels, cyl.p)])
    return i0, i1


@dataclass(frozen=True, eq=False)
class CoarseHomotopyData:
    cylinder: PCylinder
    H: PointMap
    f: PointMap
    g: PointMap

    @classmethod
    def from_H(cls, cylinder: PCylinder, H: PointMap) -> CoarseHomotopyData:
        """Read the endpoint maps off the two faces of H."""
        if H.source != cylinder.space:
            raise StructuralError("H must be defined on the cylinder")
        X = cylinder.base
        f = PointMap(X, H.target, [H((x, 1)) for x in X.labels])
        g = PointMap(X, H.target, [H((x, px + 1)) for x, px in zip(X.labels, cylinder.p)])
        return cls(cylinder, H, f, g)

    @property
    def target(self) -> FiniteMetricSpace:
        return self.H.target

    def endpoint_report(self) -> VerificationReport:
        rep = VerificationReport(title="homotopy endpoints")
        if self.H.source != self.cylinder.space:
            rep.add("H defined on cylinder", "fail", detail="H.source is not the cylinder")
            return rep
        X = self.cylinder.base
        for name, m, level in (("H o i0 = f", self.f, lambda px: 1),
                               ("H o i1 = g", self.g, lambda px: px + 1)):
            bad = [x for x, px in zip(X.labels, self.cylinder.p)
                   if self.H((x, level(px))) != m(x)]
            rep.expect(name, not bad, measured=len(bad), witness=bad[:1] or None)
        return rep


def slice_family(data: CoarseHomotopyData, n_max: int) -> list[PointMap]:
    """f_1 .. f_{n_max} with f_n(x) = H(x, min(n, p(x) + 1))."""
    need = 1 + max(data.cylinder.p, default=0)
    if n_max < need:
        raise ValueError(f"n_max={n_max} is too small: the family is stationary only from "
                         f"n = 1 + max p = {need}")
    X = data.cylinder.base
    H = data.H
    return [PointMap(X, H.target, [H((x, min(n, px + 1))) for x, px in zip(X.labels, data.cylinder.p)])
            for n in range(1, n_max + 1)]


def stationarity_indices(family: Sequence[PointMap]) -> dict:
    """N(x): the first n with f_m(x) = f_n(x) for all later m in the family."""
    vals = np.stack([f.idx for f in family])  # (n, |X|)
    out = {}
    for j, x in enumerate(family[0].source.labels):
        col = vals[:, j]
        changes = np.flatnonzero(col[1:] != col[:-1])
        out[x] = int(changes[-1] + 2) if changes.size else 1
    return out


def visiting_sets(family: Sequence[PointMap]) -> dict:
    """For each y: {x : f_n(x) = y for some n}, i.e. the points whose slice path meets H^-1{y}."""
    X = family[0].source
    Y = family[0].target
    out = {y: set() for y in Y.labels}
    for f in family:
        for x, y in zip(X.labels, f.values):
            out[y].add(x)
    return out


def step_distances(family: Sequence[PointMap]) -> list[float]:
    """sup_x dist(f_n(x), f_{n+1}(x)) for each consecutive pair."""
    Y = family[0].target
    return [float(Y.dist[a.idx, b.idx].max()) if len(a.idx) else 0.0
            for a, b in zip(family, family[1:])]


def verify_family_properties(family: Sequence[PointMap], data: CoarseHomotopyData) -> VerificationReport:
    rep = VerificationReport(title="sliced family")
    X = data.cylinder.base
    p = np.array(data.cylinder.p, dtype=float)
    MH = expansion_modulus(data.H)

    # 1: one modulus for all n, controlled by H through dist(x,y) + |p(x) - p(y)|
    fam_mod = equibornologous_modulus(family)
    rep.expect("1 equibornologous modulus finite",
               all(np.isfinite(v) for v in fam_mod.table.values()),
               measured=fam_mod.table)
    sup_img = np.max(np.stack([f.image_distances() for f in family]), axis=0)
    cyl_gap = X.dist + np.abs(p[:, None] - p[None, :])
    bound = MH(cyl_gap)
    bad = np.argwhere(sup_img > bound)
    rep.expect("1 family modulus <= modulus(H)(dist + |p(x)-p(y)|)", bad.size == 0,
               measured=float((bound - sup_img).min()) if sup_img.size else 0.0,
               witness=None if bad.size == 0 else (X.labels[bad[0][0]], X.labels[bad[0][1]]),
               detail="measured = min slack")

    # 2: consecutive slices sit at cylinder distance <= 1
    steps = step_distances(family)
    step = max(steps, default=0.0)
    rep.expect("2 step distance <= modulus(H)(1)", step <= MH(1.0), measured=step, bound=MH(1.0),
               witness=None if step <= MH(1.0) else int(np.argmax(steps)) + 1)

    # 3: stationarity
    N = stationarity_indices(family)
    late = [x for x, px in zip(X.labels, data.cylinder.p) if N[x] > px + 1]
    rep.expect("3 stationary from level p(x)+1", not late, measured=N, witness=late[:1] or None)

    # 4: finitely many x visit each fiber of H
    visits = visiting_sets(family)
    rep.info("4 visiting set sizes", measured={y: len(s) for y, s in visits.items()})

    # 5: endpoints
    first_ok = family[0] == data.f
    rep.expect("5 f_1 = f", first_ok,
               witness=None if first_ok else next(x for x in X.labels if family[0](x) != data.f(x)))
    long_enough = len(family) >= 1 + max(data.cylinder.p, default=0)
    limit_ok = long_enough and family[-1] == data.g
    rep.expect("5 stationary limit = g", limit_ok,
               witness=None if limit_ok else ("family too short" if not long_enough else
                                              next(x for x in X.labels if family[-1](x) != data.g(x))))
    return rep
