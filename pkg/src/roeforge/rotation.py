"""Rotation paths Rot_sigma(t) and the closeness homotopy built from them.

For an involution sigma of an ordered index set, Rot_sigma(t) is the identity on
fixed points and, on each swapped pair lo < hi, the plane rotation

    [[ cos(pi t/2),  sin(pi t/2)],
     [-sin(pi t/2),  cos(pi t/2)]]

Rot(0) = I and Rot(1) is a signed permutation: e_lo -> -e_hi, e_hi -> +e_lo.
The order only decides where the minus sign goes.  The closeness homotopy uses
an order in which every destination point precedes its source, so that Rot(1)
carries each source basis vector to +(destination) and the endpoint is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coarse_maps import PointMap, closeness_distance
from .metric_space import _freeze_label
from .report import StructuralError, VerificationReport
from .roe_matrix import BlockMatrix, IndexSpace, _expand, propagation, pushforward

DEFAULT_SAMPLES = 21


def t_grid(samples: int = DEFAULT_SAMPLES) -> list[float]:
    """Equispaced samples of [0, 1]; both endpoints are always included."""
    if samples < 2:
        raise ValueError("need at least two samples")
    return [k / (samples - 1) for k in range(samples)]


def cos_sin(t: float) -> tuple[float, float]:
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t={t} is outside [0, 1]")
    # exact endpoints: cos(pi/2) would otherwise leave 6e-17 behind
    if t == 0.0:
        return 1.0, 0.0
    if t == 1.0:
        return 0.0, 1.0
    a = math.pi * t / 2
    return math.cos(a), math.sin(a)


@dataclass(frozen=True, eq=False)
class Involution:
    """sigma as an array of positions, plus the enumeration rank used by the rotation formula."""

    labels: tuple
    sigma: np.ndarray
    rank: np.ndarray = None

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=np.intp)
        n = len(self.labels)
        if sigma.shape != (n,) or (n and (sigma.min() < 0 or sigma.max() >= n)):
            raise StructuralError("sigma must map positions to positions")
        if not np.array_equal(sigma[sigma], np.arange(n)):
            raise StructuralError("sigma o sigma != id")
        rank = np.arange(n) if self.rank is None else np.asarray(self.rank, dtype=np.intp)
        if sorted(rank.tolist()) != list(range(n)):
            raise StructuralError("rank must be a permutation of 0..n-1")
        object.__setattr__(self, "labels", tuple(_freeze_label(v) for v in self.labels))
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "rank", rank)

    @classmethod
    def identity(cls, labels: Sequence) -> Involution:
        return cls(tuple(labels), np.arange(len(labels)))

    @classmethod
    def from_mapping(cls, labels: Sequence, mapping, rank=None) -> Involution:
        labels = tuple(_freeze_label(v) for v in labels)
        pos = {lab: i for i, lab in enumerate(labels)}
        get = mapping if callable(mapping) else (lambda lab: mapping.get(lab, lab))
        sigma = [pos[_freeze_label(get(lab))] for lab in labels]
        return cls(labels, np.array(sigma, dtype=np.intp), rank)

    def __call__(self, label):
        i = self.labels.index(_freeze_label(label))
        return self.labels[self.sigma[i]]

    @property
    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Swapped pairs as (lo, hi) position arrays with rank[lo] < rank[hi]."""
        i = np.arange(len(self.labels))
        lo = i[self.rank[i] < self.rank[self.sigma]]
        return lo, self.sigma[lo]

    def moved(self) -> np.ndarray:
        return np.flatnonzero(self.sigma != np.arange(len(self.labels)))

    def to_json(self) -> dict:
        doc = {"labels": list(self.labels), "sigma": [self.labels[j] for j in self.sigma]}
        if not np.array_equal(self.rank, np.arange(len(self.labels))):
            doc["order"] = self.rank.tolist()
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> Involution:
        labels = [_freeze_label(v) for v in doc["labels"]]
        images = [_freeze_label(v) for v in doc["sigma"]]
        if len(images) != len(labels):
            raise StructuralError("'sigma' must list one image per label")
        return cls.from_mapping(labels, dict(zip(labels, images)), doc.get("order"))


def rotation_matrix(inv: Involution, t: float) -> np.ndarray:
    """Rot_sigma(t) as a dense real matrix, entry by entry from the five-case formula."""
    c, s = cos_sin(t)
    n = len(inv.labels)
    R = np.zeros((n, n))
    for x1 in range(n):
        x2 = inv.sigma[x1]
        if x2 == x1:
            R[x1, x1] = 1.0
        else:
            R[x1, x1] = c
            R[x1, x2] = s if inv.rank[x2] > inv.rank[x1] else -s
    return R


class RotationPath:
    def __init__(self, inv: Involution):
        self.involution = inv

    def __call__(self, t: float) -> np.ndarray:
        return rotation_matrix(self.involution, t)

    def as_block_matrix(self, t: float, index, d: int = 1) -> BlockMatrix:
        index = IndexSpace.of(index)
        if index.labels != self.involution.labels:
            raise StructuralError("involution and index space enumerate different labels")
        return BlockMatrix(index, d, np.kron(self(t), np.eye(d)))


def conjugate(inv: Involution, t: float, m: BlockMatrix) -> BlockMatrix:
    """Rot(t) m Rot(t)* with Rot acting blockwise, using only the swapped rows and columns."""
    if m.index.labels != inv.labels:
        raise StructuralError("involution and matrix enumerate different labels")
    c, s = cos_sin(t)
    lo, hi = inv.pairs
    if lo.size == 0 or s == 0.0:
        return m
    a, b = _expand(lo, m.d), _expand(hi, m.d)
    X = m.data.copy()
    ra, rb = X[a].copy(), X[b].copy()
    X[a] = c * ra + s * rb
    X[b] = -s * ra + c * rb
    ca, cb = X[:, a].copy(), X[:, b].copy()
    X[:, a] = c * ca + s * cb
    X[:, b] = -s * ca + c * cb
    return BlockMatrix(m.index, m.d, X)


def rotation_propagation(inv: Involution, space) -> float:
    """max_x dist(x, sigma(x)); 0 when sigma is the identity."""
    index = IndexSpace.of(space)
    if index.labels != inv.labels:
        raise StructuralError("involution and space enumerate different labels")
    if not len(inv.labels):
        return 0.0
    return float(index.pdist[np.arange(len(inv.labels)), inv.sigma].max())


def coordinate_swap(index: IndexSpace, coord: int, key: int, src, dst,
                    order: str = "adapted") -> Involution:
    """Involution of a product index set that changes a single coordinate.

    With k the value of coordinate ``key``, an index whose coordinate ``coord``
    equals src[k] gets dst[k] there and vice versa; everything else is fixed.
    Coordinates count factors from the outer one (0).

    order="adapted" ranks each destination index just before its source so that
    Rot(1) maps every source basis vector to +(destination); "lexicographic"
    keeps the plain enumeration of the index space.
    """
    dims = (len(index.outer),) + tuple(len(f) for f in index.inner)
    pos = np.arange(len(index))
    coords = np.array(np.unravel_index(pos, dims)) if len(pos) else np.zeros((len(dims), 0), np.intp)
    k = coords[key]
    s = np.asarray(src, dtype=np.intp)[k]
    t = np.asarray(dst, dtype=np.intp)[k]
    cur = coords[coord]
    moved_src = (cur == s) & (s != t)
    moved_dst = (cur == t) & (s != t)
    new = coords.copy()
    new[coord, moved_src] = t[moved_src]
    new[coord, moved_dst] = s[moved_dst]
    sigma = np.ravel_multi_index(tuple(new), dims) if len(pos) else pos
    rank = pos.copy()
    if order == "adapted":
        late = moved_dst & (sigma < pos)
        rank[late], rank[sigma[late]] = sigma[late], pos[late]
    elif order != "lexicographic":
        raise ValueError(f"unknown order {order!r}")
    return Involution(index.labels, sigma, rank)


def swap_involution(index: IndexSpace, f: PointMap, g: PointMap, order: str = "adapted") -> Involution:
    """sigma on Y x X (x inner factors) swapping (f(x), x, ...) with (g(x), x, ...)."""
    if index.outer != f.target or len(index.inner) == 0 or index.inner[0] != f.source.labels:
        raise StructuralError("index space is not Y x X for these maps")
    return coordinate_swap(index, 0, 1, f.idx, g.idx, order)


@dataclass(eq=False)
class ClosenessPath:
    """Samples of eta(t) = Rot(t) f_+m Rot(t)* connecting f_+m to g_+m."""

    f: PointMap
    g: PointMap
    m: BlockMatrix
    start: BlockMatrix
    involution: Involution
    ts: list
    values: list = field(default_factory=list)

    def at(self, t: float) -> BlockMatrix:
        return conjugate(self.involution, t, self.start)

    @property
    def index(self) -> IndexSpace:
        return self.start.index


def closeness_homotopy(f: PointMap, g: PointMap, m: BlockMatrix, ts: Sequence[float] | None = None,
                       order: str = "adapted") -> ClosenessPath:
    if f.source != g.source or f.target != g.target:
        raise StructuralError("maps must share source and target")
    ts = list(t_grid() if ts is None else ts)
    A = pushforward(f, m)
    inv = swap_involution(A.index, f, g, order)
    path = ClosenessPath(f, g, m, A, inv, ts)
    path.values = [path.at(t) for t in ts]
    return path


def propagation_bound_check(path: ClosenessPath, f: PointMap = None, g: PointMap = None,
                            m: BlockMatrix = None) -> VerificationReport:
    f = path.f if f is None else f
    g = path.g if g is None else g
    m = path.m if m is None else m
    rep = VerificationReport(title="closeness homotopy propagation")
    close = closeness_distance(f, g)
    base = propagation(pushforward(f, m))
    bound = base + 2 * close
    rot_prop = rotation_propagation(path.involution, path.index)
    rep.expect("prop(Rot) <= sup dist(f, g)", rot_prop <= close, measured=rot_prop, bound=close)
    props = [propagation(v) for v in path.values]
    worst = int(np.argmax(props)) if props else 0
    bad = [t for t, p in zip(path.ts, props) if p > bound]
    rep.expect("prop(eta(t)) <= prop(f_+m) + 2 sup dist(f, g)", not bad,
               measured=props[worst] if props else 0.0, bound=bound,
               witness=bad[0] if bad else None)
    rep.info("min slack", measured=bound - max(props, default=0.0))
    return rep


def endpoint_check(path: ClosenessPath, atol: float = 1e-12) -> VerificationReport:
    rep = VerificationReport(title="closeness homotopy endpoints")
    start = pushforward(path.f, path.m)
    end = pushforward(path.g, path.m)
    e0 = path.at(0.0).distance(start)
    e1 = path.at(1.0).distance(end)
    rep.expect("eta(0) = f_+m exactly", e0 == 0.0, measured=e0, bound=0.0)
    rep.expect("eta(1) = g_+m", e1 <= atol, measured=e1, bound=atol)
    return rep


def constancy_hypothesis(f: PointMap, g: PointMap, y1, y2) -> bool:
    """f = g on f^-1{y1, y2} u g^-1{y1, y2}."""
    for y in (y1, y2):
        if y not in f.target:
            raise KeyError(f"unknown point {y!r}")
    xs = set(f.preimage((y1, y2))) | set(g.preimage((y1, y2)))
    return all(f(x) == g(x) for x in xs)


def block_variation(path: ClosenessPath, y1, y2) -> float:
    """Largest entrywise spread of the (y1, y2) outer block over the sampled path."""
    blocks = np.stack([v.outer_block(y1, y2) for v in path.values])
    if blocks.size == 0:
        return 0.0
    return float(max(np.ptp(blocks.real, axis=0).max(), np.ptp(blocks.imag, axis=0).max()))


def constancy_check(path: ClosenessPath, f: PointMap, g: PointMap, y1, y2,
                    atol: float = 1e-12) -> VerificationReport:
    rep = VerificationReport(title=f"constancy of block ({y1!r}, {y2!r})")
    spread = block_variation(path, y1, y2)
    if constancy_hypothesis(f, g, y1, y2):
        rep.expect("block constant in t", spread <= atol, measured=spread, bound=atol,
                   witness=(y1, y2))
    else:
        rep.add("block constant in t", "skipped", measured=spread,
                detail="hypothesis not met: f != g on the fibres of {y1, y2}")
    return rep
