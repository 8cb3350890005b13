"""Seeded random instances: spaces, maps, matrices, involutions, coarse homotopies.

Every generated distance is an integer or a multiple of 1/8, so sums are exact
in double precision and the exact metric validator always accepts the output.
"""
from __future__ import annotations

import zlib
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .coarse_maps import PointMap
from .cylinder import CoarseHomotopyData, build_cylinder
from .metric_space import FiniteMetricSpace, grid, line
from .roe_matrix import BlockMatrix, IndexSpace
from .rotation import Involution

SPACE_KINDS = ("line", "grid", "tree", "lattice")
MAP_KINDS = ("random-map", "shift", "collapse")


@dataclass
class SuiteConfig:
    seed: int = 0
    space_kinds: list = field(default_factory=lambda: list(SPACE_KINDS))
    map_kinds: list = field(default_factory=lambda: list(MAP_KINDS))
    max_points: int = 30
    max_block_dim: int = 4
    density: float = 0.5
    propagation_cap: float | None = None
    t_samples: int = 21
    # sizes for the sweeps that build Y x X (or Z x Y x X) index sets
    max_pushforward_points: int = 12
    max_functor_points: int = 5
    max_base_points: int = 15
    max_target_points: int = 12
    max_levels: int = 12
    max_moved_points: int = 12
    counts: dict = field(default_factory=lambda: {
        "metric": 40, "products": 60, "norm": 60, "pushforward": 30, "rotation": 20,
        "closeness": 20, "functoriality": 10, "identity": 10, "corner": 10, "homotopy": 5,
    })
    tolerances: dict = field(default_factory=lambda: {
        "identity": 1e-12, "norm": 1e-9, "isometry": 1e-9, "singular": 1e-10,
    })

    def rng(self, stream: str = "") -> np.random.Generator:
        """Independent generator per named stream, fixed by the seed."""
        return np.random.default_rng([self.seed & (2**64 - 1), zlib.crc32(stream.encode())])

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> SuiteConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config field(s): {', '.join(sorted(unknown))}")
        cfg = cls()
        for key, value in doc.items():
            if key in ("counts", "tolerances"):
                merged = dict(getattr(cfg, key))
                merged.update(value)
                value = merged
            setattr(cfg, key, value)
        return cfg


# spaces -----------------------------------------------------------------

def random_tree(rng: np.random.Generator, n: int) -> FiniteMetricSpace:
    """Shortest-path metric of a random tree with integer edge weights 1..3."""
    w = np.zeros((n, n))
    for child in range(1, n):
        parent = int(rng.integers(child))
        w[parent, child] = w[child, parent] = int(rng.integers(1, 4))
    dist = shortest_path(w, directed=False) if n > 1 else np.zeros((1, 1))
    return FiniteMetricSpace(list(range(n)), dist)


def perturbed_lattice(rng: np.random.Generator, n: int) -> FiniteMetricSpace:
    """Integer lattice points nudged by multiples of 1/8 (less than 1/2), with the l1 metric."""
    cols = int(np.ceil(np.sqrt(n)))
    base = np.array([(i // cols, i % cols) for i in range(n)], dtype=float)
    pts = base + rng.integers(-3, 4, size=base.shape) / 8.0
    dist = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
    return FiniteMetricSpace(list(range(n)), dist)


def random_space(rng: np.random.Generator, kind: str, n: int) -> FiniteMetricSpace:
    if kind == "line":
        return line(n)
    if kind == "grid":
        rows = max(1, int(np.floor(np.sqrt(n))))
        return grid(rows, max(1, n // rows))
    if kind == "tree":
        return random_tree(rng, n)
    if kind == "lattice":
        return perturbed_lattice(rng, n)
    raise KeyError(f"unknown space generator {kind!r}")


def any_space(rng: np.random.Generator, kinds, lo: int, hi: int) -> FiniteMetricSpace:
    kind = kinds[int(rng.integers(len(kinds)))]
    return random_space(rng, kind, int(rng.integers(lo, hi + 1)))


# maps -------------------------------------------------------------------

def random_map(rng: np.random.Generator, source, target, kind: str = "random-map") -> PointMap:
    n, k = len(source), len(target)
    if kind == "random-map":
        idx = rng.integers(k, size=n)
    elif kind == "shift":
        s = int(rng.integers(-2, 3))
        idx = np.clip(np.arange(n) + s, 0, k - 1)
    elif kind == "collapse":
        c = int(rng.integers(1, 4))
        idx = np.minimum(np.arange(n) // c, k - 1)
    else:
        raise KeyError(f"unknown map generator {kind!r}")
    return PointMap(source, target, [target.labels[i] for i in idx])


def nearby_map(rng: np.random.Generator, f: PointMap, moves: int | None = None) -> PointMap:
    """A map agreeing with f except at a few random points."""
    n = len(f.source)
    vals = list(f.values)
    moves = int(rng.integers(0, n + 1)) if moves is None else moves
    for i in rng.choice(n, size=min(moves, n), replace=False):
        vals[i] = f.target.labels[int(rng.integers(len(f.target)))]
    return PointMap(f.source, f.target, vals)


# matrices ---------------------------------------------------------------

def random_matrix(rng: np.random.Generator, index, d: int = 1, density: float = 0.5,
                  prop_cap: float | None = None) -> BlockMatrix:
    """Complex Gaussian blocks on a random subset of pairs within propagation prop_cap."""
    index = IndexSpace.of(index)
    n = len(index)
    if prop_cap is None:
        radii = np.unique(index.pdist)
        prop_cap = float(radii[int(rng.integers(len(radii)))])
    mask = (index.pdist <= prop_cap) & (rng.random((n, n)) < density)
    data = (rng.standard_normal((n * d, n * d)) + 1j * rng.standard_normal((n * d, n * d)))
    data *= np.kron(mask, np.ones((d, d)))
    return BlockMatrix(index, d, data)


def random_involution(rng: np.random.Generator, labels, max_moved: int = 12) -> Involution:
    n = len(labels)
    pairs = int(rng.integers(0, min(max_moved, n) // 2 + 1))
    chosen = rng.choice(n, size=2 * pairs, replace=False)
    sigma = np.arange(n)
    for a, b in chosen.reshape(-1, 2):
        sigma[a], sigma[b] = b, a
    return Involution(tuple(labels), sigma)


# homotopies ---------------------------------------------------------------

def random_homotopy(rng: np.random.Generator, X: FiniteMetricSpace, Y: FiniteMetricSpace,
                    max_levels: int = 12) -> CoarseHomotopyData:
    """H walks the column over each x through Y in random steps of length <= twice the minimum gap."""
    p = rng.integers(0, max_levels, size=len(X))
    cyl = build_cylinder(X, p)
    off = Y.dist[Y.dist > 0]
    radius = float(np.min(off)) * 2 if off.size else 0.0
    values = {}
    for x, px in zip(X.labels, p):
        y = int(rng.integers(len(Y)))
        for level in range(1, px + 2):
            values[(x, level)] = Y.labels[y]
            near = np.flatnonzero(Y.dist[y] <= radius)
            y = int(near[int(rng.integers(len(near)))])
    H = PointMap(cyl.space, Y, [values[pt] for pt in cyl.space.labels])
    return CoarseHomotopyData.from_H(cyl, H)


def documented_homotopy() -> CoarseHomotopyData:
    """Line {0..4}, p(x) = x, H(x, n) = max(x - n + 1, 0): from the identity to the constant 0."""
    X = line(5)
    cyl = build_cylinder(X, [0, 1, 2, 3, 4])
    H = PointMap.from_function(cyl.space, X, lambda xn: max(xn[0] - xn[1] + 1, 0))
    return CoarseHomotopyData.from_H(cyl, H)


# registry ---------------------------------------------------------------

def generate_instance(cfg: SuiteConfig, kind: str, rng: np.random.Generator | None = None, **params):
    """Build one instance of a registered kind; deterministic under ``cfg.seed``."""
    rng = cfg.rng(kind) if rng is None else rng
    if kind in SPACE_KINDS:
        n = params.get("size") or int(rng.integers(1, cfg.max_points + 1))
        if kind == "grid" and "rows" in params:
            return grid(params["rows"], params.get("cols", params["rows"]))
        return random_space(rng, kind, n)
    if kind == "space":
        return any_space(rng, cfg.space_kinds, params.get("min_size", 1),
                         params.get("size", cfg.max_points))
    if kind in MAP_KINDS:
        return random_map(rng, params["source"], params["target"], kind)
    if kind == "matrix":
        d = params.get("d") or int(rng.integers(1, cfg.max_block_dim + 1))
        return random_matrix(rng, params["index"], d, params.get("density", cfg.density),
                             params.get("prop_cap", cfg.propagation_cap))
    if kind == "involution":
        return random_involution(rng, params["labels"], params.get("max_moved", cfg.max_moved_points))
    if kind == "homotopy":
        return random_homotopy(rng, params["base"], params["target"],
                               params.get("max_levels", cfg.max_levels))
    raise KeyError(f"unknown generator {kind!r}")
