"""Finite block matrices with propagation: the desk-scale model of L(B, X).

A :class:`BlockMatrix` is indexed by an :class:`IndexSpace` and carries complex
d x d blocks.  The coefficient algebra B is the full matrix algebra M_d; the
compact operators are modelled by enlarging d, and the stabilisation
l2(X) (x) l2(X) ~ l2(X) is modelled by explicit re-enumeration of indices.

Product index sets Y x X (or Z x Y x X) measure propagation with the metric of
the first factor only; the remaining factors index the entries of a coefficient
and never contribute to propagation.

Storage is a dense flattened (n*d, n*d) array whose position for
(index i, coordinate a) is i*d + a.  A block counts as absent when every entry
is below PRUNE in absolute value; such blocks are zeroed on construction so
that round-off never inflates propagation.
"""
from __future__ import annotations

from itertools import product
from typing import Callable, Mapping, Sequence

import numpy as np

from .coarse_maps import PointMap
from .metric_space import FiniteMetricSpace, _freeze_label, max_ball_size
from .report import StructuralError

PRUNE = 1e-14


class IndexSpace:
    """Index set of a block matrix together with its propagation (pseudo)metric."""

    __slots__ = ("outer", "inner", "labels", "outer_pos", "pdist", "_pos")

    def __init__(self, outer: FiniteMetricSpace, inner: Sequence[Sequence] = ()):
        self.outer = outer
        self.inner = tuple(tuple(_freeze_label(v) for v in f) for f in inner)
        width = int(np.prod([len(f) for f in self.inner])) if self.inner else 1
        if self.inner:
            self.labels = tuple((y, *rest) for y in outer.labels for rest in product(*self.inner))
        else:
            self.labels = outer.labels
        self.outer_pos = np.repeat(np.arange(len(outer)), width)
        self.pdist = outer.dist[np.ix_(self.outer_pos, self.outer_pos)]
        self._pos = {lab: i for i, lab in enumerate(self.labels)}

    @classmethod
    def of(cls, space) -> IndexSpace:
        return space if isinstance(space, IndexSpace) else cls(space)

    @property
    def width(self) -> int:
        """Number of positions sharing one outer label."""
        return len(self.labels) // max(len(self.outer), 1)

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, IndexSpace):
            return NotImplemented
        return self.outer == other.outer and self.inner == other.inner

    def __hash__(self) -> int:
        return hash((self.outer, self.inner))

    def __repr__(self) -> str:
        dims = " x ".join(str(len(f)) for f in ((self.outer.labels,) + self.inner))
        return f"IndexSpace({dims})"

    def position(self, label) -> int:
        try:
            return self._pos[_freeze_label(label)]
        except KeyError:
            raise KeyError(f"unknown index {label!r}") from None

    def outer_slice(self, y) -> slice:
        i = self.outer.index(y)
        w = self.width
        return slice(i * w, (i + 1) * w)

    def to_json(self) -> dict:
        if not self.inner:
            return self.outer.to_json()
        return {"outer": self.outer.to_json(), "inner": [list(f) for f in self.inner]}

    @classmethod
    def from_json(cls, doc: dict) -> IndexSpace:
        if "outer" in doc:
            return cls(FiniteMetricSpace.from_json(doc["outer"]), doc.get("inner", ()))
        return cls(FiniteMetricSpace.from_json(doc))


def _expand(positions: np.ndarray, d: int) -> np.ndarray:
    return (np.asarray(positions)[:, None] * d + np.arange(d)).ravel()


class BlockMatrix:
    """Immutable block matrix over an index space with d x d complex blocks."""

    __slots__ = ("index", "d", "data")

    def __init__(self, index, d: int, data):
        index = IndexSpace.of(index)
        if d < 1:
            raise StructuralError("block dimension must be >= 1")
        data = np.array(data, dtype=complex)
        size = len(index) * d
        if data.shape != (size, size):
            raise StructuralError(f"expected a {size}x{size} array, got {data.shape}")
        n = len(index)
        view = data.reshape(n, d, n, d)
        small = np.abs(view).max(axis=(1, 3)) < PRUNE if n else np.zeros((0, 0), bool)
        view[small[:, None, :, None].repeat(d, 1).repeat(d, 3)] = 0
        data.flags.writeable = False
        self.index = index
        self.d = d
        self.data = data

    # construction helpers -------------------------------------------------

    @classmethod
    def zeros(cls, index, d: int = 1) -> BlockMatrix:
        n = len(IndexSpace.of(index)) * d
        return cls(index, d, np.zeros((n, n), complex))

    @classmethod
    def identity(cls, index, d: int = 1) -> BlockMatrix:
        n = len(IndexSpace.of(index)) * d
        return cls(index, d, np.eye(n, dtype=complex))

    @classmethod
    def from_blocks(cls, index, d: int, blocks: Mapping) -> BlockMatrix:
        """``blocks`` maps (row label, column label) to a d x d array (or scalar if d == 1)."""
        index = IndexSpace.of(index)
        n = len(index)
        data = np.zeros((n * d, n * d), complex)
        for (i, j), b in blocks.items():
            b = np.asarray(b, dtype=complex).reshape(d, d)
            pi, pj = index.position(i), index.position(j)
            data[pi * d:(pi + 1) * d, pj * d:(pj + 1) * d] = b
        return cls(index, d, data)

    # inspection -----------------------------------------------------------

    @property
    def blockview(self) -> np.ndarray:
        """(n, n, d, d) view: blockview[i, j] is the block at positions (i, j)."""
        n = len(self.index)
        return self.data.reshape(n, self.d, n, self.d).transpose(0, 2, 1, 3)

    def support(self) -> np.ndarray:
        n = len(self.index)
        if n == 0:
            return np.zeros((0, 0), bool)
        return np.any(self.data.reshape(n, self.d, n, self.d) != 0, axis=(1, 3))

    def block(self, i, j) -> np.ndarray:
        pi, pj = self.index.position(i), self.index.position(j)
        d = self.d
        return self.data[pi * d:(pi + 1) * d, pj * d:(pj + 1) * d]

    def blocks(self) -> dict:
        lab = self.index.labels
        return {(lab[i], lab[j]): self.blockview[i, j].copy() for i, j in np.argwhere(self.support())}

    def outer_block(self, y1, y2) -> np.ndarray:
        """The entry of this matrix at outer labels (y1, y2), an element of the coefficient algebra."""
        s1, s2 = self.index.outer_slice(y1), self.index.outer_slice(y2)
        d = self.d
        return self.data[s1.start * d:s1.stop * d, s2.start * d:s2.stop * d]

    def max_block_norm(self) -> float:
        if len(self.index) == 0:
            return 0.0
        return float(np.linalg.norm(self.blockview, ord=2, axis=(2, 3)).max())

    def __repr__(self) -> str:
        return f"BlockMatrix({self.index!r}, d={self.d}, nnz_blocks={int(self.support().sum())})"

    # algebra --------------------------------------------------------------

    def _compatible(self, other: BlockMatrix) -> None:
        if not isinstance(other, BlockMatrix):
            raise TypeError("expected a BlockMatrix")
        if other.d != self.d or other.index != self.index:
            raise StructuralError("block matrices live over different index spaces or block sizes")

    def __add__(self, other: BlockMatrix) -> BlockMatrix:
        self._compatible(other)
        return BlockMatrix(self.index, self.d, self.data + other.data)

    def __sub__(self, other: BlockMatrix) -> BlockMatrix:
        self._compatible(other)
        return BlockMatrix(self.index, self.d, self.data - other.data)

    def __neg__(self) -> BlockMatrix:
        return BlockMatrix(self.index, self.d, -self.data)

    def __matmul__(self, other: BlockMatrix) -> BlockMatrix:
        self._compatible(other)
        return BlockMatrix(self.index, self.d, self.data @ other.data)

    def __mul__(self, c) -> BlockMatrix:
        if isinstance(c, BlockMatrix):
            return NotImplemented
        return BlockMatrix(self.index, self.d, complex(c) * self.data)

    __rmul__ = __mul__

    @property
    def H(self) -> BlockMatrix:
        return BlockMatrix(self.index, self.d, self.data.conj().T)

    def allclose(self, other: BlockMatrix, atol: float = 1e-12) -> bool:
        self._compatible(other)
        return bool(np.all(np.abs(self.data - other.data) <= atol))

    def distance(self, other: BlockMatrix) -> float:
        """Max entrywise absolute difference."""
        self._compatible(other)
        if self.data.size == 0:
            return 0.0
        return float(np.abs(self.data - other.data).max())

    def to_json(self) -> dict:
        blocks = {}
        for i, j in np.argwhere(self.support()):
            b = self.blockview[i, j]
            blocks[f"{i},{j}"] = [[[float(v.real), float(v.imag)] for v in row] for row in b]
        return {"index": self.index.to_json(), "d": self.d, "blocks": blocks}

    @classmethod
    def from_json(cls, doc: dict, index: IndexSpace | None = None) -> BlockMatrix:
        if index is None:
            index = IndexSpace.from_json(doc["index"])
        d = int(doc.get("d", 1))
        n = len(index)
        data = np.zeros((n * d, n * d), complex)
        for key, rows in doc.get("blocks", {}).items():
            try:
                i, j = (int(v) for v in key.split(","))
            except ValueError:
                raise StructuralError(f"block key {key!r} is not 'i,j'") from None
            if not (0 <= i < n and 0 <= j < n):
                raise StructuralError(f"block key {key!r} out of range for {n} indices")
            b = _parse_block(rows, d, key)
            data[i * d:(i + 1) * d, j * d:(j + 1) * d] = b
        return cls(index, d, data)


def _parse_block(rows, d: int, key: str) -> np.ndarray:
    if d == 1 and not isinstance(rows, list):
        rows = [[rows]]
    if len(rows) != d or any(len(r) != d for r in rows):
        raise StructuralError(f"block {key!r} is not {d}x{d}")
    out = np.zeros((d, d), complex)
    for a, row in enumerate(rows):
        for b, v in enumerate(row):
            out[a, b] = complex(v[0], v[1]) if isinstance(v, list) else complex(v)
    return out


# module-level operations -------------------------------------------------

def multiply(m1: BlockMatrix, m2: BlockMatrix) -> BlockMatrix:
    return m1 @ m2


def add(m1: BlockMatrix, m2: BlockMatrix) -> BlockMatrix:
    return m1 + m2


def adjoint(m: BlockMatrix) -> BlockMatrix:
    return m.H


def scale(m: BlockMatrix, c) -> BlockMatrix:
    return m * c


def propagation(m: BlockMatrix) -> float:
    """max pdist(i, j) over stored (nonzero) blocks; 0 for the zero matrix."""
    supp = m.support()
    if not supp.any():
        return 0.0
    return float(m.index.pdist[supp].max())


def operator_norm(m: BlockMatrix) -> float:
    if m.data.size == 0:
        return 0.0
    return float(np.linalg.norm(m.data, 2))


def schur_constant(space: FiniteMetricSpace, R: float) -> int:
    """sup_x |B_R(x)|: rows and columns of a propagation-R matrix have at most this many blocks."""
    if R < 0:
        raise ValueError("R must be non-negative")
    return max_ball_size(space, R)


def _place(m: BlockMatrix, index: IndexSpace, positions: np.ndarray) -> BlockMatrix:
    """Copy m into a larger index space along an injective position map."""
    n = len(index) * m.d
    data = np.zeros((n, n), complex)
    rows = _expand(positions, m.d)
    data[np.ix_(rows, rows)] = m.data
    return BlockMatrix(index, m.d, data)


def pushforward(f: PointMap, m: BlockMatrix) -> BlockMatrix:
    """f_+ m over Y x X: the block at ((f(x1), x1), (f(x2), x2)) is m(x1, x2), all others vanish."""
    if m.index.outer != f.source:
        raise StructuralError("matrix is not indexed by the source of the map")
    new = IndexSpace(f.target, (m.index.outer.labels,) + m.index.inner)
    n_old = len(m.index)
    old = np.arange(n_old)
    positions = f.idx[m.index.outer_pos] * n_old + old
    return _place(m, new, positions)


def corner_embed(x0, b, index) -> BlockMatrix:
    """b (x) e_{x0,x0}: a single block b at (x0, x0)."""
    index = IndexSpace.of(index)
    b = np.atleast_2d(np.asarray(b, dtype=complex))
    if b.shape[0] != b.shape[1]:
        raise StructuralError("corner block must be square")
    if _freeze_label(x0) not in index._pos:
        raise KeyError(f"unknown point {x0!r}")
    return BlockMatrix.from_blocks(index, b.shape[0], {(x0, x0): b})


def corner_embed_matrix(m: BlockMatrix, outer: FiniteMetricSpace, x0) -> BlockMatrix:
    """Treat all of m as one coefficient and place it at the diagonal position (x0, x0) of ``outer``.

    Same as :func:`corner_embed` with b = m, but the result keeps the block size
    of m and records m's index as an inner factor.
    """
    new = IndexSpace(outer, (m.index.outer.labels,) + m.index.inner)
    positions = outer.index(x0) * len(m.index) + np.arange(len(m.index))
    return _place(m, new, positions)


def insert_coordinate(m: BlockMatrix, labels: Sequence, value, at: int = 0) -> BlockMatrix:
    """Add an inner factor with index set ``labels`` and put m at its fixed coordinate ``value``.

    ``at`` is the position among the inner factors (0 = directly after the outer one).
    Used to compare a Z x X matrix with a Z x Y x X one at Y-coordinate y0.
    """
    labels = tuple(_freeze_label(v) for v in labels)
    value = _freeze_label(value)
    if value not in labels:
        raise KeyError(f"unknown point {value!r}")
    inner = list(m.index.inner)
    inner.insert(at, labels)
    new = IndexSpace(m.index.outer, inner)
    positions = []
    for lab in m.index.labels:
        parts = list(lab) if m.index.inner else [lab]
        parts.insert(at + 1, value)
        positions.append(new.position(tuple(parts)))
    return _place(m, new, np.array(positions, dtype=np.intp))


def reindex(m: BlockMatrix, bij: Mapping | Callable, target: IndexSpace | None = None) -> BlockMatrix:
    """Conjugate by the permutation sending each index label to ``bij(label)`` in ``target``."""
    target = m.index if target is None else IndexSpace.of(target)
    get = bij if callable(bij) else (lambda lab: bij[lab])
    if len(target) != len(m.index):
        raise StructuralError("index sets have different sizes")
    positions = np.array([target.position(get(lab)) for lab in m.index.labels], dtype=np.intp)
    if len(np.unique(positions)) != len(positions):
        raise StructuralError("index map is not a bijection")
    return _place(m, target, positions)
