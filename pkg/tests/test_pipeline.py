from __future__ import annotations

import numpy as np
import pytest

from roeforge.coarse_maps import PointMap
from roeforge.cylinder import CoarseHomotopyData, build_cylinder, slice_family
from roeforge.generators import documented_homotopy
from roeforge.metric_space import FiniteMetricSpace, line, point
from roeforge.pipeline import (build_chain, constancy_indices, demonstrate_propmult_gap,
                               verify_corner_lemma, verify_functoriality,
                               verify_homotopy_invariance, verify_identity_law)
from roeforge.roe_matrix import BlockMatrix, propagation


def rand_matrix(X, d=1, seed=0):
    rng = np.random.default_rng(seed)
    n = len(X) * d
    return BlockMatrix(X, d, rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def test_functoriality_identity_maps():
    X = line(3)
    ident = PointMap.identity(X)
    rep = verify_functoriality(ident, ident, [rand_matrix(X)])
    assert rep.passed, rep.to_text()


def test_functoriality_zero_matrix():
    X, Y = line(3), line(2)
    f = PointMap(X, Y, [0, 0, 1])
    g = PointMap(Y, Y, [1, 0])
    assert verify_functoriality(f, g, [BlockMatrix.zeros(X, 2)]).passed


def test_functoriality_collapsing_to_a_point():
    X = line(2)
    a = FiniteMetricSpace(["a"], [[0]])
    f = PointMap(X, a, ["a", "a"])
    g = PointMap.identity(a)
    rep = verify_functoriality(f, g, [rand_matrix(X, 2)], y0="a")
    assert rep.passed, rep.to_text()


def test_functoriality_random_maps():
    X, Y, Z = line(3), line(4), line(2)
    f = PointMap(X, Y, [3, 0, 3])
    g = PointMap(Y, Z, [1, 1, 0, 0])
    rep = verify_functoriality(f, g, [rand_matrix(X, 2, seed=s) for s in range(3)])
    assert rep.passed, rep.to_text()


def test_identity_law():
    assert verify_identity_law(point(), [rand_matrix(point())]).passed
    X = line(3)
    assert verify_identity_law(X, [BlockMatrix.identity(X, 2)]).passed
    assert verify_identity_law(X, [rand_matrix(X, seed=9)]).passed


def test_corner_lemma():
    assert verify_corner_lemma(2, [np.zeros((2, 2))]).passed
    assert verify_corner_lemma(3, [np.eye(3)]).passed
    rng = np.random.default_rng(5)
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert verify_corner_lemma(3, [b]).passed


def documented_N(y1, y2) -> int:
    lo = min(y1, y2)
    return 5 if lo <= 1 else 6 - lo


def brute_force_N(family, y1, y2) -> int:
    """Least N with {x : f_n(x) in {y1, y2}} and f_n on it frozen for n >= N."""
    n_max = len(family)
    for N in range(1, n_max + 1):
        ref = family[N - 1]
        S = {x for x in ref.source.labels if ref(x) in (y1, y2)}
        if all({x for x in ref.source.labels if f(x) in (y1, y2)} == S
               and all(f(x) == ref(x) for x in S) for f in family[N - 1:]):
            return N
    return n_max


def test_documented_instance_constancy_indices():
    data = documented_homotopy()
    family = slice_family(data, 5)
    assert [list(f.values) for f in family] == [
        [0, 1, 2, 3, 4], [0, 0, 1, 2, 3], [0, 0, 0, 1, 2], [0, 0, 0, 0, 1], [0, 0, 0, 0, 0]]
    N = constancy_indices(family)
    for (y1, y2), value in N.items():
        assert value == documented_N(y1, y2) == brute_force_N(family, y1, y2)


def test_documented_instance_chain():
    data = documented_homotopy()
    rep, chains = verify_homotopy_invariance(data, [rand_matrix(data.cylinder.base, 2, seed=1)])
    assert rep.passed, rep.to_text()
    chain = chains[0]
    assert chain.schedule(2.5) == (2, 0.5)
    assert chain.schedule(5.0) == (4, 1.0)
    us = [u for u, _ in chain.samples()]
    assert us == sorted(set(us))


def test_constant_homotopy_chain_is_constant():
    X = line(3)
    f = PointMap(X, X, [1, 1, 2])
    cyl = build_cylinder(X, [2, 1, 0])
    H = PointMap.from_function(cyl.space, X, lambda xn: f(xn[0]))
    data = CoarseHomotopyData.from_H(cyl, H)
    family = slice_family(data, 3)
    assert set(constancy_indices(family).values()) == {1}
    m = rand_matrix(X)
    chain = build_chain(family, m, [0.0, 0.5, 1.0])
    first = chain.at(1.0)
    assert all(v.distance(first) == 0 for _, v in chain.samples())
    assert verify_homotopy_invariance(data, [m])[0].passed


def test_zero_height_chain():
    X = line(2)
    cyl = build_cylinder(X, [0, 0])
    H = PointMap.from_function(cyl.space, X, lambda xn: xn[0])
    rep, chains = verify_homotopy_invariance(CoarseHomotopyData.from_H(cyl, H), [rand_matrix(X)])
    assert rep.passed
    assert chains[0].steps == []


def test_broken_endpoints_stop_early():
    data = documented_homotopy()
    bad = CoarseHomotopyData(data.cylinder, data.H, data.g, data.g)
    rep, chains = verify_homotopy_invariance(bad, [rand_matrix(data.cylinder.base)])
    assert not rep.passed and chains == []


def test_propmult_gap():
    rep = demonstrate_propmult_gap(0.5)
    assert rep.passed
    assert rep["prop(s s) <= prop(s) + prop(s)"].measured == 1.0
    assert rep["prop(s s) <= prop(s) + prop(s)"].bound == 1.0
    p12, p1sq = rep["prop(s s) <= prop(s) prop(s)"].measured
    assert (p12, p1sq) == (1.0, 0.25)
    # at unit scale the additive form is tight and the multiplicative one still fails
    unit = demonstrate_propmult_gap(1.0)
    assert unit["prop(s s) <= prop(s) + prop(s)"].measured == 2.0
    assert unit["prop(s s) <= prop(s) prop(s)"].measured == [2.0, 1.0]


def test_diagonal_products_have_zero_propagation():
    X = line(3)
    dm = BlockMatrix.from_blocks(X, 1, {(0, 0): 2.0, (2, 2): 1.0})
    assert propagation(dm @ dm) == 0
