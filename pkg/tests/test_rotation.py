from __future__ import annotations

import math

import numpy as np
import pytest

from roeforge.coarse_maps import PointMap
from roeforge.metric_space import FiniteMetricSpace, line, point
from roeforge.roe_matrix import BlockMatrix, propagation, pushforward
from roeforge.rotation import (Involution, closeness_homotopy, constancy_check, cos_sin,
                               endpoint_check, propagation_bound_check, rotation_matrix,
                               rotation_propagation)

R2 = math.sqrt(2) / 2


def swap01(n=2) -> Involution:
    return Involution.from_mapping(range(n), {0: 1, 1: 0})


def test_identity_involution_gives_identity():
    inv = Involution.identity(range(4))
    for t in (0.0, 0.3, 1.0):
        assert np.array_equal(rotation_matrix(inv, t), np.eye(4))


def test_quarter_and_full_rotation():
    assert np.allclose(rotation_matrix(swap01(), 0.5), [[R2, R2], [-R2, R2]], atol=1e-15)
    assert np.array_equal(rotation_matrix(swap01(), 1.0), [[0, 1], [-1, 0]])
    assert np.array_equal(rotation_matrix(swap01(), 0.0), np.eye(2))


def test_cos_sin_domain():
    assert cos_sin(0.0) == (1.0, 0.0)
    assert cos_sin(1.0) == (0.0, 1.0)
    with pytest.raises(ValueError):
        cos_sin(1.5)


def test_not_an_involution():
    with pytest.raises(ValueError):
        Involution(tuple(range(3)), np.array([1, 2, 0]))


def test_rotation_propagation():
    X = line(3)
    assert rotation_propagation(Involution.identity(X.labels), X) == 0
    assert rotation_propagation(Involution.from_mapping(X.labels, {0: 2, 2: 0}), X) == 2


def two_point_target(gap=3.0) -> FiniteMetricSpace:
    return FiniteMetricSpace(["a", "b"], [[0, gap], [gap, 0]])


def test_single_point_closeness_path():
    X, Y = point(), two_point_target()
    f, g = PointMap(X, Y, ["a"]), PointMap(X, Y, ["b"])
    c = 2.0 - 1.0j
    m = BlockMatrix.from_blocks(X, 1, {(0, 0): c})
    path = closeness_homotopy(f, g, m, ts=[0.0, 0.25, 0.5, 1.0])
    for t in path.ts:
        co, si = math.cos(math.pi * t / 2), math.sin(math.pi * t / 2)
        v = path.at(t)
        assert v.outer_block("a", "a")[0, 0] == pytest.approx(c * co * co, abs=1e-15)
        assert v.outer_block("b", "b")[0, 0] == pytest.approx(c * si * si, abs=1e-15)
        assert abs(v.outer_block("a", "b")[0, 0]) == pytest.approx(abs(c) * co * si, abs=1e-15)
    assert path.at(1.0).distance(pushforward(g, m)) == 0
    assert endpoint_check(path).passed
    props = [propagation(v) for v in path.values]
    assert props == [0.0, 3.0, 3.0, 0.0]
    rep = propagation_bound_check(path)
    assert rep.passed
    assert rep["prop(eta(t)) <= prop(f_+m) + 2 sup dist(f, g)"].bound == 6.0


def test_equal_maps_give_constant_path():
    rng = np.random.default_rng(0)
    X = line(3)
    f = PointMap.from_function(X, X, lambda x: 2 - x)
    m = BlockMatrix(X, 1, rng.standard_normal((3, 3)))
    path = closeness_homotopy(f, f, m)
    start = pushforward(f, m)
    assert all(v.distance(start) == 0 for v in path.values)


def test_zero_matrix_path():
    X = line(3)
    f = PointMap.identity(X)
    g = PointMap.constant(X, X, 0)
    path = closeness_homotopy(f, g, BlockMatrix.zeros(X, 2))
    assert all(not v.data.any() for v in path.values)


def test_constancy_on_agreeing_fibers():
    X = line(3)
    f = PointMap.identity(X)
    g = PointMap(X, X, [0, 2, 1])
    m = BlockMatrix.from_blocks(X, 1, {(0, 0): 1.0, (1, 1): 2.0, (2, 2): 5.0, (0, 1): 1.0})
    path = closeness_homotopy(f, g, m, ts=[0.0, 0.5, 1.0])
    rep = constancy_check(path, f, g, 0, 0)
    assert rep.passed and rep.checks[0].status == "pass"
    varying = constancy_check(path, f, g, 1, 1)
    assert varying.checks[0].status == "skipped"
    assert varying.checks[0].measured > 0.1


def test_constancy_outside_images_is_zero_block():
    X, Y = line(2), line(4)
    f = PointMap(X, Y, [0, 1])
    g = PointMap(X, Y, [1, 0])
    m = BlockMatrix(X, 1, np.ones((2, 2)))
    path = closeness_homotopy(f, g, m)
    rep = constancy_check(path, f, g, 3, 3)
    assert rep.passed
    assert not path.at(0.5).outer_block(3, 3).any()


def crossing_maps():
    X = line(2)
    Y = FiniteMetricSpace(["a", "b"], [[0, 1], [1, 0]])
    return PointMap(X, Y, ["a", "b"]), PointMap(X, Y, ["b", "a"])


def test_plain_order_can_flip_signs():
    # with the plain enumeration one off-diagonal block lands with the wrong sign
    f, g = crossing_maps()
    q = 2.0
    m = BlockMatrix.from_blocks(f.source, 1, {(0, 1): q})
    plain = closeness_homotopy(f, g, m, ts=[0.0, 1.0], order="lexicographic")
    assert plain.at(1.0).distance(pushforward(g, m)) == pytest.approx(2 * q)
    adapted = closeness_homotopy(f, g, m, ts=[0.0, 1.0])
    assert adapted.at(1.0).distance(pushforward(g, m)) == 0


def test_involution_json_round_trip():
    inv = Involution.from_mapping(["x", "y", "z"], {"x": "z", "z": "x"}, rank=[2, 0, 1])
    back = Involution.from_json(inv.to_json())
    assert back.labels == inv.labels
    assert np.array_equal(back.sigma, inv.sigma)
    assert np.array_equal(back.rank, inv.rank)
