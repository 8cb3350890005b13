from __future__ import annotations

import itertools
import math

import numpy as np
from hypothesis import given, settings, strategies as st

from roeforge.coarse_maps import (PointMap, closeness_distance, compose, expansion_modulus)
from roeforge.generators import random_involution, random_map, random_matrix, random_space
from roeforge.metric_space import FiniteMetricSpace, ball, growth_profile, validate_metric
from roeforge.roe_matrix import BlockMatrix, operator_norm, propagation, pushforward
from roeforge.rotation import conjugate, rotation_matrix

seeds = st.integers(0, 2**32 - 1)
kinds = st.sampled_from(["line", "grid", "tree", "lattice"])
sizes = st.integers(1, 9)


def space(seed, kind, n):
    return random_space(np.random.default_rng(seed), kind, n)


@given(seeds, kinds, sizes)
def test_generated_spaces_are_metrics(seed, kind, n):
    assert validate_metric(space(seed, kind, n)).passed


@given(seeds, kinds, sizes, st.floats(0, 6), st.floats(0, 6))
def test_balls_nest(seed, kind, n, r1, r2):
    X = space(seed, kind, n)
    lo, hi = sorted((r1, r2))
    for x in X.labels:
        assert ball(X, x, lo) <= ball(X, x, hi)


@given(seeds, kinds, sizes)
def test_growth_profile_monotone(seed, kind, n):
    prof = growth_profile(space(seed, kind, n))
    vals = [prof[r] for r in sorted(prof)]
    assert vals == sorted(vals) and vals[0] == 1


@given(seeds, sizes)
def test_triangle_violations_are_caught_with_a_real_witness(seed, n):
    rng = np.random.default_rng(seed)
    X = random_space(rng, "tree", max(n, 3))
    d = X.dist.copy()
    i, k = rng.choice(len(X), size=2, replace=False)
    d[i, k] = d[k, i] = d.max() * 3 + 1
    rep = validate_metric(FiniteMetricSpace(X.labels, d))
    a, b, c = rep["triangle inequality"].witness
    assert d[a, c] > d[a, b] + d[b, c]


@given(seeds, kinds, sizes)
def test_closeness_is_a_pseudometric(seed, kind, n):
    rng = np.random.default_rng(seed)
    X = random_space(rng, kind, n)
    f, g, h = (random_map(rng, X, X) for _ in range(3))
    assert closeness_distance(f, f) == 0
    assert closeness_distance(f, g) == closeness_distance(g, f)
    assert closeness_distance(f, h) <= closeness_distance(f, g) + closeness_distance(g, h)


@given(seeds, kinds, sizes)
def test_composed_modulus_is_dominated(seed, kind, n):
    rng = np.random.default_rng(seed)
    X = random_space(rng, kind, n)
    Y = random_space(rng, "tree", int(rng.integers(1, 8)))
    f, g = random_map(rng, X, Y), random_map(rng, Y, X)
    Mf, Mg, Mgf = expansion_modulus(f), expansion_modulus(g), expansion_modulus(compose(g, f))
    for N in Mgf.table:
        assert Mgf(N) <= Mg(Mf(N))


@given(seeds, kinds, sizes, st.integers(1, 3))
def test_propagation_subadditive(seed, kind, n, d):
    rng = np.random.default_rng(seed)
    X = random_space(rng, kind, n)
    a, b = random_matrix(rng, X, d), random_matrix(rng, X, d)
    assert propagation(a @ b) <= propagation(a) + propagation(b)
    assert propagation(a + b) <= max(propagation(a), propagation(b))
    assert propagation(a.H) == propagation(a)


@settings(max_examples=60)
@given(seeds, sizes, st.integers(1, 6), st.integers(1, 2))
def test_pushforward_is_an_isometric_star_homomorphism(seed, n, k, d):
    rng = np.random.default_rng(seed)
    X = random_space(rng, "tree", n)
    Y = random_space(rng, "line", k)
    f = random_map(rng, X, Y)
    a, b = random_matrix(rng, X, d), random_matrix(rng, X, d)
    P = lambda m: pushforward(f, m)
    assert P(a @ b).distance(P(a) @ P(b)) <= 1e-12
    assert P(a + b).distance(P(a) + P(b)) <= 1e-12
    assert P(a.H).distance(P(a).H) == 0
    assert math.isclose(operator_norm(P(a)), operator_norm(a), rel_tol=1e-9, abs_tol=1e-9)
    assert propagation(P(a)) <= expansion_modulus(f)(propagation(a))


@given(seeds, st.integers(1, 10), st.floats(0, 1), st.floats(0, 1))
def test_rotation_orthogonal_and_lipschitz(seed, n, t1, t2):
    inv = random_involution(np.random.default_rng(seed), list(range(n)))
    R1, R2 = rotation_matrix(inv, t1), rotation_matrix(inv, t2)
    assert np.allclose(R1 @ R1.T, np.eye(n), atol=1e-12)
    assert np.linalg.norm(R1 - R2, 2) <= math.pi / 2 * abs(t1 - t2) + 1e-12


@given(seeds, st.integers(1, 8), st.integers(1, 2), st.floats(0, 1))
def test_pairwise_conjugation_matches_dense_product(seed, n, d, t):
    rng = np.random.default_rng(seed)
    X = random_space(rng, "tree", n)
    inv = random_involution(rng, list(X.labels))
    m = random_matrix(rng, X, d)
    R = np.kron(rotation_matrix(inv, t), np.eye(d))
    assert np.allclose(conjugate(inv, t, m).data, R @ m.data @ R.T, atol=1e-12)


def test_rotation_at_one_is_a_signed_permutation():
    rng = np.random.default_rng(0)
    for _ in range(20):
        inv = random_involution(rng, list(range(8)))
        R = rotation_matrix(inv, 1.0)
        assert set(np.unique(R)) <= {-1.0, 0.0, 1.0}
        assert np.array_equal(np.abs(R), np.eye(8)[inv.sigma])


def test_schur_bound_small_exhaustive():
    # every 0/1 pattern on a 3-point line, unit blocks
    from roeforge.roe_matrix import schur_constant
    X = FiniteMetricSpace([0, 1, 2], [[abs(i - j) for j in range(3)] for i in range(3)])
    for bits in itertools.product([0, 1], repeat=9):
        m = BlockMatrix(X, 1, np.array(bits, float).reshape(3, 3))
        bound = schur_constant(X, propagation(m)) * m.max_block_norm()
        assert operator_norm(m) <= bound + 1e-12
