"""Loop erasure, Wilson sampling, tree paths, and the Peano contour."""

import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slekit import lattice as lat
from slekit import models
from slekit.lattice import LatticePath
from slekit.montecarlo import chi_square_uniform
from slekit.seeds import child_rng


def five_vertex_graph():
    """Triangle 0-1-2 with boundary spurs: 1-3 and 2-4; absorbing {3, 4}."""
    verts = [(i, 0) for i in range(5)]
    adj = [[1, 2], [0, 2, 3], [0, 1, 4], [1], [2]]
    return lat.LatticeDomain(kind="square", mesh=1.0, vertices=verts,
                             interior=[0, 1, 2], boundary=[3, 4],
                             adjacency=adj)


def enumerate_simple_paths(adj, start, targets, banned=()):
    """All simple paths from start into `targets` avoiding `banned` interiors."""
    out = []

    def grow(path):
        cur = path[-1]
        for nxt in adj[cur]:
            if nxt in targets:
                out.append(path + [nxt])
            elif nxt not in path and nxt not in banned:
                grow(path + [nxt])

    grow([start])
    return out


def lerw_law_product_formula(domain, start, absorbing):
    """Exact loop-erased path law via the visit-count product formula.

    P[path w] = prod_j G(w_j, A + {w_0..w_{j-1}}) p(w_j, w_{j+1}), with G the
    expected visits to w_j from itself before absorption.
    """
    paths = enumerate_simple_paths(domain.adjacency, start, set(absorbing))
    law = {}
    for w in paths:
        prob = 1.0
        acc = set(absorbing)
        for j in range(len(w) - 1):
            prob *= lat.green_diagonal(domain, w[j], acc)
            prob *= 1.0 / len(domain.adjacency[w[j]])
            acc.add(w[j])
        law[tuple(w)] = prob
    total = sum(law.values())
    assert total == pytest.approx(1.0, abs=1e-9)
    return law


class TestLoopErase:
    def test_simple_path_unchanged(self):
        p = LatticePath([0, 1, 2, 3])
        assert models.loop_erase(p).vertices == [0, 1, 2, 3]

    def test_single_loop(self):
        assert models.loop_erase(LatticePath([0, 1, 0, 2])).vertices == [0, 2]

    def test_last_visit_rule(self):
        # chronological rule jumps to the step after the *last* visit
        assert models.loop_erase(
            LatticePath([0, 1, 2, 1, 3, 0, 4])).vertices == [0, 4]

    @given(st.lists(st.integers(0, 6), min_size=1, max_size=40))
    @settings(max_examples=200, deadline=None)
    def test_idempotent_simple_endpoint_preserving(self, raw):
        p = LatticePath(raw)
        le = models.loop_erase(p)
        assert le.start == p.start and le.end == p.end
        assert len(set(le.vertices)) == len(le.vertices)
        again = models.loop_erase(le)
        assert again.vertices == le.vertices
        # output is a subsequence of the input
        it = iter(raw)
        assert all(v in it for v in le.vertices)


class TestSampleLerw:
    def test_single_exit_conditioning_vacuous(self):
        verts = [(0, 0), (1, 0), (2, 0)]
        adj = [[1], [0, 2], [1]]
        d = lat.LatticeDomain(kind="square", mesh=1.0, vertices=verts,
                              interior=[0, 1], boundary=[2], adjacency=adj)
        rng = child_rng(8, 0)
        walk = models.sample_lerw(d, 0, {2}, rng, condition_endpoint=2)
        assert walk.vertices == [0, 1, 2]

    def test_endpoint_law_equals_exit_law(self):
        d = five_vertex_graph()
        rng = child_rng(9, 0)
        n = 20000
        counts = Counter(models.sample_lerw(d, 0, {3, 4}, rng).end
                         for _ in range(n))
        exact = lat.exit_distribution(d, 0, {3, 4})
        from scipy.stats import chisquare
        obs = [counts[3], counts[4]]
        exp = [n * exact[3], n * exact[4]]
        assert chisquare(obs, exp).pvalue > 0.001

    def test_impossible_conditioning(self):
        d = five_vertex_graph()
        with pytest.raises(RuntimeError):
            models.sample_lerw(d, 0, {3, 4}, child_rng(10, 0),
                               condition_endpoint=0, rejection_cap=50)

    def test_reversed_output(self):
        d = five_vertex_graph()
        walk = models.sample_lerw(d, 0, {3, 4}, child_rng(11, 0),
                                  reversed_output=True)
        assert walk.start in (3, 4)
        assert walk.end == 0

    @pytest.mark.slow
    def test_law_matches_product_formula(self):
        d = five_vertex_graph()
        law = lerw_law_product_formula(d, 0, {3, 4})
        rng = child_rng(12, 0)
        n = 100000
        counts = Counter(tuple(models.sample_lerw(d, 0, {3, 4}, rng).vertices)
                         for _ in range(n))
        tv = 0.5 * sum(abs(counts.get(w, 0) / n - p) for w, p in law.items())
        tv += 0.5 * sum(counts[w] / n for w in counts if w not in law)
        assert tv < 0.02

    @pytest.mark.slow
    def test_markov_property_of_reversed_path(self):
        # condition on the exit step (y0 = 4 reached from 2): the remaining
        # loop-erased law equals the lerw conditioned to exit at 2 with 2
        # adjoined to the absorbing set
        d = five_vertex_graph()
        law = lerw_law_product_formula(d, 0, {3, 4})
        cond = {w[:-1]: p for w, p in law.items() if w[-1] == 4}
        z = sum(cond.values())
        cond = {w: p / z for w, p in cond.items()}

        # direct law of the walk stopped on {2} (2 absorbing), conditioned
        # to end at 2, matching the displayed Markov decomposition
        d2 = lat.LatticeDomain(kind="square", mesh=1.0,
                               vertices=d.vertices, interior=[0, 1],
                               boundary=[2, 3, 4],
                               adjacency=d.adjacency)
        law2 = lerw_law_product_formula(d2, 0, {2, 3, 4})
        law2_cond = {w: p for w, p in law2.items() if w[-1] == 2}
        z2 = sum(law2_cond.values())
        law2_cond = {w: p / z2 for w, p in law2_cond.items()}
        assert set(cond) == set(law2_cond)
        for w in cond:
            assert cond[w] == pytest.approx(law2_cond[w], abs=1e-9)

        # and the sampler agrees with the conditional law
        rng = child_rng(13, 0)
        n = 100000
        counts = Counter()
        for _ in range(n):
            walk = models.sample_lerw(d, 0, {3, 4}, rng)
            if walk.end == 4:
                counts[tuple(walk.vertices[:-1])] += 1
        m = sum(counts.values())
        tv = 0.5 * sum(abs(counts.get(w, 0) / m - p) for w, p in cond.items())
        assert tv < 0.02


FOUR_CYCLE = [[1, 3], [0, 2], [1, 3], [0, 2]]


def tree_key(tree):
    return frozenset(frozenset(e) for e in tree.edges())


class TestWilson:
    def test_tree_graph_returns_itself(self):
        adj = [[1], [0, 2, 3], [1], [1]]
        t = models.wilson_ust(adj, [0, 1, 2, 3], child_rng(14, 0))
        assert tree_key(t) == frozenset(
            {frozenset({0, 1}), frozenset({1, 2}), frozenset({1, 3})})

    def test_four_cycle_uniform(self):
        rng = child_rng(15, 0)
        counts = Counter(tree_key(models.wilson_ust(FOUR_CYCLE, [0, 1, 2, 3], rng))
                         for _ in range(20000))
        assert len(counts) == 4  # exactly the 4 spanning trees
        assert chi_square_uniform(list(counts.values())) > 0.001

    def test_order_invariance(self):
        c1 = Counter(tree_key(models.wilson_ust(FOUR_CYCLE, [0, 1, 2, 3],
                                                child_rng(16, i)))
                     for i in range(8000))
        c2 = Counter(tree_key(models.wilson_ust(FOUR_CYCLE, [2, 0, 3, 1],
                                                child_rng(17, i)))
                     for i in range(8000))
        from scipy.stats import chi2_contingency
        keys = sorted(set(c1) | set(c2), key=str)
        table = [[c1[k] for k in keys], [c2[k] for k in keys]]
        assert chi2_contingency(table).pvalue > 0.001

    def test_edge_marginal(self):
        # each of the 4 spanning trees omits one edge: P[edge in tree] = 3/4
        rng = child_rng(18, 0)
        n = 20000
        hits = sum(frozenset({0, 1}) in tree_key(
            models.wilson_ust(FOUR_CYCLE, [0, 1, 2, 3], rng))
            for _ in range(n))
        p = hits / n
        se = math.sqrt(0.75 * 0.25 / n)
        assert abs(p - 0.75) < 3 * se


class TestTreePath:
    def test_trivial_and_deterministic(self):
        adj = [[1], [0, 2, 3], [1], [1]]
        t = models.wilson_ust(adj, [0, 1, 2, 3], child_rng(19, 0))
        assert models.tree_path(t, 2, 2).vertices == [2]
        assert models.tree_path(t, 0, 2).vertices == [0, 1, 2]

    def test_ust_path_law_matches_lerw(self):
        # opposite corners of the 4-cycle: both laws are uniform over the
        # two 2-step routes
        rng = child_rng(20, 0)
        n = 40000
        counts = Counter()
        for _ in range(n):
            t = models.wilson_ust(FOUR_CYCLE, [0, 1, 2, 3], rng)
            counts[tuple(models.tree_path(t, 0, 2).vertices)] += 1

        verts = [(i, 0) for i in range(4)]
        d = lat.LatticeDomain(kind="square", mesh=1.0, vertices=verts,
                              interior=[0, 1, 3], boundary=[2],
                              adjacency=FOUR_CYCLE)
        counts2 = Counter()
        for _ in range(n):
            walk = models.sample_lerw(d, 0, {2}, rng)
            counts2[tuple(walk.vertices)] += 1
        keys = set(counts) | set(counts2)
        tv = 0.5 * sum(abs(counts.get(k, 0) / n - counts2.get(k, 0) / n)
                       for k in keys)
        assert tv < 0.02


class TestPeano:
    def test_one_edge_tree_contour(self):
        # hand-checked: contour of the single edge (0,0)-(1,0) is the ring
        # of the 8 quarter-lattice vertices around it
        cyc = models.contour_cycle({((0, 0), (1, 0))}, {(0, 0), (1, 0)})
        assert len(cyc) == 8
        assert set(cyc) == {(-1, -1), (1, -1), (3, -1), (5, -1),
                            (5, 1), (3, 1), (1, 1), (-1, 1)}

    def test_one_edge_wired_segment(self):
        # 1 x 2 wired column: one tree edge, six-vertex open contour
        adj, root, coords = models.wired_grid_graph(1, 2)
        t = models.wilson_ust(adj, list(range(len(adj))), child_rng(21, 0),
                              root=root)
        path = models.ust_peano(t, coords, 1, 2)
        assert path == [(1, 1), (1, 3), (1, 5), (-1, 5), (-1, 3), (-1, 1)]

    @pytest.mark.parametrize("w,h,seed", [(3, 3, 1), (4, 4, 5), (5, 3, 7),
                                          (8, 8, 3)])
    def test_space_filling_and_edge_self_avoiding(self, w, h, seed):
        adj, root, coords = models.wired_grid_graph(w, h)
        t = models.wilson_ust(adj, list(range(len(adj))), child_rng(seed, 0),
                              root=root)
        path = models.ust_peano(t, coords, w, h)
        # visits every quarter-lattice vertex around the rectangle's own
        # vertices except the run under the wired side, exactly once
        assert len(path) == 4 * w * h - 2 * w
        assert len(set(path)) == len(path)
        edges = set()
        for a, b in zip(path, path[1:]):
            assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 2
            e = (a, b) if a <= b else (b, a)
            assert e not in edges
            edges.add(e)

    def test_endpoints_flank_the_wired_arc(self):
        adj, root, coords = models.wired_grid_graph(4, 4)
        t = models.wilson_ust(adj, list(range(len(adj))), child_rng(22, 0),
                              root=root)
        path = models.ust_peano(t, coords, 4, 4)
        assert sorted([path[0], path[-1]]) == [(-1, 1), (13, 1)]

    def test_malformed_wall_set(self):
        # two disjoint edges are a forest, not a tree: no single contour
        with pytest.raises(ValueError):
            models.contour_cycle(
                {((0, 0), (1, 0)), ((3, 0), (4, 0))},
                {(0, 0), (1, 0), (3, 0), (4, 0)})
