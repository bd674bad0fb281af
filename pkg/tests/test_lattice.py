"""Lattice domains, walks, Green matrices, and the Dirichlet solver."""

import itertools
import math

import numpy as np
import pytest

from slekit import lattice as lat
from slekit.seeds import child_rng


def path_graph(n):
    verts = [(i, 0) for i in range(n)]
    adj = [[j for j in (i - 1, i + 1) if 0 <= j < n] for i in range(n)]
    return lat.LatticeDomain(kind="square", mesh=1.0, vertices=verts,
                             interior=list(range(1, n - 1)), boundary=[0, n - 1],
                             adjacency=adj)


class TestBuildDomain:
    def test_unit_disc_half_mesh(self):
        # strictly-inside rule: 9 vertices of (Z/2)^2 lie in |z| < 1 (the 4
        # axis points at distance exactly 1 are boundary)
        d = lat.build_domain("disc", 0.5, "square")
        assert len(d.interior) == 9
        pts = {d.vertices[i] for i in d.interior}
        assert (0, 0) in pts and (1, 0) in pts and (1, 1) in pts
        assert (2, 0) not in pts

    def test_boundary_are_exterior_neighbors(self):
        d = lat.build_domain("disc", 0.5, "square")
        assert (2, 0) in {d.vertices[i] for i in d.boundary}
        interior_set = {d.vertices[i] for i in d.interior}
        for b in d.boundary:
            p, q = d.vertices[b]
            assert any((p + dp, q + dq) in interior_set
                       for dp, dq in lat.SQUARE_STEPS)

    def test_degenerate_mesh_single_vertex(self):
        d = lat.build_domain("disc", 2.0, "square")
        assert len(d.interior) == 1

    def test_empty_interior_error(self):
        with pytest.raises(ValueError):
            lat.build_domain("square", 3.0, "square", side=1.0)

    def test_triangle_area_scaling(self):
        c1 = len(lat.build_domain("triangle", 0.05, "triangular", side=1.0).interior)
        c2 = len(lat.build_domain("triangle", 0.025, "triangular", side=1.0).interior)
        assert abs(c2 / c1 - 4.0) < 0.6  # within 15%

    def test_triangular_adjacency_symmetric(self):
        d = lat.build_domain("disc", 0.3, "triangular")
        for v, nbs in enumerate(d.adjacency):
            for w in nbs:
                assert v in d.adjacency[w]

    def test_annulus(self):
        d = lat.build_domain("annulus", 0.2, "square", inner=0.4, outer=1.0)
        for i in d.interior:
            assert 0.4 < abs(d.position(i)) < 1.0


class TestSrwPath:
    def test_forced_move_on_path_graph(self):
        d = path_graph(3)
        walk = lat.srw_path(d, 1, {0, 2}, child_rng(1, 0))
        assert len(walk) == 2
        assert walk.end in (0, 2)

    def test_path_is_adjacency_respecting(self):
        d = lat.build_domain("disc", 0.25, "square")
        walk = lat.srw_path(d, d.index[(0, 0)], None, child_rng(2, 0))
        for a, b in zip(walk.vertices, walk.vertices[1:]):
            assert b in d.adjacency[a]
        assert walk.end in set(d.boundary)

    def test_cross_symmetry_exit_law(self):
        # plus-shaped graph: center exits uniformly over the 4 arm tips
        verts = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]
        adj = [[1, 2, 3, 4], [0], [0], [0], [0]]
        d = lat.LatticeDomain(kind="square", mesh=1.0, vertices=verts,
                              interior=[0], boundary=[1, 2, 3, 4],
                              adjacency=adj)
        rng = child_rng(3, 0)
        counts = {1: 0, 2: 0, 3: 0, 4: 0}
        n = 20000
        for _ in range(n):
            counts[lat.srw_path(d, 0, {1, 2, 3, 4}, rng).end] += 1
        from scipy.stats import chisquare
        assert chisquare(list(counts.values())).pvalue > 0.001

    @pytest.mark.slow
    def test_exit_law_matches_harmonic_solve(self):
        d = lat.build_domain("disc", 0.25, "square")
        start = d.index[(0, 0)]
        exact = lat.exit_distribution(d, start)
        rng = child_rng(4, 0)
        n = 100000
        counts = {}
        for _ in range(n):
            e = lat.srw_path(d, start, None, rng).end
            counts[e] = counts.get(e, 0) + 1
        tv = 0.5 * sum(abs(counts.get(v, 0) / n - p) for v, p in exact.items())
        assert tv < 0.01


class TestGreenMatrix:
    def test_single_vertex(self):
        d = lat.build_domain("square", 0.6, "square", side=1.0)
        assert len(d.interior) == 1
        free, G = lat.green_matrix(d)
        assert G[0, 0] == pytest.approx(1.0)

    def test_symmetric_product_identity_on_path(self):
        d = path_graph(5)
        A = {0, 4}
        for y, yp in itertools.permutations([1, 2, 3], 2):
            lhs = lat.green_diagonal(d, y, A) * lat.green_diagonal(d, yp, A | {y})
            rhs = lat.green_diagonal(d, yp, A) * lat.green_diagonal(d, y, A | {yp})
            assert abs(lhs - rhs) < 1e-9

    def test_symmetric_identity_random_graphs(self):
        rng = child_rng(5, 0)
        for trial in range(20):
            n = 6
            adj = [[] for _ in range(n)]
            edges = set()
            # random connected graph: a spanning path plus random chords
            for i in range(n - 1):
                edges.add((i, i + 1))
            for _ in range(4):
                a, b = rng.integers(0, n, 2)
                if a != b:
                    edges.add((min(a, b), max(a, b)))
            for a, b in edges:
                adj[a].append(b)
                adj[b].append(a)
            d = lat.LatticeDomain(kind="square", mesh=1.0,
                                  vertices=[(i, 0) for i in range(n)],
                                  interior=list(range(1, n)), boundary=[0],
                                  adjacency=adj)
            A = {0}
            others = list(range(1, n))
            y, yp = others[0], others[1]
            lhs = lat.green_diagonal(d, y, A) * lat.green_diagonal(d, yp, A | {y})
            rhs = lat.green_diagonal(d, yp, A) * lat.green_diagonal(d, y, A | {yp})
            assert abs(lhs - rhs) < 1e-9

    def test_product_function_symmetric_exhaustively(self):
        d = path_graph(5)
        A = {0, 4}

        def F(order):
            prod = 1.0
            acc = set(A)
            for w in order:
                prod *= lat.green_diagonal(d, w, acc)
                acc.add(w)
            return prod

        vals = [F(p) for p in itertools.permutations([1, 2, 3])]
        assert max(vals) - min(vals) < 1e-9

    def test_monte_carlo_visit_counts(self):
        d = lat.build_domain("square", 0.25, "square", side=1.0)
        assert len(d.interior) == 9
        start = d.interior[4]
        free, G = lat.green_matrix(d)
        j = free.index(start)
        rng = child_rng(6, 0)
        n = 20000
        visits = np.zeros(len(free))
        pos = {v: k for k, v in enumerate(free)}
        bnd = set(d.boundary)
        for _ in range(n):
            for v in lat.srw_path(d, start, bnd, rng).vertices:
                if v in pos:
                    visits[pos[v]] += 1
        for k in range(len(free)):
            mean = visits[k] / n
            se = max(math.sqrt(G[j, k] * 3 / n), 1e-3)  # crude variance bound
            assert abs(mean - G[j, k]) < 4 * se

    def test_disconnected_raises(self):
        verts = [(0, 0), (1, 0), (5, 0), (6, 0)]
        adj = [[1], [0], [3], [2]]
        d = lat.LatticeDomain(kind="square", mesh=1.0, vertices=verts,
                              interior=[1, 2, 3], boundary=[0], adjacency=adj)
        with pytest.raises(ValueError):
            lat.green_matrix(d, {0})


class TestHarmonicSolve:
    def test_constant_data(self):
        d = lat.build_domain("disc", 0.25, "square")
        sol = lat.harmonic_solve(d, {b: 3.5 for b in d.boundary})
        assert max(abs(v - 3.5) for v in sol.values()) < 1e-10

    def test_gambler_ruin_profile(self):
        d = path_graph(6)
        sol = lat.harmonic_solve(d, {0: 0.0, 5: 1.0}, absorbing={0, 5})
        for k in range(1, 5):
            assert sol[k] == pytest.approx(k / 5.0, abs=1e-10)

    def test_maximum_principle(self):
        d = lat.build_domain("disc", 0.2, "square")
        rng = child_rng(7, 0)
        data = {b: float(rng.random()) for b in d.boundary}
        sol = lat.harmonic_solve(d, data)
        assert max(sol.values()) <= max(data.values()) + 1e-12
        assert min(sol.values()) >= min(data.values()) - 1e-12

    def test_arc_harmonic_measure_from_center(self):
        # continuum harmonic measure of a boundary arc from the disc center
        # is arclength / 2 pi; the lattice exit law converges at O(mesh)
        mesh = 0.1
        d = lat.build_domain("disc", mesh, "square")
        exact = lat.exit_distribution(d, d.index[(0, 0)])
        lo, hi = 0.2, 1.3
        got = sum(p for v, p in exact.items()
                  if lo < math.atan2(d.position(v).imag, d.position(v).real) < hi)
        assert got == pytest.approx((hi - lo) / (2 * math.pi), abs=4 * mesh)

    def test_missing_boundary_data(self):
        d = lat.build_domain("disc", 0.5, "square")
        with pytest.raises(ValueError):
            lat.harmonic_solve(d, {d.boundary[0]: 1.0})


class TestDomainJson:
    def test_stable_dump(self):
        d = lat.build_domain("disc", 0.5, "square")
        s1 = lat.domain_to_json(d)
        s2 = lat.domain_to_json(d)
        assert s1 == s2
        import json
        payload = json.loads(s1)
        assert set(payload) == {"kind", "mesh", "vertices", "adjacency",
                                "interior", "boundary", "arcs"}
        assert len(payload["vertices"]) == d.n
