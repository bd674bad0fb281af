"""Site percolation: crossings, Cardy estimates, arm events, exploration."""

import math

import numpy as np
import pytest

from slekit import models
from slekit.seeds import child_rng


class TestCrossing:
    def test_full_and_empty(self):
        rng = child_rng(30, 0)
        full = models.percolation_sample(16, 16, 1.0, rng)
        empty = models.percolation_sample(16, 16, 0.0, rng)
        assert models.crossing(full) is True
        assert models.crossing(empty) is False

    def test_self_duality_pathwise(self):
        # left-right open crossing XOR top-bottom closed crossing, always
        rng = child_rng(31, 0)
        for _ in range(300):
            c = models.percolation_sample(16, 16, 0.5, rng)
            lr = models.crossing(c, "leftright", open_sites=True)
            tb = models.crossing(c, "topbottom", open_sites=False)
            assert lr != tb

    def test_crossing_probability_half(self):
        rng = child_rng(32, 0)
        n = 4000
        hits = sum(models.crossing(models.percolation_sample(64, 64, 0.5, rng))
                   for _ in range(n))
        p = hits / n
        assert abs(p - 0.5) < 3 * math.sqrt(0.25 / n)

    def test_rle_round_trip(self):
        rng = child_rng(33, 0)
        c = models.percolation_sample(12, 9, 0.37, rng, seed=33)
        payload = models.dump_config_rle(c)
        back = models.load_config_rle(payload)
        assert np.array_equal(back.colors, c.colors)
        assert back.p == c.p and back.seed == 33
        # deterministic bytes
        assert payload == models.dump_config_rle(c)


class TestCardy:
    def test_empty_arc_is_zero(self):
        rng = child_rng(34, 0)
        hits, n = models.cardy_crossing_experiment(16, 0.0, 200, rng)
        assert hits == 0

    def test_midpoint_half(self):
        rng = child_rng(35, 0)
        hits, n = models.cardy_crossing_experiment(64, 0.5, 4000, rng)
        p = hits / n
        assert abs(p - 0.5) < 3 * math.sqrt(0.25 / n) + 0.01

    @pytest.mark.slow
    def test_quarter_points(self):
        for j, f in enumerate((0.25, 0.75)):
            rng = child_rng(36, j)
            hits, n = models.cardy_crossing_experiment(64, f, 10000, rng)
            assert abs(hits / n - f) < 0.02


class TestArmEvents:
    def test_monotone_in_arm_count_pathwise(self):
        from slekit.models.percolation import _axial_radius, arm_indicator
        radius = _axial_radius(10)
        rng = child_rng(37, 0)
        for _ in range(100):
            colors = rng.random(radius.shape) < 0.5
            flags = [arm_indicator(colors, radius, 2.0, 9.0, n_arms=k)
                     for k in (1, 2, 3)]
            assert all(not flags[k] or flags[k - 1] for k in (1, 2))

    def test_tiny_annulus_sanity(self):
        rng = child_rng(38, 0)
        hits, n = models.arm_probability(3, 2000, rng)
        assert hits / n >= 0.5  # a single open cell can bridge r0 to r0+1

    def test_monotone_in_radius(self):
        vals = []
        for j, N in enumerate((8, 32)):
            rng = child_rng(39, j)
            hits, n = models.arm_probability(N, 3000, rng)
            vals.append(hits / n)
        assert vals[1] < vals[0]

    @pytest.mark.slow
    def test_one_arm_slope(self):
        from slekit.montecarlo import EstimateRecord, fit_power_law
        recs = []
        for j, N in enumerate((8, 16, 32, 64)):
            rng = child_rng(40, j)
            hits, n = models.arm_probability(N, 6000, rng)
            p = hits / n
            recs.append(EstimateRecord(name="arm1", scale=float(N), value=p,
                                       stderr=math.sqrt(p * (1 - p) / n),
                                       trials=n, seed=40))
        fit = fit_power_law(recs, drop_outlier_scales=True)
        assert abs(fit.slope - (-5.0 / 48.0)) < 0.05


class TestExploration:
    def test_forced_white_interior_hugs_black_arc(self):
        dom = models.exploration_domain(4, 4)
        cells = np.ones((4, 4))  # uniform 1.0 -> every interior cell white
        walk = models.exploration_interface(dom, cells)
        # deterministic path: every crossed edge has an interior white cell
        # or arc cell; black flanks all belong to the black boundary arc
        for black, white in walk.crossed_edges:
            assert black in dom.black_arc
        assert walk.crossed_edges[0] == dom.a_junction
        assert walk.crossed_edges[-1] == dom.b_junction

    def test_endpoint_always_b(self):
        dom = models.exploration_domain(8, 8)
        for i in range(50):
            cells = child_rng(41, i).random((8, 8))
            walk = models.exploration_interface(dom, cells)
            assert walk.crossed_edges[-1] == dom.b_junction

    def test_coupling_with_full_configuration(self):
        dom = models.exploration_domain(16, 16)
        for i in range(200):
            cells = child_rng(42, i).random((16, 16))
            walk = models.exploration_interface(dom, cells)
            extracted = models.extract_interface(dom, cells)
            walk_edges = {tuple(sorted(e)) for e in walk.crossed_edges}
            ext_edges = {tuple(sorted(e)) for e in extracted}
            assert walk_edges == ext_edges

    def test_interface_edge_self_avoiding(self):
        dom = models.exploration_domain(12, 12)
        cells = child_rng(43, 0).random((12, 12))
        walk = models.exploration_interface(dom, cells)
        assert len(set(walk.crossed_edges)) == len(walk.crossed_edges)

    def test_myopia_reveals_only_interface_neighborhood(self):
        dom = models.exploration_domain(16, 16)
        cells = child_rng(44, 0).random((16, 16))
        walk = models.exploration_interface(dom, cells)
        assert len(walk.revealed) < 16 * 16  # strictly lazier than full reveal
