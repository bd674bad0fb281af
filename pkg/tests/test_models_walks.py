"""Wedge walk uniformity, excursions, and reflected-walk experiments."""

import math

import numpy as np
import pytest

from slekit import models
from slekit.montecarlo import chi_square_uniform
from slekit.seeds import child_rng


class TestWedgeWalk:
    def test_step_rules_interior_is_srw(self):
        rules = models.halfplane_reflected_step_rules((3, 2))
        assert len(rules) == 6
        assert all(p == pytest.approx(1.0 / 6.0) for p in rules.values())

    def test_step_rules_boundary(self):
        bottom = models.halfplane_reflected_step_rules((3, 0))
        assert bottom[(1, 0)] == pytest.approx(1.0 / 3.0)
        assert bottom[(0, 0)] == pytest.approx(1.0 / 6.0)
        left = models.halfplane_reflected_step_rules((0, 3))
        assert left[(0, 1)] == pytest.approx(1.0 / 3.0)
        origin = models.halfplane_reflected_step_rules((0, 0))
        assert origin == {(1, 0): 0.5, (0, 1): 0.5}

    def test_rules_are_mirror_symmetric(self):
        # reflecting the wedge across its bisector swaps the two rays
        bottom = models.halfplane_reflected_step_rules((5, 0))
        left = models.halfplane_reflected_step_rules((0, 5))

        def mirror(move):
            dm, dmp = move
            return (dmp, dm)

        assert {mirror(m): p for m, p in bottom.items()} == left

    def test_n_equals_one_uniform_over_two(self):
        rng = child_rng(50, 0)
        hits = [models.wedge_reflected_walk(1, rng) for _ in range(4000)]
        p = sum(hits) / len(hits)
        assert abs(p - 0.5) < 3 * math.sqrt(0.25 / 4000)

    def test_exact_hitting_law_uniform_n5(self):
        law = models.wedge_exact_hitting_law(5)
        assert np.max(np.abs(law - 1.0 / 6.0)) < 1e-10

    def test_exact_law_uniform_other_sizes(self):
        for N in (2, 3, 8):
            law = models.wedge_exact_hitting_law(N)
            assert np.max(np.abs(law - 1.0 / (N + 1))) < 1e-10

    def test_batch_matches_single_walk_law(self):
        counts = models.wedge_hitting_counts(4, 20000, 51)
        assert chi_square_uniform(counts) > 0.001

    @pytest.mark.slow
    def test_uniformity_n30(self):
        counts = models.wedge_hitting_counts(30, 100000, 52)
        assert counts.sum() == 100000
        assert chi_square_uniform(counts) > 0.001

    def test_wedge_to_halfplane_transport(self):
        # cubing maps the wedge onto the half-plane: boundary rays land on
        # the two real half-lines
        assert models.wedge_to_halfplane(3, 0).imag == pytest.approx(0.0)
        w = models.wedge_to_halfplane(0, 3)
        assert w.imag == pytest.approx(0.0, abs=1e-12)
        assert w.real < 0
        assert models.wedge_to_halfplane(2, 2).imag > 0


class TestBrownianExcursion:
    def test_positivity_pathwise(self):
        rng = child_rng(53, 0)
        path = models.sample_brownian_excursion(2.0, 1e-4, rng)
        assert np.all(path.imag > 0.0)

    def test_reaches_horizon(self):
        rng = child_rng(54, 0)
        path = models.sample_brownian_excursion(3.0, 1e-3, rng)
        assert path.imag[-1] >= 3.0
        assert np.all(path.imag[:-1] < 3.0)

    def test_level_crossing_probability(self):
        wins, n = models.excursion_level_crossing_batch(1.0, 4.0, 5000, 55,
                                                        dt=2e-4)
        p = wins / n
        assert abs(p - 0.25) < 3 * math.sqrt(0.25 * 0.75 / n)

    def test_segment_distance_helper(self):
        from slekit.models.walks import _scalar_slit_dist
        # crossing the slit line inside the span
        assert _scalar_slit_dist(0.5, 0.5, 1.5, 0.5, 1.0, 1.0) == 0.0
        # passing above the slit
        d = _scalar_slit_dist(0.5, 1.5, 1.5, 1.5, 1.0, 1.0)
        assert d == pytest.approx(0.5)
        # lateral miss
        d = _scalar_slit_dist(2.0, 0.0, 2.0, 2.0, 1.0, 1.0)
        assert d == pytest.approx(1.0)

    def test_far_hull_always_avoided(self):
        hits, n = models.excursion_avoid_batch(100.0, 1.0, 50, 56,
                                               horizon=120.0, dt=4e-3)
        assert hits == n

    @pytest.mark.slow
    def test_avoidance_matches_slit_derivative(self):
        from slekit.formulas import slit_derivative_at_zero
        target = slit_derivative_at_zero(1.0, 1.0)
        hits, n = models.excursion_avoid_batch(1.0, 1.0, 2500, 57, dt=1e-3)
        p = hits / n
        se = math.sqrt(target * (1 - target) / n)
        assert abs(p - target) < 3 * se + 0.01  # small positive horizon bias


class TestCylinderWalk:
    def test_small_height_mostly_non_disconnecting(self):
        hits, n = models.cylinder_nondisconnection_batch(24, 4, 300, 58)
        assert hits / n > 0.5

    def test_monotone_in_height(self):
        p = []
        for j, h in enumerate((5, 15)):
            hits, n = models.cylinder_nondisconnection_batch(30, h, 400, 59 + j)
            p.append(hits / n)
        assert p[1] < p[0]

    @pytest.mark.slow
    def test_disconnection_exponent_quarter(self):
        # non-disconnection decays like r^(1/4); the stopping height carries
        # the triangular row spacing sqrt(3)/2 so that
        # log(1/r) = 2 pi * (h * sqrt(3)/2) / L
        from slekit.montecarlo import EstimateRecord, fit_power_law
        L = 60
        row = math.sqrt(3.0) / 2.0
        recs = []
        for j, r in enumerate((0.25, 0.125, 0.0625)):
            h = int(round(L * math.log(1.0 / r) / (2 * math.pi) / row))
            hits, n = models.cylinder_nondisconnection_batch(L, h, 4000, 90 + j)
            p = hits / n
            recs.append(EstimateRecord(name="nondisc", scale=r, value=p,
                                       stderr=math.sqrt(p * (1 - p) / n),
                                       trials=n, seed=90 + j))
        fit = fit_power_law(recs)
        assert abs(fit.slope - 0.25) < 0.08
