"""Unit tests for the scalar commitment game.

The closed forms are simple enough to cross-check by dense sampling: the cost
surface h(h - g) on [-1, 1]^2 is a quadratic in h with apex at g / 2, so the
inner minimum is -g^2/4 and the inner maximum sits at the endpoint farther
from the apex, giving 1 + |g|.
"""

import numpy as np
import pytest

from stratcomm.scalar_game import (
    audit_counterexample,
    best_case_cost,
    decoder_cost,
    encoder_cost,
    ne_value_bound,
    ose_value,
    rse_value,
    worst_case_cost,
)


class TestCosts:
    def test_encoder_cost_formula(self):
        rng = np.random.default_rng(301)
        for _ in range(50):
            g, h = rng.uniform(-1, 1, size=2)
            assert encoder_cost(g, h) == pytest.approx(h * h - h * g, abs=1e-15)

    def test_decoder_always_indifferent(self):
        rng = np.random.default_rng(302)
        for _ in range(20):
            g, h = rng.uniform(-1, 1, size=2)
            assert decoder_cost(g, h) == 0.0

    def test_domain_enforced(self):
        for bad in (-1.5, 1.0001, 2.0):
            with pytest.raises(ValueError):
                encoder_cost(bad, 0.0)
            with pytest.raises(ValueError):
                decoder_cost(0.0, bad)
            with pytest.raises(ValueError):
                worst_case_cost(bad)
            with pytest.raises(ValueError):
                best_case_cost(bad)

    def test_envelope_formulas_match_dense_sampling(self):
        hs = np.linspace(-1, 1, 20001)
        for g in np.linspace(-1, 1, 41):
            sampled = hs * (hs - g)
            assert worst_case_cost(g) == pytest.approx(sampled.max(), abs=1e-7)
            assert best_case_cost(g) == pytest.approx(sampled.min(), abs=1e-7)


class TestSolutions:
    def test_pessimistic_value_and_leader(self):
        sol = rse_value()
        assert sol.value == 1.0
        assert sol.leader == 0.0
        assert abs(sol.grid_value - 1.0) <= 1e-6
        assert abs(sol.grid_leader) <= 1e-3

    def test_optimistic_value(self):
        sol = ose_value()
        assert sol.value == -0.25
        assert abs(sol.grid_value + 0.25) <= 1e-6
        assert abs(sol.grid_leader) == pytest.approx(1.0, abs=1e-3)

    def test_grid_confirmation_tightens_with_resolution(self):
        # resolution 0.3 puts neither 0.5 nor -0.5 on the h grid, so the
        # optimistic confirmation is visibly off there and sharp at 1e-3
        coarse = ose_value(resolution=0.3)
        fine = ose_value(resolution=1e-3)
        assert abs(coarse.grid_value + 0.25) > 1e-3
        assert abs(fine.grid_value + 0.25) <= abs(coarse.grid_value + 0.25) + 1e-12
        assert abs(fine.grid_value + 0.25) <= 1e-6

    def test_nash_bounds(self):
        bound = ne_value_bound()
        assert bound.max_value == pytest.approx(0.0, abs=1e-12)
        assert bound.min_value == pytest.approx(-0.25, abs=1e-6)
        for g, h, cost in bound.witnesses:
            # each witness is an equilibrium: g best responds to h
            assert g == np.sign(h) or h == 0.0
            assert cost == pytest.approx(h * (h - g), abs=1e-15)

    def test_audit_summary(self):
        audit = audit_counterexample()
        assert audit["rse_value"] == 1.0
        assert audit["ose_value"] == -0.25
        assert audit["max_ne_value"] <= 1e-12
        assert audit["min_ne_value"] == pytest.approx(-0.25, abs=1e-6)
        assert audit["separation"] >= 1.0 - 1e-12
        assert abs(audit["rse_grid_value"] - 1.0) <= 1e-6
        assert audit["resolution"] == 1e-3

    def test_pessimistic_beats_every_nash_value(self):
        audit = audit_counterexample(resolution=1e-2)
        bound = ne_value_bound(resolution=1e-2)
        assert audit["rse_value"] > bound.max_value + 0.999
