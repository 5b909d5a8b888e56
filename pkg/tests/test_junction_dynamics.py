"""Tests for junction flux laws and switching factors."""

import numpy as np
import pytest

from hybridflow import (
    MergeCapacities,
    SignalPhase,
    StopState,
    TurnRatios,
    diverge_flux,
    linear_flux,
    link_density_rate,
    make_params,
    merge_flux,
    signal_factor,
    stop_factor,
)
from hybridflow.errors import DomainError, ParamError


class TestFactors:
    def test_signal(self):
        assert signal_factor(SignalPhase.GREEN) == 1.0
        assert signal_factor(SignalPhase.RED) == 0.0
        assert signal_factor(SignalPhase.GREEN) == signal_factor(SignalPhase.GREEN)

    def test_stop(self):
        assert stop_factor(StopState(occupied=False, psi=0.3)) == 1.0
        assert stop_factor(StopState(occupied=True, psi=0.3)) == 0.3
        # as psi approaches 1, an occupied stop approaches the empty behavior
        assert stop_factor(StopState(occupied=True, psi=1 - 1e-12)) == pytest.approx(1.0)

    @pytest.mark.parametrize("psi", [0.0, 1.0, -0.5, 1.5])
    def test_psi_out_of_range(self, psi):
        with pytest.raises(ParamError):
            StopState(occupied=True, psi=psi)


class TestLinearFlux:
    def test_red_light_blocks(self):
        assert linear_flux(0.4, 0.6, 0.0) == 0.0

    def test_green_light_passes_min(self):
        assert linear_flux(0.4, 0.6, 1.0) == 0.4

    def test_bus_stop_gate(self):
        assert linear_flux(0.4, 0.6, 0.3) == pytest.approx(0.12, abs=1e-12)

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            linear_flux(-0.1, 0.6, 1.0)
        with pytest.raises(DomainError):
            linear_flux(0.4, 0.6, 1.5)

    def test_monotone_in_gate(self):
        gates = np.linspace(0.0, 1.0, 101)
        out = linear_flux(0.4, 0.6, gates)
        assert np.all(np.diff(out) >= 0)


class TestDivergeFlux:
    def test_demand_bound(self):
        g0, f1, f2 = diverge_flux(0.4, 1.0, 1.0, TurnRatios(0.5, 0.5), 1.0)
        assert (g0, f1, f2) == (0.4, 0.2, 0.2)

    def test_supply_bound(self):
        g0, f1, f2 = diverge_flux(0.4, 0.1, 1.0, TurnRatios(0.5, 0.5), 1.0)
        assert (g0, f1, f2) == (0.2, 0.1, 0.1)

    def test_gate_zero(self):
        assert diverge_flux(0.7, 0.2, 0.9, TurnRatios(0.3, 0.7), 0.0) == (0.0, 0.0, 0.0)

    def test_zero_ratio_branch_never_binds(self):
        g0, f1, f2 = diverge_flux(0.4, 1.0, 0.0, TurnRatios(1.0, 0.0), 1.0)
        assert g0 == 0.4
        assert f1 == 0.4
        assert f2 == 0.0

    def test_ratios_must_sum_to_one(self):
        with pytest.raises(ParamError):
            TurnRatios(0.5, 0.6)
        with pytest.raises(ParamError):
            TurnRatios(-0.1, 1.1)

    def test_conservation_and_proportion(self):
        rng = np.random.default_rng(11)
        for _ in range(20):  # fresh turn ratios per block of draws
            n = 5_000
            d0 = rng.uniform(0, 1, n)
            s1 = rng.uniform(0, 1, n)
            s2 = rng.uniform(0, 1, n)
            xi1 = float(rng.uniform(0.05, 0.95))
            g0, f1, f2 = diverge_flux(d0, s1, s2, TurnRatios(xi1, 1 - xi1), 1.0)
            assert np.all(np.abs(f1 + f2 - g0) <= 1e-12)
            pos = g0 > 0
            assert np.all(np.abs(f1[pos] * (1 - xi1) - f2[pos] * xi1) <= 1e-9)
            assert np.all(f1 <= s1 + 1e-12)
            assert np.all(f2 <= s2 + 1e-12)
            assert np.all(g0 <= d0)

    def test_monotone_in_gate(self):
        gates = np.linspace(0, 1, 101)
        g0, _, _ = diverge_flux(0.5, 0.4, 0.8, TurnRatios(0.5, 0.5), gates)
        assert np.all(np.diff(g0) >= 0)


class TestMergeFlux:
    def test_congested_split(self):
        f3, g1, g2 = merge_flux(0.6, 0.6, 1.0, MergeCapacities(1, 1))
        assert (f3, g1, g2) == (1.0, 0.5, 0.5)

    def test_uncongested_passthrough(self):
        f3, g1, g2 = merge_flux(0.2, 0.2, 1.0, MergeCapacities(1, 1))
        assert (f3, g1, g2) == (0.4, 0.2, 0.2)

    def test_no_demand(self):
        assert merge_flux(0.0, 0.0, 0.7, MergeCapacities(2, 1)) == (0.0, 0.0, 0.0)

    def test_capacities_positive(self):
        with pytest.raises(ParamError):
            MergeCapacities(0.0, 1.0)

    def test_conservation_exact_and_bounds(self):
        rng = np.random.default_rng(13)
        for _ in range(20):  # fresh capacities per block of draws
            n = 5_000
            d1 = rng.uniform(0, 1, n)
            d2 = rng.uniform(0, 1, n)
            s3 = rng.uniform(0, 1.5, n)
            caps = MergeCapacities(float(rng.uniform(0.1, 2.0)), float(rng.uniform(0.1, 2.0)))
            f3, g1, g2 = merge_flux(d1, d2, s3, caps)
            assert np.all(g1 + g2 == f3)  # bit-exact by construction
            assert np.all(g1 >= 0)
            assert np.all(g2 >= 0)
            assert np.all(g1 <= d1 + 1e-12)
            assert np.all(g2 <= d2 + 1e-12)
            assert np.all(f3 <= s3)

    def test_priority_share_when_both_congest(self):
        rng = np.random.default_rng(17)
        n = 50_000
        s3 = rng.uniform(0.1, 1.0, n)
        d1 = s3 + rng.uniform(0.01, 1.0, n)  # each demand alone exceeds supply
        d2 = s3 + rng.uniform(0.01, 1.0, n)
        c1, c2 = 1.4, 0.6
        _, g1, _ = merge_flux(d1, d2, s3, MergeCapacities(c1, c2))
        assert np.all(g1 >= c1 / (c1 + c2) * s3 - 1e-12)


class TestLinkDensityRate:
    def test_balanced(self):
        p = make_params(1, 1, 1, 7.0)
        assert link_density_rate(0.4, 0.4, p) == 0.0

    def test_filling(self):
        p = make_params(1, 1, 1, 2.0)
        assert link_density_rate(0.5, 0.1, p) == pytest.approx(0.2, abs=1e-15)

    def test_draining(self):
        p = make_params(1, 1, 1, 1.0)
        assert link_density_rate(0.0, 0.3, p) == pytest.approx(-0.3, abs=1e-15)

    def test_rejects_negative_flux(self):
        p = make_params(1, 1, 1, 1.0)
        with pytest.raises(DomainError):
            link_density_rate(-0.1, 0.0, p)
