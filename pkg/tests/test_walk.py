"""Walk assembly, stationarity, statistics, and the Monte Carlo probe."""

import math

import numpy as np
import pytest

from gibbswalk.decompose import DecomposerConfig, decompose
from gibbswalk.potentials import d_phi
from gibbswalk.walk import (
    SimulationError,
    WalkMeasure,
    assemble_walk,
    chi2_compatibility,
    convolved_density_masses,
    entropy_decomposition,
    nondegenerate_support,
    simulate_hitting,
    stationarity_error,
    walk_statistics,
)
from gibbswalk.words import Alphabet

AB = Alphabet(2)


class TestAssemble:
    def test_masses_and_total(self, uniform_decomposition, uniform_stream):
        mu = assemble_walk(uniform_decomposition, uniform_stream)
        assert all(m > 0 for m in mu.masses.values())
        assert mu.total == pytest.approx(1.0 - uniform_decomposition.final_residual_l1,
                                         abs=1e-9)

    def test_shell_symmetry(self, uniform_decomposition, uniform_stream):
        mu = assemble_walk(uniform_decomposition, uniform_stream)
        shell1 = [m for g, m in mu.masses.items() if len(g) == 1]
        assert len(shell1) == 4
        assert all(m == pytest.approx(shell1[0], rel=1e-12) for m in shell1)

    def test_unit_norm_identity(self, uniform_decomposition, uniform_stream):
        # for the constant target the spike L1 norm is e^{-d_phi(e, g)}
        for g, l1 in uniform_decomposition.spike_l1.items():
            assert l1 == pytest.approx(math.exp(-d_phi(uniform_stream.potential, (), g)),
                                       rel=1e-12)

    def test_empty_decomposition_rejected(self, uniform_decomposition, uniform_stream):
        import dataclasses

        hollow = dataclasses.replace(uniform_decomposition, entries={})
        with pytest.raises(ValueError):
            assemble_walk(hollow, uniform_stream)

    def test_save_load_roundtrip(self, uniform_decomposition, uniform_stream, tmp_path):
        mu = assemble_walk(uniform_decomposition, uniform_stream)
        path = tmp_path / "mu.json"
        mu.save(path)
        back = WalkMeasure.load(path)
        assert back.masses.keys() == mu.masses.keys()
        for g in mu.masses:
            assert back.masses[g] == pytest.approx(mu.masses[g], rel=1e-15)


class TestStationarity:
    def test_hand_built_uniform_exact(self, uniform_stream, ones_target):
        # the uniform measure on the four generators is exactly stationary
        # for the uniform boundary density; closed-form convolution oracle
        mu = WalkMeasure(AB, {(s,): 0.25 for s in AB.letters})
        conv = convolved_density_masses(mu, ones_target, uniform_stream, 1)
        # by hand: 1/4 * (3/4 + 1/12 + 1/12 + 1/12) = 1/4 per cylinder
        assert np.abs(conv - 0.25).max() <= 1e-14
        assert stationarity_error(mu, ones_target, uniform_stream, 2) <= 1e-13

    def test_error_equals_residual(self, uniform_decomposition, uniform_stream, ones_target):
        mu = assemble_walk(uniform_decomposition, uniform_stream)
        err = stationarity_error(mu, ones_target, uniform_stream, 2)
        assert err == pytest.approx(uniform_decomposition.final_residual_l1, abs=1e-8)

    def test_error_equals_residual_step(self, step_decomposition, uniform_stream, step_target):
        mu = assemble_walk(step_decomposition, uniform_stream)
        err = stationarity_error(mu, step_target, uniform_stream, 3)
        assert err == pytest.approx(step_decomposition.final_residual_l1, abs=1e-8)

    def test_error_decreases_with_stages(self, ones_target, uniform_stream):
        errs = []
        for cap in (2, 5, 8):
            dec = decompose(ones_target, uniform_stream,
                            DecomposerConfig(stage_cap=cap, target_l1=1e-9))
            mu = assemble_walk(dec, uniform_stream)
            errs.append(stationarity_error(mu, ones_target, uniform_stream, 2))
        assert errs[0] > errs[1] > errs[2]


class TestStatistics:
    def test_point_mass_at_identity(self):
        mu = WalkMeasure(AB, {(): 1.0})
        stats = walk_statistics(mu)
        assert (stats.first_moment, stats.log_moment, stats.entropy) == (0.0, 0.0, 0.0)

    def test_two_equal_masses(self):
        mu = WalkMeasure(AB, {(0,): 0.5, (2,): 0.5})
        assert walk_statistics(mu).entropy == pytest.approx(math.log(2))

    def test_entropy_decomposition_identity(self, uniform_decomposition, uniform_stream):
        mu = assemble_walk(uniform_decomposition, uniform_stream)
        dphi = {g: d_phi(uniform_stream.potential, (), g) for g in mu.masses}
        ent, mom, lam = entropy_decomposition(mu, dphi)
        assert ent == pytest.approx(mom + lam, abs=1e-9)
        for g, m in mu.masses.items():
            lam_g = m * math.exp(dphi[g])
            lhs = -m * math.log(m)
            rhs = m * dphi[g] - lam_g * math.exp(-dphi[g]) * math.log(lam_g)
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_superexponential_flag(self):
        mu = WalkMeasure(AB, {(0,): 0.5, (0, 0): 0.5 * 1e-2, (0, 0, 0): 0.5 * 1e-6})
        assert walk_statistics(mu).superexponential is True
        mu2 = WalkMeasure(AB, {(0,): 0.25, (0, 0): 0.2, (0, 0, 0): 0.19})
        assert walk_statistics(mu2).superexponential is False


class TestSimulation:
    def test_point_mass_deterministic(self):
        mu = WalkMeasure(AB, {(0,): 1.0})
        assert not nondegenerate_support(mu)
        rep = simulate_hitting(mu, 50, 2, seed=1, stabilize=5, step_cap=100,
                               check_support=False)
        assert rep.empirical == {(0, 0): 1.0}

    def test_degenerate_support_rejected(self):
        mu = WalkMeasure(AB, {(0,): 0.7, (0, 0): 0.3})
        with pytest.raises(SimulationError):
            simulate_hitting(mu, 10, 1, seed=1)

    def test_uniform_empirical_within_4sigma(self, uniform_decomposition,
                                             uniform_stream, ones_target):
        mu = assemble_walk(uniform_decomposition, uniform_stream)
        err = stationarity_error(mu, ones_target, uniform_stream, 1)
        rep = simulate_hitting(mu, 20_000, 1, seed=42)
        for s in AB.letters:
            emp = rep.empirical[(s,)]
            se = rep.stderr[(s,)]
            assert abs(emp - 0.25) <= 4 * se + err

    def test_seed_reproducibility_and_chi2(self, uniform_decomposition, uniform_stream):
        mu = assemble_walk(uniform_decomposition, uniform_stream)
        rep1 = simulate_hitting(mu, 8_000, 1, seed=7)
        rep1b = simulate_hitting(mu, 8_000, 1, seed=7)
        assert rep1.empirical == rep1b.empirical
        rep2 = simulate_hitting(mu, 8_000, 1, seed=8)
        assert chi2_compatibility(rep1, rep2) > 0.001

    def test_step_cap_failures_accounted(self, uniform_decomposition, uniform_stream):
        mu = assemble_walk(uniform_decomposition, uniform_stream)
        with pytest.raises(SimulationError, match="stabilize"):
            simulate_hitting(mu, 200, 3, seed=3, stabilize=50, step_cap=10)
