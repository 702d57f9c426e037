"""Integration tests running the experiments end to end through their configs."""

import numpy as np
import pytest

from oqt_sim.config.scenario import parse_config
from oqt_sim.config.settings import RunMode
from oqt_sim.experiments import get_experiment
from oqt_sim.experiments.fig1 import Fig1Scenario, run_fig1
from oqt_sim.experiments.no_signalling import run_no_signalling


def _run(raw):
    config = parse_config(raw)
    return get_experiment(config.experiment)(config, workers=1)


@pytest.mark.integration
class TestNoSignalling:
    """Test cases for the no-signalling witness."""

    def test_defaults_pass(self):
        result = _run({"experiment": "no_signalling"})
        names = {c.name for c in result.checks}
        assert names == {
            "no_signalling.witness",
            "no_signalling.mutant_detected",
            "no_signalling.alpha_independent",
        }
        assert result.passed, [c.line() for c in result.checks]

    def test_reduced_state_is_not_frozen(self):
        report = run_no_signalling(3, 2, n_steps=500, run_mutant=False)
        assert report.max_deviation < 1e-9
        assert report.max_deviation_from_initial > 1e-3
        assert np.isnan(report.mutant_deviation)


@pytest.mark.integration
class TestFig1:
    """Test cases for the relaxation curves."""

    def test_master_curves_pass(self):
        result = run_fig1(Fig1Scenario(t_end=24.0, alpha_grid=(0.0, 1.0, 2.0)))
        assert result.passed, [c.line() for c in result.checks]
        assert "fig1_O1_alpha2" in result.curves
        assert "fig1.plateau.O1.alpha2" in {c.name for c in result.checks}
        assert "fig1.envelope_rate_ordering" in {c.name for c in result.checks}

    @pytest.mark.slow
    def test_defaults_pass(self):
        result = _run({"experiment": "fig1"})
        assert result.passed, [c.line() for c in result.checks]

    @pytest.mark.slow
    def test_trajectory_cross_check(self):
        scenario = Fig1Scenario(
            alpha_grid=(0.0, 1.0),
            t_end=8.0,
            mode=RunMode.BOTH,
            n_trajectories=100,
            trajectory_t_end=0.2,
        )
        result = run_fig1(scenario)
        names = {c.name for c in result.checks}
        assert "fig1.trajectory_cross_check.alpha1" in names
        cross = [c for c in result.checks if "trajectory_cross_check" in c.name]
        assert all(c.passed for c in cross), [c.line() for c in cross]


@pytest.mark.integration
@pytest.mark.slow
class TestAppendixA:
    """Test cases for the SUV and OQT Martingale comparison."""

    def test_defaults_pass(self):
        result = _run({"experiment": "appendix_a"})
        assert result.passed, [c.line() for c in result.checks]
        names = {c.name for c in result.checks}
        assert "appendix_a.seed0.suv_terminal_collapse" in names
        assert "appendix_a.seed0.suv_sector_selection_born" in names
        assert result.report["seeds"][0]["collapse_residual"] <= 1e-6
        assert "appendix_a_seed0_suv_sectors" in result.curves


@pytest.mark.integration
class TestCustom:
    """Test cases for free-form scenarios."""

    def test_master_mode(self):
        result = _run({"experiment": "custom", "j_eff": 1.0, "n_steps": 1000, "mode": "master"})
        assert result.passed, [c.line() for c in result.checks]
        assert any(c.name == "custom.positivity" for c in result.checks)
