"""Unit tests for scenario configuration parsing."""

import json

import pytest

from oqt_sim.config.scenario import (
    ExperimentName,
    ObservableKind,
    config_to_dict,
    emit_config,
    parse_config,
    with_overrides,
)
from oqt_sim.config.settings import RunMode
from oqt_sim.errors import ConfigurationError


@pytest.mark.unit
class TestParseConfig:
    """Test cases for parse_config."""

    @pytest.mark.parametrize("name", [e.value for e in ExperimentName])
    def test_round_trip(self, name):
        config = parse_config({"experiment": name})
        assert parse_config(emit_config(config)) == config

    def test_fig1_defaults(self):
        config = parse_config({"experiment": "fig1"})
        assert config.dim == 25
        assert config.alpha_grid == [0.0, 0.5, 1.0, 2.0]
        assert config.mode is RunMode.MASTER
        assert config.spectrum == (0.0, 10.0)

    def test_explicit_values_win_over_defaults(self):
        config = parse_config({"experiment": "custom", "dim": 5, "alpha_eff": 2.0})
        assert config.dim == 5
        assert config.alpha_eff == 2.0

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError, match="unknown keys: colour"):
            parse_config({"experiment": "fig1", "colour": "blue"})

    def test_unknown_experiment(self):
        with pytest.raises(ConfigurationError):
            parse_config({"experiment": "fig9"})

    def test_trajectory_guard(self):
        with pytest.raises(ConfigurationError, match="stability guard"):
            parse_config({"experiment": "custom", "alpha_eff": 50.0, "dt": 0.01})

    def test_master_guard(self):
        with pytest.raises(ConfigurationError, match="alpha_eff\\+j_eff"):
            parse_config({"experiment": "custom", "alpha_eff": 3.0, "j_eff": 3.0, "dt": 0.01})

    def test_appendix_a_needs_both_couplings(self):
        with pytest.raises(ConfigurationError, match="appendix_a"):
            parse_config({"experiment": "appendix_a", "j_eff": 0.0})

    def test_negative_seed(self):
        with pytest.raises(ConfigurationError, match="seed"):
            parse_config({"experiment": "fig1", "seed": -1})

    def test_spectrum_range_order(self):
        with pytest.raises(ConfigurationError, match="spectrum_range"):
            parse_config({"experiment": "fig1", "spectrum_range": [5.0, 1.0]})

    def test_coherence_observable_needs_pair(self):
        with pytest.raises(ConfigurationError, match="pair"):
            parse_config({"experiment": "custom", "observables": [{"kind": "coherence"}]})

    def test_observables_parsed(self):
        config = parse_config(
            {"experiment": "custom", "observables": [{"kind": "population", "index": 2}]}
        )
        assert config.observables[0].kind is ObservableKind.POPULATION

    def test_from_file(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps({"experiment": "no_signalling", "seed": 4}))
        config = parse_config(path)
        assert config.seed == 4
        assert config.dim_a == 4

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            parse_config(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigurationError, match="JSON"):
            parse_config(path)

    def test_non_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigurationError, match="JSON object"):
            parse_config(path)

    def test_inline_json_text(self):
        assert parse_config('{"experiment": "fig1", "seed": 2}').seed == 2


@pytest.mark.unit
class TestOverrides:
    """Test cases for with_overrides."""

    def test_none_values_are_ignored(self):
        config = parse_config({"experiment": "fig1", "seed": 3})
        assert with_overrides(config, {"seed": None}).seed == 3

    def test_override_revalidates(self):
        config = parse_config({"experiment": "fig1"})
        with pytest.raises(ConfigurationError):
            with_overrides(config, {"seed": -2})

    def test_mode_override(self):
        config = with_overrides(parse_config({"experiment": "fig1"}), {"mode": "both"})
        assert config.mode is RunMode.BOTH
        assert config_to_dict(config)["mode"] == "both"
