"""Configuration loading, overrides, validation messages, and the echo."""

import pytest

from andlab.config import (
    ExperimentConfig,
    apply_override,
    config_echo,
    config_from_mapping,
    load_config,
    parse_override,
)
from andlab.errors import ConfigurationError


class TestDefaults:
    def test_defaults_are_valid(self):
        cfg = load_config()
        assert cfg.model.N == 1
        assert cfg.field.kind == "moving-average"
        assert cfg.scales.l0 == 8
        assert cfg.msa.gamma_ct == 0.5
        assert cfg.mc.trials == 200
        assert cfg.output.formats == ["csv", "json"]
        assert cfg.workers == 1

    def test_mapping_round_trip(self):
        cfg = config_from_mapping({"model": {"N": 2}, "mc": {"trials": 500}})
        assert cfg.model.N == 2
        assert cfg.mc.trials == 500
        again = config_from_mapping(cfg.model_dump(mode="json"))
        assert again == cfg


class TestValidationMessages:
    def test_extra_key_names_dotted_path(self):
        with pytest.raises(ConfigurationError) as excinfo:
            config_from_mapping({"msa": {"gama_ct": 0.4}})
        assert "msa.gama_ct" in str(excinfo.value)

    def test_bad_value_names_dotted_path(self):
        with pytest.raises(ConfigurationError) as excinfo:
            config_from_mapping({"msa": {"gamma_ct": 1.5}})
        message = str(excinfo.value)
        assert "msa.gamma_ct" in message
        assert "(0, 1)" in message

    def test_file_error_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("model:\n  N: 2\nmsa:\n  gamma_ct: 1.5\n")
        with pytest.raises(ConfigurationError) as excinfo:
            load_config(path)
        assert "msa.gamma_ct (line 4)" in str(excinfo.value)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            load_config(tmp_path / "absent.yaml")

    def test_non_mapping_file(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigurationError, match="mapping"):
            load_config(path)

    def test_invalid_yaml_file(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("model: [unclosed\n")
        with pytest.raises(ConfigurationError, match="valid YAML"):
            load_config(path)

    def test_assignment_is_validated(self):
        cfg = load_config()
        with pytest.raises(Exception):
            cfg.msa.gamma_ct = 2.0


class TestOverrides:
    def test_parse_forms(self):
        assert parse_override("msa.gamma_ct=0.25") == (["msa", "gamma_ct"], 0.25)
        assert parse_override("model.N=3") == (["model", "N"], 3)
        assert parse_override("field.kind=iid-uniform") == (["field", "kind"], "iid-uniform")
        assert parse_override("output.formats=[csv]") == (["output", "formats"], ["csv"])
        assert parse_override("experiments.ns.energy=null") == (
            ["experiments", "ns", "energy"],
            None,
        )

    def test_parse_errors(self):
        with pytest.raises(ConfigurationError, match="dotted.key=value"):
            parse_override("msa.gamma_ct")
        with pytest.raises(ConfigurationError, match="empty key"):
            parse_override("=3")

    def test_apply_builds_nested_dicts(self):
        data: dict = {}
        apply_override(data, ["a", "b", "c"], 7)
        assert data == {"a": {"b": {"c": 7}}}

    def test_load_with_overrides(self, tmp_path):
        path = tmp_path / "base.yaml"
        path.write_text("mc:\n  trials: 300\n")
        cfg = load_config(path, overrides=("mc.master_seed=9", "model.N=2"))
        assert cfg.mc.trials == 300
        assert cfg.mc.master_seed == 9
        assert cfg.model.N == 2

    def test_override_validation_still_applies(self):
        with pytest.raises(ConfigurationError) as excinfo:
            load_config(overrides=("msa.gamma_ct=1.5",))
        assert "msa.gamma_ct" in str(excinfo.value)


class TestEcho:
    def test_excludes_placement_keys(self):
        cfg = ExperimentConfig()
        echo = config_echo(cfg)
        assert "workers" not in echo
        assert "directory" not in echo["output"]
        assert echo["output"]["formats"] == ["csv", "json"]
        assert echo["output"]["export_matrix"] is False
        assert echo["model"]["N"] == 1

    def test_echo_is_plain_json_data(self):
        import json

        echo = config_echo(ExperimentConfig())
        json.dumps(echo)  # must not raise

    def test_echo_ignores_directory_and_workers(self):
        base = config_echo(ExperimentConfig())
        moved = ExperimentConfig(workers=8, output={"directory": "elsewhere"})
        assert config_echo(moved) == base
