# tests/test_settings.py
import json

import pytest

from config.settings import (CircuitBlock, RunConfig, Settings, apply_overrides, config_from_mapping, config_to_dict,
                             parse_config, serialize_config)
from utils.errors import ConfigParseError, ConfigValidationError


class TestParseConfig:
    def test_minimal_circuit_block_fills_defaults(self):
        cfg = parse_config('{"circuit": {"e_j": 0.5, "n_modes": 7}}')
        assert cfg.circuit.e_j == 0.5
        assert cfg.circuit.n_modes == 7
        assert cfg.numerics.n_max == 12
        assert cfg.numerics.e_cut_delta == 6.0
        assert cfg.sweep.bias_points == 41
        assert cfg.output.format == "csv"

    def test_empty_document_defaults_to_ten_modes(self):
        assert parse_config("{}").circuit.n_modes == 10

    def test_delta_is_converted_to_mode_count(self):
        cfg = parse_config('{"circuit": {"delta": 0.66, "omega_c": 4}}')
        assert cfg.circuit.n_modes == 10
        assert cfg.circuit.delta is None

    def test_default_config_matches_empty_document(self):
        assert RunConfig() == config_from_mapping({})
        assert RunConfig().circuit.n_modes == 10

    def test_delta_only_block_is_accepted(self):
        cfg = config_from_mapping({"circuit": {"delta": 1.2566370614359172, "omega_c": 4.0}})
        assert cfg.circuit.n_modes == 5

    def test_delta_and_mode_count_together_rejected(self):
        with pytest.raises(ConfigValidationError) as info:
            parse_config('{"circuit": {"delta": 1.0, "n_modes": 4}}')
        assert info.value.field == "circuit.delta"

    def test_round_trip_is_identity_on_canonical_form(self):
        cfg = parse_config('{"sweep": {"e_j": [0.5, 1]}, "circuit": {"boundary": "short", "z_ratio": 2}}')
        text = serialize_config(cfg)
        again = parse_config(text)
        assert again == cfg
        assert serialize_config(again) == text

    def test_parse_error_reports_line_and_column(self):
        with pytest.raises(ConfigParseError) as info:
            parse_config('{\n  "circuit": {"e_j": }\n}')
        assert info.value.line == 2
        assert info.value.column > 1
        assert info.value.code == 400

    def test_unknown_key_rejected_in_strict_mode(self):
        with pytest.raises(ConfigValidationError) as info:
            parse_config('{"circuit": {"e_k": 1}}')
        assert info.value.field == "circuit.e_k"

    def test_unknown_key_ignored_in_lenient_mode(self):
        cfg = parse_config('{"circuit": {"e_k": 1}, "plots": {}}', lenient=True)
        assert cfg.circuit == CircuitBlock(n_modes=10)

    @pytest.mark.parametrize("document, field", [
        ('{"circuit": {"e_c": 0}}', "circuit.e_c"),
        ('{"circuit": {"boundary": "ground"}}', "circuit.boundary"),
        ('{"circuit": {"bias": 0.7}}', "circuit.bias"),
        ('{"numerics": {"n_max": 2.5}}', "numerics.n_max"),
        ('{"output": {"format": "xlsx"}}', "output.format"),
        ('{"sweep": {"z_ratio": []}}', "sweep.z_ratio"),
    ])
    def test_validation_error_names_field(self, document, field):
        with pytest.raises(ConfigValidationError) as info:
            parse_config(document)
        assert info.value.field == field
        assert info.value.to_record()["allowed"]


class TestOverrides:
    def test_set_flag_overrides_one_key(self):
        cfg = apply_overrides(RunConfig(), ["numerics.n_max=4", "circuit.boundary=short"])
        assert cfg.numerics.n_max == 4
        assert cfg.circuit.boundary == "short"

    def test_delta_override_replaces_mode_count(self):
        cfg = apply_overrides(parse_config('{"circuit": {"n_modes": 3}}'), ["circuit.delta=0.66"])
        assert cfg.circuit.n_modes == 10

    def test_malformed_assignment(self):
        with pytest.raises(ConfigValidationError):
            apply_overrides(RunConfig(), ["n_max=4"])

    def test_config_to_dict_uses_lists(self):
        data = config_to_dict(RunConfig())
        assert isinstance(data["sweep"]["e_j"], list)
        json.dumps(data)


class TestSettings:
    def setup_method(self):
        self.defaults = dict(Settings.DEFAULTS)

    def test_defaults_when_file_missing(self, tmp_path):
        settings = Settings(str(tmp_path / "settings.json"))
        assert settings.get("threads") == self.defaults["threads"]

    def test_stored_values_override_defaults(self, tmp_path):
        path = tmp_path / "settings.json"
        path.write_text(json.dumps({"threads": 4, "printer": "x"}), encoding="utf-8")
        settings = Settings(str(path))
        assert settings.get("threads") == 4
        assert settings.get("format") == self.defaults["format"]
        assert "printer" not in settings.settings

    def test_corrupt_file_falls_back_to_defaults(self, tmp_path):
        path = tmp_path / "settings.json"
        path.write_text("{not json", encoding="utf-8")
        assert Settings(str(path)).settings == self.defaults

    def test_config_dir_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("JJDUALITY_CONFIG_DIR", str(tmp_path))
        assert Settings().config_file == str(tmp_path / "settings.json")
