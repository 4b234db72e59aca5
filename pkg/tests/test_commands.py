# tests/test_commands.py
import json
from dataclasses import replace

import pytest

import commands.run as run_module
from commands.run import run_command
from commands.verify import CHECKS, Check, run_checks
from config.settings import RunConfig, apply_overrides
from main import main
from results.cache import ResultCache
from utils.errors import ConfigValidationError, DomainError

SMALL = ["circuit.n_modes=2", "circuit.e_j=0.5", "numerics.n_max=4", "numerics.n_levels=3",
         "sweep.bias_points=4", "output.use_cache=false"]


def small_config(*extra):
    return apply_overrides(RunConfig(), SMALL + list(extra))


class TestRunCommand:
    def test_modes_csv(self, tmp_path):
        status, paths, record = run_command("modes", small_config(), out_dir=str(tmp_path), fmt="csv")
        assert status == 0
        assert [p.rsplit("/", 1)[-1] for p in paths] == ["modes.csv", "modes_summary.csv", "modes.meta.json"]
        header = (tmp_path / "modes.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header.startswith("mode,Omega [E_C],f [E_C],omega [E_C]")
        assert record.payload["boundary"] == "open"
        assert record.provenance["audit"] is None

    def test_modes_json_short_line(self, tmp_path):
        cfg = small_config("circuit.boundary=short")
        _, paths, record = run_command("modes", cfg, out_dir=str(tmp_path), fmt="json")
        assert paths == [str(tmp_path / "modes.json")]
        document = json.loads((tmp_path / "modes.json").read_text(encoding="utf-8"))
        assert document["payload"]["bath"] is None
        assert document["payload"]["e_l_tilde"] == pytest.approx(record.payload["e_l_tilde"])

    def test_payload_does_not_depend_on_threads(self, tmp_path):
        cfg = small_config("output.rescale=false")
        _, _, single = run_command("bands", cfg, out_dir=str(tmp_path / "a"), threads=1)
        _, _, pooled = run_command("bands", cfg, out_dir=str(tmp_path / "b"), threads=3)
        assert single.payload == pooled.payload

    def test_cache_hit_skips_computation(self, tmp_path, monkeypatch):
        cfg = small_config("output.use_cache=true")
        cache = ResultCache(str(tmp_path / "cache"))
        _, _, first = run_command("modes", cfg, out_dir=str(tmp_path / "out"), cache=cache)

        class Exploding:
            def __init__(self, *args, **kwargs):
                raise AssertionError("cache was not used")

        monkeypatch.setattr(run_module, "CommandRunner", Exploding)
        _, _, second = run_command("modes", cfg, out_dir=str(tmp_path / "out"), cache=cache)
        assert second == first

    def test_audit_bypasses_cache(self, tmp_path):
        cfg = small_config("output.use_cache=true", "circuit.e_j=0.0")
        cache = ResultCache(str(tmp_path / "cache"))
        _, _, record = run_command("modes", cfg, out_dir=str(tmp_path / "out"), audit=True, cache=cache)
        assert set(record.provenance["audit"]) == {"e_cut", "n_max"}
        assert cache.get(record.key) is None

    def test_heatmap_writes_impedance_table(self, tmp_path):
        cfg = small_config("sweep.z_ratio=[0.5,1.0]", "sweep.e_j=[0.5]")
        status, paths, record = run_command("heatmap", cfg, out_dir=str(tmp_path), fmt="csv")
        assert status == 0
        scan = record.payload["impedance_scan"]
        assert scan["z_ratio"] == [0.5, 1.0]
        assert scan["bias"] == [0.0, 0.5]
        assert [len(per_bias) for per_bias in scan["levels"]] == [2, 2]
        assert scan["levels"][0][0][0] == pytest.approx(0.0, abs=1e-12)
        lines = (tmp_path / "heatmap_impedance.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "z_ratio,bias,E1 [E_C],E2 [E_C],E3 [E_C]"
        assert len(lines) == 1 + 4
        assert str(tmp_path / "heatmap_impedance.csv") in paths

    def test_unknown_command(self, tmp_path):
        with pytest.raises(ConfigValidationError):
            run_command("plot", small_config(), out_dir=str(tmp_path))


class TestVerify:
    def test_selected_checks_pass(self, tmp_path):
        cfg = replace(small_config(), verify=replace(RunConfig().verify, checks=("sum_rule", "cft_values")))
        status, _, record = run_command("verify", cfg, out_dir=str(tmp_path))
        assert status == 0
        assert [c["name"] for c in record.payload["checks"]] == ["sum_rule", "cft_values"]
        assert record.payload["passed"]

    def test_failing_check_sets_exit_status(self, tmp_path, monkeypatch):
        monkeypatch.setitem(CHECKS, "always_fails", Check("always_fails", lambda: (False, "no")))
        cfg = replace(small_config(), verify=replace(RunConfig().verify, checks=("always_fails",)))
        status, _, record = run_command("verify", cfg, out_dir=str(tmp_path))
        assert status == 1
        assert not record.payload["passed"]

    def test_errors_inside_a_check_are_reported(self, monkeypatch):
        def broken():
            raise DomainError("bad input")

        monkeypatch.setitem(CHECKS, "broken", Check("broken", broken))
        result, = run_checks(["broken"])
        assert not result["passed"]
        assert result["detail"] == "DomainError: bad input"

    def test_unknown_check(self):
        with pytest.raises(ConfigValidationError):
            run_checks(["no_such_check"])

    def test_default_selection_skips_slow_checks(self, monkeypatch):
        for name in list(CHECKS):
            monkeypatch.delitem(CHECKS, name)
        monkeypatch.setitem(CHECKS, "fast", Check("fast", lambda: (True, "ok")))
        monkeypatch.setitem(CHECKS, "slow", Check("slow", lambda: (True, "ok"), slow=True))
        assert [r["name"] for r in run_checks()] == ["fast"]
        assert [r["name"] for r in run_checks(include_slow=True)] == ["fast", "slow"]


class TestMain:
    @pytest.fixture(autouse=True)
    def isolated_settings(self, tmp_path, monkeypatch):
        monkeypatch.setenv("JJDUALITY_CONFIG_DIR", str(tmp_path / "settings"))

    def test_modes_run_prints_written_paths(self, tmp_path, capsys):
        argv = ["modes", "--out", str(tmp_path / "out")] + [a for s in SMALL for a in ("--set", s)]
        assert main(argv) == 0
        printed = capsys.readouterr().out.split()
        assert str(tmp_path / "out" / "modes.csv") in printed

    def test_modes_without_config_file(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("JJDUALITY_CACHE_DIR", str(tmp_path / "cache"))
        assert main(["modes", "--out", str(tmp_path / "out")]) == 0
        assert (tmp_path / "out" / "modes.csv").exists()
        rows = (tmp_path / "out" / "modes.csv").read_text(encoding="utf-8").splitlines()
        assert len(rows) == 1 + 10

    def test_print_config(self, capsys):
        assert main(["bands", "--print-config", "--set", "circuit.z_ratio=2"]) == 0
        document = json.loads(capsys.readouterr().out)
        assert document["circuit"]["z_ratio"] == 2.0
        assert document["circuit"]["n_modes"] == 10

    def test_invalid_json_config(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"circuit": {"e_j": }}', encoding="utf-8")
        assert main(["modes", "--config", str(path)]) == 1
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["code"] == 400
        assert record["error"] == "ConfigParseError"

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["modes", "--config", str(tmp_path / "absent.json")]) == 1
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["code"] == 507

    def test_invalid_value_names_field(self, capsys):
        assert main(["modes", "--set", "circuit.e_c=-1"]) == 1
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["code"] == 400
        assert record["field"] == "circuit.e_c"
