"""Command-line interface: subcommands, outputs, exit codes."""

import pytest

from ahpower.cli import main
from ahpower.scenarios import builtin_scenario, save_scenario


def run_cli(*args):
    return main(list(args))


class TestScenarios:
    def test_lists_builtins(self, capsys):
        assert run_cli("scenarios") == 0
        out = capsys.readouterr().out
        for name in ("agricultural_monitoring", "smart_metering",
                     "industrial_automation", "animal_monitoring"):
            assert name in out


class TestModel:
    def test_writes_manifest_csv(self, tmp_path, capsys):
        assert run_cli("model", "--scenario", "smart_metering",
                       "--out", str(tmp_path)) == 0
        path = tmp_path / "model_smart_metering.csv"
        text = path.read_text()
        assert text.startswith("# command: ahpower")
        assert "# version: ahpower" in text
        assert "# seed:" in text
        header = [ln for ln in text.splitlines() if not ln.startswith("#")][0]
        assert header.startswith("source,scenario,")
        assert "sleep" not in capsys.readouterr().err

    def test_defaults_equal_explicit_defaults(self, tmp_path):
        run_cli("model", "--scenario", "agricultural_monitoring",
                "--out", str(tmp_path / "a"))
        run_cli("model", "--scenario", "agricultural_monitoring",
                "--ntim", "8", "--t", "1.6", "--out", str(tmp_path / "b"))
        a = (tmp_path / "a" / "model_agricultural_monitoring.csv").read_text()
        b = (tmp_path / "b" / "model_agricultural_monitoring.csv").read_text()
        # identical numbers; only the recorded command differs
        strip = lambda t: [ln for ln in t.splitlines() if not ln.startswith("#")]
        assert strip(a) == strip(b)

    def test_unknown_scenario_exit_2(self, capsys):
        assert run_cli("model", "--scenario", "lunar_base") == 2
        err = capsys.readouterr().err
        assert "smart_metering" in err   # lists the available presets

    def test_missing_scenario_exit_2(self, capsys):
        assert run_cli("model") == 2

    def test_config_file(self, tmp_path):
        s = builtin_scenario("smart_metering")
        cfg = tmp_path / "site.yaml"
        save_scenario(s, cfg)
        assert run_cli("model", "--config", str(cfg),
                       "--out", str(tmp_path)) == 0

    def test_infeasible_exit_3(self, tmp_path, capsys):
        assert run_cli("model", "--scenario", "smart_metering",
                       "--t", "0.02", "--out", str(tmp_path)) == 3
        assert "infeasible" in capsys.readouterr().err


class TestSimulate:
    def test_deterministic_bytes(self, tmp_path):
        args = ("simulate", "--scenario", "smart_metering", "--periods", "150",
                "--seed", "5")
        assert run_cli(*args, "--out", str(tmp_path / "x")) == 0
        assert run_cli(*args, "--out", str(tmp_path / "y")) == 0
        a = (tmp_path / "x" / "sim_smart_metering_5.csv").read_bytes()
        b = (tmp_path / "y" / "sim_smart_metering_5.csv").read_bytes()
        assert a == b

    def test_trace_flag_writes_log(self, tmp_path):
        assert run_cli("simulate", "--scenario", "smart_metering",
                       "--periods", "100", "--seed", "5", "--trace",
                       "--out", str(tmp_path)) == 0
        trace = tmp_path / "trace_smart_metering_5.log"
        assert trace.exists()
        assert any("delivered" in ln for ln in trace.read_text().splitlines())

    def test_duration_overrides_periods(self, tmp_path, capsys):
        assert run_cli("simulate", "--scenario", "smart_metering",
                       "--duration", "16", "--seed", "5",
                       "--out", str(tmp_path)) == 0
        out = capsys.readouterr().out
        assert "simulated 10 periods" in out


class TestCompare:
    def test_compare_outputs(self, tmp_path, capsys):
        assert run_cli("compare", "--scenario", "smart_metering",
                       "--periods", "200", "--seed", "3",
                       "--out", str(tmp_path)) == 0
        assert (tmp_path / "compare_smart_metering.csv").exists()
        side = (tmp_path / "compare_side_smart_metering.csv").read_text()
        rows = [ln for ln in side.splitlines() if not ln.startswith("#")]
        assert rows[1].startswith("model,") and rows[2].startswith("sim,")


class TestOptimize:
    def test_ntim_axis(self, tmp_path, capsys):
        assert run_cli("optimize", "--axis", "ntim", "--scenario",
                       "smart_metering", "--out", str(tmp_path)) == 0
        out = capsys.readouterr().out
        assert "chose 8" in out
        sweep = (tmp_path / "sweep_n_tim_smart_metering.csv").read_text()
        assert "chosen" in sweep.splitlines()[-7]  # header line present
        assert (tmp_path / "curve_n_tim_smart_metering.csv").exists()

    def test_t_axis_with_grid(self, tmp_path, capsys):
        assert run_cli("optimize", "--axis", "t", "--scenario",
                       "animal_monitoring", "--grid", "2:20:0.5",
                       "--out", str(tmp_path)) == 0
        assert "sweep dtim_period" in capsys.readouterr().out

    def test_bad_grid_exit_2(self, tmp_path):
        assert run_cli("optimize", "--axis", "t", "--scenario",
                       "smart_metering", "--grid", "1:2",
                       "--out", str(tmp_path)) == 2

    def test_empty_grid_exit_2(self, tmp_path):
        assert run_cli("optimize", "--axis", "ntim", "--scenario",
                       "smart_metering", "--grid", ",",
                       "--out", str(tmp_path)) == 2
