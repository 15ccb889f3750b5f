"""Configuration parsing, report rendering, and the command-line interface."""

import os

import numpy as np
import pytest

from exchangesim.analysis import ExchangeCurve
from exchangesim.cli import main
from exchangesim.config import parse_config, parse_quantity, serialize
from exchangesim.errors import ConfigError
from exchangesim.runner import atomic_write, emit_plot_data, render_report, run, spec_fingerprint

MINIMAL = "layout: channel-reference\n"

CUSTOM = """\
command: sweep
layout:
  domain: [-60 nm, 60 nm, -60 nm, 60 nm]
  background_offset: -40 mV
  gates:
    - name: trap
      role: plunger
      footprint: [-40 nm, 40 nm, -40 nm, 40 nm]
      voltage_off: 20 mV
      voltage_on: 60 mV
solver:
  grid: 33
  orbitals: 4
analysis:
  v_min: 0.0
  v_max: 1.0
  v_points: 5
output: out
"""


class TestQuantities:
    def test_basic_units(self):
        assert parse_quantity("-300 mV", "voltage", "k") == -300.0
        assert parse_quantity("0.5 V", "voltage", "k") == 500.0
        assert parse_quantity("40 nm", "length", "k") == 40.0
        assert parse_quantity("1.5 um", "length", "k") == 1500.0
        assert parse_quantity("2 meV", "energy", "k") == 2000.0
        assert parse_quantity("0.4 ueV", "energy", "k") == 0.4

    def test_missing_unit_cited(self):
        with pytest.raises(ConfigError, match="missing unit"):
            parse_quantity(100, "voltage", "voltage")

    def test_wrong_dimension(self):
        with pytest.raises(ConfigError, match="dimension"):
            parse_quantity("100 nm", "voltage", "k")

    def test_unknown_unit(self):
        with pytest.raises(ConfigError, match="unknown unit"):
            parse_quantity("100 furlong", "length", "k")

    def test_malformed(self):
        with pytest.raises(ConfigError):
            parse_quantity("fast mV", "voltage", "k")
        with pytest.raises(ConfigError):
            parse_quantity("100", "voltage", "k")


class TestParseConfig:
    def test_minimal_builtin_fully_defaulted(self):
        spec = parse_config(MINIMAL)
        assert spec.command == "sweep"
        assert spec.layout_name == "channel-reference"
        assert spec.solver.nx == spec.solver.ny == 105
        assert spec.solver.n_orbitals == 12
        assert spec.analysis.delta == 0.01
        assert spec.optimize is None
        assert spec.output == "out"

    def test_unknown_builtin_rejected(self):
        with pytest.raises(ConfigError, match="unknown built-in"):
            parse_config("layout: rail-reference\n")

    def test_unknown_top_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(MINIMAL + "verbosity: 3\n")

    def test_unknown_solver_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(MINIMAL + "solver:\n  mesh: 40\n")

    def test_custom_layout(self):
        spec = parse_config(CUSTOM)
        assert spec.layout_name is None
        assert len(spec.layout.gates) == 1
        gate = spec.layout.gates[0]
        assert gate.voltage_off == 20.0 and gate.voltage_on == 60.0
        assert spec.layout.background_offset == -40.0
        assert spec.solver.nx == 33

    def test_unitless_voltage_rejected(self):
        bad = CUSTOM.replace("voltage_off: 20 mV", "voltage_off: 20")
        with pytest.raises(ConfigError, match="missing unit"):
            parse_config(bad)

    def test_bad_yaml_rejected(self):
        with pytest.raises(ConfigError, match="YAML"):
            parse_config("layout: [unclosed\n")

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("")

    def test_optimize_requires_section(self):
        with pytest.raises(ConfigError, match="optimize"):
            parse_config("command: optimize\n" + MINIMAL)

    def test_optimize_section_parsed(self):
        text = MINIMAL + (
            "command: optimize\n"
            "optimize:\n"
            "  parameters:\n"
            "    - {name: center_voltage, min: -160 mV, max: -80 mV}\n"
            "  j_min: 1 ueV\n"
            "  budget: 40\n"
        )
        spec = parse_config(text)
        assert spec.optimize.parameters == (("center_voltage", -160.0, -80.0),)
        assert spec.optimize.j_min == 1.0
        assert spec.optimize.budget == 40

    def test_round_trip_identity(self):
        for text in (MINIMAL, CUSTOM):
            spec = parse_config(text)
            again = parse_config(serialize(spec))
            assert again == spec
            assert spec_fingerprint(again) == spec_fingerprint(spec)


class TestReportFormat:
    def test_grammar(self, tmp_path):
        spec = parse_config(CUSTOM)
        report = run(spec, out_dir=str(tmp_path))
        text = render_report(report)
        lines = text.splitlines()
        assert lines[0] == "exchangesim-report 1"
        assert lines[1] == "run:"
        sections = [ln for ln in lines[1:] if not ln.startswith("  ")]
        assert all(ln.endswith(":") for ln in sections)
        entries = [ln for ln in lines[2:] if ln.startswith("  ")]
        assert all(": " in ln for ln in entries)

    def test_fingerprint_reproduces_from_spec(self, tmp_path):
        spec = parse_config(CUSTOM)
        report = run(spec, out_dir=str(tmp_path))
        assert report.fingerprint == spec_fingerprint(spec)


class TestRunnerFiles:
    def test_sweep_outputs(self, tmp_path):
        spec = parse_config(CUSTOM)
        run(spec, out_dir=str(tmp_path))
        for name in ("report.txt", "curve.csv", "omega.csv", "README"):
            assert (tmp_path / name).exists()
        curve_lines = (tmp_path / "curve.csv").read_text().splitlines()
        assert curve_lines[0] == "v,J_ueV"
        assert len(curve_lines) == 1 + 5
        assert (tmp_path / "omega.csv").read_text().startswith("v,omega")

    def test_no_temp_files_left(self, tmp_path):
        spec = parse_config(CUSTOM)
        run(spec, out_dir=str(tmp_path))
        leftovers = [p for p in os.listdir(tmp_path) if ".tmp-" in p]
        assert leftovers == []

    def test_atomic_write_replaces(self, tmp_path):
        path = str(tmp_path / "file.txt")
        atomic_write(path, "first\n")
        atomic_write(path, "second\n")
        assert (tmp_path / "file.txt").read_text() == "second\n"

    def test_export_potential(self, tmp_path):
        spec = parse_config(CUSTOM.replace("command: sweep",
                                           "command: export-potential"))
        run(spec, out_dir=str(tmp_path))
        header = (tmp_path / "potential.txt").read_text().splitlines()[0]
        assert header.startswith("# 33 33 ")

    def test_empty_curve_refused(self):
        with pytest.raises(Exception, match="at least 5 points"):
            ExchangeCurve(points=())

    def test_plot_data_shape(self, tmp_path):
        vs = np.linspace(0, 1, 11)
        curve = ExchangeCurve(points=tuple((v, float(np.exp(3 * v)))
                                           for v in vs))
        emit_plot_data(curve, str(tmp_path))
        omega = (tmp_path / "omega.csv").read_text().splitlines()
        assert 2 <= len(omega) <= 1 + 9  # interior points only


class TestCli:
    def run_cli(self, tmp_path, config_text, *args):
        cfg = tmp_path / "cfg.yaml"
        cfg.write_text(config_text)
        return main(list(args) + ["--config", str(cfg)])

    def test_sweep_success(self, tmp_path, capsys):
        out = tmp_path / "results"
        code = self.run_cli(tmp_path, CUSTOM, "sweep", "--out", str(out))
        assert code == 0
        assert (out / "curve.csv").exists()
        assert "complete" in capsys.readouterr().out

    def test_bad_config_exit_2(self, tmp_path, capsys):
        code = self.run_cli(tmp_path, "layout: nope\n", "sweep")
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_missing_unit_exit_2(self, tmp_path):
        bad = CUSTOM.replace("voltage_off: 20 mV", "voltage_off: 20")
        assert self.run_cli(tmp_path, bad, "sweep") == 2

    def test_missing_config_file(self, tmp_path, capsys):
        code = main(["sweep", "--config", str(tmp_path / "absent.yaml")])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_cli_overrides(self, tmp_path):
        out = tmp_path / "o"
        code = self.run_cli(tmp_path, CUSTOM, "sweep", "--out", str(out),
                            "--v-points", "6")
        assert code == 0
        lines = (out / "curve.csv").read_text().splitlines()
        assert len(lines) == 1 + 6

    def test_threads_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SIM_THREADS", "2")
        out = tmp_path / "o"
        assert self.run_cli(tmp_path, CUSTOM, "sweep", "--out", str(out)) == 0

    def test_validate_exit_zero_and_table(self, tmp_path, capsys):
        out = tmp_path / "val"
        code = self.run_cli(tmp_path, MINIMAL, "validate", "--out", str(out))
        assert code == 0
        rows = (out / "validation.csv").read_text().strip().splitlines()
        assert rows[0] == "check,measured,bound,pass"
        assert len(rows) > 5
        assert all(r.endswith(",1") for r in rows[1:])
