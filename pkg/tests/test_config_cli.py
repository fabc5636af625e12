import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from superatom.cli import main
from superatom.config import (
    ConfigError,
    blockade_line,
    effective_parameters,
    load_config,
    parse_config_text,
    parse_scalar,
)
from superatom.io import SchemaError, read_series, write_series
from superatom.runner import build_run_list, pool_size, run_experiment

TWO_PI = 2 * math.pi

FAST_OVERRIDES = """
t_end = 6.0
sigma_t = 0.75
sample_count = 61
"""


class TestParsing:
    def test_two_pi_prefix_exact(self):
        assert parse_scalar("2pi*3") == 2 * math.pi * 3
        assert parse_scalar("2pi*0.1") == 2 * math.pi * 0.1
        assert parse_scalar("38") == 38.0
        assert parse_scalar("1e-3") == 1e-3

    def test_defaults(self):
        cfg = parse_config_text("experiment = custom")
        assert cfg.n_atoms_list == [1]
        assert cfg.engine == "me"
        assert cfg.seed == 12345

    def test_experiment_default_atom_lists(self):
        assert parse_config_text("experiment = fig1c").n_atoms_list == [1, 2, 3, 4, 5, 6]
        assert parse_config_text("experiment = fig2").n_atoms_list == [1, 2, 3, 4, 5, 6]

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="omega_0"):
            parse_config_text("omega_0 = 3")

    def test_error_carries_line_number(self):
        with pytest.raises(ConfigError, match="line 3"):
            parse_config_text("experiment = custom\n\nbogus_key = 1\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config_text("seed = 1\nseed = 2")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError, match="n_traj"):
            parse_config_text("n_traj = many")

    def test_comments_and_blank_lines(self):
        cfg = parse_config_text("# heading\nexperiment = fig2  # inline\n\nseed = 7\n")
        assert cfg.experiment == "fig2" and cfg.seed == 7

    def test_geometry_requires_all_fields(self):
        with pytest.raises(ConfigError, match="geometry"):
            parse_config_text("positions = 0,0,0; 5,0,0")

    def test_engine_validation(self):
        with pytest.raises(ConfigError, match="engine"):
            parse_config_text("engine = quantum")


class TestEffectiveParameters:
    def test_defaults_report(self):
        cfg = parse_config_text("experiment = fig1c")
        eff = effective_parameters(cfg)
        assert eff["omega0"] == pytest.approx(TWO_PI * 3)
        assert eff["gamma_eg"] == 38.0
        assert eff["blockade_satisfied"] is True

    def test_blockade_line_default(self):
        cfg = parse_config_text("experiment = fig1c")
        assert blockade_line(cfg) == "blockade satisfied: Δ = 20.0·w_0"

    def test_blockade_line_marginal(self):
        w0 = 21.70769
        cfg = parse_config_text(f"experiment = fig1c\ndelta_uniform = {w0}")
        assert "blockade marginal" in blockade_line(cfg)

    def test_fig2_uses_dephasing_default(self):
        cfg = parse_config_text("experiment = fig2")
        eff = effective_parameters(cfg)
        assert eff["gamma_r_deph"] == pytest.approx(TWO_PI * 0.1)


class TestRunList:
    def test_fig1c_layout(self):
        cfg = parse_config_text("experiment = fig1c\nn_atoms_list = 1,2")
        runs = build_run_list(cfg)
        assert [r.name for r in runs] == [
            "fig1c_N1_dissipative_me", "fig1c_N1_coherent_me",
            "fig1c_N2_dissipative_me", "fig1c_N2_coherent_me",
        ]

    def test_fig2_layout(self):
        cfg = parse_config_text("experiment = fig2\nn_atoms_list = 3\nengine = both")
        runs = build_run_list(cfg)
        assert [r.name for r in runs] == ["fig2_N3_me", "fig2_N3_mcwf"]
        assert runs[0].dephasing_default == pytest.approx(TWO_PI * 0.1)

    def test_pool_size_env(self, monkeypatch):
        monkeypatch.setenv("SUPERATOM_THREADS", "3")
        assert pool_size() == 3


def run_cli(args):
    return main(args)


class TestCliRuns:
    def test_rabi_csv_from_constant_pulse(self, tmp_path):
        cfg_path = tmp_path / "rabi.cfg"
        cfg_path.write_text(
            "experiment = custom\nn_atoms_list = 1\ncoherent = true\n"
            "pulse_shape = constant\nscale_er = 0\nomega0 = 2pi*0.5\n"
            "t_end = 2.0\nsigma_t = 0.25\nsample_count = 101\n"
            f"output_dir = {tmp_path}/out\n"
        )
        assert run_cli(["run", str(cfg_path)]) == 0
        s = read_series(tmp_path / "out" / "custom_N1_coherent_me.csv")
        om = TWO_PI * 0.5
        assert np.max(np.abs(s.pop_e_total - np.sin(om * s.times) ** 2)) < 1e-5

    def test_byte_identical_reruns(self, tmp_path):
        cfg_path = tmp_path / "a.cfg"
        cfg_path.write_text(
            "experiment = fig1c\nn_atoms_list = 1\nengine = both\nn_traj = 5\n"
            f"{FAST_OVERRIDES}output_dir = {tmp_path}/out1\n"
        )
        assert run_cli(["run", str(cfg_path)]) == 0
        blobs1 = {p.name: p.read_bytes()
                  for p in (tmp_path / "out1").glob("*.csv")}
        cfg2 = tmp_path / "b.cfg"
        cfg2.write_text(cfg_path.read_text().replace("out1", "out2"))
        assert run_cli(["run", str(cfg2)]) == 0
        blobs2 = {p.name: p.read_bytes()
                  for p in (tmp_path / "out2").glob("*.csv")}
        assert blobs1.keys() == blobs2.keys() and len(blobs1) == 4
        for name in blobs1:
            assert blobs1[name] == blobs2[name], name

    def test_fig2_artifacts_and_manifest(self, tmp_path):
        cfg_path = tmp_path / "f2.cfg"
        cfg_path.write_text(
            "experiment = fig2\nn_atoms_list = 1,2\n"
            f"{FAST_OVERRIDES}output_dir = {tmp_path}/out\n"
        )
        assert run_cli(["run", str(cfg_path)]) == 0
        out = tmp_path / "out"
        assert (out / "fig2_N1_me.csv").exists()
        assert (out / "fig2_N2_me.csv").exists()
        summary = (out / "fig2_summary.csv").read_text().splitlines()
        assert summary[0] == "n_atoms,pr1_end"
        assert len(summary) == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["summary_file"] == "fig2_summary.csv"
        for entry in manifest["runs"]:
            from superatom.io import sha256_of
            assert sha256_of(out / entry["file"]) == entry["sha256"]

    def test_mcwf_csv_has_stderr_column(self, tmp_path):
        cfg_path = tmp_path / "m.cfg"
        cfg_path.write_text(
            "experiment = custom\nn_atoms_list = 1\nengine = mcwf\nn_traj = 8\n"
            "write_jump_log = true\n"
            f"{FAST_OVERRIDES}output_dir = {tmp_path}/out\n"
        )
        assert run_cli(["run", str(cfg_path)]) == 0
        csv = tmp_path / "out" / "custom_N1_dissipative_mcwf.csv"
        header = csv.read_text().splitlines()[0]
        assert header.endswith("stderr_pr1")
        jump_log = tmp_path / "out" / "custom_N1_dissipative_mcwf_jumps.csv"
        lines = jump_log.read_text().splitlines()
        assert lines[0] == "trajectory_index,time_us,channel,atom"
        assert len(lines) > 1

    def test_validate_prints_without_running(self, tmp_path, capsys):
        cfg_path = tmp_path / "v.cfg"
        cfg_path.write_text(f"experiment = fig1c\noutput_dir = {tmp_path}/none\n")
        assert run_cli(["validate", str(cfg_path)]) == 0
        out = capsys.readouterr().out
        assert "blockade satisfied" in out
        assert "omega0" in out
        assert not (tmp_path / "none").exists()


class TestExitCodes:
    def test_parse_error_is_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("experiment = fig1c\nwibble = 3\n")
        assert run_cli(["run", str(bad)]) == 2
        assert "wibble" in capsys.readouterr().err

    def test_capacity_error_is_3(self, tmp_path):
        cfg = tmp_path / "big.cfg"
        cfg.write_text("experiment = custom\nn_atoms_list = 13\n")
        assert run_cli(["run", str(cfg)]) == 3
        assert run_cli(["validate", str(cfg)]) == 3

    def test_integration_failure_is_4(self, tmp_path, capsys):
        cfg = tmp_path / "stiff.cfg"
        cfg.write_text(
            "experiment = custom\nn_atoms_list = 2\nmethod = rk4\n"
            f"fixed_dt = 0.1\n{FAST_OVERRIDES}output_dir = {tmp_path}/out\n"
        )
        assert run_cli(["run", str(cfg)]) == 4
        assert "fixed_dt" in capsys.readouterr().err


class TestSeriesRoundTrip:
    def test_write_read_round_trip(self, tmp_path):
        from superatom import IntegratorSettings, ModelConfig, integrate
        from superatom.model import PulseParams

        cfg = ModelConfig(n_atoms=2, pulses=PulseParams.standard(t_end=6.0))
        res = integrate(cfg, settings=IntegratorSettings(sample_count=31))
        path = tmp_path / "s.csv"
        write_series(path, res.series)
        back = read_series(path)
        assert np.max(np.abs(back.pr_n - res.series.pr_n)) < 1e-8
        assert back.per_atom_rr.shape == (31, 2)
        assert back.stderr_pr1 is None

    def test_schema_error_on_foreign_csv(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(SchemaError):
            read_series(path)

    def test_installed_entry_point(self, tmp_path):
        cfg = tmp_path / "v.cfg"
        cfg.write_text("experiment = fig1c\n")
        proc = subprocess.run(
            [sys.executable, "-m", "superatom.cli", "validate", str(cfg)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "blockade" in proc.stdout
