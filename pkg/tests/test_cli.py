import json
import os

import numpy as np
import pytest

from tde_snn.cli import main
from tde_snn.config import ConfigError, load_config


def write_config(tmp_path, name="config.json", **overrides):
    doc = {
        "schema": 1,
        "seed": 42,
        "T": 4,
        "input": {"channels": 1, "height": 12, "width": 12},
        "channels": 6,
        "attention": {"variant": "sda"},
        "gating": True,
        "rounds": 2,
        "out_dir": str(tmp_path / "out"),
    }
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def read_all(out_dir, names):
    return {n: (out_dir / n).read_bytes() for n in names}


SIM_FILES = ["raster.csv", "histogram.json", "ledger.json", "alpha_trajectory.csv"]


class TestSimulate:
    def test_minimal_config_writes_four_files(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["simulate", str(cfg)]) == 0
        for name in SIM_FILES:
            assert (tmp_path / "out" / name).exists()

    def test_reruns_byte_identical(self, tmp_path):
        cfg_a = write_config(tmp_path, name="a.json", out_dir=str(tmp_path / "out_a"))
        cfg_b = write_config(tmp_path, name="b.json", out_dir=str(tmp_path / "out_b"))
        assert main(["simulate", str(cfg_a)]) == 0
        assert main(["simulate", str(cfg_b)]) == 0
        a = read_all(tmp_path / "out_a", SIM_FILES)
        b = read_all(tmp_path / "out_b", SIM_FILES)
        assert a == b

    def test_none_variant_alpha_one_matches_baseline_flag(self, tmp_path):
        shared = {
            "attention": {"variant": "none"},
            "encoder": {"alpha_init": 1.0},
            "gating": False,
        }
        cfg_a = write_config(tmp_path, name="a.json", out_dir=str(tmp_path / "ta"), **shared)
        cfg_b = write_config(tmp_path, name="b.json", out_dir=str(tmp_path / "tb"), **shared)
        assert main(["simulate", str(cfg_a)]) == 0
        assert main(["simulate", str(cfg_b), "--baseline"]) == 0
        raster_a = (tmp_path / "ta" / "raster.csv").read_bytes()
        raster_b = (tmp_path / "tb" / "raster.csv").read_bytes()
        assert raster_a == raster_b

    def test_invalid_config_exit_2(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"schema": 2}))
        assert main(["simulate", str(path)]) == 2

    def test_missing_config_exit_2(self, tmp_path):
        assert main(["simulate", str(tmp_path / "nope.json")]) == 2


class TestEnergyCommand:
    def test_sda_paper_shape_reports_zero_mul(self, tmp_path, capsys):
        assert main(["energy", "--variant", "sda", "--paper-shape"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["mul"] == 0
        assert doc["variant"] == "sda"

    def test_compare_ratio_in_band(self, tmp_path, capsys):
        out = tmp_path / "energy"
        assert main(["energy", "--compare", "--paper-shape", "--out", str(out)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert 0.19 <= doc["ratio"] <= 0.29
        assert (out / "energy.json").exists() and (out / "energy.csv").exists()
        csv_lines = (out / "energy.csv").read_text().strip().split("\n")
        assert csv_lines[0] == "variant,shape,mul,ac,energy_joules,ratio_vs_baseline"
        assert len(csv_lines) == 3

    def test_tiny_shape_matches_hand_tally(self, capsys):
        assert main(["energy", "--variant", "tcsa", "--shape", "1,1,1,1"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["mul"] == 54 and doc["ac"] == 51

    def test_requires_shape(self):
        assert main(["energy", "--variant", "sda"]) == 2

    def test_bad_shape_exit_2(self):
        assert main(["energy", "--variant", "sda", "--shape", "1,2,3"]) == 2
        assert main(["energy", "--variant", "sda", "--shape", "a,b,c,d"]) == 2


class TestDiversityCommand:
    def test_summary_shows_coverage_gain(self, tmp_path, capsys):
        cfg = write_config(tmp_path, input={"channels": 1, "height": 16, "width": 16}, channels=8)
        assert main(["diversity", str(cfg)]) == 0
        doc = json.loads((tmp_path / "out" / "diversity_summary.json").read_text())
        assert doc["coverage_tde"] > doc["coverage_baseline"]
        hist = json.loads((tmp_path / "out" / "histogram_tde.json").read_text())
        assert len(hist["counts"]) == 16

    def test_layer_out_of_range_exit_2(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["diversity", str(cfg), "--layer", "5"]) == 2

    def test_body_layer_selectable(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["diversity", str(cfg), "--layer", "1"]) == 0


class TestGradcheckCommand:
    def test_default_passes(self, capsys):
        assert main(["gradcheck", "--seeds", "2"]) == 0
        out = capsys.readouterr().out
        assert "bound 1e-4" in out

    def test_spiking_mode_refused(self, capsys):
        assert main(["gradcheck", "--mode", "spiking"]) == 2
        assert "relaxed" in capsys.readouterr().err

    def test_step_robustness(self):
        assert main(["gradcheck", "--seeds", "1", "--h", "1e-3"]) == 0
        assert main(["gradcheck", "--seeds", "1", "--h", "1e-4"]) == 0


class TestTrainToyCommand:
    def test_zero_steps_initial_loss_only(self, tmp_path, capsys):
        cfg = write_config(tmp_path, train={"steps": 0, "batch_size": 2, "image_size": 8})
        assert main(["train-toy", str(cfg)]) == 0
        text = (tmp_path / "out" / "loss_curves.csv").read_text()
        lines = text.strip().split("\n")
        assert lines[0] == "step,variant,loss"
        assert len(lines) == 3  # one row per variant

    def test_short_run_writes_curves(self, tmp_path):
        cfg = write_config(
            tmp_path, train={"steps": 3, "batch_size": 2, "image_size": 8}, T=2, channels=4
        )
        assert main(["train-toy", str(cfg)]) == 0
        lines = (tmp_path / "out" / "loss_curves.csv").read_text().strip().split("\n")
        assert len(lines) == 1 + 2 * 3


class TestEventsToFrame:
    def test_three_event_fixture(self, tmp_path):
        src = tmp_path / "events.csv"
        src.write_text("1,1,5,1\n1,1,6,1\n0,0,7,-1\n")
        out = tmp_path / "frame.csv"
        code = main([
            "events-to-frame", str(src), "--out", str(out),
            "--height", "2", "--width", "2",
        ])
        assert code == 0
        assert out.read_text() == "-1,0\n0,2\n"

    def test_window_filter(self, tmp_path):
        src = tmp_path / "events.csv"
        src.write_text("0,0,5,1\n1,1,50,1\n")
        out = tmp_path / "frame.csv"
        code = main([
            "events-to-frame", str(src), "--out", str(out),
            "--height", "2", "--width", "2", "--window", "0,10",
        ])
        assert code == 0
        assert out.read_text() == "1,0\n0,0\n"

    def test_empty_file_zero_frame(self, tmp_path):
        src = tmp_path / "events.csv"
        src.write_text("")
        out = tmp_path / "frame.csv"
        assert main([
            "events-to-frame", str(src), "--out", str(out),
            "--height", "2", "--width", "2",
        ]) == 0
        assert out.read_text() == "0,0\n0,0\n"

    def test_malformed_line_exit_2(self, tmp_path, capsys):
        src = tmp_path / "events.csv"
        src.write_text("0,0,1,1\nbogus\n")
        out = tmp_path / "frame.csv"
        assert main([
            "events-to-frame", str(src), "--out", str(out),
            "--height", "2", "--width", "2",
        ]) == 2
        assert "record 2" in capsys.readouterr().err

    def test_out_of_frame_coordinates_exit_2(self, tmp_path):
        src = tmp_path / "events.csv"
        src.write_text("9,9,1,1\n")
        out = tmp_path / "frame.csv"
        assert main([
            "events-to-frame", str(src), "--out", str(out),
            "--height", "2", "--width", "2",
        ]) == 2

    def test_binary_format(self, tmp_path):
        from tde_snn.encoder import Event, write_events_bin

        src = tmp_path / "events.bin"
        write_events_bin([Event(0, 1, 3, 1), Event(1, 0, 4, -1)], src)
        out = tmp_path / "frame.csv"
        assert main([
            "events-to-frame", str(src), "--format", "bin", "--out", str(out),
            "--height", "2", "--width", "2",
        ]) == 0
        assert out.read_text() == "0,-1\n1,0\n"


class TestConfig:
    def test_defaults_fill_in(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"schema": 1}))
        cfg = load_config(path)
        assert cfg.seed == 42 and cfg.t_steps == 4 and cfg.variant == "sda"

    def test_schema_required(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({}))
        with pytest.raises(ConfigError, match="schema"):
            load_config(path)

    def test_field_errors_name_fields(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"schema": 1, "attention": {"variant": "softmax"}}))
        with pytest.raises(ConfigError, match="attention.variant"):
            load_config(path)
        path.write_text(json.dumps({"schema": 1, "neuron": {"beta": 2.0}}))
        with pytest.raises(ConfigError, match="neuron.beta"):
            load_config(path)

    def test_malformed_json_reports_line(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{\n  broken\n}")
        with pytest.raises(ConfigError, match="line"):
            load_config(path)

    def test_env_seed_override(self, tmp_path, monkeypatch):
        cfg_path = write_config(tmp_path, seed=1)
        monkeypatch.setenv("TDE_SNN_SEED", "99")
        from tde_snn.config import seed_from_env

        cfg = load_config(cfg_path, seed_override=seed_from_env())
        assert cfg.seed == 99

    def test_env_seed_must_be_integer(self, monkeypatch):
        monkeypatch.setenv("TDE_SNN_SEED", "abc")
        from tde_snn.config import seed_from_env

        with pytest.raises(ConfigError, match="TDE_SNN_SEED"):
            seed_from_env()

    def test_env_override_changes_cli_output(self, tmp_path, monkeypatch):
        cfg_a = write_config(tmp_path, name="a.json", seed=1, out_dir=str(tmp_path / "oa"))
        cfg_b = write_config(tmp_path, name="b.json", seed=2, out_dir=str(tmp_path / "ob"))
        monkeypatch.setenv("TDE_SNN_SEED", "77")
        assert main(["simulate", str(cfg_a)]) == 0
        assert main(["simulate", str(cfg_b)]) == 0
        a = (tmp_path / "oa" / "raster.csv").read_bytes()
        b = (tmp_path / "ob" / "raster.csv").read_bytes()
        assert a == b  # both ran with the env seed
