import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from casecross.cli import (
    EXIT_EMPTY_ANALYSIS,
    EXIT_INPUT_ERROR,
    EXIT_NONCONVERGENCE,
    EXIT_OK,
    main,
)
from casecross.config import AnalysisConfig
from casecross.pipeline import run


def make_dataset(tmp_path, seed=42, events=500, zones=15):
    data_dir = tmp_path / "data"
    code = main([
        "-q", "synth", "--out", str(data_dir), "--seed", str(seed),
        "--events", str(events), "--zones", str(zones),
    ])
    assert code == EXIT_OK
    return data_dir


def make_config(tmp_path, data_dir, name="cfg.json", **overrides):
    payload = {
        "events": str(data_dir / "events.csv"),
        "grid": str(data_dir / "grid.csv"),
        "zones": str(data_dir / "zones.csv"),
        "membership": str(data_dir / "membership.csv"),
        "temperature_field": str(data_dir / "temperature_field.csv"),
        "pm25_field": str(data_dir / "pm25_field.csv"),
        "chains": 2,
        "warmup": 300,
        "draws": 300,
        "seed": 7,
        "curve_points": 12,
        "surface_points": 8,
        "output_dir": str(tmp_path / "out"),
    }
    payload.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(payload, indent=2))
    return path


class TestSynth:
    def test_requires_seed(self, tmp_path):
        assert main(["-q", "synth", "--out", str(tmp_path / "d")]) == EXIT_INPUT_ERROR

    def test_emits_all_input_files(self, tmp_path):
        data_dir = make_dataset(tmp_path, events=60, zones=5)
        names = {p.name for p in data_dir.iterdir()}
        assert names == {
            "grid.csv", "zones.csv", "membership.csv",
            "temperature_field.csv", "pm25_field.csv", "events.csv",
        }
        with open(data_dir / "events.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["subject_id", "zone_id", "case_date"]
        assert len(rows) == 61


class TestValidate:
    def test_valid_config(self, tmp_path, capsys):
        data_dir = make_dataset(tmp_path, events=50, zones=4)
        cfg = make_config(tmp_path, data_dir)
        assert main(["-q", "validate", "--config", str(cfg)]) == EXIT_OK
        assert "ok" in capsys.readouterr().out

    def test_missing_file_fails(self, tmp_path, capsys):
        data_dir = make_dataset(tmp_path, events=50, zones=4)
        cfg = make_config(tmp_path, data_dir, events=str(tmp_path / "missing.csv"))
        assert main(["-q", "validate", "--config", str(cfg)]) == EXIT_INPUT_ERROR
        assert "problem" in capsys.readouterr().out

    def test_trim_quantile_zero_rejected_before_computation(self, tmp_path):
        data_dir = make_dataset(tmp_path, events=50, zones=4)
        cfg = make_config(tmp_path, data_dir, trim_quantile=0.0)
        assert main(["-q", "validate", "--config", str(cfg)]) == EXIT_INPUT_ERROR
        assert main(["-q", "run-all", "--config", str(cfg)]) == EXIT_INPUT_ERROR
        assert not (tmp_path / "out").exists()


class TestStages:
    def test_link_writes_series_only(self, tmp_path):
        data_dir = make_dataset(tmp_path, events=50, zones=4)
        cfg = make_config(tmp_path, data_dir)
        assert main(["-q", "link", "--config", str(cfg)]) == EXIT_OK
        out = tmp_path / "out"
        assert (out / "exposure_series.csv").exists()
        assert (out / "manifest.json").exists()
        assert not (out / "matched_sets.csv").exists()

    def test_match_writes_audit_and_drop_log(self, tmp_path):
        data_dir = make_dataset(tmp_path, events=80, zones=4)
        cfg = make_config(tmp_path, data_dir)
        assert main(["-q", "match", "--config", str(cfg)]) == EXIT_OK
        out = tmp_path / "out"
        with open(out / "matched_sets.csv") as fh:
            header = next(csv.reader(fh))
        assert header == ["subject_id", "date", "is_case", "temperature", "pm25_window"]
        assert (out / "drop_log.csv").exists()

    def test_fit_requires_seed(self, tmp_path):
        data_dir = make_dataset(tmp_path, events=50, zones=4)
        cfg = make_config(tmp_path, data_dir)
        payload = json.loads(cfg.read_text())
        del payload["seed"]
        cfg.write_text(json.dumps(payload))
        assert main(["-q", "fit", "--config", str(cfg)]) == EXIT_INPUT_ERROR
        # a --seed flag satisfies the requirement (short chains may still
        # warn about convergence, which is not an input error)
        assert main(["-q", "fit", "--config", str(cfg), "--seed", "5"]) in (
            EXIT_OK,
            EXIT_NONCONVERGENCE,
        )


class TestRunAll:
    def test_artifacts_and_manifest_echo(self, tmp_path):
        data_dir = make_dataset(tmp_path)
        cfg_path = make_config(tmp_path, data_dir)
        code = main(["-q", "run-all", "--config", str(cfg_path)])
        assert code in (EXIT_OK, 4)
        out = tmp_path / "out"
        for name in (
            "exposure_series.csv", "matched_sets.csv", "drop_log.csv",
            "coefficients.csv", "coefficients_mle.csv", "draws.csv",
            "diagnostics.txt", "contrasts.csv", "curve_temperature.csv",
            "curve_pm25.csv", "surface.csv", "manifest.json",
        ):
            assert (out / name).exists(), name
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"] == json.loads(cfg_path.read_text())
        assert manifest["seed"] == 7
        assert "basis" in manifest and "trim_threshold" in manifest
        with open(out / "contrasts.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["name", "point", "lo95", "hi95", "extrapolated"]
        assert [r[0] for r in rows[1:]] == ["OR10", "OR01", "OR11", "RERI", "mult_interaction"]

    def test_rerun_from_manifest_is_bit_identical(self, tmp_path):
        data_dir = make_dataset(tmp_path)
        cfg_path = make_config(tmp_path, data_dir)
        assert main(["-q", "run-all", "--config", str(cfg_path)]) in (EXIT_OK, 4)
        out1 = tmp_path / "out"
        out2 = tmp_path / "out2"
        assert main([
            "-q", "run-all", "--config", str(out1 / "manifest.json"), "--out", str(out2),
        ]) in (EXIT_OK, 4)
        for name in (
            "exposure_series.csv", "matched_sets.csv", "drop_log.csv",
            "coefficients.csv", "draws.csv", "contrasts.csv",
            "curve_temperature.csv", "curve_pm25.csv", "surface.csv",
        ):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    def test_unknown_zone_events_logged_not_fatal(self, tmp_path):
        data_dir = make_dataset(tmp_path, events=60, zones=4)
        with open(data_dir / "events.csv", "a") as fh:
            fh.write("sX,zone_that_is_not_there,2012-07-18\n")
        cfg = make_config(tmp_path, data_dir)
        assert main(["-q", "match", "--config", str(cfg)]) == EXIT_OK
        drops = (tmp_path / "out" / "drop_log.csv").read_text()
        assert "sX,unknown_zone" in drops


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        data_dir = make_dataset(tmp_path, events=40, zones=4)
        cfg = make_config(tmp_path, data_dir)
        proc = subprocess.run(
            [sys.executable, "-m", "casecross", "validate", "--config", str(cfg)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "ok" in proc.stdout

    def test_tensor_model_runs(self, tmp_path):
        data_dir = make_dataset(tmp_path, events=300, zones=8)
        cfg = make_config(
            tmp_path, data_dir, model_kind="spline_tensor",
            warmup=200, draws=200, surface_points=6, curve_points=8,
        )
        code = main(["-q", "run-all", "--config", str(cfg)])
        assert code in (EXIT_OK, 4)
        with open(tmp_path / "out" / "contrasts.csv") as fh:
            rows = list(csv.reader(fh))
        # no single product coefficient in the tensor model
        assert [r[0] for r in rows[1:]] == ["OR10", "OR01", "OR11", "RERI"]
        with open(tmp_path / "out" / "coefficients.csv") as fh:
            coef_rows = list(csv.reader(fh))
        assert len(coef_rows) == 1 + 3 + 3 + 9
