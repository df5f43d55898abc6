"""Experiment front-end tests on desk-scale configurations."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from phasesweep import cli, fileio
from phasesweep.errors import InvalidParameterError

SMALL = """
scene = plane
plane_distance = 0.8
rows = 6
cols = 6
num_sources = 3
source_spacing = auto
noise_sigma = 0.02
seed = 7
"""


def small_config(**overrides) -> cli.ExperimentConfig:
    config = cli.parse_config(fileio.parse_keyvalue(SMALL))
    if overrides:
        from dataclasses import replace
        config = replace(config, **overrides)
    return config


class TestConfigParsing:
    def test_defaults_mirror_reference_hardware(self):
        config = cli.ExperimentConfig()
        assert config.modulation_frequency == 50e6
        assert config.register_length == 5
        assert config.pll_step == 96e-12
        assert config.source_spacing == 2.8e-3
        assert config.num_sources == 10
        assert config.median_taps == 5

    def test_unknown_key_named(self):
        with pytest.raises(InvalidParameterError, match="no_such_key"):
            cli.parse_config({"no_such_key": "1"})

    def test_bad_value_names_key(self):
        with pytest.raises(InvalidParameterError, match="num_sheets"):
            cli.parse_config({"num_sheets": "ten"})

    def test_bad_scene_rejected(self):
        with pytest.raises(InvalidParameterError, match="scene"):
            cli.parse_config({"scene": "volcano"})

    def test_auto_values(self):
        config = cli.parse_config({"source_spacing": "auto",
                                   "standoff": "auto"})
        assert config.source_spacing == 0.0
        spacing = cli.resolved_spacing(config)
        assert spacing == pytest.approx(96e-12 * 299792458.0 / 10, rel=1e-12)
        standoff = cli.resolved_standoff(config)
        # sheet ladder centered on the PLL grid
        mid = 2 * (standoff - 4.5 * 0.003) / 299792458.0
        assert mid / 96e-12 == pytest.approx(round(mid / 96e-12), abs=1e-6)

    def test_config_file_round_trip(self, tmp_path):
        path = tmp_path / "run.conf"
        path.write_text(SMALL)
        config = cli.load_config(path)
        assert config.rows == 6
        assert config.noise_sigma == 0.02


class TestSimulatePersistRoundTrip:
    def test_outputs_and_manifest(self, tmp_path):
        outdir = tmp_path / "sim"
        manifest = cli.run_simulate(small_config(), outdir)
        assert (outdir / "manifest.json").exists()
        assert (outdir / "sweep" / "sweep_manifest.json").exists()
        for name, digest in manifest["outputs"].items():
            assert fileio.sha256_file(outdir / name) == digest
        assert manifest["seed"] == 7
        assert manifest["config"]["rows"] == 6

    def test_calibrate_from_saved_dataset(self, tmp_path):
        simdir = tmp_path / "sim"
        cli.run_simulate(small_config(), simdir)
        caldir = tmp_path / "cal"
        manifest = cli.run_calibrate(small_config(), caldir,
                                     dataset_dir=simdir / "sweep")
        header, rows = fileio.read_csv(caldir / "weights.csv")
        assert header == ["n", "w_n"]
        assert len(rows) == 3
        assert float(rows[0][1]) == 1.0
        assert manifest["weights"][0] == 1.0


class TestReconstruct:
    def test_products_written(self, tmp_path):
        outdir = tmp_path / "rec"
        manifest = cli.run_reconstruct(small_config(), outdir)
        assert (outdir / "transient.csv").exists()
        assert (outdir / "depth.csv").exists()
        assert (outdir / "hue.ppm").exists()
        assert manifest["num_frames"] >= 1
        frames = [n for n in manifest["outputs"]
                  if n.startswith("wavefront_frame_")]
        assert len(frames) == manifest["num_frames"]

    def test_flat_plane_depth_close_to_truth(self, tmp_path):
        # median_taps 1: the row median would otherwise pull the center
        # value toward its neighbors on this curved plane
        config = small_config(noise_sigma=0.0, median_taps=1)
        outdir = tmp_path / "rec"
        cli.run_reconstruct(config, outdir)
        header, rows = fileio.read_csv(outdir / "depth.csv")
        depths = np.array([float(r[2]) for r in rows])
        # the plane is curved in delay space; its center pixel is at the
        # configured axial distance (one merged sample of slack)
        center = depths.reshape(6, 6)[3, 3]
        assert center == pytest.approx(0.8, abs=0.01)


class TestSamplingStudy:
    def test_monotone_and_deterministic(self, tmp_path):
        config = small_config(noise_sigma=0.01, study_trials=40, seed=5)
        out1 = tmp_path / "s1"
        out2 = tmp_path / "s2"
        cli.run_sampling_study(config, out1)
        cli.run_sampling_study(config, out2)
        header, rows = fileio.read_csv(out1 / "sampling_study.csv")
        assert header == ["step_ps", "mean_abs_error_ps"]
        errors = [float(r[1]) for r in rows]
        assert errors == sorted(errors)
        assert (out1 / "sampling_study.csv").read_bytes() \
            == (out2 / "sampling_study.csv").read_bytes()

    def test_noiseless_single_trial_zero_error_at_native(self, tmp_path):
        config = small_config(noise_sigma=0.0, study_trials=1)
        cli.run_sampling_study(config, tmp_path / "s")
        _, rows = fileio.read_csv(tmp_path / "s" / "sampling_study.csv")
        assert float(rows[0][1]) == 0.0


@pytest.fixture(scope="module")
def quantify_metrics(tmp_path_factory):
    outdir = tmp_path_factory.mktemp("quantify")
    config = cli.parse_config({
        "scene": "terraced", "rows": "24", "cols": "40",
        "num_sources": "10", "source_spacing": "auto",
        "standoff": "auto", "noise_sigma": "0.05", "seed": "0"})
    cli.run_quantification(config, outdir)
    with open(outdir / "metrics.json") as fh:
        return json.load(fh), outdir


class TestQuantify:
    def test_three_branches_reported(self, quantify_metrics):
        data, _ = quantify_metrics
        assert set(data["branches"]) == {"1x", "10x_clean", "10x_noisy"}

    def test_interleaved_branch_has_ten_times_samples(self, quantify_metrics):
        data, _ = quantify_metrics
        assert data["branches"]["10x_clean"]["num_samples"] \
            == 10 * data["branches"]["1x"]["num_samples"]

    def test_depth_files_per_branch(self, quantify_metrics):
        _, outdir = quantify_metrics
        for name in ("1x", "10x_clean", "10x_noisy"):
            assert (outdir / f"depth_{name}.csv").exists()

    def test_wrong_scene_rejected(self, tmp_path):
        with pytest.raises(InvalidParameterError):
            cli.run_quantification(small_config(), tmp_path / "q")


class TestSceneMirror:
    def test_late_frames_show_bounce(self, tmp_path):
        config = cli.parse_config({
            "scene": "mirror", "plane_distance": "0.6", "extent": "0.4",
            "mirror_offset": "0.15", "mirror_reflectance": "0.6",
            "rows": "12", "cols": "12", "num_sources": "5",
            "source_spacing": "auto", "noise_sigma": "0.0", "seed": "1"})
        manifest = cli.run_mirror_scene(config, tmp_path / "mir")
        names = sorted(n for n in manifest["outputs"]
                       if n.startswith("10x_clean_frame_"))
        lit = []
        for name in names:
            img = fileio.read_pnm(tmp_path / "mir" / name)
            lit.append(int(img.sum()) // 255)
        total = sum(lit)
        # direct wavefront early, mirror bounce late
        late = sum(lit[len(lit) // 2:])
        assert total > 0
        assert late > 0


class TestSceneScatter:
    def test_zero_time_constant_matches_delta_preset(self, tmp_path):
        base = cli.parse_config({
            "scene": "spheres", "plane_distance": "0.5", "extent": "0.2",
            "rows": "8", "cols": "8", "num_sources": "3",
            "source_spacing": "auto", "noise_sigma": "0.0", "seed": "2",
            "scattering_time_constant": "0.0"})
        m1 = cli.run_scattering_scene(base, tmp_path / "a")
        m2 = cli.run_scattering_scene(base, tmp_path / "b")
        assert m1["outputs"] == m2["outputs"]
        # and identical to the generic qualitative pipeline on the same scene
        assert base.scattering_time_constant == 0.0

    def test_hue_resolution_ratio(self, tmp_path):
        # sphere-dominated depth span so the coarse branch quantizes to a
        # handful of arrival levels
        config = cli.parse_config({
            "scene": "spheres", "plane_distance": "0.5", "extent": "0.18",
            "sphere_radius": "0.04", "num_spheres": "3",
            "scattering_time_constant": "150e-12",
            "rows": "32", "cols": "32", "num_sources": "10",
            "source_spacing": "auto", "noise_sigma": "0.0", "seed": "3"})
        cli.run_scattering_scene(config, tmp_path / "sc")
        coarse = _hue_level_count(tmp_path / "sc" / "hue_1x.ppm")
        fine = _hue_level_count(tmp_path / "sc" / "hue_10x_clean.ppm")
        assert fine >= 5 * coarse


def _hue_level_count(path, bin_deg: float = 2.0) -> int:
    """Distinct hue angles among non-black pixels, binned at bin_deg.

    Binning coarser than the 8-bit RGB rounding noise but finer than
    the smallest real arrival-level separation.
    """
    img = fileio.read_pnm(path).astype(float) / 255.0
    flat = img.reshape(-1, 3)
    nonblack = flat[flat.sum(axis=1) > 0]
    mx, mn = nonblack.max(axis=1), nonblack.min(axis=1)
    delta = mx - mn
    r, g, b = nonblack.T
    hue = np.zeros(len(nonblack))
    m = delta > 0
    sel = m & (mx == r)
    hue[sel] = ((g - b)[sel] / delta[sel]) % 6
    sel = m & (mx == g) & (mx != r)
    hue[sel] = (b - r)[sel] / delta[sel] + 2
    sel = m & (mx == b) & (mx != r) & (mx != g)
    hue[sel] = (r - g)[sel] / delta[sel] + 4
    return len(set(np.round(hue * 60 / bin_deg).astype(int).tolist()))


class TestAnalyzeError:
    def test_theta_sweep_csv(self, tmp_path):
        manifest = cli.run_analyze_error(cli.ExperimentConfig(),
                                         tmp_path / "err")
        header, rows = fileio.read_csv(tmp_path / "err" / "error_budget.csv")
        assert header[0] == "theta_rad"
        assert len(header) == 6
        assert len(rows) == 45
        bounds = [float(r[3]) for r in rows]
        assert all(b >= 0 for b in bounds)

    def test_source_count_sweep(self, tmp_path):
        manifest = cli.run_analyze_error(cli.ExperimentConfig(),
                                         tmp_path / "err", "num-sources")
        header, rows = fileio.read_csv(tmp_path / "err" / "error_budget.csv")
        assert header[0] == "num_sources"
        errs = [float(r[4]) for r in rows]
        assert errs == sorted(errs)


class TestCommandLine:
    def test_exit_zero_and_status_line(self, tmp_path):
        conf = tmp_path / "c.conf"
        conf.write_text(SMALL)
        result = subprocess.run(
            [sys.executable, "-m", "phasesweep.cli", "--config", str(conf),
             "--output-dir", str(tmp_path / "out"), "calibrate"],
            capture_output=True, text=True)
        assert result.returncode == 0
        status = json.loads(result.stdout.strip().splitlines()[-1])
        assert status["status"] == "ok"

    def test_machine_readable_error_and_nonzero_exit(self, tmp_path):
        conf = tmp_path / "bad.conf"
        conf.write_text("scene = volcano\n")
        result = subprocess.run(
            [sys.executable, "-m", "phasesweep.cli", "--config", str(conf),
             "--output-dir", str(tmp_path / "out"), "simulate"],
            capture_output=True, text=True)
        assert result.returncode == 1
        error = json.loads(result.stderr.strip().splitlines()[-1])
        assert error["error"] == "InvalidParameterError"
        assert "scene" in error["message"]

    def test_seed_flag_overrides_config(self, tmp_path):
        conf = tmp_path / "c.conf"
        conf.write_text(SMALL)
        for seed, name in ((7, "a"), (8, "b")):
            result = subprocess.run(
                [sys.executable, "-m", "phasesweep.cli", "--config",
                 str(conf), "--seed", str(seed), "--output-dir",
                 str(tmp_path / name), "simulate"],
                capture_output=True, text=True)
            assert result.returncode == 0
        with open(tmp_path / "a" / "manifest.json") as fh:
            ma = json.load(fh)
        with open(tmp_path / "b" / "manifest.json") as fh:
            mb = json.load(fh)
        assert ma["seed"] == 7 and mb["seed"] == 8
        assert ma["outputs"] != mb["outputs"]

    def test_rerun_byte_identical(self, tmp_path):
        conf = tmp_path / "c.conf"
        conf.write_text(SMALL)
        manifests = []
        for name in ("r1", "r2"):
            subprocess.run(
                [sys.executable, "-m", "phasesweep.cli", "--config",
                 str(conf), "--output-dir", str(tmp_path / name),
                 "reconstruct"], capture_output=True, check=True)
            with open(tmp_path / name / "manifest.json") as fh:
                manifests.append(json.load(fh))
        assert manifests[0]["outputs"] == manifests[1]["outputs"]
        assert (tmp_path / "r1" / "manifest.json").read_bytes() \
            == (tmp_path / "r2" / "manifest.json").read_bytes()
