"""Batch experiment front-end.

Wires scenes, acquisition, calibration, reconstruction, and the
systematic-error analysis into reproducible runs driven by a flat
key-value configuration file.  Every run writes its artifacts plus a
manifest.json echoing the resolved configuration, the package version,
the seed, and a SHA-256 checksum per output file; reruns with an
identical configuration and seed produce byte-identical files.

Subcommands: simulate, calibrate, reconstruct, analyze-error,
study-sampling, quantify, scene-mirror, scene-scatter.  A --seed flag
overrides the configured seed and governs all randomness.

On failure the tool exits nonzero after printing one machine-readable
JSON error line to stderr.
"""

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, replace

import numpy as np

import phasesweep
from phasesweep import analysis, codes, fileio, recon, scene, sensor, sweep
from phasesweep.errors import InvalidParameterError, PhasesweepError
from phasesweep.scene import SPEED_OF_LIGHT as C

#: Sampling steps of the bundled peak-error study, in seconds.
STUDY_STEPS = (9.6e-12, 19.2e-12, 48e-12, 96e-12)

_BOOL_KEYS = {"inverse_square", "moving_source", "exposure_normalization"}
_INT_KEYS = {"rows", "cols", "num_sheets", "num_spheres", "register_length",
             "num_pll_steps", "num_sources", "sparsity", "median_taps",
             "seed", "study_trials"}
_FLOAT_KEYS = {"sheet_thickness", "standoff", "plane_distance", "extent",
               "sphere_radius", "mirror_offset", "mirror_reflectance",
               "scattering_time_constant", "modulation_frequency",
               "pll_step", "source_spacing", "half_angle_deg",
               "array_standoff", "noise_sigma", "band_tolerance",
               "band_occupancy", "frame_period"}
_STR_KEYS = {"scene", "kernel_mode", "output_dir"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved flat configuration for one experiment run.

    Zero means "auto" for standoff (sheet ladder centered on the PLL
    grid), num_pll_steps (window covering the scene and one kernel
    width), source_spacing (PLL step divided evenly over the sources),
    and frame_period (the branch's own sampling step).
    """

    scene: str = "terraced"
    rows: int = 64
    cols: int = 64
    num_sheets: int = 10
    sheet_thickness: float = 0.003
    standoff: float = 0.0
    plane_distance: float = 1.0
    extent: float = 0.5
    num_spheres: int = 4
    sphere_radius: float = 0.02
    mirror_offset: float = 0.1
    mirror_reflectance: float = 0.6
    scattering_time_constant: float = 0.0
    inverse_square: bool = False
    register_length: int = 5
    modulation_frequency: float = 50e6
    pll_step: float = 96e-12
    num_pll_steps: int = 0
    num_sources: int = 10
    source_spacing: float = 2.8e-3
    half_angle_deg: float = 25.0
    array_standoff: float = 1.0
    moving_source: bool = False
    exposure_normalization: bool = True
    noise_sigma: float = 0.0
    sparsity: int = 1
    median_taps: int = 5
    band_tolerance: float = 0.5
    band_occupancy: float = 0.08
    frame_period: float = 0.0
    kernel_mode: str = "analytic"
    study_trials: int = 100
    seed: int = 0
    output_dir: str = "out"


def parse_config(mapping: dict) -> ExperimentConfig:
    """Typed ExperimentConfig from raw key-value strings.

    Unknown keys and unparsable values raise with the offending key
    named.
    """
    kwargs = {}
    for key, raw in mapping.items():
        try:
            if key in _BOOL_KEYS:
                if raw not in ("0", "1", "true", "false"):
                    raise ValueError("expected 0/1/true/false")
                kwargs[key] = raw in ("1", "true")
            elif key in _INT_KEYS:
                kwargs[key] = int(raw)
            elif key in _FLOAT_KEYS:
                kwargs[key] = 0.0 if raw == "auto" else float(raw)
            elif key in _STR_KEYS:
                kwargs[key] = raw
            else:
                raise ValueError("unknown configuration key")
        except ValueError as exc:
            raise InvalidParameterError(f"config key '{key}': {exc}") from None
    config = ExperimentConfig(**kwargs)
    if config.scene not in ("terraced", "plane", "spheres", "mirror"):
        raise InvalidParameterError(
            f"config key 'scene': unknown preset '{config.scene}'")
    if config.kernel_mode not in ("analytic", "measured"):
        raise InvalidParameterError(
            f"config key 'kernel_mode': must be analytic or measured")
    return config


def load_config(path) -> ExperimentConfig:
    return parse_config(fileio.read_keyvalue_file(path))


def resolved_standoff(config: ExperimentConfig) -> float:
    """Auto standoff centers the sheet-delay ladder on the PLL grid."""
    if config.standoff > 0:
        return config.standoff
    mid = (config.num_sheets - 1) / 2 * config.sheet_thickness
    rungs = int(np.ceil((mid + 0.3) / (config.pll_step * C / 2)))
    return mid + rungs * config.pll_step * C / 2


def resolved_spacing(config: ExperimentConfig) -> float:
    """Auto spacing divides one PLL step evenly over the sources."""
    if config.source_spacing > 0:
        return config.source_spacing
    return config.pll_step * C / config.num_sources


def build_scene(config: ExperimentConfig) -> scene.SceneResponse:
    grid = (config.rows, config.cols)
    if config.scene == "terraced":
        response = scene.build_terraced_scene(
            config.num_sheets, config.sheet_thickness,
            resolved_standoff(config), grid, config.inverse_square)
    elif config.scene == "plane":
        response = scene.build_plane_scene(config.plane_distance, grid,
                                           config.extent,
                                           config.inverse_square)
    elif config.scene == "spheres":
        response = scene.build_spheres_scene(config.plane_distance,
                                             config.num_spheres,
                                             config.sphere_radius, grid,
                                             config.extent)
    else:  # mirror
        response = scene.build_plane_scene(config.plane_distance, grid,
                                           config.extent,
                                           config.inverse_square)
        plane = scene.MirrorPlane((0.0, 0.0, -config.mirror_offset),
                                  (0.0, 0.0, 1.0))
        response = scene.add_mirror_virtual_source(
            response, response.geometry, plane, config.mirror_reflectance)
    if config.scattering_time_constant > 0:
        response = scene.apply_scattering(response,
                                          config.scattering_time_constant)
    return response


def make_codes(config: ExperimentConfig) -> codes.ModulationCode:
    return codes.generate_msequence(
        config.register_length,
        chip_duration=1.0 / config.modulation_frequency)


def sensor_config(config: ExperimentConfig,
                  response: scene.SceneResponse) -> sensor.SensorConfig:
    steps = config.num_pll_steps
    if steps == 0:
        chip = 1.0 / config.modulation_frequency
        _, latest = response.delay_bounds()
        steps = int(np.ceil((latest + 1.5 * chip) / config.pll_step))
    return sensor.SensorConfig(config.modulation_frequency, config.pll_step,
                               steps, config.exposure_normalization)


def array_geometry(config: ExperimentConfig) -> sweep.ArrayGeometry:
    return sweep.ArrayGeometry(config.num_sources, resolved_spacing(config),
                               config.array_standoff,
                               np.deg2rad(config.half_angle_deg))


def _basis_for(measurement: sensor.Measurement, code: codes.ModulationCode,
               config: ExperimentConfig,
               scattering: float = 0.0) -> recon.KernelBasis:
    kernel = codes.continuous_kernel(code, code, upsample=1)
    if scattering > 0:
        kernel = sensor.scattered_kernel(kernel, scattering)
    return recon.shift_basis(kernel, measurement.phases)


def _acquire_branches(config: ExperimentConfig, response, code,
                      sconfig) -> dict:
    """1x sweep plus clean and noisy interleaved datasets."""
    geometry = array_geometry(config)
    coarse = sensor.sweep_pll(response, sconfig, code, code)
    dataset = sweep.acquire_sweep(response, geometry, sconfig, code, code,
                                  moving_source=config.moving_source)
    weights_clean = sweep.compute_equalization(dataset)
    merged_clean = sweep.interleave(dataset, weights_clean)
    branches = {
        "1x": sensor.add_noise(coarse, config.noise_sigma, config.seed),
        "10x_clean": merged_clean,
    }
    if config.noise_sigma > 0:
        noisy = sweep.add_sweep_noise(dataset, config.noise_sigma,
                                      config.seed + 1)
        weights_noisy = sweep.compute_equalization(noisy)
        branches["10x_noisy"] = sweep.interleave(noisy, weights_noisy)
    return branches


def _reconstruct(measurement, code, config: ExperimentConfig,
                 scattering: float = 0.0):
    basis = _basis_for(measurement, code, config, scattering)
    fit = recon.omp_fit(measurement.values, basis, config.sparsity)
    return fit, basis


def _transient_of_rank(fit: recon.OmpFit, rank: int) -> recon.TransientImage:
    available = fit.num_selected > rank
    peak = np.where(available, fit.shifts[..., rank], np.nan)
    amp = np.where(available, fit.coefficients[..., rank], 0.0)
    return recon.TransientImage(peak, amp, fit.residual_norm, available)


def _strongest_transient(fit: recon.OmpFit) -> recon.TransientImage:
    strongest = np.argmax(np.abs(fit.coefficients), axis=-1)
    peak = np.take_along_axis(fit.shifts, strongest[..., None], -1)[..., 0]
    amp = np.take_along_axis(fit.coefficients, strongest[..., None],
                             -1)[..., 0]
    valid = ~fit.no_signal
    return recon.TransientImage(np.where(valid, peak, np.nan), amp,
                                fit.residual_norm, valid)


def band_sheet_count(transient: recon.TransientImage,
                     frame_period: float, num_sheets: int, cols: int,
                     band_tolerance: float, occupancy: float) -> int:
    """Sheets covered by the wavefront band in the busiest frame.

    A sheet counts as covered when at least `occupancy` of its pixels
    light up in the frame with the most lit pixels.
    """
    frames = recon.wavefront_frames(transient, frame_period, band_tolerance)
    if frames.frames.shape[0] == 0:
        return 0
    busiest = frames.frames[int(np.argmax(frames.frames.sum(axis=(1, 2))))]
    bands = scene.terraced_band_of_column(num_sheets, cols)
    count = 0
    for s in range(num_sheets):
        if busiest[:, bands == s].mean() >= occupancy:
            count += 1
    return count


class RunWriter:
    """Collects output files and finishes with a checksum manifest."""

    def __init__(self, command: str, config: ExperimentConfig, outdir):
        self.command = command
        self.config = config
        self.outdir = outdir
        self.files: list[str] = []
        os.makedirs(outdir, exist_ok=True)

    def path(self, name: str) -> str:
        self.files.append(name)
        return os.path.join(self.outdir, name)

    def add_tree(self, name: str) -> None:
        """Register files written below outdir/name by other helpers."""
        for root, _, files in os.walk(os.path.join(self.outdir, name)):
            for fname in sorted(files):
                rel = os.path.relpath(os.path.join(root, fname), self.outdir)
                self.files.append(rel)

    def finish(self, extra: dict | None = None) -> dict:
        manifest = {
            "command": self.command,
            "version": phasesweep.__version__,
            "backend": phasesweep.BACKEND_NAME,
            "seed": self.config.seed,
            "config": asdict(self.config),
            "outputs": {name: fileio.sha256_file(
                os.path.join(self.outdir, name))
                for name in sorted(self.files)},
        }
        if extra:
            manifest.update(extra)
        with open(os.path.join(self.outdir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return manifest


def _write_frames(writer: RunWriter, prefix: str,
                  frames: recon.WavefrontFrames) -> None:
    for k in range(frames.frames.shape[0]):
        fileio.write_pgm(writer.path(f"{prefix}_frame_{k:03d}.pgm"),
                         frames.frames[k])


def run_simulate(config: ExperimentConfig, outdir) -> dict:
    """Acquire a sweep dataset for the configured scene and persist it."""
    writer = RunWriter("simulate", config, outdir)
    response = build_scene(config)
    code = make_codes(config)
    sconfig = sensor_config(config, response)
    dataset = sweep.acquire_sweep(response, array_geometry(config), sconfig,
                                  code, code,
                                  moving_source=config.moving_source)
    if config.noise_sigma > 0:
        dataset = sweep.add_sweep_noise(dataset, config.noise_sigma,
                                        config.seed)
    sweep.save_sweep(dataset, os.path.join(outdir, "sweep"))
    scene.response_to_csv(response, writer.path("scene.csv"))
    writer.add_tree("sweep")
    return writer.finish({"num_pll_steps": sconfig.num_pll_steps})


def _load_or_simulate(config: ExperimentConfig, dataset_dir):
    if dataset_dir is not None:
        return sweep.load_sweep(dataset_dir)
    response = build_scene(config)
    code = make_codes(config)
    sconfig = sensor_config(config, response)
    dataset = sweep.acquire_sweep(response, array_geometry(config), sconfig,
                                  code, code,
                                  moving_source=config.moving_source)
    if config.noise_sigma > 0:
        dataset = sweep.add_sweep_noise(dataset, config.noise_sigma,
                                        config.seed)
    return dataset


def run_calibrate(config: ExperimentConfig, outdir,
                  dataset_dir=None) -> dict:
    """Estimate per-source equalization weights and export them."""
    writer = RunWriter("calibrate", config, outdir)
    dataset = _load_or_simulate(config, dataset_dir)
    weights = sweep.compute_equalization(dataset)
    sweep.weights_to_csv(weights, writer.path("weights.csv"))
    return writer.finish(
        {"weights": [float(w) for w in weights.values]})


def run_reconstruct(config: ExperimentConfig, outdir,
                    dataset_dir=None) -> dict:
    """Equalize, interleave, fit, and export transient products."""
    writer = RunWriter("reconstruct", config, outdir)
    dataset = _load_or_simulate(config, dataset_dir)
    weights = sweep.compute_equalization(dataset)
    merged = sweep.interleave(dataset, weights)
    code = make_codes(config)
    if config.kernel_mode == "measured":
        kernel = recon.measured_kernel(dataset.measurements[0],
                                       (config.rows // 2, config.cols // 2))
        basis = recon.shift_basis(kernel, merged.phases)
    else:
        basis = _basis_for(merged, code, config,
                           config.scattering_time_constant)
    fit = recon.omp_fit(merged.values, basis, config.sparsity)
    transient = _strongest_transient(fit)
    recon.transient_to_csv(transient, writer.path("transient.csv"))
    depth = recon.depth_from_peaks(transient, config.median_taps)
    recon.depth_to_csv(depth, writer.path("depth.csv"))
    period = config.frame_period or float(np.median(np.diff(merged.phases)))
    smoothed = recon.denoise_peaks(transient, config.median_taps)
    frames = recon.wavefront_frames(smoothed, period, config.band_tolerance)
    _write_frames(writer, "wavefront", frames)
    fileio.write_ppm(writer.path("hue.ppm"), recon.hue_colorize(transient))
    sweep.weights_to_csv(weights, writer.path("weights.csv"))
    return writer.finish({"num_frames": int(frames.frames.shape[0]),
                          "collisions": merged.collision_count})


def run_sampling_study(config: ExperimentConfig, outdir) -> dict:
    """Peak-error versus sampling step, written as one CSV row per step."""
    writer = RunWriter("study-sampling", config, outdir)
    code = make_codes(config)
    kernel = codes.continuous_kernel(code, code, upsample=1)
    if config.scattering_time_constant > 0:
        kernel = sensor.scattered_kernel(kernel,
                                         config.scattering_time_constant)
    native = min(STUDY_STEPS)
    chip = code.chip_duration
    lags = np.arange(-int(1.5 * chip / native),
                     int(1.5 * chip / native) + 1) * native
    profile = kernel.evaluate(lags)
    errors = recon.peak_estimation_error_study(
        profile, native, STUDY_STEPS, trials=config.study_trials,
        noise_sigma=config.noise_sigma, seed=config.seed)
    rows = [(step * 1e12, err * 1e12)
            for step, err in zip(STUDY_STEPS, errors)]
    fileio.write_csv(writer.path("sampling_study.csv"),
                     ("step_ps", "mean_abs_error_ps"), rows)
    return writer.finish({"errors_ps": [r[1] for r in rows]})


def run_quantification(config: ExperimentConfig, outdir) -> dict:
    """Staircase-target benchmark comparing 1x and 10x acquisition.

    Emits wavefront frames, depth maps, band sheet counts, effective
    frame rates, and depth errors against the known geometry for the
    plain-PLL branch and the interleaved branch (clean and noisy).
    """
    if config.scene != "terraced":
        raise InvalidParameterError("quantify requires the terraced scene")
    writer = RunWriter("quantify", config, outdir)
    response = build_scene(config)
    code = make_codes(config)
    sconfig = sensor_config(config, response)
    branches = _acquire_branches(config, response, code, sconfig)

    standoff = resolved_standoff(config)
    bands = scene.terraced_band_of_column(config.num_sheets, config.cols)
    truth_depth = np.tile(standoff - bands * config.sheet_thickness,
                          (config.rows, 1))

    metrics: dict = {"branches": {}}
    for name, measurement in branches.items():
        fit, _ = _reconstruct(measurement, code, config,
                              config.scattering_time_constant)
        transient = _strongest_transient(fit)
        depth = recon.depth_from_peaks(transient, config.median_taps)
        recon.depth_to_csv(depth, writer.path(f"depth_{name}.csv"))
        period = config.frame_period \
            or float(np.median(np.diff(measurement.phases)))
        smoothed = recon.denoise_peaks(transient, config.median_taps)
        frames = recon.wavefront_frames(smoothed, period,
                                        config.band_tolerance)
        _write_frames(writer, f"{name}", frames)
        sheets = band_sheet_count(smoothed, period, config.num_sheets,
                                  config.cols, config.band_tolerance,
                                  config.band_occupancy)
        depth_err = float(np.abs(depth.depth - truth_depth).mean())
        metrics["branches"][name] = {
            "band_sheet_count": sheets,
            "effective_fps": recon.effective_fps(max(sheets, 1),
                                                 config.sheet_thickness),
            "mean_abs_depth_error_m": depth_err,
            "frame_period_s": period,
            "num_samples": measurement.num_phases,
        }
    if "10x_noisy" in metrics["branches"]:
        metrics["depth_error_ratio"] = (
            metrics["branches"]["1x"]["mean_abs_depth_error_m"]
            / metrics["branches"]["10x_noisy"]["mean_abs_depth_error_m"])
    with open(writer.path("metrics.json"), "w") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return writer.finish({"metrics": metrics})


def _qualitative_scene_run(command: str, config: ExperimentConfig,
                           outdir) -> dict:
    """Shared 1x vs 10x frame/hue pipeline for the mirror and
    scattering presets."""
    writer = RunWriter(command, config, outdir)
    response = build_scene(config)
    code = make_codes(config)
    sconfig = sensor_config(config, response)
    branches = _acquire_branches(config, response, code, sconfig)
    summary = {}
    for name, measurement in branches.items():
        fit, _ = _reconstruct(measurement, code, config,
                              config.scattering_time_constant)
        transient = _strongest_transient(fit)
        period = config.frame_period \
            or float(np.median(np.diff(measurement.phases)))
        smoothed = recon.denoise_peaks(transient, config.median_taps)
        frames = recon.wavefront_frames(smoothed, period,
                                        config.band_tolerance)
        if config.sparsity > 1:
            # overlay the secondary arrivals (mirror bounce) on the frames;
            # gate them against the primary fit so spurious weak picks do
            # not stretch the frame range
            second = _transient_of_rank(fit, 1)
            floor = recon.AMPLITUDE_THRESHOLD * float(
                np.max(transient.amplitude, initial=0.0,
                       where=transient.valid))
            strong = second.valid & (second.amplitude >= floor)
            if np.any(strong):
                gated = recon.TransientImage(
                    np.where(strong, second.peak_time, np.nan),
                    np.where(strong, second.amplitude, 0.0),
                    second.residual_norm, strong)
                extra = recon.wavefront_frames(
                    recon.denoise_peaks(gated, config.median_taps), period,
                    config.band_tolerance)
                frames = _union_frames(frames, extra)
        _write_frames(writer, name, frames)
        fileio.write_ppm(writer.path(f"hue_{name}.ppm"),
                         recon.hue_colorize(transient))
        summary[name] = {"num_frames": int(frames.frames.shape[0]),
                         "frame_period_s": period}
    return writer.finish({"branches": summary})


def _union_frames(a: recon.WavefrontFrames,
                  b: recon.WavefrontFrames) -> recon.WavefrontFrames:
    lo = min(a.times.min(), b.times.min())
    hi = max(a.times.max(), b.times.max())
    period = a.frame_period
    ks = np.arange(int(round(lo / period)), int(round(hi / period)) + 1)
    shape = (ks.size,) + a.frames.shape[1:]
    merged = np.zeros(shape, dtype=bool)
    for frames in (a, b):
        offset = int(round((frames.times[0] - lo) / period))
        merged[offset:offset + frames.frames.shape[0]] |= frames.frames
    return recon.WavefrontFrames(merged, ks * period, period)


def run_mirror_scene(config: ExperimentConfig, outdir) -> dict:
    if config.scene != "mirror":
        config = replace(config, scene="mirror")
    if config.sparsity < 2:
        config = replace(config, sparsity=2)
    return _qualitative_scene_run("scene-mirror", config, outdir)


def run_scattering_scene(config: ExperimentConfig, outdir) -> dict:
    # a zero time constant is honored (pure delta paths), so the preset
    # degenerates to the plain spheres scene
    if config.scene == "terraced":
        config = replace(config, scene="spheres")
    return _qualitative_scene_run("scene-scatter", config, outdir)


def run_analyze_error(config: ExperimentConfig, outdir,
                      sweep_param: str = "theta") -> dict:
    """ErrorBudget table over swept angle or source count."""
    writer = RunWriter("analyze-error", config, outdir)
    spacing = resolved_spacing(config)
    d = config.array_standoff
    if sweep_param == "theta":
        thetas = np.deg2rad(np.arange(1.0, 46.0))
        rows = list(analysis.error_budget_rows(d, spacing, thetas,
                                               config.num_sources))
        header = ("theta_rad", "exact_shift_m", "approx_shift_m",
                  "remainder_bound_m", "max_systematic_error_m", "n_max")
    elif sweep_param == "num-sources":
        theta = np.deg2rad(config.half_angle_deg)
        budget = analysis.error_budget(d, spacing, theta, 1)
        rows = []
        for n in range(1, 2 * config.num_sources + 1):
            rows.append((n, budget.exact_shift, budget.approx_shift,
                         budget.remainder_bound,
                         analysis.max_systematic_error(n, spacing, theta),
                         budget.n_max))
        header = ("num_sources", "exact_shift_m", "approx_shift_m",
                  "remainder_bound_m", "max_systematic_error_m", "n_max")
    else:
        raise InvalidParameterError(
            f"unknown sweep parameter '{sweep_param}'")
    fileio.write_csv(writer.path("error_budget.csv"), header, rows)
    return writer.finish()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasesweep",
        description="Spatial phase-sweep transient imaging toolkit")
    parser.add_argument("--config", help="flat key-value configuration file")
    parser.add_argument("--seed", type=int,
                        help="override the configured random seed")
    parser.add_argument("--output-dir",
                        help="override the configured output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "calibrate", "reconstruct", "quantify",
                 "scene-mirror", "scene-scatter", "study-sampling"):
        cmd = sub.add_parser(name)
        if name in ("calibrate", "reconstruct"):
            cmd.add_argument("--dataset",
                             help="read a saved sweep directory instead of "
                                  "simulating")
    analyze = sub.add_parser("analyze-error")
    analyze.add_argument("--sweep", choices=("theta", "num-sources"),
                         default="theta")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config \
            else ExperimentConfig()
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        outdir = args.output_dir or config.output_dir
        if args.command == "simulate":
            manifest = run_simulate(config, outdir)
        elif args.command == "calibrate":
            manifest = run_calibrate(config, outdir, args.dataset)
        elif args.command == "reconstruct":
            manifest = run_reconstruct(config, outdir, args.dataset)
        elif args.command == "quantify":
            manifest = run_quantification(config, outdir)
        elif args.command == "scene-mirror":
            manifest = run_mirror_scene(config, outdir)
        elif args.command == "scene-scatter":
            manifest = run_scattering_scene(config, outdir)
        elif args.command == "study-sampling":
            manifest = run_sampling_study(config, outdir)
        else:  # analyze-error
            manifest = run_analyze_error(config, outdir, args.sweep)
    except (PhasesweepError, OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1
    print(json.dumps({"status": "ok", "command": args.command,
                      "outputs": len(manifest["outputs"])}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
