"""Correlation-sensor simulator.

Each pixel of the sensor reports the correlation between the incident
coded light and an electronic reference code, sampled at a programmable
phase offset.  The simulator evaluates, per pixel,

    b = sum over paths of  amplitude * h(phase + insertion_delay - delay)

with h the continuous-time code correlation kernel (piecewise linear,
evaluated exactly), optionally smeared by the scene's one-sided
exponential scattering kernel.  The phase offset grid models the PLL:
an exact ladder phi_j = j * pll_step with no jitter.

Absolute radiometric units are normalized out: with
exposure_normalization (default) sweep values are divided by the code
period so a unit-amplitude path peaks near 1.

Noise is additive Gaussian, specified relative to each pixel's peak
magnitude, generated counter-based per pixel so results do not depend
on evaluation order.
"""

import struct
from dataclasses import dataclass, replace

import numpy as np

from phasesweep import backend
from phasesweep.codes import (CorrelationKernel, ModulationCode,
                              continuous_kernel)
from phasesweep.errors import InvalidParameterError
from phasesweep.scene import SceneResponse

#: Subdivisions per scattering time constant when discretizing the
#: exponential smear; tail truncated where it falls below exp(-40).
_SCATTER_RESOLUTION = 8
_SCATTER_TAIL = 40.0
_MAX_KERNEL_SAMPLES = 1 << 22

MEASUREMENT_MAGIC = b"PSWEEPM1"


@dataclass(frozen=True)
class SensorConfig:
    """Modulation and PLL phase-stepping parameters.

    Defaults mirror the reference hardware: 50 MHz modulation, 96 ps
    PLL phase step, and around two thousand phase positions per sweep.
    Covering one full 31-chip code period at 96 ps would need 6459
    steps; see steps_for_full_period.
    """

    modulation_frequency: float = 50e6
    pll_step: float = 96e-12
    num_pll_steps: int = 2000
    exposure_normalization: bool = True

    def __post_init__(self):
        if not self.modulation_frequency > 0:
            raise InvalidParameterError("modulation_frequency must be positive")
        if not self.pll_step > 0:
            raise InvalidParameterError("pll_step must be positive")
        if self.num_pll_steps < 1:
            raise InvalidParameterError("num_pll_steps must be >= 1")

    @property
    def chip_duration(self) -> float:
        return 1.0 / self.modulation_frequency


@dataclass(frozen=True)
class Measurement:
    """Per-pixel correlation samples over a shared phase axis."""

    phases: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if phases.ndim != 1 or phases.size == 0:
            raise InvalidParameterError("phase axis must be non-empty 1-D")
        if np.any(np.diff(phases) <= 0):
            raise InvalidParameterError("phase axis must be strictly increasing")
        if values.ndim != 3 or values.shape[2] != phases.size:
            raise InvalidParameterError(
                "values must have shape (rows, cols, num_phases)")
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "values", values)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def num_phases(self) -> int:
        return self.phases.size


def _check_codes(f: ModulationCode, g: ModulationCode) -> None:
    if f.length != g.length:
        raise InvalidParameterError("codes must have equal length")
    if f.chip_duration != g.chip_duration:
        raise InvalidParameterError("codes must share one chip duration")


def scattered_kernel(kernel: CorrelationKernel, time_constant: float
                     ) -> CorrelationKernel:
    """Kernel smeared by a unit-area one-sided exponential.

    Resamples onto a grid fine enough for the exponential (aligned with
    the existing samples so the piecewise-linear resampling is exact)
    and convolves periodically.  The discrete smear weights are
    normalized to sum to one, so the kernel's total integral over one
    period is preserved to rounding.
    """
    if time_constant < 0:
        raise InvalidParameterError("time constant must be >= 0")
    if time_constant == 0:
        return kernel
    n = kernel.samples.size
    sub = int(np.ceil(kernel.sample_spacing / (time_constant / _SCATTER_RESOLUTION)))
    sub = max(1, min(sub, _MAX_KERNEL_SAMPLES // n))
    spacing = kernel.sample_spacing / sub
    fine_n = n * sub
    lags = (np.arange(fine_n) - kernel.origin_index * sub) * spacing
    fine = kernel.evaluate(lags)
    taps = int(min(fine_n, np.ceil(_SCATTER_TAIL * time_constant / spacing)))
    weights = np.exp(-np.arange(taps) * spacing / time_constant)
    weights /= weights.sum()
    padded = np.zeros(fine_n)
    padded[:taps] = weights
    smeared = np.fft.irfft(np.fft.rfft(fine) * np.fft.rfft(padded), fine_n)
    return CorrelationKernel(smeared, spacing,
                             origin_index=kernel.origin_index * sub)


def effective_kernel(response: SceneResponse, f: ModulationCode,
                     g: ModulationCode) -> CorrelationKernel:
    """Correlation kernel seen by this scene (includes scattering)."""
    _check_codes(f, g)
    kernel = continuous_kernel(f, g, upsample=1)
    return scattered_kernel(kernel, response.scattering_time_constant)


def _accumulate(response: SceneResponse, kernel: CorrelationKernel,
                phases: np.ndarray, offset: float) -> np.ndarray:
    flat = backend.accumulate_paths(
        kernel.samples, kernel.sample_spacing, kernel.origin_index,
        phases, offset, response.delays, response.amplitudes,
        response.indptr)
    return flat.reshape(response.rows, response.cols, phases.size)


def measure(response: SceneResponse, f: ModulationCode, g: ModulationCode,
            phase: float, insertion_delay: float = 0.0) -> np.ndarray:
    """Single correlation sample per pixel, in raw kernel units.

    Pixels without paths read 0 (dark pixel), not an error.
    """
    kernel = effective_kernel(response, f, g)
    out = _accumulate(response, kernel, np.array([float(phase)]),
                      float(insertion_delay))
    return out[:, :, 0]


def sweep_pll(response: SceneResponse, config: SensorConfig,
              f: ModulationCode, g: ModulationCode,
              insertion_delay: float = 0.0) -> Measurement:
    """Sweep the PLL phase ladder phi_j = j * pll_step.

    Every sample is additionally offset by insertion_delay (the extra
    phase contributed by a displaced light source).
    """
    _check_codes(f, g)
    if abs(f.chip_duration * config.modulation_frequency - 1.0) > 1e-9:
        raise InvalidParameterError(
            "code chip duration is inconsistent with modulation_frequency")
    kernel = effective_kernel(response, f, g)
    phases = np.arange(config.num_pll_steps) * config.pll_step
    values = _accumulate(response, kernel, phases, float(insertion_delay))
    if config.exposure_normalization:
        values = values / (f.length * f.chip_duration)
    return Measurement(phases, values)


def steps_for_full_period(config: SensorConfig, code: ModulationCode) -> int:
    """PLL steps needed to cover one full code period."""
    return int(np.ceil(code.period / config.pll_step))


def add_noise(measurement: Measurement, sigma_relative: float,
              seed: int, stream: int = 0) -> Measurement:
    """Additive Gaussian noise, sigma relative to each pixel's peak.

    Counter-based generation keyed on (seed, stream, pixel index): the
    same seed always yields the same noise regardless of pixel
    evaluation order, and sigma_relative = 0 returns the input
    bit-identically.  Distinct streams (e.g. one per light source)
    decorrelate noise between otherwise identical measurements.
    """
    if sigma_relative < 0:
        raise InvalidParameterError("sigma_relative must be >= 0")
    if sigma_relative == 0:
        return measurement
    values = measurement.values.copy()
    rows, cols, num = values.shape
    flat = values.reshape(rows * cols, num)
    key_hi = int(seed) & 0xFFFFFFFFFFFFFFFF
    stream_word = (int(stream) & 0xFFFFFFFF) << 32
    for p in range(rows * cols):
        peak = np.abs(flat[p]).max()
        if peak == 0:
            continue
        rng = np.random.Generator(np.random.Philox(
            key=np.array([key_hi, stream_word | p], dtype=np.uint64)))
        flat[p] += rng.normal(0.0, sigma_relative * peak, size=num)
    return replace(measurement, values=values)


def measurement_to_csv(measurement: Measurement, path) -> None:
    """Rows of pixel_row, pixel_col, phase_s, value."""
    from phasesweep import fileio

    def rows():
        for r in range(measurement.rows):
            for c in range(measurement.cols):
                for j, phi in enumerate(measurement.phases):
                    yield r, c, phi, measurement.values[r, c, j]

    fileio.write_csv(path, ("pixel_row", "pixel_col", "phase_s", "value"),
                     rows())


def write_measurement(measurement: Measurement, path) -> None:
    """Compact binary layout.

    Magic "PSWEEPM1", then rows/cols/num_phases as little-endian
    uint64, then the phase axis and the row-major value cube as
    little-endian float64.
    """
    with open(path, "wb") as fh:
        fh.write(MEASUREMENT_MAGIC)
        fh.write(struct.pack("<QQQ", measurement.rows, measurement.cols,
                             measurement.num_phases))
        fh.write(measurement.phases.astype("<f8").tobytes())
        fh.write(np.ascontiguousarray(measurement.values,
                                      dtype="<f8").tobytes())


def read_measurement(path) -> Measurement:
    """Inverse of write_measurement."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MEASUREMENT_MAGIC))
        if magic != MEASUREMENT_MAGIC:
            raise InvalidParameterError(f"not a measurement file: {path}")
        rows, cols, num = struct.unpack("<QQQ", fh.read(24))
        phases = np.frombuffer(fh.read(8 * num), dtype="<f8")
        values = np.frombuffer(fh.read(8 * rows * cols * num), dtype="<f8")
    return Measurement(phases.astype(np.float64),
                       values.astype(np.float64).reshape(rows, cols, num))
