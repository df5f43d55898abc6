"""Binary modulation codes and their correlation kernels.

The illumination and sensor reference signals are maximal-length
pseudo-random sequences (m-sequences) of rectangular chips.  Their
circular cross-correlation is the sampling kernel shared by the sensor
simulator and the reconstructor: it is piecewise linear between integer
chip lags, with a single triangular peak per code period for an ideal
m-sequence.

Chip levels are stored as -1/+1 (level +1 corresponds to "emitter on");
this gives the textbook two-level autocorrelation (L at zero lag, -1
elsewhere).
"""

from dataclasses import dataclass

import numpy as np

from phasesweep import backend
from phasesweep.errors import (DimensionError, InvalidParameterError,
                               InvalidSeedError, UnsupportedParameterError)

# Feedback tap positions (1-indexed, MSB first) of a maximal-length
# Fibonacci LFSR per register length.  Fixed here so generated codes are
# reproducible; custom polynomials are deliberately not accepted.
DEFAULT_TAPS = {
    2: (2, 1),
    3: (3, 2),
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 6, 4, 1),
    13: (13, 4, 3, 1),
    14: (14, 5, 3, 1),
    15: (15, 14),
    16: (16, 15, 13, 4),
}

#: Default chip rate of the simulated hardware (50 MHz modulation).
DEFAULT_MODULATION_FREQUENCY = 50e6
DEFAULT_CHIP_DURATION = 1.0 / DEFAULT_MODULATION_FREQUENCY


@dataclass(frozen=True)
class ModulationCode:
    """Binary chip sequence with its chip duration.

    chips: array of -1/+1 levels, one per chip.
    chip_duration: seconds per chip (> 0).
    """

    chips: np.ndarray
    chip_duration: float = DEFAULT_CHIP_DURATION

    def __post_init__(self):
        chips = np.asarray(self.chips, dtype=np.int64)
        if chips.ndim != 1 or chips.size == 0:
            raise InvalidParameterError("chips must be a non-empty 1-D sequence")
        if not np.all(np.abs(chips) == 1):
            raise InvalidParameterError("chip levels must be -1 or +1")
        if not self.chip_duration > 0:
            raise InvalidParameterError("chip_duration must be positive")
        object.__setattr__(self, "chips", chips)

    @property
    def length(self) -> int:
        return int(self.chips.size)

    @property
    def period(self) -> float:
        """Duration of one full code repetition in seconds."""
        return self.length * self.chip_duration

    def shifted(self, chips_shift: int) -> "ModulationCode":
        """Code circularly delayed by an integer number of chips."""
        return ModulationCode(np.roll(self.chips, chips_shift),
                              self.chip_duration)


@dataclass(frozen=True)
class CorrelationKernel:
    """Sampled cross-correlation h(x) of two modulation codes.

    samples: one full period of h, piecewise linear between samples.
    sample_spacing: seconds between samples (> 0).
    origin_index: index of the zero-lag sample.
    """

    samples: np.ndarray
    sample_spacing: float
    origin_index: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise InvalidParameterError("samples must be a non-empty 1-D sequence")
        if not self.sample_spacing > 0:
            raise InvalidParameterError("sample_spacing must be positive")
        object.__setattr__(self, "samples", samples)

    @property
    def period(self) -> float:
        return self.samples.size * self.sample_spacing

    @property
    def lags(self) -> np.ndarray:
        """Lag in seconds of every stored sample."""
        return (np.arange(self.samples.size) - self.origin_index) \
            * self.sample_spacing

    def evaluate(self, lags) -> np.ndarray:
        """h at arbitrary lags, periodically extended."""
        return backend.eval_kernel_periodic(
            self.samples, self.sample_spacing, self.origin_index, lags)


def generate_msequence(register_length: int, seed_state: int = 1,
                       chip_duration: float = DEFAULT_CHIP_DURATION
                       ) -> ModulationCode:
    """Maximal-length sequence from a Fibonacci LFSR.

    Produces 2**register_length - 1 chips; every nonzero register state
    occurs exactly once per period.  Register bit 1 maps to chip level
    +1 (emitter on).
    """
    if register_length not in DEFAULT_TAPS:
        raise UnsupportedParameterError(
            f"register_length must be in 2..16, got {register_length}")
    state = int(seed_state)
    if not 0 < state < (1 << register_length):
        if state == 0:
            raise InvalidSeedError("seed_state must not be all zeros")
        raise InvalidSeedError(
            f"seed_state must fit in {register_length} bits and be nonzero")
    taps = DEFAULT_TAPS[register_length]
    length = (1 << register_length) - 1
    mask = (1 << register_length) - 1
    bits = np.empty(length, dtype=np.int64)
    for i in range(length):
        bits[i] = state & 1
        feedback = 0
        for t in taps:
            feedback ^= (state >> (t - 1)) & 1
        state = ((state << 1) | feedback) & mask
    return ModulationCode(2 * bits - 1, chip_duration)


def circular_cross_correlation(a: ModulationCode, b: ModulationCode
                               ) -> np.ndarray:
    """Discrete circular correlation R[k] = sum_t a[t] * b[(t+k) mod L].

    Exact integer arithmetic on the -1/+1 chip levels.
    """
    if a.length != b.length:
        raise DimensionError(
            f"code lengths differ: {a.length} vs {b.length}")
    doubled = np.concatenate([b.chips, b.chips])
    return np.correlate(doubled, a.chips, mode="valid")[:a.length]


def continuous_kernel(f: ModulationCode, g: ModulationCode,
                      upsample: int = 1) -> CorrelationKernel:
    """Continuous-time correlation h(x) of rectangular-chip waveforms.

    h is piecewise linear with breakpoints at integer chip lags, where
    it equals chip_duration times the discrete circular correlation; the
    returned kernel samples h exactly at spacing chip_duration/upsample.
    """
    if f.chip_duration != g.chip_duration:
        raise DimensionError("codes must share one chip duration")
    if upsample < 1:
        raise InvalidParameterError("upsample must be >= 1")
    discrete = circular_cross_correlation(f, g).astype(np.float64)
    chip = f.chip_duration
    if upsample == 1:
        samples = discrete * chip
    else:
        nxt = np.roll(discrete, -1)
        frac = np.arange(upsample) / upsample
        # linear segment between consecutive integer-chip lags
        samples = (discrete[:, None] * (1.0 - frac)
                   + nxt[:, None] * frac).ravel() * chip
    return CorrelationKernel(samples, chip / upsample, origin_index=0)


def code_to_csv(code: ModulationCode, path) -> None:
    """One chip per row: index, time offset in seconds, level."""
    from phasesweep import fileio
    rows = ((i, i * code.chip_duration, int(level))
            for i, level in enumerate(code.chips))
    fileio.write_csv(path, ("index", "lag_seconds", "value"), rows)


def kernel_to_csv(kernel: CorrelationKernel, path) -> None:
    """One sample per row: index, lag in seconds, kernel value."""
    from phasesweep import fileio
    rows = ((i, lag, value) for i, (lag, value)
            in enumerate(zip(kernel.lags, kernel.samples)))
    fileio.write_csv(path, ("index", "lag_seconds", "value"), rows)
