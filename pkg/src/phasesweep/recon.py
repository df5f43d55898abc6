"""Transient reconstruction from correlation sweeps.

Per-pixel arrival times are recovered by orthogonal matching pursuit
over a dictionary of shifted copies of the correlation kernel (the
paper-style peak detector with sparsity one, generalized to any
sparsity).  Atom selection maximizes the normalized correlation with
the residual, so for sparsity one the fit reduces exactly to an
exhaustive argmax over atoms; ties break toward the smallest shift.

On top of the fits sit the derived products: depth maps (c * t / 2
with a median prefilter), wavefront frame sequences, the effective
frame-rate metric for staircase targets, hue-colorized arrival maps,
and the phase-domain spectral view with regularized deconvolution.
"""

from dataclasses import dataclass

import numpy as np
import scipy.ndimage

from phasesweep.codes import CorrelationKernel
from phasesweep.errors import DimensionError, InvalidParameterError
from phasesweep.scene import SPEED_OF_LIGHT
from phasesweep.sensor import Measurement

#: Wavefront rendering defaults: a pixel is lit when its arrival time is
#: within band_tolerance frames of the frame time and its fitted
#: amplitude reaches 10% of the brightest fit.
DEFAULT_BAND_TOLERANCE = 0.5
AMPLITUDE_THRESHOLD = 0.1

#: Nominal speed of light used by the effective-fps convention.
EFFECTIVE_FPS_LIGHT_SPEED = 3.0e8


@dataclass(frozen=True)
class KernelBasis:
    """Dictionary of shifted kernel atoms on a fixed phase axis.

    atoms[i] samples one kernel delayed by shifts[i] at every phase
    position; shifts are strictly increasing.
    """

    atoms: np.ndarray
    shifts: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=np.float64)
        shifts = np.asarray(self.shifts, dtype=np.float64)
        phases = np.asarray(self.phases, dtype=np.float64)
        if atoms.ndim != 2 or atoms.shape != (shifts.size, phases.size):
            raise DimensionError("atoms must have shape (num_shifts, num_phases)")
        if shifts.size == 0 or np.any(np.diff(shifts) <= 0):
            raise InvalidParameterError("shifts must be strictly increasing")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "phases", phases)

    @property
    def num_atoms(self) -> int:
        return self.shifts.size


def shift_basis(kernel: CorrelationKernel, phases, shifts=None) -> KernelBasis:
    """Atoms h(phi - s) for every candidate shift s.

    Shifts default to the phase positions themselves; atoms are
    resampled from the kernel by (exact piecewise-)linear interpolation.
    """
    phases = np.asarray(phases, dtype=np.float64)
    shifts = phases if shifts is None else np.asarray(shifts, dtype=np.float64)
    atoms = kernel.evaluate(phases[None, :] - shifts[:, None])
    return KernelBasis(atoms, shifts, phases)


def measured_kernel(measurement: Measurement, pixel: tuple[int, int]
                    ) -> CorrelationKernel:
    """Kernel extracted from one calibration pixel's own sweep.

    The pixel's profile becomes the base kernel with its peak at zero
    lag, so fitted shifts remain arrival times.  The phase axis must be
    uniform; the profile is treated as one period of the kernel, so the
    calibration sweep should cover the kernel support (one chip either
    side of the peak) with margin, leaving only the flat off-peak floor
    to wrap.
    """
    step = measurement.phases[1] - measurement.phases[0]
    if not np.allclose(np.diff(measurement.phases), step, rtol=1e-9, atol=0.0):
        raise InvalidParameterError("measured kernel needs a uniform phase axis")
    profile = measurement.values[pixel[0], pixel[1], :]
    return CorrelationKernel(profile, step,
                             origin_index=int(np.argmax(profile)))


@dataclass(frozen=True)
class OmpFit:
    """Greedy sparse fits for a batch of pixels.

    shifts/coefficients hold up to `sparsity` selections in pick order
    (trailing entries of unconverged picks are NaN/0); num_selected
    says how many are real.  Pixels whose samples are identically zero
    are flagged no-signal with an empty selection.
    """

    shifts: np.ndarray
    coefficients: np.ndarray
    residual_norm: np.ndarray
    num_selected: np.ndarray

    @property
    def no_signal(self) -> np.ndarray:
        return self.num_selected == 0


def omp_fit(values, basis: KernelBasis, sparsity: int = 1) -> OmpFit:
    """Orthogonal matching pursuit against shifted-kernel atoms.

    values has shape (..., num_phases).  Each iteration selects the
    atom with the largest absolute normalized correlation against the
    residual (ties to the smallest shift), refits all selected
    coefficients by least squares on the raw atoms, and updates the
    residual.  Coefficients are reported with respect to the raw
    (unnormalized) atoms.
    """
    if sparsity < 1:
        raise InvalidParameterError("sparsity must be >= 1")
    if sparsity > basis.num_atoms:
        raise InvalidParameterError(
            f"sparsity {sparsity} exceeds atom count {basis.num_atoms}")
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1] != basis.phases.size:
        raise DimensionError("sample count does not match basis phase axis")
    lead_shape = values.shape[:-1]
    flat = values.reshape(-1, values.shape[-1])
    num_pixels = flat.shape[0]

    atom_norms = np.linalg.norm(basis.atoms, axis=1)
    if np.any(atom_norms == 0):
        raise InvalidParameterError("basis contains an all-zero atom")
    unit_atoms = basis.atoms / atom_norms[:, None]
    gram = basis.atoms @ basis.atoms.T
    raw_corr = flat @ basis.atoms.T

    sel = np.zeros((num_pixels, sparsity), dtype=np.int64)
    coefs = np.zeros((num_pixels, sparsity))
    num_selected = np.zeros(num_pixels, dtype=np.int64)
    residual = flat.copy()
    signal_norm = np.linalg.norm(flat, axis=1)
    active = signal_norm > 0.0

    for it in range(sparsity):
        if not np.any(active):
            break
        corr = np.abs(residual[active] @ unit_atoms.T)
        # forbid re-selecting atoms already in the support
        rows = np.flatnonzero(active)
        for k in range(it):
            corr[np.arange(rows.size), sel[rows, k]] = -1.0
        sel[rows, it] = np.argmax(corr, axis=1)
        num_selected[rows] = it + 1
        support = sel[rows, :it + 1]
        sub_gram = gram[support[:, :, None], support[:, None, :]]
        rhs = np.take_along_axis(raw_corr[rows], support, axis=1)
        try:
            solved = np.linalg.solve(sub_gram, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            solved = np.stack([np.linalg.lstsq(g, r, rcond=None)[0]
                               for g, r in zip(sub_gram, rhs)])
        coefs[rows, :it + 1] = solved
        residual[rows] = flat[rows] - np.einsum(
            "pk,pks->ps", solved, basis.atoms[support])
        still = np.linalg.norm(residual[rows], axis=1) \
            > 1e-12 * signal_norm[rows]
        active[rows] = still

    shifts = np.where(np.arange(sparsity) < num_selected[:, None],
                      basis.shifts[sel], np.nan)
    coefs = np.where(np.arange(sparsity) < num_selected[:, None], coefs, 0.0)
    residual_norm = np.linalg.norm(residual, axis=1)
    return OmpFit(shifts.reshape(lead_shape + (sparsity,)),
                  coefs.reshape(lead_shape + (sparsity,)),
                  residual_norm.reshape(lead_shape),
                  num_selected.reshape(lead_shape))


@dataclass(frozen=True)
class TransientImage:
    """Per-pixel arrival time, fitted amplitude, residual, validity."""

    peak_time: np.ndarray
    amplitude: np.ndarray
    residual_norm: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel depth in meters with a validity mask."""

    depth: np.ndarray
    valid: np.ndarray


def fit_transient(measurement: Measurement, basis: KernelBasis,
                  sparsity: int = 1) -> TransientImage:
    """Per-pixel arrival times via OMP kernel fitting.

    With sparsity > 1 the reported arrival is the selection with the
    largest absolute coefficient.
    """
    if measurement.num_phases != basis.phases.size \
            or not np.allclose(measurement.phases, basis.phases,
                               rtol=1e-12, atol=0.0):
        raise DimensionError("basis was built on a different phase axis")
    fit = omp_fit(measurement.values, basis, sparsity)
    strongest = np.argmax(np.abs(fit.coefficients), axis=-1)
    peak_time = np.take_along_axis(fit.shifts, strongest[..., None],
                                   axis=-1)[..., 0]
    amplitude = np.take_along_axis(fit.coefficients, strongest[..., None],
                                   axis=-1)[..., 0]
    valid = ~fit.no_signal
    peak_time = np.where(valid, peak_time, np.nan)
    return TransientImage(peak_time, amplitude, fit.residual_norm, valid)


def median_filter_rows(values: np.ndarray, taps: int) -> np.ndarray:
    """1-D median filter of odd width applied along each image row."""
    if taps < 1 or taps % 2 == 0:
        raise InvalidParameterError("median taps must be odd and >= 1")
    if taps == 1:
        return values.copy()
    return scipy.ndimage.median_filter(values, size=(1, taps),
                                       mode="nearest")


def denoise_peaks(transient: TransientImage, taps: int) -> TransientImage:
    """Median-filter arrival times along rows (amplitudes untouched)."""
    filtered = median_filter_rows(np.where(transient.valid,
                                           transient.peak_time, 0.0), taps)
    peak = np.where(transient.valid, filtered, np.nan)
    return TransientImage(peak, transient.amplitude,
                          transient.residual_norm, transient.valid)


def depth_from_peaks(transient: TransientImage, median_taps: int = 5
                     ) -> DepthMap:
    """Depth = c * arrival / 2, median-filtered along rows.

    The factor 2 removes the round trip from source to sensor via the
    subject; invalid pixels pass through the mask.
    """
    peak = np.where(transient.valid, transient.peak_time, 0.0)
    depth = SPEED_OF_LIGHT * peak / 2.0
    depth = median_filter_rows(depth, median_taps)
    return DepthMap(np.where(transient.valid, depth, np.nan),
                    transient.valid.copy())


@dataclass(frozen=True)
class WavefrontFrames:
    """Binary light-arrival frames at a fixed frame period."""

    frames: np.ndarray
    times: np.ndarray
    frame_period: float


def wavefront_frames(transient: TransientImage, frame_period: float,
                     band_tolerance: float = DEFAULT_BAND_TOLERANCE
                     ) -> WavefrontFrames:
    """Mark, per frame k, pixels with |arrival - k*period| within tolerance.

    Pixels dimmer than 10% of the brightest fit are never lit.
    """
    if not frame_period > 0:
        raise InvalidParameterError("frame_period must be positive")
    bright = transient.valid & (
        transient.amplitude
        >= AMPLITUDE_THRESHOLD * np.max(transient.amplitude, initial=0.0,
                                        where=transient.valid))
    if not np.any(bright):
        return WavefrontFrames(np.zeros((0,) + transient.peak_time.shape,
                                        dtype=bool),
                               np.zeros(0), frame_period)
    peaks = transient.peak_time[bright]
    k_lo = int(np.floor(peaks.min() / frame_period))
    k_hi = int(np.ceil(peaks.max() / frame_period))
    ks = np.arange(k_lo, k_hi + 1)
    arrival = np.where(bright, transient.peak_time, np.inf)
    frames = np.abs(arrival[None, :, :] - ks[:, None, None] * frame_period) \
        <= band_tolerance * frame_period
    return WavefrontFrames(frames, ks * frame_period, frame_period)


def effective_fps(band_sheet_count: int, sheet_thickness: float = 0.003
                  ) -> float:
    """Frame rate inferred from the wavefront band width on a staircase.

    A band spanning n sheets of the given thickness corresponds to
    3.0e8 / (thickness * n * 2) frames per second; the factor 2 is the
    round trip over the subject.
    """
    if band_sheet_count < 1:
        raise InvalidParameterError("band sheet count must be >= 1")
    if not sheet_thickness > 0:
        raise InvalidParameterError("sheet thickness must be positive")
    return EFFECTIVE_FPS_LIGHT_SPEED / (sheet_thickness * band_sheet_count * 2)


@dataclass(frozen=True)
class Spectrum:
    """Phase-domain discrete-time Fourier transform over one period.

    frequencies span [0, 1/sample_spacing) on the grid m/(M*spacing);
    the underlying transform repeats with period 1/spacing.
    """

    frequencies: np.ndarray
    values: np.ndarray
    sample_spacing: float

    @property
    def span(self) -> float:
        """Width of the unaliased frequency band, 1/sample_spacing."""
        return 1.0 / self.sample_spacing


def dtft_spectrum(samples, sample_spacing: float) -> Spectrum:
    """DTFT of a uniformly sampled profile on its canonical period grid."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1 or samples.size < 2:
        raise InvalidParameterError("need at least two samples")
    if not sample_spacing > 0:
        raise InvalidParameterError("sample_spacing must be positive")
    values = np.fft.fft(samples)
    freqs = np.arange(samples.size) / (samples.size * sample_spacing)
    return Spectrum(freqs, values, sample_spacing)


def measurement_spectrum(measurement: Measurement, pixel: tuple[int, int]
                         ) -> Spectrum:
    """Spectrum of one pixel's sweep; the phase axis must be uniform."""
    step = measurement.phases[1] - measurement.phases[0]
    if not np.allclose(np.diff(measurement.phases), step, rtol=1e-9, atol=0.0):
        raise InvalidParameterError("phase axis is not uniform")
    return dtft_spectrum(measurement.values[pixel[0], pixel[1], :], step)


def dtft_at(samples, sample_spacing: float, frequencies) -> np.ndarray:
    """DTFT evaluated at arbitrary frequencies by direct summation."""
    samples = np.asarray(samples, dtype=np.float64)
    frequencies = np.atleast_1d(np.asarray(frequencies, dtype=np.float64))
    k = np.arange(samples.size)
    phase = -2j * np.pi * frequencies[:, None] * k[None, :] * sample_spacing
    return np.exp(phase) @ samples


def default_deconvolution_epsilon(kernel_spectrum: Spectrum) -> float:
    """Regularizer 1e-6 times the kernel's peak spectral power."""
    return 1e-6 * float(np.max(np.abs(kernel_spectrum.values)) ** 2)


def spectral_deconvolve(measured: Spectrum, kernel: Spectrum,
                        epsilon: float) -> Spectrum:
    """Regularized spectral division B * conj(H) / (|H|^2 + epsilon).

    Bins where the kernel spectrum nearly vanishes stay bounded instead
    of blowing up.
    """
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")
    if measured.values.shape != kernel.values.shape \
            or not np.allclose(measured.frequencies, kernel.frequencies,
                               rtol=1e-12, atol=0.0):
        raise DimensionError("spectra live on different frequency grids")
    h = kernel.values
    values = measured.values * np.conj(h) / (np.abs(h) ** 2 + epsilon)
    return Spectrum(measured.frequencies.copy(), values,
                    measured.sample_spacing)


def hue_colorize(transient: TransientImage) -> np.ndarray:
    """RGB visualization: arrival time as hue, fitted amplitude as value.

    The arrival span maps linearly onto hue angles 0..270 degrees
    (capped short of a full turn so earliest and latest stay distinct)
    at full saturation; invalid pixels are black.
    """
    from matplotlib.colors import hsv_to_rgb

    valid = transient.valid
    peak = np.where(valid, transient.peak_time, 0.0)
    if np.any(valid):
        lo = peak[valid].min()
        span = peak[valid].max() - lo
        hue = (peak - lo) / span * 0.75 if span > 0 else np.zeros_like(peak)
        amp = np.clip(transient.amplitude, 0.0, None)
        peak_amp = amp[valid].max()
        value = amp / peak_amp if peak_amp > 0 else np.zeros_like(amp)
    else:
        hue = np.zeros_like(peak)
        value = np.zeros_like(peak)
    hsv = np.stack([np.clip(hue, 0.0, 0.75),
                    np.ones_like(hue),
                    np.clip(value, 0.0, 1.0)], axis=-1)
    rgb = hsv_to_rgb(hsv)
    rgb[~valid] = 0.0
    return rgb


def peak_estimation_error_study(profile, native_spacing: float,
                                sampling_steps, trials: int = 100,
                                noise_sigma: float = 0.0, seed: int = 0,
                                shift_span: float | None = None
                                ) -> np.ndarray:
    """Mean absolute peak-position error versus basis sampling step.

    The ground-truth profile (samples at native_spacing) is shifted by
    random grid offsets, sub-sampled at each step, and fitted 1-sparse
    against a dictionary built from the equally sub-sampled profile.
    Steps must be integer multiples of the native spacing and no larger
    than the profile span.  The same shifts and noise realizations are
    reused across steps so curves are directly comparable.
    """
    profile = np.asarray(profile, dtype=np.float64)
    if profile.ndim != 1 or profile.size < 3:
        raise InvalidParameterError("profile must be a 1-D sample vector")
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    steps = np.asarray(sampling_steps, dtype=np.float64)
    subs = np.rint(steps / native_spacing).astype(np.int64)
    if np.any(subs < 1) or np.any(
            np.abs(steps - subs * native_spacing) > 1e-6 * native_spacing):
        raise InvalidParameterError(
            "sampling steps must be integer multiples of the native spacing")
    span = (profile.size - 1) * native_spacing
    if np.any(steps > span):
        raise InvalidParameterError("sampling step exceeds the profile span")

    if shift_span is None:
        shift_span = 5.0 * steps.max()
    max_true = int(round(shift_span / native_spacing))
    max_sub = int(subs.max())
    # candidate dictionary reaches past the largest true shift
    margin = max_true + 3 * max_sub
    window = profile.size
    padded = np.zeros(window + 2 * margin)
    padded[margin:margin + window] = profile

    rng = np.random.Generator(np.random.Philox(
        key=np.array([int(seed) & 0xFFFFFFFFFFFFFFFF, 0], dtype=np.uint64)))
    true_shifts = rng.integers(-max_true, max_true + 1, size=trials)
    sigma = noise_sigma * np.abs(profile).max()
    noise = rng.normal(0.0, 1.0, size=(trials, window)) if noise_sigma > 0 \
        else np.zeros((trials, window))

    errors = np.empty(steps.size)
    for si, sub in enumerate(subs):
        sample_idx = np.arange(0, window, sub)
        js = np.arange(-(max_true // sub + 3), max_true // sub + 4)
        atoms = np.stack([padded[margin - j * sub + sample_idx] for j in js])
        basis = KernelBasis(atoms, js * sub * native_spacing,
                            sample_idx * native_spacing)
        shifted = np.stack([padded[margin - s + sample_idx]
                            for s in true_shifts])
        measurements = shifted + sigma * noise[:, sample_idx]
        fit = omp_fit(measurements, basis, sparsity=1)
        est = fit.shifts[:, 0]
        errors[si] = np.mean(np.abs(est - true_shifts * native_spacing))
    return errors


def transient_to_csv(transient: TransientImage, path) -> None:
    """Rows of pixel_row, pixel_col, peak_time_s, amplitude, residual, valid."""
    from phasesweep import fileio

    def rows():
        for r in range(transient.peak_time.shape[0]):
            for c in range(transient.peak_time.shape[1]):
                yield (r, c, transient.peak_time[r, c],
                       transient.amplitude[r, c],
                       transient.residual_norm[r, c],
                       int(transient.valid[r, c]))

    fileio.write_csv(path, ("pixel_row", "pixel_col", "peak_time_s",
                            "amplitude", "residual_norm", "valid"), rows())


def depth_to_csv(depth_map: DepthMap, path) -> None:
    """Rows of pixel_row, pixel_col, depth_m, valid."""
    from phasesweep import fileio

    def rows():
        for r in range(depth_map.depth.shape[0]):
            for c in range(depth_map.depth.shape[1]):
                yield r, c, depth_map.depth[r, c], int(depth_map.valid[r, c])

    fileio.write_csv(path, ("pixel_row", "pixel_col", "depth_m", "valid"),
                     rows())
