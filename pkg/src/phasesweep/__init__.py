"""Spatial phase-sweep transient imaging toolkit.

Simulates a correlation time-of-flight camera whose illumination comes
from a linear array of slightly offset light sources, recovers
per-pixel transient responses at a temporal resolution finer than the
PLL phase step, and provides the calibration and systematic-error
analysis that make the technique work.
"""

__version__ = "0.1.0"

from phasesweep.backend import BACKEND_NAME
from phasesweep.codes import (CorrelationKernel, ModulationCode,
                              circular_cross_correlation, continuous_kernel,
                              generate_msequence)
from phasesweep.scene import (SPEED_OF_LIGHT, Geometry3D, MirrorPlane,
                              SceneResponse, add_mirror_virtual_source,
                              apply_scattering, build_plane_scene,
                              build_spheres_scene, build_terraced_scene,
                              path_delay)
from phasesweep.sensor import (Measurement, SensorConfig, add_noise, measure,
                               sweep_pll)
from phasesweep.sweep import (ArrayGeometry, EqualizationWeights,
                              InterleavedMeasurement, SweepDataset,
                              acquire_sweep, compute_equalization,
                              insertion_delays, interleave)
from phasesweep.recon import (DepthMap, KernelBasis, OmpFit, Spectrum,
                              TransientImage, WavefrontFrames, depth_from_peaks,
                              dtft_spectrum, effective_fps, fit_transient,
                              hue_colorize, omp_fit, peak_estimation_error_study,
                              shift_basis, spectral_deconvolve,
                              wavefront_frames)
from phasesweep.analysis import (ErrorBudget, MagnificationLimit, error_budget,
                                 max_magnification, max_systematic_error,
                                 phase_insertion_shift, remainder_bound)
