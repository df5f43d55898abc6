"""Spatial phase-sweep acquisition, equalization, and interleaving.

A linear array of N light sources, spaced delta_d along the optical
axis, inserts per-source phase offsets mu_n = n * delta_d / c that are
finer than the PLL step.  Acquiring one PLL sweep per source and
merging the N sweeps onto the union phase grid yields a correlation
profile sampled N times finer than the electronics allow.

Two acquisition modes exist:

* uniform-mu (default): every pixel of source n is offset by exactly
  mu_n.  This is the idealized model under which interleaving is exact.
* moving-source (exact geometry): per-pixel path delays are recomputed
  from the true source positions, which are placed symmetrically about
  the nominal source along the axis (offsets (n - (N-1)/2) * delta_d).
  Off-axis pixels then see a compressed insertion, exposing the
  systematic error bounded by floor(N/2) * delta_d * (1 - cos theta).

Equalization estimates one scalar gain per source by least squares
against the source-0 sweep, linearly interpolated onto the shifted
phase positions.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from phasesweep.errors import (DegenerateDataError, DimensionError,
                               InvalidGeometryError, InvalidParameterError)
from phasesweep.scene import (SPEED_OF_LIGHT, Geometry3D, SceneResponse,
                              response_from_geometry)
from phasesweep.sensor import (Measurement, SensorConfig, add_noise,
                               read_measurement, sweep_pll,
                               write_measurement)


@dataclass(frozen=True)
class ArrayGeometry:
    """Light-source array: count, axial spacing, stand-off, worst pixel angle."""

    num_sources: int = 10
    spacing: float = 2.8e-3
    standoff: float = 1.0
    half_angle: float = np.deg2rad(25.0)

    def __post_init__(self):
        if self.num_sources < 1:
            raise InvalidParameterError("num_sources must be >= 1")
        if not self.spacing > 0:
            raise InvalidParameterError("spacing must be positive")
        if not self.standoff > 0:
            raise InvalidParameterError("standoff must be positive")
        if not 0 <= self.half_angle < np.pi / 2:
            raise InvalidParameterError("half_angle must be in [0, pi/2)")


@dataclass(frozen=True)
class SweepDataset:
    """One PLL sweep per light source, sharing a phase axis and grid."""

    measurements: tuple
    geometry: ArrayGeometry

    def __post_init__(self):
        if len(self.measurements) != self.geometry.num_sources:
            raise DimensionError("need one measurement per light source")
        first = self.measurements[0]
        for m in self.measurements[1:]:
            if m.values.shape != first.values.shape \
                    or not np.array_equal(m.phases, first.phases):
                raise DimensionError(
                    "all sweeps must share one phase axis and pixel grid")
        object.__setattr__(self, "measurements", tuple(self.measurements))

    @property
    def num_sources(self) -> int:
        return self.geometry.num_sources

    @property
    def insertion_delays(self) -> np.ndarray:
        return insertion_delays(self.geometry)


@dataclass(frozen=True)
class EqualizationWeights:
    """Per-source gain corrections w_n; w_0 is 1 by definition."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim not in (1, 3) or values.shape[0] < 1:
            raise InvalidParameterError(
                "weights must be (N,) or per-pixel (N, rows, cols)")
        object.__setattr__(self, "values", values)

    @property
    def num_sources(self) -> int:
        return self.values.shape[0]

    @property
    def per_pixel(self) -> bool:
        return self.values.ndim == 3


@dataclass(frozen=True)
class InterleavedMeasurement(Measurement):
    """Merged sweep with per-sample provenance.

    source_index/step_index map every merged sample back to its (n, j)
    origin; samples produced by averaging colliding phase positions
    carry the first colliding pair and are counted in collision_count.
    """

    source_index: np.ndarray = None
    step_index: np.ndarray = None
    collision_count: int = 0


def insertion_delays(geometry: ArrayGeometry) -> np.ndarray:
    """Phase offsets mu_n = n * spacing / c for n = 0..N-1."""
    return np.arange(geometry.num_sources) * (geometry.spacing / SPEED_OF_LIGHT)


def source_axis(scene_geometry: Geometry3D) -> np.ndarray:
    """Unit vector from the nominal source toward the scene centroid."""
    centroid = scene_geometry.points.reshape(-1, 3).mean(axis=0)
    axis = centroid - scene_geometry.light_position
    norm = np.linalg.norm(axis)
    if norm == 0:
        raise InvalidGeometryError("scene centroid coincides with the source")
    return axis / norm


def source_positions(scene_geometry: Geometry3D,
                     array_geometry: ArrayGeometry) -> np.ndarray:
    """True source positions, centered on the nominal source.

    Source n sits at offset (n - (N-1)/2) * spacing along the axis
    toward the scene, mirroring the error analysis that references
    inserted phases to the array center.
    """
    axis = source_axis(scene_geometry)
    n = np.arange(array_geometry.num_sources)
    offsets = (n - (array_geometry.num_sources - 1) / 2.0) \
        * array_geometry.spacing
    return scene_geometry.light_position + offsets[:, None] * axis


def pixel_angles(scene_geometry: Geometry3D) -> np.ndarray:
    """Angle of each pixel's source leg off the array axis, in radians."""
    axis = source_axis(scene_geometry)
    rays = scene_geometry.points - scene_geometry.light_position
    norms = np.linalg.norm(rays, axis=2)
    cosines = (rays @ axis) / norms
    return np.arccos(np.clip(cosines, -1.0, 1.0))


def exact_insertion_delays(scene_geometry: Geometry3D,
                           array_geometry: ArrayGeometry) -> np.ndarray:
    """True per-pixel phase insertion of every source, shape (N, rows, cols).

    Entry (n, r, c) is the path-delay reduction seen by pixel (r, c)
    when the nominal source is swapped for source n; on the axis it
    approaches (n - (N-1)/2) * spacing / c.
    """
    positions = source_positions(scene_geometry, array_geometry)
    pts = scene_geometry.points.reshape(-1, 3)
    nominal = np.linalg.norm(pts - scene_geometry.light_position, axis=1)
    out = np.empty((array_geometry.num_sources, pts.shape[0]))
    for n, pos in enumerate(positions):
        out[n] = (nominal - np.linalg.norm(pts - pos, axis=1)) / SPEED_OF_LIGHT
    return out.reshape(array_geometry.num_sources, scene_geometry.rows,
                       scene_geometry.cols)


def systematic_delay_discrepancy(scene_geometry: Geometry3D,
                                 array_geometry: ArrayGeometry) -> np.ndarray:
    """|exact insertion - uniform-ladder model| per source and pixel.

    The uniform model, referenced to the array center, inserts
    (n - (N-1)/2) * spacing / c identically for all pixels.  The
    worst-case entry is bounded by floor(N/2)*spacing*(1-cos theta)/c
    for pixels within the cone of half-angle theta.
    """
    exact = exact_insertion_delays(scene_geometry, array_geometry)
    n = np.arange(array_geometry.num_sources)
    model = (n - (array_geometry.num_sources - 1) / 2.0) \
        * array_geometry.spacing / SPEED_OF_LIGHT
    return np.abs(exact - model[:, None, None])


def acquire_sweep(response: SceneResponse, geometry: ArrayGeometry,
                  config: SensorConfig, f, g,
                  moving_source: bool = False) -> SweepDataset:
    """One PLL sweep per light source.

    Default mode offsets source n by exactly mu_n (uniform-mu model).
    With moving_source the response's 3-D geometry is re-evaluated at
    the true source positions instead, so the per-pixel insertion
    deviates from mu_n by the systematic error; the sweep itself is
    taken with no synthetic offset.
    """
    mus = insertion_delays(geometry)
    if not moving_source:
        sweeps = [sweep_pll(response, config, f, g, insertion_delay=mu)
                  for mu in mus]
        return SweepDataset(tuple(sweeps), geometry)
    if response.geometry is None:
        raise InvalidGeometryError(
            "moving-source acquisition needs a response with 3-D geometry")
    if np.any(np.diff(response.indptr) != 1):
        raise InvalidGeometryError(
            "moving-source acquisition supports single-path pixels only")
    positions = source_positions(response.geometry, geometry)
    amplitudes = response.amplitudes
    sweeps = []
    for pos in positions:
        moved = response_from_geometry(
            response.geometry, light_position=pos,
            scattering_time_constant=response.scattering_time_constant)
        moved = SceneResponse(moved.rows, moved.cols, moved.delays,
                              amplitudes, moved.indptr,
                              moved.scattering_time_constant, moved.geometry)
        sweeps.append(sweep_pll(moved, config, f, g, insertion_delay=0.0))
    return SweepDataset(tuple(sweeps), geometry)


def add_sweep_noise(dataset: SweepDataset, sigma_relative: float,
                    seed: int) -> SweepDataset:
    """Independent per-source measurement noise (source index keys the stream)."""
    noisy = tuple(add_noise(m, sigma_relative, seed, stream=n)
                  for n, m in enumerate(dataset.measurements))
    return SweepDataset(noisy, dataset.geometry)


def _interp_uniform(values: np.ndarray, phases: np.ndarray,
                    targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Linear interpolation of (rows, cols, P) values onto target phases.

    Returns interpolated values and the mask of in-range targets.
    Requires a uniform phase axis.
    """
    step = phases[1] - phases[0]
    if not np.allclose(np.diff(phases), step, rtol=1e-9, atol=0.0):
        raise InvalidParameterError("phase axis must be uniform")
    pos = (targets - phases[0]) / step
    valid = (pos >= 0.0) & (pos <= phases.size - 1)
    pos = np.clip(pos, 0.0, phases.size - 1)
    i0 = np.minimum(pos.astype(np.int64), phases.size - 2)
    w = pos - i0
    interp = values[..., i0] * (1.0 - w) + values[..., i0 + 1] * w
    return interp, valid


def compute_equalization(dataset: SweepDataset,
                         per_pixel: bool = False) -> EqualizationWeights:
    """Least-squares gain w_n aligning each source sweep with source 0.

    The source-0 sweep is linearly interpolated onto phi + mu_n and
    w_n = sum(bhat_n * b_n) / sum(b_n^2), summed over all pixels and
    in-range phases jointly (or per pixel with per_pixel=True).
    w_0 is 1 by definition.
    """
    mus = dataset.insertion_delays
    reference = dataset.measurements[0]
    weights = []
    for n, measurement in enumerate(dataset.measurements):
        if n == 0:
            shape = (measurement.rows, measurement.cols)
            weights.append(np.ones(shape) if per_pixel else 1.0)
            continue
        bhat, valid = _interp_uniform(reference.values, reference.phases,
                                      reference.phases + mus[n])
        b = measurement.values[..., valid]
        bhat = bhat[..., valid]
        axis = -1 if per_pixel else None
        denom = np.sum(b * b, axis=axis)
        numer = np.sum(bhat * b, axis=axis)
        if per_pixel:
            with np.errstate(invalid="ignore", divide="ignore"):
                weights.append(np.where(denom > 0, numer / denom, np.nan))
        else:
            if denom == 0:
                raise DegenerateDataError(
                    f"source {n} measured identically zero")
            weights.append(numer / denom)
    return EqualizationWeights(np.stack([np.asarray(w, dtype=np.float64)
                                         for w in weights]))


def interleave(dataset: SweepDataset,
               weights: EqualizationWeights | None = None
               ) -> InterleavedMeasurement:
    """Merge per-source sweeps onto the union phase grid.

    Sample (n, j) lands at phi_j + mu_n with value w_n * b_n(phi_j).
    When spacing/c divides the PLL step evenly the merged axis is
    uniform with spacing spacing/c.  Coinciding positions (mu_n hitting
    the PLL grid) are averaged and counted in collision_count.
    """
    if weights is None:
        weights = EqualizationWeights(np.ones(dataset.num_sources))
    if weights.num_sources != dataset.num_sources:
        raise DimensionError("weight count does not match source count")
    mus = dataset.insertion_delays
    num_steps = dataset.measurements[0].num_phases
    positions, values, sources, steps = [], [], [], []
    for n, measurement in enumerate(dataset.measurements):
        positions.append(measurement.phases + mus[n])
        w_n = weights.values[n]
        scaled = measurement.values * (w_n[..., None] if weights.per_pixel
                                       else w_n)
        values.append(scaled)
        sources.append(np.full(num_steps, n, dtype=np.int64))
        steps.append(np.arange(num_steps, dtype=np.int64))
    positions = np.concatenate(positions)
    values = np.concatenate(values, axis=2)
    sources = np.concatenate(sources)
    steps = np.concatenate(steps)
    order = np.argsort(positions, kind="stable")
    positions = positions[order]
    values = values[..., order]
    sources = sources[order]
    steps = steps[order]

    span = positions[-1] - positions[0]
    tol = 1e-9 * span
    gaps = np.diff(positions)
    if positions.size > 1 and np.any(gaps <= tol):
        keep, collisions = [], 0
        i = 0
        while i < positions.size:
            j = i
            while j + 1 < positions.size and positions[j + 1] - positions[j] <= tol:
                j += 1
            if j > i:
                positions[i] = positions[i:j + 1].mean()
                values[..., i] = values[..., i:j + 1].mean(axis=-1)
                collisions += j - i
            keep.append(i)
            i = j + 1
        keep = np.asarray(keep, dtype=np.int64)
        positions = positions[keep]
        values = values[..., keep]
        sources = sources[keep]
        steps = steps[keep]
    else:
        collisions = 0
    return InterleavedMeasurement(positions, np.ascontiguousarray(values),
                                  source_index=sources, step_index=steps,
                                  collision_count=collisions)


def weights_to_csv(weights: EqualizationWeights, path) -> None:
    """Rows of source index n, w_n (global weights only)."""
    from phasesweep import fileio
    if weights.per_pixel:
        raise InvalidParameterError("CSV export covers global weights only")
    fileio.write_csv(path, ("n", "w_n"),
                     ((n, w) for n, w in enumerate(weights.values)))


def save_sweep(dataset: SweepDataset, directory) -> None:
    """One binary measurement file per source plus a JSON manifest."""
    os.makedirs(directory, exist_ok=True)
    mus = dataset.insertion_delays
    offsets = (np.arange(dataset.num_sources)
               - (dataset.num_sources - 1) / 2.0) * dataset.geometry.spacing
    entries = []
    for n, measurement in enumerate(dataset.measurements):
        name = f"source_{n:03d}.psm"
        write_measurement(measurement, os.path.join(directory, name))
        entries.append({"source": n, "file": name,
                        "insertion_delay_s": float(mus[n]),
                        "axial_offset_m": float(offsets[n])})
    manifest = {
        "format": "phasesweep-sweep-v1",
        "geometry": {
            "num_sources": dataset.num_sources,
            "spacing_m": dataset.geometry.spacing,
            "standoff_m": dataset.geometry.standoff,
            "half_angle_rad": dataset.geometry.half_angle,
        },
        "sources": entries,
    }
    with open(os.path.join(directory, "sweep_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_sweep(directory) -> SweepDataset:
    """Inverse of save_sweep."""
    with open(os.path.join(directory, "sweep_manifest.json")) as fh:
        manifest = json.load(fh)
    geo = manifest["geometry"]
    geometry = ArrayGeometry(geo["num_sources"], geo["spacing_m"],
                             geo["standoff_m"], geo["half_angle_rad"])
    entries = sorted(manifest["sources"], key=lambda e: e["source"])
    measurements = tuple(read_measurement(os.path.join(directory, e["file"]))
                         for e in entries)
    return SweepDataset(measurements, geometry)
