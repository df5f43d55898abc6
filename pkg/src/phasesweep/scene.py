"""Per-pixel scene impulse responses built from simple geometry.

A scene response is, per pixel, a sparse list of light paths (delay in
seconds, nonnegative amplitude).  Paths are stored flattened in CSR
layout so the sensor core can iterate them without Python overhead.

Amplitudes default to 1 so that amplitude variation is owned by the
equalization calibration, not the geometry; pass inverse_square=True to
the geometric builders to exercise equalization with a radiometric
falloff.  Subsurface-like scattering is recorded as a one-sided
exponential time constant and applied by the sensor model.
"""

from dataclasses import dataclass, replace

import numpy as np

from phasesweep.errors import (InvalidGeometryError, InvalidParameterError)

SPEED_OF_LIGHT = 299792458.0  # m/s


@dataclass(frozen=True)
class ScenePath:
    """One light path: total source->point->sensor travel time and weight."""
    delay: float
    amplitude: float


@dataclass(frozen=True)
class Geometry3D:
    """Positions, in meters, behind a geometric scene.

    points holds the surface point seen by each pixel, shape (rows, cols, 3).
    """
    sensor_position: np.ndarray
    light_position: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        sensor = np.asarray(self.sensor_position, dtype=np.float64)
        light = np.asarray(self.light_position, dtype=np.float64)
        points = np.asarray(self.points, dtype=np.float64)
        if sensor.shape != (3,) or light.shape != (3,):
            raise InvalidGeometryError("sensor/light positions must be 3-vectors")
        if points.ndim != 3 or points.shape[2] != 3:
            raise InvalidGeometryError("points must have shape (rows, cols, 3)")
        for arr in (sensor, light, points):
            if not np.all(np.isfinite(arr)):
                raise InvalidGeometryError("coordinates must be finite")
        if np.any(np.all(np.isclose(points, light, atol=0.0), axis=2)):
            raise InvalidGeometryError(
                "light source coincides with a surface point")
        object.__setattr__(self, "sensor_position", sensor)
        object.__setattr__(self, "light_position", light)
        object.__setattr__(self, "points", points)

    @property
    def rows(self) -> int:
        return self.points.shape[0]

    @property
    def cols(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class SceneResponse:
    """Sparse per-pixel impulse response over a pixel grid.

    delays/amplitudes are flattened path arrays; indptr (length
    rows*cols + 1) gives each pixel's slice, paths sorted by delay.
    scattering_time_constant > 0 smears every path with a unit-area
    one-sided exponential inside the sensor model.
    """

    rows: int
    cols: int
    delays: np.ndarray
    amplitudes: np.ndarray
    indptr: np.ndarray
    scattering_time_constant: float = 0.0
    geometry: Geometry3D | None = None

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InvalidGeometryError("pixel grid must be at least 1x1")
        delays = np.asarray(self.delays, dtype=np.float64)
        amps = np.asarray(self.amplitudes, dtype=np.float64)
        indptr = np.asarray(self.indptr, dtype=np.int64)
        if delays.shape != amps.shape or delays.ndim != 1:
            raise InvalidParameterError("delays/amplitudes must be equal-length 1-D")
        if indptr.shape != (self.rows * self.cols + 1,):
            raise InvalidParameterError("indptr length must be rows*cols + 1")
        if indptr[0] != 0 or indptr[-1] != delays.size \
                or np.any(np.diff(indptr) < 0):
            raise InvalidParameterError("indptr must be a monotone CSR boundary")
        if np.any(delays <= 0):
            raise InvalidParameterError("path delays must be positive")
        if np.any(amps < 0):
            raise InvalidParameterError("path amplitudes must be nonnegative")
        if self.scattering_time_constant < 0:
            raise InvalidParameterError("scattering time constant must be >= 0")
        for p in range(self.rows * self.cols):
            seg = delays[indptr[p]:indptr[p + 1]]
            if seg.size > 1 and np.any(np.diff(seg) < 0):
                raise InvalidParameterError("paths must be sorted by delay")
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "indptr", indptr)

    @property
    def num_pixels(self) -> int:
        return self.rows * self.cols

    def paths(self, row: int, col: int) -> list[ScenePath]:
        p = row * self.cols + col
        lo, hi = self.indptr[p], self.indptr[p + 1]
        return [ScenePath(float(d), float(a))
                for d, a in zip(self.delays[lo:hi], self.amplitudes[lo:hi])]

    def delay_bounds(self) -> tuple[float, float]:
        """Earliest and latest path delay over the whole grid."""
        if self.delays.size == 0:
            raise InvalidGeometryError("scene has no paths")
        return float(self.delays.min()), float(self.delays.max())


def from_pixel_paths(rows: int, cols: int, pixel_paths,
                     scattering_time_constant: float = 0.0,
                     geometry: Geometry3D | None = None) -> SceneResponse:
    """Build a response from a list of per-pixel [(delay, amplitude), ...].

    pixel_paths is indexed pixel-major (row * cols + col); paths are
    re-sorted by delay and zero-amplitude paths are pruned.
    """
    if len(pixel_paths) != rows * cols:
        raise InvalidParameterError("need one path list per pixel")
    delays, amps, indptr = [], [], [0]
    for paths in pixel_paths:
        kept = sorted((p for p in paths if p[1] > 0), key=lambda p: p[0])
        delays.extend(p[0] for p in kept)
        amps.extend(p[1] for p in kept)
        indptr.append(len(delays))
    return SceneResponse(rows, cols, np.asarray(delays, dtype=np.float64),
                         np.asarray(amps, dtype=np.float64),
                         np.asarray(indptr, dtype=np.int64),
                         scattering_time_constant, geometry)


def path_delay(light_pos, point, sensor_pos) -> float:
    """Travel time source -> scene point -> sensor in seconds."""
    light_pos = np.asarray(light_pos, dtype=np.float64)
    point = np.asarray(point, dtype=np.float64)
    sensor_pos = np.asarray(sensor_pos, dtype=np.float64)
    dist = np.linalg.norm(light_pos - point) + np.linalg.norm(point - sensor_pos)
    return float(dist / SPEED_OF_LIGHT)


def response_from_geometry(geometry: Geometry3D,
                           light_position=None,
                           inverse_square: bool = False,
                           scattering_time_constant: float = 0.0
                           ) -> SceneResponse:
    """Single direct path per pixel from explicit 3-D geometry.

    light_position overrides geometry's nominal source (used when the
    source array sweeps through space).  With inverse_square, amplitudes
    fall off as (d0/r_src)^2 (d0 = closest source leg) instead of 1.
    """
    light = geometry.light_position if light_position is None \
        else np.asarray(light_position, dtype=np.float64)
    pts = geometry.points.reshape(-1, 3)
    src_leg = np.linalg.norm(pts - light, axis=1)
    sensor_leg = np.linalg.norm(pts - geometry.sensor_position, axis=1)
    if np.any(src_leg == 0):
        raise InvalidGeometryError("light source coincides with a surface point")
    delays = (src_leg + sensor_leg) / SPEED_OF_LIGHT
    if inverse_square:
        amps = (src_leg.min() / src_leg) ** 2
    else:
        amps = np.ones_like(delays)
    indptr = np.arange(pts.shape[0] + 1, dtype=np.int64)
    return SceneResponse(geometry.rows, geometry.cols, delays, amps, indptr,
                         scattering_time_constant, geometry)


def build_plane_scene(distance: float, grid=(64, 64), extent: float = 0.5,
                      inverse_square: bool = False) -> SceneResponse:
    """Flat wall facing a colocated sensor and light source at the origin.

    The wall spans extent x extent meters centered on the optical (+z)
    axis at the given distance.
    """
    if distance <= 0 or extent <= 0:
        raise InvalidGeometryError("distance and extent must be positive")
    rows, cols = grid
    xs = (np.arange(cols) / max(cols - 1, 1) - 0.5) * extent
    ys = (np.arange(rows) / max(rows - 1, 1) - 0.5) * extent
    points = np.empty((rows, cols, 3))
    points[:, :, 0] = xs[None, :]
    points[:, :, 1] = ys[:, None]
    points[:, :, 2] = distance
    geometry = Geometry3D(np.zeros(3), np.zeros(3), points)
    return response_from_geometry(geometry, inverse_square=inverse_square)


def build_terraced_scene(num_sheets: int, sheet_thickness: float,
                         standoff: float, grid=(64, 64),
                         inverse_square: bool = False) -> SceneResponse:
    """Staircase target: stacked sheets forming contiguous vertical bands.

    Band k (one or more whole pixel columns) is a single path at one-way
    distance standoff - k*sheet_thickness; delays are round trip.
    """
    if num_sheets < 1:
        raise InvalidParameterError("num_sheets must be >= 1")
    if sheet_thickness <= 0 or standoff <= 0:
        raise InvalidParameterError("sheet_thickness and standoff must be positive")
    rows, cols = grid
    if rows < 1 or cols < num_sheets:
        raise InvalidGeometryError(
            f"grid {rows}x{cols} cannot give each of {num_sheets} sheets a column")
    nearest = standoff - (num_sheets - 1) * sheet_thickness
    if nearest <= 0:
        raise InvalidGeometryError("sheets extend past the sensor")
    band = np.minimum((np.arange(cols) * num_sheets) // cols, num_sheets - 1)
    one_way = standoff - band * sheet_thickness
    col_delays = 2.0 * one_way / SPEED_OF_LIGHT
    col_amps = (one_way.min() / one_way) ** 2 if inverse_square \
        else np.ones(cols)
    delays = np.tile(col_delays, rows)
    amps = np.tile(col_amps, rows)
    indptr = np.arange(rows * cols + 1, dtype=np.int64)
    return SceneResponse(rows, cols, delays, amps, indptr)


def terraced_band_of_column(num_sheets: int, cols: int) -> np.ndarray:
    """Sheet index of every pixel column in a terraced scene."""
    return np.minimum((np.arange(cols) * num_sheets) // cols, num_sheets - 1)


def build_spheres_scene(distance: float, num_spheres: int = 4,
                        radius: float = 0.02, grid=(64, 64),
                        extent: float = 0.2) -> SceneResponse:
    """Row of spheres bulging out of a back wall (grape-bunch stand-in).

    Height-field approximation: each pixel sees either the wall at the
    given distance or the front surface of the nearest sphere.
    """
    if num_spheres < 1 or radius <= 0:
        raise InvalidParameterError("need >= 1 sphere of positive radius")
    rows, cols = grid
    xs = (np.arange(cols) / max(cols - 1, 1) - 0.5) * extent
    ys = (np.arange(rows) / max(rows - 1, 1) - 0.5) * extent
    xg, yg = np.meshgrid(xs, ys)
    z = np.full((rows, cols), distance)
    centers = (np.arange(num_spheres) - (num_spheres - 1) / 2) \
        * (2.2 * radius)
    for cx in centers:
        rho2 = (xg - cx) ** 2 + yg ** 2
        inside = rho2 < radius ** 2
        bulge = distance - np.sqrt(np.maximum(radius ** 2 - rho2, 0.0))
        z = np.where(inside, bulge, z)
    points = np.stack([xg, yg, z], axis=2)
    geometry = Geometry3D(np.zeros(3), np.zeros(3), points)
    return response_from_geometry(geometry)


@dataclass(frozen=True)
class MirrorPlane:
    """Plane given by a point on it and its (non-zero) normal."""
    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        point = np.asarray(self.point, dtype=np.float64)
        normal = np.asarray(self.normal, dtype=np.float64)
        norm = np.linalg.norm(normal)
        if point.shape != (3,) or normal.shape != (3,) or norm == 0:
            raise InvalidGeometryError("plane needs a 3-point and nonzero normal")
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "normal", normal / norm)

    def reflect(self, position) -> np.ndarray:
        position = np.asarray(position, dtype=np.float64)
        signed = np.dot(position - self.point, self.normal)
        return position - 2.0 * signed * self.normal

    def signed_distance(self, position) -> float:
        return float(np.dot(np.asarray(position, dtype=np.float64)
                            - self.point, self.normal))


def add_mirror_virtual_source(response: SceneResponse, geometry: Geometry3D,
                              mirror_plane: MirrorPlane, reflectance: float
                              ) -> SceneResponse:
    """Append one mirror-bounce path per pixel via the reflected source.

    The virtual source is the light position mirrored across the plane;
    each new path's amplitude is reflectance times the pixel's direct
    amplitude.  reflectance = 0 leaves the response unchanged (paths of
    zero amplitude are pruned).
    """
    if not 0.0 <= reflectance <= 1.0:
        raise InvalidParameterError("reflectance must be within [0, 1]")
    if abs(mirror_plane.signed_distance(geometry.light_position)) < 1e-12:
        raise InvalidGeometryError("mirror plane passes through the light source")
    virtual = mirror_plane.reflect(geometry.light_position)
    pts = geometry.points.reshape(-1, 3)
    sensor = geometry.sensor_position
    pixel_paths = []
    for p in range(response.num_pixels):
        lo, hi = response.indptr[p], response.indptr[p + 1]
        paths = [(d, a) for d, a in
                 zip(response.delays[lo:hi], response.amplitudes[lo:hi])]
        if reflectance > 0 and paths:
            delay = path_delay(virtual, pts[p], sensor)
            paths.append((delay, reflectance * paths[0][1]))
        pixel_paths.append(paths)
    return from_pixel_paths(response.rows, response.cols, pixel_paths,
                            response.scattering_time_constant, geometry)


def apply_scattering(response: SceneResponse, time_constant: float
                     ) -> SceneResponse:
    """Record a one-sided exponential scattering constant on the response.

    The sensor model convolves its kernel with
    exp(-t/time_constant)/time_constant; zero keeps pure deltas.
    """
    if time_constant < 0:
        raise InvalidParameterError("scattering time constant must be >= 0")
    return replace(response, scattering_time_constant=float(time_constant))


def shift_delays(response: SceneResponse, delta: float) -> SceneResponse:
    """All path delays moved by delta seconds (must stay positive)."""
    return replace(response, delays=response.delays + delta)


#: Keys understood by build_scene_from_mapping, all optional except
#: `scene`.  Values are plain decimal strings; grids default to 64x64.
SCENE_CONFIG_KEYS = ("scene", "rows", "cols", "num_sheets",
                     "sheet_thickness", "standoff", "plane_distance",
                     "extent", "num_spheres", "sphere_radius",
                     "mirror_offset", "mirror_reflectance",
                     "scattering_time_constant", "inverse_square")


def build_scene_from_mapping(mapping: dict) -> SceneResponse:
    """Scene response from flat key-value strings (see SCENE_CONFIG_KEYS).

    Presets: terraced (num_sheets, sheet_thickness, standoff), plane
    (plane_distance, extent), spheres (plane_distance, num_spheres,
    sphere_radius, extent), mirror (plane plus mirror_offset and
    mirror_reflectance).  scattering_time_constant applies to any of
    them.
    """
    unknown = set(mapping) - set(SCENE_CONFIG_KEYS)
    if unknown:
        raise InvalidParameterError(
            f"unknown scene keys: {', '.join(sorted(unknown))}")
    get = mapping.get
    grid = (int(get("rows", 64)), int(get("cols", 64)))
    preset = get("scene", "terraced")
    falloff = get("inverse_square", "0") in ("1", "true")
    if preset == "terraced":
        response = build_terraced_scene(
            int(get("num_sheets", 10)), float(get("sheet_thickness", 0.003)),
            float(get("standoff", 0.5)), grid, falloff)
    elif preset == "plane":
        response = build_plane_scene(float(get("plane_distance", 1.0)),
                                     grid, float(get("extent", 0.5)),
                                     falloff)
    elif preset == "spheres":
        response = build_spheres_scene(float(get("plane_distance", 0.5)),
                                       int(get("num_spheres", 4)),
                                       float(get("sphere_radius", 0.02)),
                                       grid, float(get("extent", 0.2)))
    elif preset == "mirror":
        response = build_plane_scene(float(get("plane_distance", 1.0)),
                                     grid, float(get("extent", 0.5)),
                                     falloff)
        plane = MirrorPlane((0.0, 0.0, -float(get("mirror_offset", 0.1))),
                            (0.0, 0.0, 1.0))
        response = add_mirror_virtual_source(
            response, response.geometry, plane,
            float(get("mirror_reflectance", 0.6)))
    else:
        raise InvalidParameterError(f"unknown scene preset '{preset}'")
    tc = float(get("scattering_time_constant", 0.0))
    if tc > 0:
        response = apply_scattering(response, tc)
    return response


def load_scene_file(path) -> SceneResponse:
    """Scene from a flat `key = value` file (see SCENE_CONFIG_KEYS)."""
    from phasesweep import fileio
    return build_scene_from_mapping(fileio.read_keyvalue_file(path))


def response_to_csv(response: SceneResponse, path) -> None:
    """Rows of pixel_row, pixel_col, path_index, delay_s, amplitude."""
    from phasesweep import fileio

    def rows():
        for p in range(response.num_pixels):
            r, c = divmod(p, response.cols)
            lo = response.indptr[p]
            for k in range(lo, response.indptr[p + 1]):
                yield (r, c, k - lo, response.delays[k],
                       response.amplitudes[k])

    fileio.write_csv(path, ("pixel_row", "pixel_col", "path_index",
                            "delay_s", "amplitude"), rows())
