"""Sensing-matrix assembly, measurement simulation and phase effects.

The bidirectional model multiplies the Tx-side and Rx-side one-way matrices
entrywise: the wave crosses the rotating mask once on the way out and once
on the way back.  The unidirectional baseline keeps only the receive-side
matrix.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import EstimationError, NumericError, ParameterError, ShapeError
from .geometry import (MaskGeometry, MaskPlaneSampling, RadarConfig,
                       RotationSampling, SceneGrid)
from .mask import MaskTransmission, transmission_for
from .propagation import AntennaPattern, assemble_oneway

DEFAULT_ROTATION_RPM = 600.0


def sample_interval_s(rpm: float, positions_per_rotation: int) -> float:
    """Time between rotation positions (600 rpm, 1000 positions -> 100 us)."""
    if rpm <= 0 or positions_per_rotation <= 0:
        raise ParameterError("rpm and positions_per_rotation must be positive")
    return 60.0 / (rpm * positions_per_rotation)


def config_fingerprint(radar: RadarConfig, grid: SceneGrid, mask: MaskGeometry,
                       rotation: RotationSampling, plane_sampling: MaskPlaneSampling,
                       directionality: str) -> str:
    """Stable hex digest of every input that shapes the sensing matrix."""
    h = hashlib.sha256()
    parts = [
        repr(radar.wavelength_m), repr(radar.tx_position), repr(radar.rx_position),
        repr(radar.azimuth_fov_deg), repr(radar.elevation_fov_deg),
        repr(grid.range_m), repr(grid.azimuth_deg.tolist()), repr(grid.elevation_deg.tolist()),
        repr(mask.blade_count), repr(mask.blade_length_m), repr(mask.blade_width_m),
        repr(mask.plane_depth_m), repr(mask.axis_offset_m), repr(mask.attenuation_db),
        mask.mode,
        repr(rotation.angles_rad.tolist()),
        repr(plane_sampling.spacing_m), repr(plane_sampling.extent_m),
        repr(plane_sampling.plane_depth_m),
        directionality,
    ]
    h.update("|".join(parts).encode())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class ForwardModel:
    """Sensing matrix B with provenance.

    ``B`` maps scene reflectivity to one complex measurement per rotation
    position.  The grid reference is kept so downstream consumers can map
    columns back to angles.
    """

    B: np.ndarray
    fingerprint: str
    directionality: str  # "unidirectional" | "bidirectional"
    grid: SceneGrid = field(repr=False, default=None)

    def __post_init__(self):
        if self.directionality not in ("unidirectional", "bidirectional"):
            raise ParameterError(f"unknown directionality {self.directionality!r}")
        if not np.all(np.isfinite(self.B)):
            raise NumericError("sensing matrix contains non-finite entries")

    @property
    def n_positions(self) -> int:
        return self.B.shape[0]

    @property
    def n_points(self) -> int:
        return self.B.shape[1]


def build_forward(radar: RadarConfig, grid: SceneGrid, mask: MaskGeometry,
                  rotation: RotationSampling, plane_sampling: MaskPlaneSampling,
                  directionality: str = "bidirectional",
                  transmission: Optional[MaskTransmission] = None,
                  pattern: Optional[AntennaPattern] = None,
                  include_obliquity: bool = True) -> ForwardModel:
    """Assemble the sensing matrix for the configured mask mode.

    A custom transmission map overrides the mask mode when supplied (used
    for background/open references and synthetic studies).
    """
    if directionality not in ("unidirectional", "bidirectional"):
        raise ParameterError("directionality must be 'unidirectional' or 'bidirectional'")
    if transmission is None:
        transmission = transmission_for(mask, rotation, plane_sampling)
    rx = assemble_oneway(radar, grid, mask, rotation, plane_sampling, "rx",
                         transmission, pattern=pattern,
                         include_obliquity=include_obliquity)
    if directionality == "unidirectional":
        B = rx.entries
    else:
        tx = assemble_oneway(radar, grid, mask, rotation, plane_sampling, "tx",
                             transmission, pattern=pattern,
                             include_obliquity=include_obliquity)
        B = tx.entries * rx.entries
    fp = config_fingerprint(radar, grid, mask, rotation, plane_sampling, directionality)
    return ForwardModel(B=B, fingerprint=fp, directionality=directionality, grid=grid)


@dataclass(frozen=True)
class NoiseModel:
    """Signal-independent complex Gaussian receiver noise."""

    noise_power: float = 0.0   # variance per complex measurement sample
    seed: int = 0
    kind: str = "complex-gaussian"

    def __post_init__(self):
        if self.noise_power < 0:
            raise ParameterError("noise_power must be non-negative")

    def draw(self, n: int) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        scale = math.sqrt(self.noise_power / 2.0)
        return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def noise_from_snr(model: ForwardModel, snr_db: float, seed: int = 0,
                   reference_azimuth_deg: float = 0.0) -> NoiseModel:
    """Noise power set relative to a unit-reflectivity reference target.

    The reference signal power is the mean squared magnitude of the model
    column nearest the given azimuth at elevation 0.
    """
    j = model.grid.index_of(reference_azimuth_deg, 0.0)
    sig = float(np.mean(np.abs(model.B[:, j]) ** 2))
    return NoiseModel(noise_power=sig / (10.0 ** (snr_db / 10.0)), seed=seed)


@dataclass(frozen=True)
class MeasurementSet:
    """Complex measurement vector with optional generation context."""

    y: np.ndarray
    truth: Optional[np.ndarray] = None
    rotation_rpm: Optional[float] = None
    snr_db: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.complex128))

    def __len__(self) -> int:
        return self.y.size


def simulate(model: ForwardModel, x, noise: NoiseModel,
             rotation_rpm: float = DEFAULT_ROTATION_RPM) -> MeasurementSet:
    """Simulate y = B x + n; deterministic for a fixed noise seed."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (model.n_points,):
        raise ShapeError(f"x must have length {model.n_points}, got {x.shape}")
    y = model.B @ x
    if noise.noise_power > 0:
        y = y + noise.draw(y.size)
    return MeasurementSet(y=y, truth=x, rotation_rpm=rotation_rpm)


def apply_doppler(measurements: MeasurementSet, radial_velocity_mps: float,
                  sample_interval_s: float, wavelength_m: float) -> MeasurementSet:
    """Two-way Doppler phase ramp for a radially moving scene.

    Compensation is the same call with the negated velocity; applying v then
    -v restores the input exactly.
    """
    if not math.isfinite(radial_velocity_mps):
        raise ParameterError("radial velocity must be finite")
    t = np.arange(measurements.y.size)
    ramp = np.exp(2j * math.pi * 2.0 * radial_velocity_mps * t * sample_interval_s
                  / wavelength_m)
    return replace(measurements, y=measurements.y * ramp)


def apply_blade_phase(measurements: MeasurementSet, phase_profile) -> MeasurementSet:
    """Multiply each sample by exp(i phi(t)); -phi undoes the operation."""
    phi = np.asarray(phase_profile, dtype=float)
    if phi.shape != measurements.y.shape:
        raise ShapeError("phase profile length must match the measurement vector")
    return replace(measurements, y=measurements.y * np.exp(1j * phi))


def estimate_blade_phase(y_cal: MeasurementSet, blade_count: int = 2,
                         null_rel_threshold: float = 0.5) -> np.ndarray:
    """Systematic rotation-locked phase of a calibration point target.

    Fits the unwrapped phase with harmonics of the rotation at multiples of
    the blade count up to 2 * blade_count (plus a constant), excluding
    samples inside mask-null neighborhoods where the phase is unreliable.
    Null neighborhoods are samples below ``null_rel_threshold`` of the open
    level (the 90th magnitude percentile).  The result is 2 pi / blade_count
    periodic by construction.
    """
    y = y_cal.y
    T = y.size
    mag = np.abs(y)
    open_level = float(np.quantile(mag, 0.9))
    valid = mag >= null_rel_threshold * open_level
    if np.count_nonzero(valid) <= T // 2:
        raise EstimationError("more than half of the calibration samples fall "
                              "in null neighborhoods")
    idx = np.flatnonzero(valid)
    phase = np.unwrap(np.angle(y[idx]))
    w = 2.0 * math.pi * idx / T
    harmonics = [blade_count * k for k in range(1, 3)]
    cols = [np.ones(idx.size)]
    for h in harmonics:
        cols.append(np.cos(h * w))
        cols.append(np.sin(h * w))
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, phase, rcond=None)
    wt = 2.0 * math.pi * np.arange(T) / T
    profile = np.full(T, coef[0])
    for i, h in enumerate(harmonics):
        profile += coef[1 + 2 * i] * np.cos(h * wt) + coef[2 + 2 * i] * np.sin(h * wt)
    return profile
