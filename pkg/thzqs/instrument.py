# -*- coding: utf-8 -*-
"""Synthetic camera measurements of the interferometer.

Counts are drawn for a signal and an equally sized background region of
interest.  The region is sampled as one aggregate: a sum of independent
per-pixel Poisson and Gaussian readout terms has the same distribution as a
single draw with the summed mean and variance.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from thzqs.exceptions import DomainError
from thzqs.gaussian_engine import signal_rate_closed_form
from thzqs.multimode import Interferogram

MAX_LOW_GAIN = 1.0e-2


def stage_to_path(x):
    """Idler path change for a stage displacement; the mirror is passed twice."""
    return 2.0 * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ScanConfig:
    step_m: float = 10.0e-6
    span_m: float = 6.4e-3
    start_m: float = 0.0
    zero_delay_m: float = 2.1e-3
    exposure_s: float = 0.5
    repeats: int = 30
    roi_px: tuple = (25, 10)

    def __post_init__(self):
        if not self.step_m > 0:
            raise DomainError(f"scan step must be positive, got {self.step_m}")
        if self.span_m < 0:
            raise DomainError(f"scan span must be non-negative, got {self.span_m}")
        steps = self.span_m / self.step_m
        if abs(steps - round(steps)) > 1e-6:
            raise DomainError(f"scan span {self.span_m} is not a whole number of {self.step_m} steps")
        if int(self.repeats) != self.repeats or self.repeats < 1:
            raise DomainError(f"repeats must be a positive integer, got {self.repeats}")
        if not self.exposure_s > 0:
            raise DomainError(f"exposure must be positive, got {self.exposure_s}")
        if len(self.roi_px) != 2 or min(self.roi_px) < 1:
            raise DomainError(f"region of interest must be two positive sizes, got {self.roi_px}")

    @property
    def points(self):
        return int(round(self.span_m / self.step_m)) + 1

    @property
    def roi_pixels(self):
        return int(self.roi_px[0] * self.roi_px[1])

    def positions(self):
        return self.start_m + self.step_m * np.arange(self.points)

    def delta_l(self):
        return stage_to_path(self.zero_delay_m - self.positions())

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        data = dataclasses.asdict(self)
        data["roi_px"] = list(self.roi_px)
        return data


@dataclass(frozen=True)
class NoiseModel:
    background_per_s: float = 160.0
    dark_per_s: float = 20.0
    readout_e: float = 1.0
    laser_rms: float = 0.01
    quantum_efficiency: float = 0.55
    signal_rate_per_s: float = 18.0
    shot_noise: bool = True

    def __post_init__(self):
        for name in ("background_per_s", "dark_per_s", "readout_e", "laser_rms", "signal_rate_per_s"):
            if getattr(self, name) < 0:
                raise DomainError(f"noise {name} must be non-negative, got {getattr(self, name)}")
        if self.dark_per_s > self.background_per_s:
            raise DomainError("dark rate is part of the background and cannot exceed it")
        if not 0 < self.quantum_efficiency <= 1:
            raise DomainError(f"quantum efficiency must lie in (0, 1], got {self.quantum_efficiency}")

    @classmethod
    def noiseless(cls, base=None):
        base = base or cls()
        return dataclasses.replace(base, background_per_s=0.0, dark_per_s=0.0, readout_e=0.0, laser_rms=0.0,
                                   shot_noise=False)

    @property
    def is_noiseless(self):
        return not self.shot_noise and self.readout_e == 0 and self.laser_rms == 0

    @property
    def stray_per_s(self):
        return self.background_per_s - self.dark_per_s

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class GainCurve:
    powers_w: tuple = (0.05, 0.15, 0.25, 0.35, 0.45)
    v0_per_w: float = 0.02
    reference_power_w: float = 0.45

    def __post_init__(self):
        if not self.powers_w:
            raise DomainError("gain sweep needs at least one pump power")
        if min(self.powers_w) < 0 or not self.reference_power_w > 0 or self.v0_per_w < 0:
            raise DomainError("pump powers and gain slope must be non-negative")
        if self.v0(max(max(self.powers_w), self.reference_power_w)) > MAX_LOW_GAIN:
            raise DomainError(f"pump powers leave the low-gain regime (V0 > {MAX_LOW_GAIN})")

    def v0(self, power):
        return self.v0_per_w * np.asarray(power, dtype=float)

    def to_dict(self):
        return {"powers_W": list(self.powers_w), "v0_per_W": self.v0_per_w, "reference_power_W": self.reference_power_w}


def _expose(rng, signal_pe, noise, scan):
    """Subtracted rate per pixel and second plus the raw counts of both regions."""
    pixels = scan.roi_pixels
    background = np.full(np.shape(signal_pe), pixels * noise.background_per_s * scan.exposure_s)
    laser = 1.0
    if noise.laser_rms > 0:
        laser = np.maximum(1.0 + noise.laser_rms * rng.standard_normal(), 0.0)
    expected = pixels * signal_pe * laser + background
    if noise.shot_noise:
        signal_counts = rng.poisson(expected).astype(float)
        background_counts = rng.poisson(background).astype(float)
    else:
        signal_counts, background_counts = expected, background
    if noise.readout_e > 0:
        spread = noise.readout_e * np.sqrt(pixels)
        signal_counts = np.maximum(np.rint(signal_counts + rng.normal(0.0, spread, signal_counts.shape)), 0.0)
        background_counts = np.maximum(np.rint(background_counts + rng.normal(0.0, spread, background_counts.shape)),
                                       0.0)
    rate = (signal_counts - background_counts) / (scan.exposure_s * pixels)
    return rate, signal_counts, background_counts


def _single_repeat_sigma(signal_pe, noise, scan):
    pixels = scan.roi_pixels
    background = pixels * noise.background_per_s * scan.exposure_s
    variance = 2.0 * pixels * noise.readout_e ** 2 + np.zeros(np.shape(signal_pe))
    if noise.shot_noise:
        variance = variance + pixels * signal_pe + 2.0 * background
    return np.sqrt(variance) / (scan.exposure_s * pixels)


def acquire_scan(source, scan, noise, seed=0, stream=0, kind="reference", keep_raw=False):
    """Scan the stage and return the background-subtracted, repeat-averaged signal.

    Rates are detected counts per pixel and second.  Every repeat draws from
    its own generator seeded with ``(seed, stream, repeat)``.
    """
    positions = scan.positions()
    delta_l = scan.delta_l()
    relative = source.rate(delta_l)
    signal_pe = noise.signal_rate_per_s * noise.quantum_efficiency * scan.exposure_s * relative
    rates = np.empty((scan.repeats, positions.size))
    raw = np.empty((scan.repeats, positions.size, 2)) if keep_raw else None
    for repeat in range(scan.repeats):
        rng = np.random.default_rng([seed, stream, repeat])
        rates[repeat], signal_counts, background_counts = _expose(rng, signal_pe, noise, scan)
        if keep_raw:
            raw[repeat, :, 0], raw[repeat, :, 1] = signal_counts, background_counts
    if scan.repeats > 1:
        sigma = rates.std(axis=0, ddof=1) / np.sqrt(scan.repeats)
    else:
        sigma = _single_repeat_sigma(signal_pe, noise, scan)
    metadata = source.describe()
    metadata.update({"scan": scan.to_dict(), "noise": noise.to_dict(), "seed": seed, "stream": stream, "kind": kind})
    return Interferogram(delta_l, rates.mean(axis=0), source.branch, sigma=sigma, position=positions, kind=kind,
                         metadata=metadata, raw_counts=raw)


def blocked_idler_scan(source, scan, noise, seed=0, stream=0, keep_raw=False):
    return acquire_scan(source.blocked_copy(), scan, noise, seed, stream, kind="blocked", keep_raw=keep_raw)


@dataclass
class GainSweep:
    power_w: np.ndarray
    v0: np.ndarray
    unblocked: np.ndarray
    unblocked_sigma: np.ndarray
    blocked: np.ndarray
    blocked_sigma: np.ndarray
    ratio: np.ndarray
    ratio_sigma: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    blocked_r_squared: float

    def rows(self):
        columns = ("power_w", "v0", "unblocked", "unblocked_sigma", "blocked", "blocked_sigma", "ratio", "ratio_sigma")
        return columns, np.column_stack([getattr(self, name) for name in columns])

    def to_dict(self):
        columns, table = self.rows()
        return {"columns": list(columns), "rows": table.tolist(), "slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared, "blocked_r_squared": self.blocked_r_squared}


def linear_fit(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = float(np.sum((y - np.mean(y)) ** 2))
    r_squared = 1.0 - float(np.sum(residual ** 2)) / total if total > 0 else 1.0
    return float(slope), float(intercept), r_squared


def gain_linearity_sweep(source, curve, scan, noise, seed=0, stream=0, delta_l_m=8.2e-3, measurements=500,
                         transmission=1.0):
    """Signal level against pump power with and without the idler blocked.

    The unblocked level carries the stimulated contribution of the first
    pass, so the ratio unblocked/blocked is ``1 + V0/2`` for a transparent
    object.  Both levels are normalised to the unblocked rate at the
    reference power.
    """
    if measurements < 2:
        raise DomainError("gain sweep needs at least two measurements per power")
    powers = np.asarray(curve.powers_w, dtype=float)
    delay = np.array([delta_l_m])
    open_level = float(source.rate(delay)[0])
    blocked_level = float(source.blocked_copy().rate(delay)[0])
    norm = signal_rate_closed_form(curve.v0(curve.reference_power_w), transmission, 0.0, np.pi / 4)
    single = scan.replace(repeats=1)
    means = np.empty((2, powers.size))
    errors = np.empty((2, powers.size))
    for k, power in enumerate(powers):
        v0 = float(curve.v0(power))
        for column, (level, transfer) in enumerate(((open_level, transmission), (blocked_level, 0.0))):
            relative = level * signal_rate_closed_form(v0, transfer, 0.0, np.pi / 4) / norm
            signal_pe = noise.signal_rate_per_s * noise.quantum_efficiency * scan.exposure_s * relative
            rng = np.random.default_rng([seed, stream, k, column])
            samples = np.empty(measurements)
            for m in range(measurements):
                samples[m] = _expose(rng, np.array([signal_pe]), noise, single)[0][0]
            means[column, k] = samples.mean()
            errors[column, k] = samples.std(ddof=1) / np.sqrt(measurements)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(means[1] != 0, means[0] / means[1], np.nan)
        ratio_sigma = np.abs(ratio) * np.sqrt((errors[0] / means[0]) ** 2 + (errors[1] / means[1]) ** 2)
    slope, intercept, r_squared = linear_fit(powers, means[0])
    blocked_r_squared = linear_fit(powers, means[1])[2]
    return GainSweep(powers, curve.v0(powers), means[0], errors[0], means[1], errors[1], ratio, ratio_sigma,
                     slope, intercept, r_squared, blocked_r_squared)
