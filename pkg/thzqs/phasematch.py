# -*- coding: utf-8 -*-
"""Quasi-phase-matching of the pump, signal and terahertz idler waves.

Every branch is reduced to one sign ``q``: +1 for Stokes generation with a
forward idler, -1 for Anti-Stokes forward, and the opposite values for
backward idlers.  The same sign multiplies the idler wavenumber and the
poling vector, so a single mismatch expression covers all four branches.
"""

import dataclasses
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import optimize

from thzqs.constants import SPEED_OF_LIGHT, TERAHERTZ
from thzqs.dispersion import Band, DispersionModel, thermal_occupation
from thzqs.exceptions import DomainError, NoRoot

PARAXIAL_LIMIT = 0.35
SCAN_STEP = 0.01 * TERAHERTZ


class Conversion(Enum):
    STOKES = "stokes"
    ANTI_STOKES = "antistokes"

    @property
    def sign(self):
        return 1 if self is Conversion.STOKES else -1


class Direction(Enum):
    FORWARD = "forward"
    BACKWARD = "backward"

    @property
    def sign(self):
        return 1 if self is Direction.FORWARD else -1


@dataclass(frozen=True)
class ProcessBranch:
    conversion: Conversion = Conversion.STOKES
    direction: Direction = Direction.FORWARD

    @classmethod
    def parse(cls, label):
        conversion, _, direction = label.strip().lower().partition("-")
        try:
            return cls(Conversion(conversion), Direction(direction or "forward"))
        except ValueError as err:
            raise DomainError(f"unknown process branch '{label}'") from err

    @property
    def label(self):
        return f"{self.conversion.value}-{self.direction.value}"

    @property
    def sign(self):
        return self.conversion.sign * self.direction.sign

    def signal_frequency(self, pump_frequency, idler_frequency):
        return pump_frequency - self.conversion.sign * np.asarray(idler_frequency)

    def thermal_weight(self, idler_frequency, temperature):
        occupation = thermal_occupation(idler_frequency, temperature)
        return occupation + 1.0 if self.conversion is Conversion.STOKES else occupation

    def __str__(self):
        return self.label


STOKES_FORWARD = ProcessBranch(Conversion.STOKES, Direction.FORWARD)
STOKES_BACKWARD = ProcessBranch(Conversion.STOKES, Direction.BACKWARD)
ANTI_STOKES_FORWARD = ProcessBranch(Conversion.ANTI_STOKES, Direction.FORWARD)
ANTI_STOKES_BACKWARD = ProcessBranch(Conversion.ANTI_STOKES, Direction.BACKWARD)


@dataclass(frozen=True)
class CrystalParams:
    length_m: float = 1.0e-3
    poling_period_m: float = 90.0e-6
    pump_wavelength_m: float = 659.58e-9
    pump_waist_m: float = 60.0e-6
    temperature_k: float = 293.0

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if field.name == "temperature_k" and value == 0:
                continue
            if not value > 0:
                raise DomainError(f"crystal {field.name} must be positive, got {value}")

    @property
    def pump_frequency(self):
        return SPEED_OF_LIGHT / self.pump_wavelength_m

    @property
    def poling_wavenumber(self):
        return 2.0 * np.pi / self.poling_period_m

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)


class PhaseMatcher:
    """Mismatch, roots and angular spectrum for one crystal."""

    def __init__(self, crystal=None, dispersion=None):
        self.crystal = crystal or CrystalParams()
        self.dispersion = dispersion or DispersionModel.default()
        lo, hi = self.dispersion.valid_range(Band.VISIBLE)
        if not lo <= self.crystal.pump_frequency <= hi:
            raise DomainError(f"pump wavelength {self.crystal.pump_wavelength_m:.6g} m outside the visible band")

    def _wavenumbers(self, branch, nu_i):
        temperature = self.crystal.temperature_k
        nu_p = self.crystal.pump_frequency
        k_p = self.dispersion.wavenumber(Band.VISIBLE, nu_p, temperature)
        k_s = self.dispersion.wavenumber(Band.VISIBLE, branch.signal_frequency(nu_p, nu_i), temperature)
        k_i = self.dispersion.wavenumber(Band.TERAHERTZ, nu_i, temperature)
        return k_p, k_s, k_i

    def delta_kz(self, branch, nu_i, theta_s=0.0, theta_i=0.0):
        theta_s = np.asarray(theta_s, dtype=float)
        theta_i = np.asarray(theta_i, dtype=float)
        if np.any(np.abs(theta_s) >= PARAXIAL_LIMIT) or np.any(np.abs(theta_i) >= PARAXIAL_LIMIT):
            raise DomainError(f"angles must stay below {PARAXIAL_LIMIT} rad for the paraxial mismatch")
        k_p, k_s, k_i = self._wavenumbers(branch, nu_i)
        q = branch.sign
        return (k_p - k_s * (1.0 - 0.5 * theta_s ** 2) - q * k_i * (1.0 - 0.5 * theta_i ** 2)
                + q * self.crystal.poling_wavenumber)

    def delta_kz_exact(self, branch, nu_i, theta_s, theta_i):
        k_p, k_s, k_i = self._wavenumbers(branch, nu_i)
        q = branch.sign
        return k_p - k_s * np.cos(theta_s) - q * k_i * np.cos(theta_i) + q * self.crystal.poling_wavenumber

    def matched_idler_angle(self, branch, nu_i, theta_s):
        """Idler angle with k_s sin(theta_s) = k_i sin(theta_i); NaN where no real angle exists."""
        _, k_s, k_i = self._wavenumbers(branch, nu_i)
        ratio = k_s * np.sin(theta_s) / k_i
        with np.errstate(invalid="ignore"):
            return np.where(np.abs(ratio) <= 1.0, np.arcsin(np.clip(ratio, -1.0, 1.0)), np.nan)

    def phase_matched_frequency(self, branch, theta_s=0.0, theta_i=0.0, window=None, tolerance=1.0e-4 * TERAHERTZ):
        lo, hi = window or self.dispersion.valid_range(Band.TERAHERTZ)
        grid = np.linspace(lo, hi, max(int(np.ceil((hi - lo) / SCAN_STEP)) + 1, 3))
        mismatch = self.delta_kz(branch, grid, theta_s, theta_i)
        exact = np.flatnonzero(mismatch == 0.0)
        if exact.size:
            return float(grid[exact[0]])
        changes = np.flatnonzero(np.sign(mismatch[:-1]) != np.sign(mismatch[1:]))
        if not changes.size:
            raise NoRoot(f"no phase-matched idler for {branch.label}", (lo, hi))
        left, right = grid[changes[0]], grid[changes[0] + 1]
        return float(optimize.bisect(lambda nu: float(self.delta_kz(branch, nu, theta_s, theta_i)),
                                     left, right, xtol=tolerance))

    def collinear_frequency(self, branch, window=None, tolerance=1.0e-4 * TERAHERTZ):
        return self.phase_matched_frequency(branch, 0.0, 0.0, window, tolerance)

    def sinc_lobe_width(self, branch, frequency=None):
        """Idler frequency span of one 2*pi step of the mismatch phase across the crystal."""
        if frequency is None:
            frequency = self.collinear_frequency(branch, tolerance=1.0e-7 * TERAHERTZ)
        step = 1.0e-4 * frequency
        slope = (self.delta_kz(branch, frequency + step) - self.delta_kz(branch, frequency - step)) / (2.0 * step)
        return float(2.0 * np.pi / (self.crystal.length_m * abs(slope)))

    def spectrum_map(self, branches, nu_grid, theta_s_grid):
        nu_grid = np.asarray(nu_grid, dtype=float)
        theta_s_grid = np.asarray(theta_s_grid, dtype=float)
        nu, theta_s = np.meshgrid(nu_grid, theta_s_grid)
        sheets = {}
        for branch in branches:
            theta_i = self.matched_idler_angle(branch, nu, theta_s)
            real = np.isfinite(theta_i)
            mismatch = self.delta_kz_exact(branch, nu, theta_s, np.where(real, theta_i, 0.0))
            weight = branch.thermal_weight(nu, self.crystal.temperature_k)
            intensity = weight * np.sinc(mismatch * self.crystal.length_m / (2.0 * np.pi)) ** 2
            sheets[branch] = np.where(real, intensity, 0.0)
        return SpectrumMap(nu_grid, theta_s_grid, sheets, self.crystal,
                           self.dispersion.n_e(Band.VISIBLE, self.crystal.pump_frequency, self.crystal.temperature_k))


@dataclass
class SpectrumMap:
    frequencies: np.ndarray
    theta_s: np.ndarray
    sheets: dict
    crystal: CrystalParams
    signal_index: float

    @property
    def intensity(self):
        return sum(self.sheets.values(), np.zeros((self.theta_s.size, self.frequencies.size)))

    def external_theta_deg(self):
        return np.degrees(np.arcsin(np.clip(self.signal_index * np.sin(self.theta_s), -1.0, 1.0)))

    def total(self, conversion):
        return sum(float(np.sum(sheet)) for branch, sheet in self.sheets.items() if branch.conversion is conversion)

    def signed_shift(self):
        """Frequency-shift axis in THz with Stokes negative, plus the matching combined matrix."""
        shifts, blocks = [], []
        for conversion in (Conversion.STOKES, Conversion.ANTI_STOKES):
            parts = [sheet for branch, sheet in self.sheets.items() if branch.conversion is conversion]
            if not parts:
                continue
            block = sum(parts, np.zeros_like(parts[0]))
            if conversion is Conversion.STOKES:
                shifts.append(-self.frequencies[::-1] / TERAHERTZ)
                blocks.append(block[:, ::-1])
            else:
                shifts.append(self.frequencies / TERAHERTZ)
                blocks.append(block)
        return np.concatenate(shifts), np.concatenate(blocks, axis=1)
