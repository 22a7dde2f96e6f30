# -*- coding: utf-8 -*-
"""Extraordinary refractive index of MgO:LiNbO3 and thermal photon numbers.

The visible band uses a temperature dependent Sellmeier equation, the
terahertz band a cubic spline through a shipped table.  Both come from one
data file so the material can be swapped without touching the physics.
"""

import csv
import functools
import json
import os
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.interpolate import CubicSpline

from thzqs.constants import BOLTZMANN, MICROMETER, PLANCK, SPEED_OF_LIGHT, TERAHERTZ, ZERO_CELSIUS
from thzqs.exceptions import DomainError, FormatException, OutOfRange
from thzqs.tools import decode_error_line

DEFAULT_FILE = os.path.join(os.path.dirname(__file__), "data", "mgo_linbo3_e.txt")

# relative slack on band edges for frequencies produced by arithmetic (c/lambda etc.)
_EDGE_SLACK = 1e-9


class Band(Enum):
    VISIBLE = "visible"
    TERAHERTZ = "terahertz"


@dataclass(frozen=True)
class VisibleSellmeier:
    coefficients_a: tuple
    coefficients_b: tuple
    temperature_offsets_c: tuple
    valid_um: tuple
    source: str = ""

    def index(self, wavelength_um, temperature_k):
        a1, a2, a3, a4, a5, a6 = self.coefficients_a
        b1, b2, b3, b4 = self.coefficients_b
        t_c = temperature_k - ZERO_CELSIUS
        f = (t_c - self.temperature_offsets_c[0]) * (t_c + self.temperature_offsets_c[1])
        lam2 = wavelength_um ** 2
        n2 = (a1 + b1 * f
              + (a2 + b2 * f) / (lam2 - (a3 + b3 * f) ** 2)
              + (a4 + b4 * f) / (lam2 - a5 ** 2)
              - a6 * lam2)
        return np.sqrt(n2)


class TerahertzTable:

    def __init__(self, frequencies_thz, indices, reference_temperature_k, thermo_optic_per_k=0.0, valid_thz=None):
        frequencies_thz = np.asarray(frequencies_thz, dtype=float)
        indices = np.asarray(indices, dtype=float)
        if frequencies_thz.size < 4 or np.any(np.diff(frequencies_thz) <= 0):
            raise DomainError("terahertz table needs at least 4 strictly increasing frequencies")
        self.frequencies_thz = frequencies_thz
        self.indices = indices
        self.reference_temperature_k = float(reference_temperature_k)
        self.thermo_optic_per_k = float(thermo_optic_per_k)
        self.valid_thz = tuple(valid_thz) if valid_thz else (frequencies_thz[0], frequencies_thz[-1])
        self._spline = CubicSpline(frequencies_thz, indices, bc_type="not-a-knot", extrapolate=False)

    def index(self, frequency_thz, temperature_k):
        shift = self.thermo_optic_per_k * (temperature_k - self.reference_temperature_k)
        return self._spline(frequency_thz) + shift


class DispersionModel:
    """Immutable index provider; safe to share between threads."""

    def __init__(self, visible, terahertz, source=""):
        self._visible = visible
        self._terahertz = terahertz
        self.source = source

    @classmethod
    def from_file(cls, path):
        header_lines, rows = [], []
        try:
            with open(path, encoding="utf-8") as file_desc:
                lines = file_desc.read().splitlines()
        except UnicodeDecodeError as err:
            raise FormatException(path, decode_error_line(err), "file", f"not valid UTF-8 ({err.reason})") from err
        body_start = 0
        for number, line in enumerate(lines):
            if line.startswith("#"):
                header_lines.append(line[1:])
                continue
            body_start = number
            break
        try:
            header = json.loads("\n".join(header_lines))
        except json.JSONDecodeError as err:
            raise FormatException(path, err.lineno, "header", f"invalid JSON header ({err.msg})") from err
        reader = csv.reader(lines[body_start:])
        columns = next(reader, None)
        if columns != ["frequency_THz", "n_e"]:
            raise FormatException(path, body_start + 1, "header", "expected 'frequency_THz,n_e'")
        for offset, row in enumerate(reader, start=body_start + 2):
            if not row:
                continue
            if len(row) != 2:
                raise FormatException(path, offset, "n_e", f"expected 2 fields, got {len(row)}")
            parsed = []
            for column, value in zip(columns, row):
                try:
                    parsed.append(float(value))
                except ValueError as err:
                    raise FormatException(path, offset, column, f"not a number: {value!r}") from err
            rows.append(parsed)
        if not rows:
            raise FormatException(path, body_start + 2, "frequency_THz", "no data rows")
        table = np.array(rows)
        try:
            vis = header["visible"]
            visible = VisibleSellmeier(tuple(vis["coefficients_a"]), tuple(vis["coefficients_b"]),
                                       tuple(vis["temperature_offsets_C"]), tuple(vis["valid_um"]),
                                       vis.get("source", ""))
            terahertz = TerahertzTable(table[:, 0], table[:, 1], header["reference_temperature_K"],
                                       header.get("thermo_optic_per_K", 0.0), header.get("valid_THz"))
        except KeyError as err:
            raise FormatException(path, 1, "header", f"missing key {err}") from err
        return cls(visible, terahertz, header.get("source", ""))

    @classmethod
    @functools.lru_cache(maxsize=None)
    def default(cls):
        return cls.from_file(DEFAULT_FILE)

    def valid_range(self, band):
        band = Band(band)
        if band is Band.VISIBLE:
            lo_um, hi_um = self._visible.valid_um
            return SPEED_OF_LIGHT / (hi_um * MICROMETER), SPEED_OF_LIGHT / (lo_um * MICROMETER)
        lo_thz, hi_thz = self._terahertz.valid_thz
        return lo_thz * TERAHERTZ, hi_thz * TERAHERTZ

    def _check_range(self, band, frequency):
        lo, hi = self.valid_range(band)
        bad = (frequency < lo * (1 - _EDGE_SLACK)) | (frequency > hi * (1 + _EDGE_SLACK)) | ~np.isfinite(frequency)
        if np.any(bad):
            raise OutOfRange(band.value, float(np.asarray(frequency)[bad].flat[0]), (lo, hi))

    def n_e(self, band, frequency, temperature):
        band = Band(band)
        nu = np.asarray(frequency, dtype=float)
        self._check_range(band, nu)
        if band is Band.VISIBLE:
            lo, hi = self.valid_range(band)
            nu = np.clip(nu, lo, hi)
            index = self._visible.index(SPEED_OF_LIGHT / nu / MICROMETER, temperature)
        else:
            lo, hi = self.valid_range(band)
            index = self._terahertz.index(np.clip(nu, lo, hi) / TERAHERTZ, temperature)
        return float(index) if np.ndim(index) == 0 else index

    def wavenumber(self, band, frequency, temperature):
        nu = np.asarray(frequency, dtype=float)
        return 2.0 * np.pi * nu * self.n_e(band, nu, temperature) / SPEED_OF_LIGHT

    def group_index(self, band, frequency, temperature, relative_step=1e-6):
        nu = np.asarray(frequency, dtype=float)
        step = nu * relative_step
        dn = (self.n_e(band, nu + step, temperature) - self.n_e(band, nu - step, temperature)) / (2.0 * step)
        return self.n_e(band, nu, temperature) + nu * dn

    def critical_angle(self, frequency, temperature):
        """Total internal reflection angle of the idler inside the crystal."""
        return np.arcsin(1.0 / self.n_e(Band.TERAHERTZ, frequency, temperature))


def thermal_occupation(frequency, temperature):
    nu = np.asarray(frequency, dtype=float)
    temp = np.asarray(temperature, dtype=float)
    if np.any(nu <= 0):
        raise DomainError("thermal occupation needs a positive frequency")
    if np.any(temp < 0):
        raise DomainError("thermal occupation needs a non-negative temperature")
    with np.errstate(divide="ignore", over="ignore"):
        ratio = np.where(temp > 0, PLANCK * nu / (BOLTZMANN * np.where(temp > 0, temp, 1.0)), np.inf)
        # exactly 0 once exp(-x) underflows
        occupation = np.exp(-ratio) / -np.expm1(-ratio)
    return float(occupation) if np.ndim(occupation) == 0 else occupation


@dataclass(frozen=True)
class ThermalField:
    frequency: float
    temperature: float

    @property
    def occupation(self):
        return thermal_occupation(self.frequency, self.temperature)
