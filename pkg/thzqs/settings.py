# -*- coding: utf-8 -*-
"""Strict schema for run configurations.

Every key is typed and unit-suffixed; unknown keys, wrong types and values
the physics rejects are reported with their dotted key path.
"""

from dataclasses import dataclass

import numpy as np

from thzqs.constants import SPEED_OF_LIGHT
from thzqs.dispersion import Band, DispersionModel
from thzqs.exceptions import ConfigException, DomainError, FormatException
from thzqs.instrument import GainCurve, NoiseModel, ScanConfig
from thzqs.multimode import ApertureModel, QuadratureSpec
from thzqs.phasematch import CrystalParams, ProcessBranch

NUMBER = "number"
INTEGER = "integer"
BOOLEAN = "boolean"
STRING = "string"


def list_of(kind):
    return ("list", kind)


def optional(kind):
    return ("optional", kind)


SCHEMA = {
    "crystal": {"length_m": NUMBER, "poling_period_m": NUMBER, "pump_wavelength_m": NUMBER,
                "pump_waist_m": NUMBER, "temperature_K": NUMBER},
    "dispersion_file": STRING,
    "branches": list_of(STRING),
    "aperture": {"theta_max_deg": NUMBER, "tir_cap_deg": optional(NUMBER)},
    "quadrature": {"nu_panels": INTEGER, "nu_order": INTEGER, "theta_order": INTEGER, "lobes": NUMBER,
                   "rtol": NUMBER, "check": BOOLEAN},
    "scan": {"step_m": NUMBER, "span_m": NUMBER, "start_m": NUMBER, "zero_delay_m": NUMBER, "exposure_s": NUMBER,
             "repeats": INTEGER, "roi_px": list_of(INTEGER)},
    "noise": {"background_per_s": NUMBER, "dark_per_s": NUMBER, "readout_e": NUMBER, "laser_rms": NUMBER,
              "quantum_efficiency": NUMBER, "signal_rate_per_s": NUMBER, "shot_noise": BOOLEAN},
    "object": {"index": NUMBER, "index_sigma": NUMBER, "thickness_m": NUMBER, "fresnel": BOOLEAN,
               "phase0_rad": NUMBER},
    "spectrum": {"min_THz": NUMBER, "max_THz": NUMBER, "points": INTEGER, "theta_s_max_deg": NUMBER,
                 "theta_points": INTEGER, "format": STRING},
    "gain": {"powers_W": list_of(NUMBER), "v0_per_W": NUMBER, "reference_power_W": NUMBER, "delta_l_m": NUMBER,
             "measurements": INTEGER},
    "seed": INTEGER,
    "output_dir": STRING,
    "plots": BOOLEAN,
}

FORMATS = ("csv", "json")


def _check(value, kind, path):
    if isinstance(kind, dict):
        if not isinstance(value, dict):
            raise ConfigException(path, "expected an object")
        unknown = sorted(set(value) - set(kind))
        if unknown:
            raise ConfigException(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")
        for key, sub_kind in kind.items():
            sub_path = f"{path}.{key}" if path else key
            if key not in value:
                raise ConfigException(sub_path, "missing key")
            _check(value[key], sub_kind, sub_path)
        return
    if isinstance(kind, tuple):
        wrapper, inner = kind
        if wrapper == "optional":
            if value is not None:
                _check(value, inner, path)
            return
        if not isinstance(value, list):
            raise ConfigException(path, "expected a list")
        for position, item in enumerate(value):
            _check(item, inner, f"{path}[{position}]")
        return
    valid = {
        NUMBER: isinstance(value, (int, float)) and not isinstance(value, bool) and np.isfinite(value),
        INTEGER: isinstance(value, int) and not isinstance(value, bool),
        BOOLEAN: isinstance(value, bool),
        STRING: isinstance(value, str),
    }[kind]
    if not valid:
        raise ConfigException(path, f"expected a {kind}, got {value!r}")


@dataclass(frozen=True)
class RunConfig:
    crystal: CrystalParams
    dispersion_file: str
    dispersion: DispersionModel
    branches: tuple
    aperture: ApertureModel
    quadrature: QuadratureSpec
    scan: ScanConfig
    noise: NoiseModel
    object: dict
    spectrum: dict
    gain: GainCurve
    gain_delta_l_m: float
    gain_measurements: int
    seed: int
    output_dir: str
    plots: bool
    document: dict


def _build(section, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except DomainError as err:
        raise ConfigException(section, str(err)) from err


def _load_dispersion(path, crystal):
    try:
        dispersion = DispersionModel.from_file(path) if path else DispersionModel.default()
    except OSError as err:
        raise ConfigException("dispersion_file", f"cannot read {path}: {err.strerror}") from err
    except (FormatException, DomainError) as err:
        raise ConfigException("dispersion_file", str(err)) from err
    lo, hi = dispersion.valid_range(Band.VISIBLE)
    if not lo <= crystal.pump_frequency <= hi:
        raise ConfigException("crystal.pump_wavelength_m",
                              f"{crystal.pump_wavelength_m:.6g} m is outside the visible band of the index model "
                              f"({SPEED_OF_LIGHT / hi:.4g}..{SPEED_OF_LIGHT / lo:.4g} m)")
    return dispersion


def validate(document):
    """Check a merged configuration document and build the typed run configuration."""
    _check(document, SCHEMA, "")
    crystal_doc = document["crystal"]
    crystal = _build("crystal", CrystalParams, crystal_doc["length_m"], crystal_doc["poling_period_m"],
                     crystal_doc["pump_wavelength_m"], crystal_doc["pump_waist_m"], crystal_doc["temperature_K"])
    dispersion = _load_dispersion(document["dispersion_file"], crystal)
    if not document["branches"]:
        raise ConfigException("branches", "at least one branch is required")
    branches = tuple(_build(f"branches[{k}]", ProcessBranch.parse, label)
                     for k, label in enumerate(document["branches"]))
    if len(set(branches)) != len(branches):
        raise ConfigException("branches", "duplicate branch")
    aperture_doc = document["aperture"]
    cap = aperture_doc["tir_cap_deg"]
    aperture = _build("aperture", ApertureModel, np.radians(aperture_doc["theta_max_deg"]),
                      None if cap is None else np.radians(cap))
    quadrature = _build("quadrature", QuadratureSpec, **document["quadrature"])
    scan_doc = dict(document["scan"])
    if len(scan_doc["roi_px"]) != 2:
        raise ConfigException("scan.roi_px", "expected two sizes")
    scan_doc["roi_px"] = tuple(scan_doc["roi_px"])
    scan = _build("scan", ScanConfig, **scan_doc)
    noise = _build("noise", NoiseModel, **document["noise"])
    obj = dict(document["object"])
    if not obj["index"] > 1.0:
        raise ConfigException("object.index", "must exceed 1")
    if obj["index_sigma"] < 0 or obj["thickness_m"] < 0:
        raise ConfigException("object", "index_sigma and thickness_m must be non-negative")
    spectrum = dict(document["spectrum"])
    if not 0 < spectrum["min_THz"] < spectrum["max_THz"]:
        raise ConfigException("spectrum.min_THz", "expected 0 < min_THz < max_THz")
    if spectrum["points"] < 2 or spectrum["theta_points"] < 2:
        raise ConfigException("spectrum.points", "grids need at least two points")
    if spectrum["format"] not in FORMATS:
        raise ConfigException("spectrum.format", f"expected one of {', '.join(FORMATS)}")
    gain_doc = document["gain"]
    if not gain_doc["powers_W"]:
        raise ConfigException("gain.powers_W", "at least one pump power is required")
    if gain_doc["measurements"] < 2:
        raise ConfigException("gain.measurements", "at least two measurements are required")
    gain = _build("gain", GainCurve, tuple(gain_doc["powers_W"]), gain_doc["v0_per_W"],
                  gain_doc["reference_power_W"])
    if document["seed"] < 0:
        raise ConfigException("seed", "must be non-negative")
    if not document["output_dir"]:
        raise ConfigException("output_dir", "must not be empty")
    return RunConfig(crystal, document["dispersion_file"], dispersion, branches, aperture, quadrature, scan, noise, obj,
                     spectrum, gain, gain_doc["delta_l_m"], gain_doc["measurements"], document["seed"],
                     document["output_dir"], document["plots"], document)
