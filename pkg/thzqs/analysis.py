# -*- coding: utf-8 -*-
"""Interferogram analysis: spectral peak, envelope fit and plate thickness.

Fits run in the stage coordinate ``x``.  The envelope model is

    f(x) = y0 + A sin(v x + phi) exp(-(x - xc)**2 / (2 w**2))

with ``v`` in radians per metre of stage travel.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, signal

from thzqs.constants import SPEED_OF_LIGHT
from thzqs.exceptions import (BranchMismatch, DomainError, EnvelopeAtEdge, NonUniformGrid, NotConverged,
                              ThzqsException, TooShort)
from thzqs.fitting import LevenbergMarquardt

PARAMETERS = ("offset", "amplitude", "frequency", "phase", "center", "width")
OFFSET, AMPLITUDE, FREQUENCY, PHASE, CENTER, WIDTH = range(len(PARAMETERS))
STAGE_SCALE = 1.0e-3
MIN_POINTS = 64
LOW_VISIBILITY_SIGNIFICANCE = 3.0
PHASE_GRID = 64


def envelope_model(x, params):
    y0, amplitude, v, phi, xc, width = params
    return y0 + amplitude * np.sin(v * x + phi) * np.exp(-(x - xc) ** 2 / (2.0 * width ** 2))


def envelope_jacobian(x, params):
    _, amplitude, v, phi, xc, width = params
    envelope = np.exp(-(x - xc) ** 2 / (2.0 * width ** 2))
    sine, cosine = np.sin(v * x + phi), np.cos(v * x + phi)
    offset = x - xc
    return np.column_stack([
        np.ones_like(x),
        sine * envelope,
        amplitude * cosine * x * envelope,
        amplitude * cosine * envelope,
        amplitude * sine * envelope * offset / width ** 2,
        amplitude * sine * envelope * offset ** 2 / width ** 3,
    ])


def stage_axis(interferogram):
    if interferogram.position is not None:
        return interferogram.position
    return -0.5 * interferogram.delta_l


@dataclass
class FFTPeak:
    cycles_per_m: float
    frequency_hz: float
    amplitude: float
    noise_floor: float
    significance: float

    def to_dict(self):
        return {"cycles_per_m": self.cycles_per_m, "frequency_THz": self.frequency_hz / 1e12,
                "amplitude": self.amplitude, "noise_floor": self.noise_floor, "significance": self.significance}


def _parabolic_peak(left, centre, right):
    """Vertex offset and height of the parabola through three equally spaced samples."""
    curvature = 2.0 * centre - left - right
    if curvature == 0:
        return 0.0, centre
    offset = (right - left) / (2.0 * curvature)
    return offset, centre - 0.25 * (left - right) * offset


def fft_peak(interferogram, window="hann", band=None):
    path = interferogram.delta_l
    if path.size < MIN_POINTS:
        raise TooShort(f"spectral peak needs at least {MIN_POINTS} points, got {path.size}")
    steps = np.diff(path)
    if steps[0] == 0 or np.any(np.abs(steps - steps[0]) > 1e-6 * abs(steps[0])):
        raise NonUniformGrid("path-length grid is not uniform")
    spacing = abs(steps[0])
    trace = interferogram.rate - np.mean(interferogram.rate)
    if window:
        trace = trace * signal.get_window(window, trace.size)
    magnitude = np.abs(np.fft.rfft(trace))[1:]
    cycles = np.fft.rfftfreq(path.size, spacing)[1:]
    candidates = np.arange(magnitude.size)
    if band is not None:
        candidates = np.flatnonzero((cycles >= band[0] / SPEED_OF_LIGHT) & (cycles <= band[1] / SPEED_OF_LIGHT))
        if not candidates.size:
            raise DomainError(f"search band {band[0]:.4g}..{band[1]:.4g} Hz holds no frequency bin")
    k = int(candidates[np.argmax(magnitude[candidates])])
    offset, height = 0.0, float(magnitude[k])
    if 0 < k < magnitude.size - 1:
        offset, height = _parabolic_peak(magnitude[k - 1], magnitude[k], magnitude[k + 1])
    fringe = cycles[k] + offset * (cycles[1] - cycles[0])
    floor = float(np.median(magnitude))
    if floor > 0:
        significance = height / floor
    else:
        significance = 1.0 if height == 0 else np.inf
    return FFTPeak(float(fringe), float(fringe * SPEED_OF_LIGHT), float(height), floor, float(significance))


@dataclass
class InitialGuess:
    params: np.ndarray
    peak: FFTPeak
    low_visibility: bool


def _weighted_moments(x, weights):
    total = float(np.sum(weights))
    centre = float(np.sum(x * weights) / total)
    return centre, float(np.sqrt(np.sum((x - centre) ** 2 * weights) / total))


def initialize_fit(interferogram):
    x = stage_axis(interferogram)
    y = interferogram.rate
    peak = fft_peak(interferogram)
    y0 = float(np.median(y))
    detrended = y - y0
    v = 4.0 * np.pi * peak.cycles_per_m
    step = abs(x[1] - x[0])
    period = int(max(1, round(2.0 * np.pi / v / step))) if v > 0 else 1
    profile = np.convolve(detrended ** 2, np.ones(period) / period, mode="same")
    profile = np.clip(profile - np.median(profile), 0.0, None)
    top = int(np.argmax(profile))
    # zero padding of the smoothing pulls a truncated envelope up to half a period inwards
    if top < period or top > x.size - 1 - period:
        raise EnvelopeAtEdge(f"envelope maximum at the scan end (x = {x[top]:.6g} m)")
    if np.sum(profile) > 0:
        centre, spread = _weighted_moments(x, profile)
        core = np.abs(x - centre) <= 3.0 * spread
        if np.sum(profile[core]) > 0:
            centre, spread = _weighted_moments(x[core], profile[core])
        width = np.sqrt(2.0) * spread
    else:
        centre, width = float(np.mean(x)), 0.25 * float(np.ptp(x))
    width = max(width, step)
    core = np.abs(x - centre) <= 0.5 * width
    if np.count_nonzero(core) < 3:
        core = np.argsort(np.abs(x - centre))[:max(3, 3 * period)]
    amplitude = 0.5 * float(np.percentile(detrended[core], 95) - np.percentile(detrended[core], 5))
    phases = np.linspace(0.0, 2.0 * np.pi, PHASE_GRID, endpoint=False)
    costs = [np.sum((envelope_model(x, (y0, amplitude, v, phi, centre, width)) - y) ** 2) for phi in phases]
    params = np.array([y0, amplitude, v, phases[int(np.argmin(costs))], centre, width])
    return InitialGuess(params, peak, peak.significance < LOW_VISIBILITY_SIGNIFICANCE)


@dataclass
class FitResult:
    params: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    reduced_chi2: float
    branch: object
    converged: bool = True
    trace: list = field(default_factory=list)
    fixed: tuple = ()
    low_visibility: bool = False

    @property
    def offset(self):
        return float(self.params[OFFSET])

    @property
    def amplitude(self):
        return float(self.params[AMPLITUDE])

    @property
    def frequency(self):
        return float(self.params[FREQUENCY])

    @property
    def phase(self):
        return float(self.params[PHASE])

    @property
    def center(self):
        return float(self.params[CENTER])

    @property
    def width(self):
        return float(self.params[WIDTH])

    def sigma(self, name):
        index = PARAMETERS.index(name)
        return float(np.sqrt(max(self.covariance[index, index], 0.0)))

    @property
    def visibility(self):
        return self.amplitude / self.offset if self.offset else np.inf

    def to_dict(self):
        return {"params": {name: float(value) for name, value in zip(PARAMETERS, self.params)},
                "sigma": {name: self.sigma(name) for name in PARAMETERS},
                "covariance": self.covariance.tolist(), "residual_norm": self.residual_norm,
                "reduced_chi2": self.reduced_chi2, "converged": self.converged, "iterations": len(self.trace) - 1,
                "fixed": list(self.fixed), "visibility": self.visibility, "low_visibility": self.low_visibility,
                "branch": str(self.branch)}


def _to_internal(params, x_ref):
    y0, amplitude, v, phi, xc, width = params
    return np.array([y0, amplitude, v * STAGE_SCALE, phi + v * x_ref, (xc - x_ref) / STAGE_SCALE,
                     width / STAGE_SCALE])


def _from_internal(internal, x_ref):
    y0, amplitude, v, phi, xc, width = internal
    return np.array([y0, amplitude, v / STAGE_SCALE, phi - v * x_ref / STAGE_SCALE, x_ref + STAGE_SCALE * xc,
                     STAGE_SCALE * width])


def _internal_transform(x_ref):
    transform = np.eye(len(PARAMETERS))
    transform[FREQUENCY, FREQUENCY] = 1.0 / STAGE_SCALE
    transform[PHASE, FREQUENCY] = -x_ref / STAGE_SCALE
    transform[CENTER, CENTER] = STAGE_SCALE
    transform[WIDTH, WIDTH] = STAGE_SCALE
    return transform


def fit_envelope(interferogram, init=None, fixed=()):
    """Weighted Levenberg-Marquardt fit of the envelope model.

    ``init`` may be a full parameter vector or a mapping of parameter names
    to starting values overriding the automatic initialisation; parameters
    named in ``fixed`` keep their starting value.
    """
    guess = None
    if init is None or isinstance(init, dict):
        guess = initialize_fit(interferogram)
        start = guess.params.copy()
        for name, value in (init or {}).items():
            start[PARAMETERS.index(name)] = value
    else:
        start = np.asarray(init, dtype=float).copy()
    unknown = set(fixed) - set(PARAMETERS)
    if unknown:
        raise DomainError(f"unknown fit parameters {sorted(unknown)}")
    free = np.array([name not in fixed for name in PARAMETERS])
    x = stage_axis(interferogram)
    y = interferogram.rate
    sigma = interferogram.sigma if np.all(interferogram.sigma > 0) else np.ones_like(y)
    x_ref = float(start[CENTER])
    local = (x - x_ref) / STAGE_SCALE
    base = _to_internal(start, x_ref)

    def expand(values):
        full = base.copy()
        full[free] = values
        return full

    def residuals(values):
        return (envelope_model(local, expand(values)) - y) / sigma

    def jacobian(values):
        return envelope_jacobian(local, expand(values))[:, free] / sigma[:, None]

    outcome = LevenbergMarquardt(residuals, jacobian).solve(base[free])
    dof = max(y.size - int(np.count_nonzero(free)), 1)
    reduced_chi2 = outcome.cost / dof
    internal_cov = np.zeros((len(PARAMETERS), len(PARAMETERS)))
    internal_cov[np.ix_(free, free)] = linalg.pinvh(outcome.jacobian.T @ outcome.jacobian) * reduced_chi2
    transform = _internal_transform(x_ref)
    covariance = transform @ internal_cov @ transform.T
    params = _from_internal(expand(outcome.params), x_ref)
    for index in (AMPLITUDE, WIDTH):
        if params[index] < 0:
            params[index] = -params[index]
            covariance[index, :] *= -1.0
            covariance[:, index] *= -1.0
            if index == AMPLITUDE:
                params[PHASE] += np.pi
    params[PHASE] = np.mod(params[PHASE], 2.0 * np.pi)
    covariance = 0.5 * (covariance + covariance.T)
    return FitResult(params, covariance, float(np.sqrt(outcome.cost)), float(reduced_chi2), interferogram.branch,
                     outcome.converged, outcome.trace, tuple(fixed), bool(guess and guess.low_visibility))


@dataclass
class ThicknessEstimate:
    thickness_m: float
    sigma_m: float
    shift_m: float
    shift_sigma_m: float
    index: float
    index_sigma: float
    branch: object

    @property
    def negative(self):
        return self.thickness_m < 0

    def to_dict(self):
        return {"thickness_m": self.thickness_m, "sigma_m": self.sigma_m, "shift_m": self.shift_m,
                "shift_sigma_m": self.shift_sigma_m, "index": self.index, "index_sigma": self.index_sigma,
                "branch": str(self.branch), "negative": self.negative}


def thickness_from_shift(reference, sample, index, index_sigma=0.0):
    if str(reference.branch) != str(sample.branch):
        raise BranchMismatch(f"reference fit is {reference.branch}, sample fit is {sample.branch}")
    if not (reference.converged and sample.converged):
        raise NotConverged("thickness needs two converged envelope fits")
    if not index > 1.0:
        raise DomainError(f"plate index must exceed 1, got {index}")
    shift = sample.center - reference.center
    shift_sigma = float(np.hypot(reference.sigma("center"), sample.sigma("center")))
    excess = index - 1.0
    thickness = shift / excess
    sigma = float(np.hypot(shift_sigma / excess, shift * index_sigma / excess ** 2))
    return ThicknessEstimate(float(thickness), sigma, float(shift), shift_sigma, index, index_sigma, reference.branch)


def combine_estimates(estimates):
    """Inverse-variance mean of several thickness estimates."""
    values = np.array([estimate.thickness_m for estimate in estimates])
    sigmas = np.array([estimate.sigma_m for estimate in estimates])
    if not values.size:
        raise DomainError("no thickness estimates to combine")
    if np.any(sigmas <= 0):
        return float(np.mean(values)), 0.0
    weights = 1.0 / sigmas ** 2
    return float(np.sum(weights * values) / np.sum(weights)), float(1.0 / np.sqrt(np.sum(weights)))


@dataclass
class BranchAnalysis:
    branch: object
    reference_peak: FFTPeak
    sample_peak: FFTPeak
    reference_fit: FitResult
    sample_fit: FitResult
    thickness: ThicknessEstimate

    def to_dict(self):
        return {"fft": {"reference": self.reference_peak.to_dict(), "sample": self.sample_peak.to_dict()},
                "fit": {"reference": self.reference_fit.to_dict(), "sample": self.sample_fit.to_dict()},
                "thickness": self.thickness.to_dict()}


@dataclass
class SensingReport:
    branches: dict
    thickness_m: float
    sigma_m: float
    index: float
    index_sigma: float

    def to_dict(self):
        return {"branches": {label: analysis.to_dict() for label, analysis in self.branches.items()},
                "combined": {"thickness_m": self.thickness_m, "sigma_m": self.sigma_m},
                "index": self.index, "index_sigma": self.index_sigma}


def _attributed(label, stage, action, *args, **kwargs):
    try:
        return action(*args, **kwargs)
    except ThzqsException as err:
        # same class and attributes, without re-running a custom __init__
        attributed = err.__class__.__new__(err.__class__)
        attributed.__dict__.update(err.__dict__)
        attributed.args = (f"{label}: {stage}: {err}",)
        raise attributed from err


def analyze_branch(reference, sample, index, index_sigma=0.0):
    label = str(reference.branch)
    if reference.rate.size != sample.rate.size or not np.allclose(stage_axis(reference), stage_axis(sample)):
        raise DomainError(f"{label}: reference and sample scans use different stage grids")
    reference_peak = _attributed(label, "fft_peak", fft_peak, reference)
    sample_peak = _attributed(label, "fft_peak", fft_peak, sample)
    reference_fit = _attributed(label, "fit_envelope", fit_envelope, reference)
    sample_fit = _attributed(label, "fit_envelope", fit_envelope, sample)
    thickness = _attributed(label, "thickness_from_shift", thickness_from_shift, reference_fit, sample_fit, index,
                            index_sigma)
    return BranchAnalysis(reference.branch, reference_peak, sample_peak, reference_fit, sample_fit, thickness)


def sense_pipeline(references, samples, index, index_sigma=0.0):
    """Thickness from reference/sample scan pairs keyed by branch label."""
    missing = set(references) ^ set(samples)
    if missing:
        raise BranchMismatch(f"branches without a reference/sample pair: {', '.join(sorted(missing))}")
    branches = {label: analyze_branch(references[label], samples[label], index, index_sigma)
                for label in sorted(references)}
    thickness, sigma = combine_estimates([analysis.thickness for analysis in branches.values()])
    return SensingReport(branches, thickness, sigma, index, index_sigma)


THICKNESS_COLUMNS = ("caliper_d_m", "stokes_d_m", "stokes_sigma_m", "antistokes_d_m", "antistokes_sigma_m")


def thickness_row(caliper_m, report):
    """One table row; a conversion without analysed branch is left empty (NaN)."""
    row = {"caliper_d_m": caliper_m}
    for conversion in ("stokes", "antistokes"):
        estimates = [analysis.thickness for label, analysis in report.branches.items()
                     if label.split("-")[0] == conversion]
        value, sigma = combine_estimates(estimates) if estimates else (np.nan, np.nan)
        row[f"{conversion}_d_m"], row[f"{conversion}_sigma_m"] = value, sigma
    return [row[column] for column in THICKNESS_COLUMNS]
