# -*- coding: utf-8 -*-
"""Multi-mode interference signal of the two-pass crystal.

The detected collinear signal is integrated over idler frequency and idler
angle.  The angular integral is a solid-angle integral (weight theta) and is
split at the aperture edge so that the step function falls on a panel
boundary of the Gauss-Legendre rule.
"""

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from thzqs.constants import SPEED_OF_LIGHT, TERAHERTZ
from thzqs.dispersion import Band
from thzqs.exceptions import DomainError, NoRoot, QuadratureError
from thzqs.phasematch import STOKES_FORWARD, PhaseMatcher


@dataclass(frozen=True)
class ApertureModel:
    theta_max: float = np.radians(5.0)
    tir_cap: float = np.radians(11.0)

    def __post_init__(self):
        if not self.theta_max > 0:
            raise DomainError(f"aperture angle must be positive, got {self.theta_max}")
        if self.tir_cap is not None and self.theta_max > self.tir_cap:
            raise DomainError("aperture angle exceeds the total internal reflection cap")

    @property
    def theta_limit(self):
        return self.tir_cap if self.tir_cap is not None else 2.0 * self.theta_max

    def to_dict(self):
        return {"theta_max_deg": float(np.degrees(self.theta_max)),
                "tir_cap_deg": None if self.tir_cap is None else float(np.degrees(self.tir_cap))}


@dataclass(frozen=True)
class QuadratureSpec:
    nu_panels: int = 64
    nu_order: int = 8
    theta_order: int = 16
    lobes: float = 4.0
    rtol: float = 1e-4
    check: bool = True

    def __post_init__(self):
        if min(self.nu_panels, self.nu_order, self.theta_order) < 1:
            raise DomainError("quadrature node counts must be positive")
        if not self.lobes > 0 or not self.rtol > 0:
            raise DomainError("quadrature window and tolerance must be positive")

    def refined(self):
        return dataclasses.replace(self, nu_panels=2 * self.nu_panels, theta_order=2 * self.theta_order)

    def to_dict(self):
        return dataclasses.asdict(self)


def gauss_legendre(edges, order):
    """Composite Gauss-Legendre nodes and weights over consecutive panels."""
    base_nodes, base_weights = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base_nodes[None, :]).ravel()
    weights = (half[:, None] * base_weights[None, :]).ravel()
    return nodes, weights


@dataclass
class Interferogram:
    delta_l: np.ndarray
    rate: np.ndarray
    branch: object
    sigma: np.ndarray = None
    position: np.ndarray = None
    kind: str = "reference"
    metadata: dict = field(default_factory=dict)
    raw_counts: np.ndarray = None

    def __post_init__(self):
        self.delta_l = np.asarray(self.delta_l, dtype=float)
        self.rate = np.asarray(self.rate, dtype=float)
        if self.sigma is None:
            self.sigma = np.zeros_like(self.rate)
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.position is not None:
            self.position = np.asarray(self.position, dtype=float)
        if not self.delta_l.shape == self.rate.shape == self.sigma.shape:
            raise DomainError("interferogram columns differ in length")

    def __len__(self):
        return self.rate.size


class MultimodeModel:
    """Frequency- and angle-resolved signal for one branch.

    Quadrature nodes, thermal weights and the per-frequency angular integrals
    are computed once; interferograms are then a single matrix product.
    """

    def __init__(self, matcher=None, branch=STOKES_FORWARD, aperture=None, quadrature=None, phase0=0.0):
        self.matcher = matcher or PhaseMatcher()
        self.branch = branch
        self.aperture = aperture or ApertureModel()
        self.quadrature = quadrature or QuadratureSpec()
        self.phase0 = phase0
        self.achieved = 0.0
        self._tables = {}

    @property
    def crystal(self):
        return self.matcher.crystal

    def rate_density(self, theta_s, nu_i, theta_i, transmission=0.0, phase=0.0):
        temperature = self.crystal.temperature_k
        nu_s = self.branch.signal_frequency(self.crystal.pump_frequency, nu_i)
        k_s = self.matcher.dispersion.wavenumber(Band.VISIBLE, nu_s, temperature)
        k_i = self.matcher.dispersion.wavenumber(Band.TERAHERTZ, nu_i, temperature)
        # radial wavevectors; the density is even in each angle
        a = np.abs(k_s * np.asarray(theta_s))
        b = np.abs(k_i * np.asarray(theta_i))
        w2 = self.crystal.pump_waist_m ** 2
        transverse = np.exp(-0.5 * w2 * (a - b) ** 2) * special.i0e(w2 * a * b)
        mismatch = self.matcher.delta_kz(self.branch, nu_i, theta_s, theta_i)
        longitudinal = np.sinc(mismatch * self.crystal.length_m / (2.0 * np.pi)) ** 2
        return transverse * longitudinal * (1.0 + transmission * np.cos(phase))

    def frequency_window(self):
        root = self.matcher.collinear_frequency(self.branch, tolerance=1.0e-7 * TERAHERTZ)
        lobe = self.matcher.sinc_lobe_width(self.branch, root)
        lo_valid, hi_valid = self.matcher.dispersion.valid_range(Band.TERAHERTZ)
        try:
            tilted = self.matcher.phase_matched_frequency(self.branch, 0.0, self.aperture.theta_limit,
                                                          tolerance=1.0e-7 * TERAHERTZ)
        except NoRoot:
            tilted = root
        lo = max(min(root, tilted) - self.quadrature.lobes * lobe, lo_valid)
        hi = min(max(root, tilted) + self.quadrature.lobes * lobe, hi_valid)
        return lo, hi

    def _table(self, quadrature):
        key = (quadrature.nu_panels, quadrature.nu_order, quadrature.theta_order)
        if key in self._tables:
            return self._tables[key]
        lo, hi = self.frequency_window()
        nu, nu_weights = gauss_legendre(np.linspace(lo, hi, quadrature.nu_panels + 1), quadrature.nu_order)
        inner, inner_w = gauss_legendre([0.0, self.aperture.theta_max], quadrature.theta_order)
        outer, outer_w = gauss_legendre([self.aperture.theta_max, self.aperture.theta_limit], quadrature.theta_order)
        theta = np.concatenate([inner, outer])
        solid = np.concatenate([inner_w, outer_w]) * theta
        inside = theta <= self.aperture.theta_max
        density = self.rate_density(0.0, nu[:, None], theta[None, :])
        thermal = self.branch.thermal_weight(nu, self.crystal.temperature_k)
        # idler frequency integrated in THz
        weight = nu_weights / TERAHERTZ * thermal
        pedestal = density @ solid
        coherent = density[:, inside] @ solid[inside]
        self._tables[key] = (nu, weight, pedestal, coherent)
        return self._tables[key]

    def _evaluate(self, delta_l, quadrature, index, thickness_m, fringe_factor, blocked):
        nu, weight, pedestal, coherent = self._table(quadrature)
        delta_l = np.asarray(delta_l, dtype=float)
        base = float(weight @ pedestal)
        if blocked:
            return np.full(delta_l.shape, base)
        object_phase = 2.0 * np.pi * nu / SPEED_OF_LIGHT * (index - 1.0) * 2.0 * thickness_m
        phase = self.phase0 + 2.0 * np.pi * np.outer(delta_l.ravel(), nu) / SPEED_OF_LIGHT + object_phase
        fringe = np.cos(phase) @ (weight * coherent)
        return (base + fringe_factor * fringe).reshape(delta_l.shape)

    def evaluate(self, delta_l, **kwargs):
        coarse = self._evaluate(delta_l, self.quadrature, **kwargs)
        if not self.quadrature.check:
            return coarse
        fine = self._evaluate(delta_l, self.quadrature.refined(), **kwargs)
        scale = float(np.max(np.abs(fine))) if np.size(fine) else 0.0
        achieved = float(np.max(np.abs(fine - coarse))) / scale if scale > 0 else 0.0
        self.achieved = max(self.achieved, achieved)
        if achieved > self.quadrature.rtol:
            raise QuadratureError(achieved, self.quadrature.rtol)
        return fine

    def idler_angular_density(self, theta_grid, nu_window=None, nodes=512):
        """Angular density of the idler at collinear signal, normalised to peak 1."""
        lo, hi = nu_window or self.frequency_window()
        theta_grid = np.asarray(theta_grid, dtype=float)

        def integrate(count):
            nu, nu_weights = gauss_legendre(np.linspace(lo, hi, max(count // 8, 1) + 1), 8)
            return nu_weights @ self.rate_density(0.0, nu[:, None], theta_grid[None, :])

        coarse, fine = integrate(nodes), integrate(2 * nodes)
        peak = float(np.max(fine))
        if not peak > 0:
            raise DomainError("idler angular density vanishes on the whole grid")
        if self.quadrature.check:
            achieved = float(np.max(np.abs(fine - coarse))) / peak
            self.achieved = max(self.achieved, achieved)
            if achieved > self.quadrature.rtol:
                raise QuadratureError(achieved, self.quadrature.rtol)
        return fine / peak

    def interferogram(self, delta_l):
        rate = self.evaluate(delta_l, index=1.0, thickness_m=0.0, fringe_factor=1.0, blocked=False)
        return Interferogram(delta_l, rate, self.branch, metadata=self.describe())

    def object_shifted_interferogram(self, delta_l, index, thickness_m, fresnel=False):
        if thickness_m < 0 or not index > 1.0:
            raise DomainError(f"object needs d >= 0 and n > 1, got d={thickness_m}, n={index}")
        factor = fresnel_transmittance(index) ** 2 if fresnel else 1.0
        rate = self.evaluate(delta_l, index=index, thickness_m=thickness_m, fringe_factor=factor, blocked=False)
        metadata = self.describe()
        metadata["object"] = {"index": index, "thickness_m": thickness_m, "fresnel": fresnel}
        return Interferogram(delta_l, rate, self.branch, kind="sample", metadata=metadata)

    def pedestal(self):
        return float(self.evaluate(np.zeros(1), index=1.0, thickness_m=0.0, fringe_factor=0.0, blocked=True)[0])

    def visibility(self, index=1.0, thickness_m=0.0, fresnel=False, points=801):
        root = self.matcher.collinear_frequency(self.branch)
        period = SPEED_OF_LIGHT / root
        centre = -(index - 1.0) * 2.0 * thickness_m
        delta_l = centre + np.linspace(-2.0 * period, 2.0 * period, points)
        factor = fresnel_transmittance(index) ** 2 if fresnel else 1.0
        rate = self.evaluate(delta_l, index=index, thickness_m=thickness_m, fringe_factor=factor, blocked=False)
        high, low = float(np.max(rate)), float(np.min(rate))
        if high + low == 0.0:
            return 0.0
        return (high - low) / (high + low)

    def describe(self):
        return {"branch": self.branch.label, "crystal": self.crystal.to_dict(),
                "aperture": self.aperture.to_dict(), "quadrature": self.quadrature.to_dict(),
                "phase0_rad": self.phase0}


def fresnel_transmittance(index):
    """Power transmittance of one uncoated surface at normal incidence."""
    return 4.0 * index / (index + 1.0) ** 2


class SignalSource:
    """Relative signal rates for the instrument, scaled so the reference pedestal is 1."""

    def __init__(self, model, scale=1.0, index=1.0, thickness_m=0.0, fresnel=False, blocked=False):
        self.model = model
        self.scale = scale
        self.index = index
        self.thickness_m = thickness_m
        self.fresnel = fresnel
        self.blocked = blocked

    @classmethod
    def normalised(cls, model, reference=None, **kwargs):
        return cls(model, scale=(reference or model).pedestal(), **kwargs)

    @property
    def branch(self):
        return self.model.branch

    def with_object(self, index, thickness_m, fresnel=False):
        return SignalSource(self.model, self.scale, index, thickness_m, fresnel, self.blocked)

    def blocked_copy(self):
        return SignalSource(self.model, self.scale, self.index, self.thickness_m, self.fresnel, True)

    def rate(self, delta_l):
        factor = fresnel_transmittance(self.index) ** 2 if self.fresnel else 1.0
        return self.model.evaluate(delta_l, index=self.index, thickness_m=self.thickness_m,
                                   fringe_factor=factor, blocked=self.blocked) / self.scale

    def describe(self):
        metadata = self.model.describe()
        metadata["object"] = {"index": self.index, "thickness_m": self.thickness_m, "fresnel": self.fresnel}
        metadata["blocked"] = self.blocked
        metadata["normalisation"] = self.scale
        return metadata
