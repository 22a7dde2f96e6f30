# -*- coding: utf-8 -*-
"""Single-mode model of the two-pass interferometer.

Modes are ordered (signal, idler, auxiliary) and every optical element is a
6x6 matrix acting on ``(a_s, a_i, a_3, a_s^dag, a_i^dag, a_3^dag)``.  An
element written as ``a' = alpha a + beta a^dag`` is stored as
``[[alpha, beta], [conj(beta), conj(alpha)]]``; the chain is the ordered
product of its elements and expectation values follow directly from the
first row block.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from thzqs.constants import SPEED_OF_LIGHT
from thzqs.exceptions import DomainError, NonUnitary

MODES = 3
SIGNAL, IDLER, AUXILIARY = range(MODES)
UNITARITY_TOLERANCE = 1e-12
SYMPLECTIC_TOLERANCE = 1e-10


class Coupling(Enum):
    PARAMETRIC = "parametric"      # Stokes passes, mixes a and a^dag
    BEAM_SPLITTER = "beam-splitter"  # Anti-Stokes passes, conserves photon number


@dataclass(frozen=True)
class GainParams:
    u1: complex
    v1: complex
    u2: complex
    v2: complex
    coupling: Coupling = Coupling.PARAMETRIC

    @classmethod
    def equal(cls, v0, coupling=Coupling.PARAMETRIC):
        if v0 < 0:
            raise DomainError(f"conversion rate must be non-negative, got {v0}")
        if coupling is Coupling.PARAMETRIC:
            u, v = np.sqrt(1.0 + v0), np.sqrt(v0)
        else:
            if v0 > 1:
                raise DomainError(f"beam-splitter conversion rate must not exceed 1, got {v0}")
            u, v = np.sqrt(1.0 - v0), np.sqrt(v0)
        return cls(complex(u), complex(v), complex(u), complex(v), coupling)

    @property
    def gains(self):
        return [abs(self.v1) ** 2, abs(self.v2) ** 2]

    def check(self):
        for u, v in ((self.u1, self.v1), (self.u2, self.v2)):
            norm = abs(u) ** 2 - abs(v) ** 2 if self.coupling is Coupling.PARAMETRIC else abs(u) ** 2 + abs(v) ** 2
            if abs(norm - 1.0) > UNITARITY_TOLERANCE * max(1.0, abs(u) ** 2):
                raise NonUnitary(f"{self.coupling.value} pass with u={u:.6g}, v={v:.6g} is not lossless "
                                 f"(norm {norm:.15g})")


@dataclass(frozen=True)
class ObjectModel:
    t: complex = 1.0
    r: complex = 0.0
    index: float = None
    thickness_m: float = 0.0

    @classmethod
    def from_transmission(cls, transmission, **kwargs):
        if not 0.0 <= transmission <= 1.0:
            raise DomainError(f"object transmission must lie in [0, 1], got {transmission}")
        return cls(complex(np.sqrt(transmission)), complex(np.sqrt(1.0 - transmission)), **kwargs)

    @classmethod
    def blocked(cls):
        return cls(0.0, 1.0)

    @property
    def transmission(self):
        return abs(self.t) ** 2

    def check(self):
        norm = abs(self.t) ** 2 + abs(self.r) ** 2
        if abs(norm - 1.0) > UNITARITY_TOLERANCE:
            raise NonUnitary(f"object splitter t={self.t:.6g}, r={self.r:.6g} is not lossless (norm {norm:.15g})")


@dataclass(frozen=True)
class PhaseConfig:
    phi_s: float = 0.0
    phi_i: float = 0.0

    @classmethod
    def aggregate(cls, phi, coupling=Coupling.PARAMETRIC):
        """Arm phases with fringe phase phi: phi_s + phi_i = 2 phi (parametric) or phi_s - phi_i = 2 phi."""
        return cls(phi, phi) if coupling is Coupling.PARAMETRIC else cls(phi, -phi)

    @property
    def phi(self):
        return 0.5 * (self.phi_s + self.phi_i)

    def fringe_phase(self, coupling=Coupling.PARAMETRIC):
        if coupling is Coupling.PARAMETRIC:
            return self.phi
        return 0.5 * (self.phi_s - self.phi_i)


def _element(alpha, beta=None):
    beta = np.zeros((MODES, MODES), dtype=complex) if beta is None else beta
    return np.block([[alpha, beta], [beta.conj(), alpha.conj()]])


def _pass_matrix(u, v, coupling):
    alpha = np.eye(MODES, dtype=complex)
    beta = np.zeros((MODES, MODES), dtype=complex)
    if coupling is Coupling.PARAMETRIC:
        alpha[SIGNAL, SIGNAL] = alpha[IDLER, IDLER] = u
        beta[SIGNAL, IDLER] = beta[IDLER, SIGNAL] = v
    else:
        alpha[SIGNAL, SIGNAL], alpha[SIGNAL, IDLER] = u, v
        alpha[IDLER, SIGNAL], alpha[IDLER, IDLER] = -np.conj(v), np.conj(u)
    return _element(alpha, beta)


def _object_matrix(obj):
    alpha = np.eye(MODES, dtype=complex)
    alpha[IDLER, IDLER], alpha[IDLER, AUXILIARY] = obj.t, obj.r
    alpha[AUXILIARY, IDLER], alpha[AUXILIARY, AUXILIARY] = -np.conj(obj.r), np.conj(obj.t)
    return _element(alpha)


def _phase_matrix(phases):
    return _element(np.diag([np.exp(1j * phases.phi_s), np.exp(1j * phases.phi_i), 1.0]))


@dataclass(frozen=True)
class ModeChain:
    matrix: np.ndarray
    coupling: Coupling

    def symplectic_defect(self):
        metric = np.diag([1.0] * MODES + [-1.0] * MODES)
        return float(np.max(np.abs(self.matrix @ metric @ self.matrix.conj().T - metric)))

    def output(self, mode):
        """Coefficients (A, B) of ``a'_mode = sum_j A_j a_j + B_j a_j^dag``."""
        return self.matrix[mode, :MODES], self.matrix[mode, MODES:]


def compose_chain(gains, obj, phases):
    gains.check()
    obj.check()
    first = _pass_matrix(gains.u1, gains.v1, gains.coupling)
    second = _pass_matrix(gains.u2, gains.v2, gains.coupling)
    chain = ModeChain(second @ _phase_matrix(phases) @ _object_matrix(obj) @ first, gains.coupling)
    if chain.symplectic_defect() > SYMPLECTIC_TOLERANCE * max(1.0, float(np.max(np.abs(chain.matrix))) ** 2):
        raise NonUnitary(f"composed chain violates the commutators by {chain.symplectic_defect():.3g}")
    return chain


def mean_photon_number(chain, mode, occupations):
    """Mean number of an output mode for diagonal thermal inputs with the given occupations."""
    occupations = np.asarray(occupations, dtype=float)
    if np.any(occupations < 0):
        raise DomainError("occupations must be non-negative")
    alpha, beta = chain.output(mode)
    return float(np.sum(np.abs(alpha) ** 2 * occupations + np.abs(beta) ** 2 * (occupations + 1.0)))


def _thermal_inputs(n_th):
    if n_th < 0:
        raise DomainError(f"thermal occupation must be non-negative, got {n_th}")
    return [0.0, n_th, n_th]


def signal_rate_exact(chain, n_th):
    return mean_photon_number(chain, SIGNAL, _thermal_inputs(n_th))


def idler_number_exact(chain, n_th):
    return mean_photon_number(chain, IDLER, _thermal_inputs(n_th))


def auxiliary_number_exact(chain, n_th):
    return mean_photon_number(chain, AUXILIARY, _thermal_inputs(n_th))


def upconversion_rate_exact(chain, n_th):
    if chain.coupling is not Coupling.BEAM_SPLITTER:
        raise DomainError("up-conversion needs a chain built from beam-splitter passes")
    return mean_photon_number(chain, SIGNAL, _thermal_inputs(n_th))


def signal_rate_closed_form(v0, transmission, n_th, phi):
    if not 0.0 <= transmission <= 1.0:
        raise DomainError(f"object transmission must lie in [0, 1], got {transmission}")
    if v0 < 0:
        raise DomainError(f"conversion rate must be non-negative, got {v0}")
    fringe = np.sqrt(transmission * (1.0 + 2.0 * v0 + v0 ** 2)) * np.cos(2.0 * np.asarray(phi))
    return (n_th + 1.0) * 2.0 * v0 * (1.0 + 0.5 * v0 * transmission + 0.5 * v0 + fringe)


def upconversion_rate_closed_form(v0, transmission, n_th, phi):
    """Signal of two equal beam-splitter passes; phi is the aggregate fringe phase."""
    if not 0.0 <= transmission <= 1.0:
        raise DomainError(f"object transmission must lie in [0, 1], got {transmission}")
    if not 0.0 <= v0 <= 1.0:
        raise DomainError(f"beam-splitter conversion rate must lie in [0, 1], got {v0}")
    fringe = 2.0 * np.sqrt(transmission) * np.cos(2.0 * np.asarray(phi))
    return n_th * v0 * ((1.0 - v0) * (1.0 + transmission + fringe) + 1.0 - transmission)


def sensing_rate(v0, n_th, phi0, nu_i, x, index=1.0, thickness_m=0.0):
    """Low-gain rate with a transparent plate of the given index and thickness in the idler arm."""
    path = 2.0 * np.asarray(x) + (index - 1.0) * 2.0 * thickness_m
    return (n_th + 1.0) * 2.0 * v0 * (1.0 + np.cos(phi0 + 2.0 * np.pi * nu_i / SPEED_OF_LIGHT * path))


def fringe_visibility(rates):
    rates = np.asarray(rates, dtype=float)
    high, low = float(np.max(rates)), float(np.min(rates))
    if high + low == 0.0:
        return 0.0
    return (high - low) / (high + low)
