"""Jones-calculus propagation and balanced polarimetry.

Circular basis convention: ``e+ = (x - i y)/sqrt(2)``, ``e- = (x + i y)/sqrt(2)``.
A linear polarization at angle psi to X has amplitudes
``(e^{i psi}, e^{-i psi}) / sqrt(2)``, so its angle is
``(arg a+ - arg a-) / 2``. The Stokes parameters follow as
``S1 + i S2 = 2 a+ conj(a-)`` and ``S3 = |a+|^2 - |a-|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import units
from .errors import ConfigError, DomainError
from .physics import (ComplexResponse, ProbeField, SpinState, TrionParameters,
                      response_for_spin)

BALANCED_ANGLE = math.pi / 4


@dataclass(frozen=True)
class JonesVector:
    amp_plus: complex
    amp_minus: complex

    @classmethod
    def from_tuple(cls, pol):
        return cls(complex(pol[0]), complex(pol[1]))

    @classmethod
    def linear(cls, angle=0.0):
        r = math.sqrt(0.5)
        return cls(r * complex(math.cos(angle), math.sin(angle)),
                   r * complex(math.cos(angle), -math.sin(angle)))

    @classmethod
    def from_linear(cls, ex, ey):
        r = math.sqrt(0.5)
        return cls(r * (ex + 1j * ey), r * (ex - 1j * ey))

    def to_linear(self):
        """(E_x, E_y) components."""
        r = math.sqrt(0.5)
        return (r * (self.amp_plus + self.amp_minus),
                1j * r * (self.amp_minus - self.amp_plus))

    @property
    def norm2(self):
        return abs(self.amp_plus) ** 2 + abs(self.amp_minus) ** 2

    def stokes(self):
        """(S0, S1, S2, S3), unnormalized."""
        a, b = self.amp_plus, self.amp_minus
        cross = 2.0 * a * b.conjugate()
        pa, pb = abs(a) ** 2, abs(b) ** 2
        return pa + pb, cross.real, cross.imag, pa - pb

    def with_phase(self, phi):
        g = complex(math.cos(phi), math.sin(phi))
        return JonesVector(g * self.amp_plus, g * self.amp_minus)


@dataclass(frozen=True)
class PolarimeterReading:
    i_x: float
    i_y: float
    theta: float
    ellipticity: float = 0.0

    @property
    def sum(self):
        return self.i_x + self.i_y

    @property
    def diff(self):
        return self.i_x - self.i_y


def propagate(field: JonesVector, response: ComplexResponse) -> JonesVector:
    return JonesVector(response.t_plus * field.amp_plus,
                       response.t_minus * field.amp_minus)


def _cos_sin(angle):
    # exact zeros at multiples of pi/2 so a balanced analyzer gives diff == 0
    c, s = math.cos(angle), math.sin(angle)
    if abs(c) < 1e-15:
        c = 0.0
    if abs(s) < 1e-15:
        s = 0.0
    return c, s


def angle_from_ratio(diff, total, analysis_angle=BALANCED_ANGLE):
    """Rotation angle implied by diff/sum for an analyzer at ``analysis_angle``."""
    if total <= 0:
        return 0.0
    ratio = min(1.0, max(-1.0, diff / total))
    return analysis_angle - BALANCED_ANGLE + 0.5 * math.asin(ratio)


def detect(field: JonesVector, analysis_angle=BALANCED_ANGLE, flux_in=1.0,
           efficiency=1.0) -> PolarimeterReading:
    """Split ``field`` on a PBS at ``analysis_angle`` and count both arms.

    Intensities are photons/s after the detector efficiency.
    """
    if not 0.0 < efficiency <= 1.0:
        raise ConfigError(f"efficiency={efficiency} outside (0, 1]")
    s0, s1, s2, s3 = field.stokes()
    c2, s2a = _cos_sin(2.0 * analysis_angle)
    proj = s1 * c2 + s2 * s2a
    scale = 0.5 * efficiency * flux_in
    i_x = scale * (s0 + proj)
    i_y = scale * (s0 - proj)
    ellipticity = 0.5 * math.asin(max(-1.0, min(1.0, s3 / s0))) if s0 > 0 else 0.0
    theta = angle_from_ratio(i_x - i_y, i_x + i_y, analysis_angle)
    return PolarimeterReading(i_x, i_y, theta, ellipticity)


def faraday_angle(response: ComplexResponse):
    """Polarization rotation ``(arg t+ - arg t-) / 2`` in radians."""
    return 0.5 * (np.angle(response.t_plus) - np.angle(response.t_minus))


def spin_reading(spin: SpinState, probe: ProbeField, gate_voltage, b_field,
                 params: TrionParameters, analysis_angle=BALANCED_ANGLE,
                 efficiency=0.1) -> PolarimeterReading:
    """Reading for a pure (or singlet) spin state."""
    response = response_for_spin(spin, probe, gate_voltage, b_field, params)
    field = propagate(JonesVector.from_tuple(probe.polarization), response)
    flux = units.photon_flux(probe.power, params.wavelength)
    return detect(field, analysis_angle, flux, efficiency)


def average_readings(readings, weights, analysis_angle=BALANCED_ANGLE):
    """Population-weighted mean of readings, per detector channel."""
    i_x = sum(w * r.i_x for r, w in zip(readings, weights))
    i_y = sum(w * r.i_y for r, w in zip(readings, weights))
    ell = sum(w * r.ellipticity for r, w in zip(readings, weights))
    return PolarimeterReading(i_x, i_y, angle_from_ratio(i_x - i_y, i_x + i_y,
                                                         analysis_angle), ell)


def mixed_reading(rho, probe: ProbeField, gate_voltage, b_field,
                  params: TrionParameters, analysis_angle=BALANCED_ANGLE,
                  efficiency=0.1) -> PolarimeterReading:
    """Detector reading for a classically mixed spin with polarization ``rho``.

    The spin is a statistical mixture, so the detected intensities (not the
    field amplitudes) are averaged over the two pure states.
    """
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"rho={rho} outside [-1, 1]")
    up = spin_reading(SpinState.up(), probe, gate_voltage, b_field, params,
                      analysis_angle, efficiency)
    down = spin_reading(SpinState.down(), probe, gate_voltage, b_field, params,
                        analysis_angle, efficiency)
    if rho == 1.0:
        return up
    if rho == -1.0:
        return down
    return average_readings([up, down], [(1 + rho) / 2, (1 - rho) / 2], analysis_angle)
