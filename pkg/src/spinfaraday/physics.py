"""Steady-state optical response of a singly charged quantum dot.

The dot is a four-level system: two electron spin ground states, each
coupled to one trion state by a single circular polarization (spin up by
sigma+, spin down by sigma-). Pauli blockade means only the transition of
the occupied spin state responds to the probe.

Conventions
-----------
* ``gamma`` is the FWHM of the weak-probe power-contrast Lorentzian, in
  rad/s.
* Saturation parameter ``s = (rabi**2 / 2) / (delta**2 + gamma**2 / 4)``;
  on resonance ``s = 2 rabi**2 / gamma**2``.
* Detunings are probe minus transition (positive = probe blue of line).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from . import units
from .errors import ContractError, DomainError

# (detuning in GHz, detuning in linewidths) for the four reference probe settings.
DETUNING_PAIRS = ((30.0, 100.0), (56.0, 185.0), (66.0, 220.0), (92.0, 306.0))


def calibrate_linewidth(pairs=DETUNING_PAIRS):
    """Least-squares Gamma/2pi (GHz) from (detuning_ghz, detuning/Gamma) pairs.

    Fits ``f = (Gamma/2pi) * n`` through the origin. Returns the fitted value
    and the per-pair relative residuals ``(f/n) / fit - 1``.
    """
    f = np.array([p[0] for p in pairs], dtype=float)
    n = np.array([p[1] for p in pairs], dtype=float)
    fit = float(f @ n / (n @ n))
    return fit, f / n / fit - 1.0


@dataclass(frozen=True)
class TrionParameters:
    """Static physics of one dot. SI units, angular frequencies."""

    gamma: float = units.ghz_to_angular(0.30)
    alpha0: float = 0.0045
    zeeman_split_per_tesla: float = 26e9  # Hz / T
    stark_slope: float = 15e9 / 0.035  # Hz / V
    resonance_voltage_prep: float = 0.415
    plateau: Tuple[float, float] = (0.390, 0.450)
    branching_ratio: float = 1e-4
    wavelength: float = 950e-9
    p_sat: float = 20e-9  # W; probe power at which rabi == gamma

    def __post_init__(self):
        v_min, v_max = self.plateau
        checks = [
            ("gamma", self.gamma > 0 and math.isfinite(self.gamma), "gamma > 0"),
            ("alpha0", 0.0 < self.alpha0 < 1.0, "0 < alpha0 < 1"),
            ("branching_ratio", 0.0 < self.branching_ratio < 1.0,
             "0 < branching_ratio < 1"),
            ("plateau", v_min < self.resonance_voltage_prep < v_max,
             "plateau min < resonance_voltage_prep < plateau max"),
            ("wavelength", self.wavelength > 0, "wavelength > 0"),
            ("p_sat", self.p_sat > 0, "p_sat > 0"),
        ]
        for name, ok, rule in checks:
            if not ok:
                raise DomainError(f"{name}: violates {rule}")

    @property
    def gamma_hz(self):
        return units.angular_to_hz(self.gamma)

    def zeeman_splitting(self, b_field):
        """Zeeman splitting in rad/s (signed with the field)."""
        return units.hz_to_angular(self.zeeman_split_per_tesla * b_field)

    def stark_shift(self, gate_voltage):
        """Common DC-Stark shift of both lines, rad/s, relative to V_ref."""
        return units.hz_to_angular(
            self.stark_slope * (gate_voltage - self.resonance_voltage_prep))

    def in_plateau(self, gate_voltage):
        v_min, v_max = self.plateau
        return v_min <= gate_voltage <= v_max


@dataclass(frozen=True)
class SpinState:
    """Ground-state occupation of the dot.

    ``kind`` is one of ``"up"``, ``"down"``, ``"mixed"``, ``"singlet"``;
    ``rho`` is the polarization P_up - P_down (only meaningful for mixed).
    """

    kind: str
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in ("up", "down", "mixed", "singlet"):
            raise DomainError(f"unknown spin state kind {self.kind!r}")
        if self.kind == "mixed" and not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"spin polarization rho={self.rho} outside [-1, 1]")

    @classmethod
    def up(cls):
        return cls("up", 1.0)

    @classmethod
    def down(cls):
        return cls("down", -1.0)

    @classmethod
    def mixed(cls, rho=0.0):
        return cls("mixed", float(rho))

    @classmethod
    def singlet(cls):
        return cls("singlet", 0.0)

    def as_pure(self):
        """The equivalent pure state, or None if the state is not pure."""
        if self.kind in ("up", "down", "singlet"):
            return self
        if self.rho == 1.0:
            return SpinState.up()
        if self.rho == -1.0:
            return SpinState.down()
        return None

    @property
    def populations(self):
        """(P_up, P_down)."""
        if self.kind == "singlet":
            return 0.0, 0.0
        rho = self.rho
        return (1.0 + rho) / 2.0, (1.0 - rho) / 2.0


_SQRT_HALF = math.sqrt(0.5)
LINEAR_X = (complex(_SQRT_HALF), complex(_SQRT_HALF))
SIGMA_PLUS = (1 + 0j, 0j)
SIGMA_MINUS = (0j, 1 + 0j)


@dataclass(frozen=True)
class ProbeField:
    """Probe laser at the dot.

    ``detuning`` is relative to the bare (zero-field, V_ref) transition in
    rad/s. ``polarization`` holds (sigma+, sigma-) Jones amplitudes.
    """

    detuning: float
    power: float
    polarization: Tuple[complex, complex] = field(default=LINEAR_X)

    def __post_init__(self):
        if not math.isfinite(self.detuning):
            raise DomainError("probe detuning must be finite")
        if self.power < 0:
            raise DomainError("probe power must be >= 0")
        a, b = self.polarization
        norm = abs(a) ** 2 + abs(b) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise DomainError(f"polarization not normalized (|a|^2+|b|^2={norm})")

    def rabi(self, params: TrionParameters):
        return params.gamma * math.sqrt(self.power / params.p_sat)


@dataclass(frozen=True)
class ComplexResponse:
    """Amplitude transmission for the sigma+ and sigma- components."""

    t_plus: complex = 1 + 0j
    t_minus: complex = 1 + 0j


IDENTITY = ComplexResponse()


def saturation_parameter(rabi, delta, gamma):
    """``s = (rabi^2/2) / (delta^2 + gamma^2/4)``; vectorized over delta."""
    return (np.square(rabi) / 2.0) / (np.square(delta) + gamma ** 2 / 4.0)


def susceptibility(delta, params: TrionParameters, saturation_s=0.0):
    """``1 - t`` evaluated directly, without cancellation against 1.

    ``(alpha0/2) / (1 + s) / (1 - 2i delta/gamma)``; the real part is the
    absorptive response, the imaginary part the dispersive one.
    """
    delta = np.asarray(delta, dtype=float)
    if not np.all(np.isfinite(delta)):
        raise DomainError("detuning must be finite")
    s = np.asarray(saturation_s, dtype=float)
    if np.any(s < 0):
        raise DomainError("saturation parameter must be >= 0")
    chi = (params.alpha0 / 2.0) / (1.0 + s) / (1.0 - 2j * delta / params.gamma)
    return chi[()] if chi.ndim == 0 else chi


def complex_transmission(delta, params: TrionParameters, saturation_s=0.0):
    """Weak-probe amplitude transmission through one trion transition.

    ``t = 1 - (alpha0/2) / (1 + s) / (1 - 2i delta/gamma)``

    Works elementwise on arrays. The phase tends to
    ``-alpha0 gamma / (4 delta) / (1 + s)`` at large detuning.
    """
    return 1.0 - susceptibility(delta, params, saturation_s)


def transition_detunings(probe_offset, gate_voltage, b_field, params: TrionParameters):
    """Probe detunings from the sigma+ (spin up) and sigma- (spin down) lines.

    The sigma+ line sits at +Delta_Z/2 and the sigma- line at -Delta_Z/2
    around the bare frequency; both receive the same Stark shift.
    """
    half_split = params.zeeman_splitting(b_field) / 2.0
    stark = params.stark_shift(gate_voltage)
    delta_plus = probe_offset - (half_split + stark)
    delta_minus = probe_offset - (-half_split + stark)
    return delta_plus, delta_minus


def line_offset(line, gate_voltage, b_field, params: TrionParameters):
    """Frequency of ``line`` ('sigma_plus'/'sigma_minus'/'bare') vs. bare, rad/s."""
    half_split = params.zeeman_splitting(b_field) / 2.0
    stark = params.stark_shift(gate_voltage)
    if line == "sigma_plus":
        return half_split + stark
    if line == "sigma_minus":
        return -half_split + stark
    if line == "bare":
        return 0.0
    raise DomainError(f"unknown line {line!r}")


def response_for_spin(spin: SpinState, probe: ProbeField, gate_voltage, b_field,
                      params: TrionParameters) -> ComplexResponse:
    """Response of the dot for a pure spin state.

    Mixed states have no single amplitude response; average the detected
    intensities instead (``polarimetry.mixed_reading``).
    """
    if not math.isfinite(gate_voltage):
        raise DomainError("gate voltage must be finite")
    pure = spin.as_pure()
    if pure is None:
        raise ContractError(
            "a mixed spin state has no single amplitude response; "
            "average pure-state readings with weights (1 +/- rho)/2")
    if pure.kind == "singlet" or not params.in_plateau(gate_voltage):
        return IDENTITY
    rabi = probe.rabi(params)
    d_plus, d_minus = transition_detunings(probe.detuning, gate_voltage, b_field, params)
    if pure.kind == "up":
        s = saturation_parameter(rabi, d_plus, params.gamma)
        return ComplexResponse(complex(complex_transmission(d_plus, params, s)), 1 + 0j)
    s = saturation_parameter(rabi, d_minus, params.gamma)
    return ComplexResponse(1 + 0j, complex(complex_transmission(d_minus, params, s)))


def active_detuning(spin: SpinState, probe: ProbeField, gate_voltage, b_field,
                    params: TrionParameters):
    """Detuning of the probe from the transition the pure ``spin`` addresses."""
    d_plus, d_minus = transition_detunings(probe.detuning, gate_voltage, b_field, params)
    pure = spin.as_pure()
    if pure is None or pure.kind == "singlet":
        raise ContractError("active detuning needs a pure up/down spin state")
    return d_plus if pure.kind == "up" else d_minus


def scattering_rate(rabi, delta, params: TrionParameters):
    """Photon scattering rate (1/s) of a driven two-level transition.

    ``R = (gamma/2) s / (1 + s)``; approaches ``rabi^2 gamma / (4 delta^2)``
    far from resonance.
    """
    if np.any(np.asarray(rabi) < 0):
        raise DomainError("rabi frequency must be >= 0")
    s = saturation_parameter(rabi, delta, params.gamma)
    return params.gamma / 2.0 * s / (1.0 + s)
