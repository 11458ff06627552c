"""Shot-noise SNR, measurement time and back-action accounting.

SNR convention for balanced polarimetry at the shot-noise limit: with
``N`` detected photons the difference signal is ``2 theta N`` and its noise
is ``sqrt(N)``, so ``SNR = 2 |theta| sqrt(N)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import units
from .errors import ContractError
from .physics import (ProbeField, SpinState, TrionParameters, active_detuning,
                      response_for_spin, scattering_rate)
from .polarimetry import faraday_angle

SNR_CONVENTION = "SNR = 2*|theta|*sqrt(detected_flux*t) (signal 2*theta*N, noise sqrt(N))"


def detected_flux(power, wavelength, efficiency):
    """Detected photons/s for ``power`` watts at ``wavelength``."""
    if np.any(np.asarray(power) < 0):
        raise ValueError("power must be >= 0")
    return efficiency * units.photon_flux(power, wavelength)


def snr(theta, flux, t_meas):
    return 2.0 * np.abs(theta) * np.sqrt(flux * t_meas)


def time_to_snr(theta, flux, target=1.0):
    """Integration time for which ``snr`` reaches ``target``."""
    return target ** 2 / (4.0 * theta ** 2 * flux)


@dataclass(frozen=True)
class BudgetReport:
    photon_scatter_interval: float
    spin_flip_interval: float
    theta: float
    detected_flux: float
    t_snr1: float
    n_backaction_at_snr1: float
    qnd_margin: float
    branching_ratio: float

    @property
    def order_constant(self):
        """``n_backaction_at_snr1 * qnd_margin``; independent of beta."""
        return self.n_backaction_at_snr1 * self.qnd_margin

    def as_dict(self):
        d = asdict(self)
        d["order_constant"] = self.order_constant
        return d

    def to_text(self):
        lines = [f"{k} = {v!r}" for k, v in self.as_dict().items()]
        lines.append(f"snr_convention = {SNR_CONVENTION}")
        return "\n".join(lines)


def backaction_budget(probe: ProbeField, spin: SpinState, gate_voltage, b_field,
                      params: TrionParameters, efficiency=0.1) -> BudgetReport:
    """Assemble the measurement / back-action budget for a pure spin state."""
    pure = spin.as_pure()
    if pure is None or pure.kind == "singlet":
        raise ContractError("backaction_budget needs a pure up or down spin")
    if not params.in_plateau(gate_voltage):
        raise ContractError("gate voltage outside the single-electron plateau")
    delta = active_detuning(pure, probe, gate_voltage, b_field, params)
    rate = float(scattering_rate(probe.rabi(params), delta, params))
    photon_interval = 1.0 / rate
    flip_interval = photon_interval / params.branching_ratio
    theta = float(faraday_angle(response_for_spin(pure, probe, gate_voltage,
                                                  b_field, params)))
    flux = float(detected_flux(probe.power, params.wavelength, efficiency))
    t1 = time_to_snr(theta, flux)
    # sigma_peak / A_spot is identified with the in-situ extinction alpha0
    margin = params.alpha0 * efficiency / params.branching_ratio
    return BudgetReport(
        photon_scatter_interval=photon_interval,
        spin_flip_interval=flip_interval,
        theta=theta,
        detected_flux=flux,
        t_snr1=t1,
        n_backaction_at_snr1=t1 / flip_interval,
        qnd_margin=margin,
        branching_ratio=params.branching_ratio,
    )
