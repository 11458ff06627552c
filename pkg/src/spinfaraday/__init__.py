"""Simulator of dispersive Faraday-rotation readout of a single quantum-dot spin."""

from .budget import BudgetReport, backaction_budget, detected_flux, snr, time_to_snr
from .config import RunConfig, load_config
from .dynamics import (CotunnelingModel, PrepLaser, RateSet, Trajectory, build_rates,
                       preparation_steady_state, simulate_trajectory)
from .errors import ConfigError, ContractError, DomainError, SpinFaradayError
from .physics import (ComplexResponse, ProbeField, SpinState, TrionParameters,
                      calibrate_linewidth, complex_transmission, response_for_spin,
                      scattering_rate, susceptibility, transition_detunings)
from .polarimetry import (JonesVector, PolarimeterReading, detect, faraday_angle,
                          mixed_reading, propagate)
from .readout import ThresholdReadout, estimate_readout_fidelity
from .scan import Dataset, SweepSpec, rotation_vs_preparation, run_map, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BudgetReport",
    "ComplexResponse",
    "ConfigError",
    "ContractError",
    "CotunnelingModel",
    "Dataset",
    "DomainError",
    "JonesVector",
    "PolarimeterReading",
    "PrepLaser",
    "ProbeField",
    "RateSet",
    "RunConfig",
    "SpinFaradayError",
    "SpinState",
    "SweepSpec",
    "ThresholdReadout",
    "Trajectory",
    "TrionParameters",
    "backaction_budget",
    "build_rates",
    "calibrate_linewidth",
    "complex_transmission",
    "detect",
    "detected_flux",
    "estimate_readout_fidelity",
    "faraday_angle",
    "load_config",
    "mixed_reading",
    "preparation_steady_state",
    "propagate",
    "response_for_spin",
    "rotation_vs_preparation",
    "run_map",
    "run_sweep",
    "scattering_rate",
    "simulate_trajectory",
    "snr",
    "susceptibility",
    "time_to_snr",
    "transition_detunings",
]
