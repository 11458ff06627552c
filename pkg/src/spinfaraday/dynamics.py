"""Optical spin pumping and quantum-jump readout trajectories.

The trion excited state is eliminated adiabatically: the spin is a
two-state continuous-time Markov chain whose rates come from spin-flip
Raman scattering (probe and preparation lasers), cotunneling and natural
T1 relaxation.

Random numbers come from numpy's PCG64 bit generator seeded with the
integer seed given by the caller. PCG64 output is specified bit-for-bit,
so trajectories are reproducible across platforms.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError
from .physics import (ProbeField, SpinState, TrionParameters, scattering_rate,
                      transition_detunings)
from .polarimetry import BALANCED_ANGLE, spin_reading

UP, DOWN = 1, -1
DEFAULT_T1 = 1e-3


def make_rng(seed):
    if seed is None:
        raise ConfigError("a seed is required")
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class CotunnelingModel:
    """Cotunneling spin-randomization rate across the charging plateau.

    ``edge_rate`` at either plateau edge, falling off exponentially over
    ``length`` volts towards the centre, on top of ``center_rate``. The
    profile is smooth so sweeps stay continuous inside the plateau.
    """

    edge_rate: float = 1e6
    center_rate: float = 0.0
    length: float = 0.002

    def rate(self, gate_voltage, params: TrionParameters):
        v_min, v_max = params.plateau
        if not params.in_plateau(gate_voltage):
            return self.edge_rate + self.center_rate
        if self.length == 0:
            return self.center_rate
        edges = math.exp(-(gate_voltage - v_min) / self.length) + \
            math.exp(-(v_max - gate_voltage) / self.length)
        return self.center_rate + self.edge_rate * edges


@dataclass(frozen=True)
class PrepLaser:
    """Preparation laser resonant with ``line`` ('sigma_plus' or 'sigma_minus')
    at the preparation voltage, offset by ``offset`` rad/s."""

    line: str
    rabi: float
    offset: float = 0.0

    def __post_init__(self):
        if self.line not in ("sigma_plus", "sigma_minus"):
            raise DomainError(f"preparation line must be sigma_plus or sigma_minus, got {self.line!r}")

    def detuning(self, gate_voltage, params: TrionParameters):
        """Detuning from the pumped line; the lines Stark-shift with voltage."""
        return self.offset - params.stark_shift(gate_voltage)


def pumping_rate(prep_detuning, prep_rabi, params: TrionParameters):
    """Spin-flip Raman rate out of the addressed spin state."""
    return scattering_rate(prep_rabi, prep_detuning, params) * params.branching_ratio


def preparation_steady_state(prep_detuning, prep_rabi, gate_voltage,
                             params: TrionParameters, cotunneling_rate=0.0,
                             pumped="sigma_minus", t1=DEFAULT_T1):
    """Steady-state spin polarization under optical pumping.

    Pumping the sigma- (spin-down) line empties spin down, so rho -> +1;
    pumping sigma+ drives rho -> -1. Outside the charging plateau there is
    no resident spin and 0 is returned.
    """
    if cotunneling_rate < 0:
        raise DomainError("cotunneling_rate must be >= 0")
    if not params.in_plateau(gate_voltage):
        return 0.0
    r_p = pumping_rate(prep_detuning, prep_rabi, params)
    kappa = cotunneling_rate + 1.0 / (2.0 * t1)
    sign = 1.0 if pumped == "sigma_minus" else -1.0
    return float(sign * r_p / (r_p + 2.0 * kappa))


@dataclass(frozen=True)
class RateSet:
    flip_up_to_down: float
    flip_down_to_up: float
    t1_natural: float = DEFAULT_T1

    def __post_init__(self):
        if self.flip_up_to_down < 0 or self.flip_down_to_up < 0:
            raise DomainError("flip rates must be >= 0")

    @property
    def stationary_rho(self):
        total = self.flip_up_to_down + self.flip_down_to_up
        if total == 0:
            return 0.0
        return (self.flip_down_to_up - self.flip_up_to_down) / total


def build_rates(params: TrionParameters, probe: Optional[ProbeField], gate_voltage,
                b_field, t1=DEFAULT_T1, cotunneling_rate=0.0,
                prep: Optional[PrepLaser] = None) -> RateSet:
    """Total spin-flip rates from probe back-action, pumping and relaxation."""
    relax = 1.0 / (2.0 * t1) + cotunneling_rate
    up_down = relax
    down_up = relax
    if probe is not None and probe.power > 0:
        d_plus, d_minus = transition_detunings(probe.detuning, gate_voltage, b_field, params)
        rabi = probe.rabi(params)
        beta = params.branching_ratio
        # spin up scatters on sigma+ only, spin down on sigma- only; the rabi
        # frequency is that of the full probe power, as in the budget
        up_down += beta * scattering_rate(rabi, d_plus, params)
        down_up += beta * scattering_rate(rabi, d_minus, params)
    if prep is not None:
        r_p = pumping_rate(prep.detuning(gate_voltage, params), prep.rabi, params)
        if prep.line == "sigma_minus":
            down_up += r_p
        else:
            up_down += r_p
    return RateSet(float(up_down), float(down_up), t1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Binned readout record of one quantum-jump trajectory.

    ``hidden_spin`` is the majority spin (+1 up, -1 down) within each bin and
    ``up_fraction`` the exact fraction of the bin spent in spin up.
    """

    bin_duration: float
    hidden_spin: np.ndarray
    up_fraction: np.ndarray
    count_x: np.ndarray
    count_y: np.ndarray
    jump_times: np.ndarray
    initial_spin: int
    seed: int
    mean_diff_up: float
    mean_diff_down: float
    mean_sum_up: float
    mean_sum_down: float

    @property
    def n_bins(self):
        return len(self.hidden_spin)

    @property
    def diff_count(self):
        return self.count_x - self.count_y

    @property
    def sum_count(self):
        return self.count_x + self.count_y

    @property
    def t_start(self):
        return np.arange(self.n_bins) * self.bin_duration

    @property
    def duration(self):
        return self.n_bins * self.bin_duration

    def jump_counts(self):
        """(up->down, down->up) jump counts."""
        n = len(self.jump_times)
        first = (n + 1) // 2
        second = n // 2
        return (first, second) if self.initial_spin == UP else (second, first)

    def time_in_up(self):
        return float(np.sum(self.up_fraction) * self.bin_duration)

    def rows(self):
        return zip(self.t_start, self.hidden_spin, self.diff_count, self.sum_count)

    def to_csv(self):
        buf = io.StringIO()
        buf.write("t_start,hidden_spin,diff_count,sum_count\n")
        for t, h, d, s in self.rows():
            buf.write(f"{float(t)!r},{int(h)},{int(d)},{int(s)}\n")
        return buf.getvalue()

    def to_bytes(self):
        return self.to_csv().encode()


def _sample_jumps(rng, initial, rate_out, duration):
    """Jump times of a two-state chain that alternates between states.

    ``rate_out`` maps state -> exit rate. Dwell times are drawn in
    fixed-size blocks so the RNG stream depends only on the inputs.
    """
    r_first = rate_out[initial]
    r_second = rate_out[-initial]
    if r_first == 0:
        return np.empty(0)
    mean_dwell = 0.5 / r_first + (0.5 / r_second if r_second > 0 else math.inf)
    expected = duration / mean_dwell if math.isfinite(mean_dwell) else 1.0
    block = int(min(max(64, 1.2 * expected + 64), 1 << 22))
    block += block % 2  # even, so the alternation pattern is the same each block
    scale = np.empty(block)
    with np.errstate(divide="ignore"):
        scale[0::2] = 1.0 / r_first
        scale[1::2] = 1.0 / r_second if r_second > 0 else np.inf
    chunks = []
    t = 0.0
    while t <= duration:
        times = t + np.cumsum(rng.standard_exponential(block) * scale)
        chunks.append(times)
        t = times[-1]
    times = np.concatenate(chunks)
    return times[times < duration]


def _up_time_at(edges, jump_times, initial):
    """Cumulative time spent in spin up at each of ``edges``."""
    knots = np.concatenate(([0.0], jump_times))
    seg_up = np.ones(len(knots), dtype=bool)
    seg_up[1::2] = False
    if initial == DOWN:
        seg_up = ~seg_up
    seg_len = np.diff(np.concatenate((knots, [np.inf])))
    cum = np.concatenate(([0.0], np.cumsum(np.where(seg_up[:-1], seg_len[:-1], 0.0))))
    idx = np.searchsorted(knots, edges, side="right") - 1
    return cum[idx] + np.where(seg_up[idx], edges - knots[idx], 0.0)


def simulate_trajectory(params: TrionParameters, probe: ProbeField, gate_voltage,
                        b_field, rates: RateSet, duration, bin_duration, efficiency=0.1,
                        seed=None, initial_spin=None,
                        analysis_angle=BALANCED_ANGLE) -> Trajectory:
    """Quantum-jump trajectory with Poisson-sampled detector counts.

    Jumps follow exponential waiting times; bins are split exactly at jump
    times so each bin's mean counts are the occupancy-weighted mean of the
    two pure-state detector intensities. ``initial_spin`` of None draws the
    starting state from the stationary distribution.
    """
    if not bin_duration > 0:
        raise ConfigError(f"bin duration must be > 0, got {bin_duration}")
    if duration < bin_duration:
        raise ConfigError("duration must be >= bin duration")
    rng = make_rng(seed)
    if initial_spin is None:
        p_up = (1.0 + rates.stationary_rho) / 2.0
        initial_spin = UP if rng.random() < p_up else DOWN
    initial_spin = UP if initial_spin in (UP, "up") else DOWN

    n_bins = int(math.floor(duration / bin_duration * (1 + 1e-12)))
    edges = np.arange(n_bins + 1) * bin_duration
    rate_out = {UP: rates.flip_up_to_down, DOWN: rates.flip_down_to_up}
    jumps = _sample_jumps(rng, initial_spin, rate_out, edges[-1])
    up_time = np.diff(_up_time_at(edges, jumps, initial_spin))
    up_fraction = np.clip(up_time / bin_duration, 0.0, 1.0)

    up = spin_reading(SpinState.up(), probe, gate_voltage, b_field, params,
                      analysis_angle, efficiency)
    down = spin_reading(SpinState.down(), probe, gate_voltage, b_field, params,
                        analysis_angle, efficiency)
    lam_x = (up_fraction * up.i_x + (1.0 - up_fraction) * down.i_x) * bin_duration
    lam_y = (up_fraction * up.i_y + (1.0 - up_fraction) * down.i_y) * bin_duration
    count_x = rng.poisson(lam_x).astype(np.int64)
    count_y = rng.poisson(lam_y).astype(np.int64)
    hidden = np.where(up_fraction >= 0.5, UP, DOWN).astype(np.int8)
    return Trajectory(
        bin_duration=float(bin_duration),
        hidden_spin=hidden,
        up_fraction=up_fraction,
        count_x=count_x,
        count_y=count_y,
        jump_times=jumps,
        initial_spin=initial_spin,
        seed=seed,
        mean_diff_up=up.diff * bin_duration,
        mean_diff_down=down.diff * bin_duration,
        mean_sum_up=up.sum * bin_duration,
        mean_sum_down=down.sum * bin_duration,
    )
