"""Built-in invariant suite run by ``spinfaraday selfcheck``.

Each check returns ``(passed, detail)``. The suite uses the resolved run
configuration, so a pristine default config checks the shipped calibration.
"""

from __future__ import annotations

import copy
import math
import time
from dataclasses import replace

import numpy as np

from . import config as cfg
from . import units
from .budget import backaction_budget
from .dynamics import RateSet, simulate_trajectory
from .physics import (ComplexResponse, ProbeField, SpinState,
                      calibrate_linewidth, complex_transmission, scattering_rate,
                      susceptibility)
from .polarimetry import JonesVector, detect, faraday_angle, propagate, spin_reading
from .scan import SweepSpec, run_sweep


def check_calibration(tree):
    fit, resid = calibrate_linewidth()
    configured = cfg.trion_parameters(tree).gamma_hz / 1e9
    ok = abs(configured - fit) / fit < 0.01 and np.max(np.abs(resid)) < 0.02
    return ok, (f"Gamma/2pi fit = {fit:.4f} GHz (configured {configured:.4f} GHz), "
                f"max residual = {np.max(np.abs(resid)):.2%}")


def check_parity(tree):
    params = cfg.trion_parameters(tree)
    d = np.linspace(-50, 50, 1000) * params.gamma
    chi = susceptibility(d, params)
    chi_r = susceptibility(-d, params)
    even = np.max(np.abs(chi.real - chi_r.real))
    odd = np.max(np.abs(chi.imag + chi_r.imag))
    return max(even, odd) < 1e-12, f"max asymmetry = {max(even, odd):.1e}"


def check_dispersive_dominance(tree):
    params = cfg.trion_parameters(tree)
    chi = susceptibility(340 * params.gamma, params)
    ratio = abs(chi.imag / chi.real)
    return abs(ratio - 680) < 1e-6 * 680, f"|Im/Re| at 340 Gamma = {ratio:.6f}"


def check_flux_accounting(tree):
    params = cfg.trion_parameters(tree)
    worst = 0.0
    for d in np.linspace(-5, 5, 41) * params.gamma:
        t = complex(complex_transmission(d, params, 0.5))
        field = JonesVector.linear(0.3)
        out = propagate(field, ComplexResponse(1 + 0j, t))
        r = detect(out, math.pi / 4, 1e9, 0.37)
        scattered = abs(field.amp_minus) ** 2 * (1 - abs(t) ** 2)
        worst = max(worst, abs(r.sum / 0.37 / 1e9 + scattered - 1.0))
    return worst < 1e-9, f"max flux mismatch = {worst:.1e}"


def check_circular_null(tree):
    t = copy.deepcopy(tree)
    t["probe"]["polarization"] = "circular"
    ds = run_sweep(SweepSpec.from_section(t["spectrum"]), t)
    ratio = np.max(np.abs(ds.columns["diff"]) / ds.columns["sum"])
    return ratio < 1e-12, f"max |diff|/sum = {ratio:.1e}"


def check_inverse_detuning(tree):
    params = cfg.trion_parameters(tree)
    n = np.array([100.0, 185.0, 220.0, 306.0])
    theta = np.array([abs(faraday_angle(ComplexResponse(
        1 + 0j, complex(complex_transmission(k * params.gamma, params))))) for k in n])
    a = np.sum(theta / n) / np.sum(1 / n ** 2)
    resid = np.max(np.abs(theta / (a / n) - 1))
    return resid < 0.01, f"max residual from A/delta = {resid:.1e}"


def check_sign_conditionality(tree):
    t = copy.deepcopy(tree)
    t["probe"]["reference"] = "sigma_plus"
    t["prep"]["offset_ghz"] = 0.0
    grid = np.linspace(390.0, 460.0, 71)
    out = {}
    for mode in ("up", "down"):
        spec = SweepSpec("field.gate_mv", grid, overrides={"prep.mode": mode,
                                                            "probe.detuning_ghz": 30.0})
        out[mode] = run_sweep(spec, t).columns["diff"]
    inside = grid <= t["dot"]["plateau_max_mv"]
    flipped = np.all(np.sign(out["up"][inside]) == -np.sign(out["down"][inside])) \
        and np.all(out["up"][inside] != 0)
    singlet = np.all(out["up"][~inside] == 0) and np.all(out["down"][~inside] == 0)
    return bool(flipped and singlet), f"sign flipped in plateau: {flipped}, singlet zero: {singlet}"


def _budget_probe(tree, params):
    # spin down, probe 306 linewidths blue of the sigma- line at 1 uW
    return ProbeField(306 * params.gamma - params.zeeman_splitting(cfg.b_field(tree)) / 2,
                      units.nw_to_w(1000.0))


def check_budget_intervals(tree):
    params = cfg.trion_parameters(tree)
    rep = backaction_budget(_budget_probe(tree, params), SpinState.down(),
                            params.resonance_voltage_prep, cfg.b_field(tree), params,
                            cfg.efficiency(tree))
    ok = 2e-6 <= rep.photon_scatter_interval <= 18e-6 and 20e-3 <= rep.spin_flip_interval <= 180e-3
    return ok, (f"photon interval = {rep.photon_scatter_interval * 1e6:.2f} us, "
                f"spin-flip interval = {rep.spin_flip_interval * 1e3:.1f} ms")


def check_backaction_span(tree):
    base = cfg.trion_parameters(tree)
    ns = []
    for beta in (1e-4, 1e-3):
        params = replace(base, branching_ratio=beta)
        rep = backaction_budget(_budget_probe(tree, params), SpinState.down(),
                                params.resonance_voltage_prep, cfg.b_field(tree), params,
                                cfg.efficiency(tree))
        ns.append(rep.n_backaction_at_snr1)
    ok = ns[0] <= 1.0 and ns[1] >= 10.0
    return ok, f"n_backaction over beta in [1e-4, 1e-3] = [{ns[0]:.2f}, {ns[1]:.2f}]"


def check_trajectory_replay(tree):
    params = cfg.trion_parameters(tree)
    probe = cfg.probe_field(tree, params)
    rates = RateSet(200.0, 300.0)
    args = (params, probe, params.resonance_voltage_prep, cfg.b_field(tree), rates, 1.0, 1e-3)
    a = simulate_trajectory(*args, efficiency=cfg.efficiency(tree), seed=tree["seed"])
    b = simulate_trajectory(*args, efficiency=cfg.efficiency(tree), seed=tree["seed"])
    same = a.to_bytes() == b.to_bytes()
    n_ud, _ = a.jump_counts()
    t_up = a.time_in_up()
    rate = n_ud / t_up
    sigma = math.sqrt(n_ud) / t_up
    ok = same and abs(rate - 200.0) < 3 * sigma
    return ok, f"bit-exact replay: {same}, up->down rate = {rate:.1f} +/- {sigma:.1f} /s"


def check_spin_reading_identity(tree):
    params = cfg.trion_parameters(tree)
    probe = ProbeField(0.0, 1e-6)
    r = spin_reading(SpinState.singlet(), probe, 0.415, 1.0, params)
    return r.diff == 0.0 and r.theta == 0.0, f"singlet diff = {r.diff}, theta = {r.theta}"


def check_scattering_asymptote(tree):
    params = cfg.trion_parameters(tree)
    g = params.gamma
    worst = 0.0
    for k in (30.0, 100.0, 300.0):
        rabi = 0.3 * g
        exact = scattering_rate(rabi, k * g, params)
        worst = max(worst, abs(exact / (rabi ** 2 * g / (4 * (k * g) ** 2)) - 1))
    return worst < 0.01, f"max deviation from rabi^2 Gamma/(4 delta^2) = {worst:.1e}"


CHECKS = [
    ("calibration consistency", check_calibration),
    ("lineshape parity", check_parity),
    ("dispersive dominance at 340 Gamma", check_dispersive_dominance),
    ("flux accounting", check_flux_accounting),
    ("circular-probe null", check_circular_null),
    ("inverse-detuning law", check_inverse_detuning),
    ("sign conditionality and singlet zero", check_sign_conditionality),
    ("singlet identity reading", check_spin_reading_identity),
    ("scattering-rate asymptote", check_scattering_asymptote),
    ("budget intervals", check_budget_intervals),
    ("back-action span over beta", check_backaction_span),
    ("trajectory rate and replay", check_trajectory_replay),
]


def run_selfcheck(tree, out=print):
    """Run all checks, print one PASS/FAIL line each, return overall success."""
    all_ok = True
    for name, fn in CHECKS:
        start = time.perf_counter()
        try:
            ok, detail = fn(tree)
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"error: {exc!r}"
        all_ok &= bool(ok)
        out(f"{'PASS' if ok else 'FAIL'}  {name}: {detail} "
            f"[{time.perf_counter() - start:.2f} s]")
    return all_ok
