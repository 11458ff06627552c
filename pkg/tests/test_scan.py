import copy
import math

import numpy as np
import pytest

from spinfaraday import config as cfg
from spinfaraday import io as sfio
from spinfaraday import units
from spinfaraday.errors import ConfigError, DomainError
from spinfaraday.physics import TrionParameters, complex_transmission
from spinfaraday.polarimetry import mixed_reading
from spinfaraday.scan import (SweepSpec, prepared_polarization, rotation_vs_preparation,
                              run_map, run_sweep)


def spectrum(tree, **overrides):
    spec = SweepSpec.from_section(tree["spectrum"])
    return run_sweep(SweepSpec(spec.axis1, np.linspace(-3.0, 3.0, 1201),
                               overrides={**spec.overrides, **overrides}), tree)


def fwhm(x, depth):
    """Full width at half maximum by linear interpolation of a single dip."""
    half = depth.max() / 2
    above = np.flatnonzero(depth >= half)
    i, j = above[0], above[-1]
    left = np.interp(half, [depth[i - 1], depth[i]], [x[i - 1], x[i]])
    right = np.interp(half, [depth[j + 1], depth[j]], [x[j + 1], x[j]])
    return right - left


def test_circular_probe_spectrum(tree):
    ds = spectrum(tree, **{"probe.polarization": "circular"})
    assert np.all(ds.columns["diff"] == 0.0)
    s0 = 2 * (20.0 / tree["dot"]["p_sat_nw"])  # on-resonance saturation, rabi == gamma
    width = fwhm(ds.axes[0][1], 1 - ds.columns["sum_norm"])
    assert width == pytest.approx(0.30 * math.sqrt(1 + s0), rel=0.01)


def test_spectrum_records_sweep_mode(tree):
    ds = spectrum(tree)
    assert ds.metadata["mode"] == "sweep laser"
    assert ds.shape == (1201,)


def voltage_sweep(tree, mode, points=71, detuning=30.0, **extra):
    spec = SweepSpec("field.gate_mv", np.linspace(390.0, 460.0, points),
                     overrides={"prep.mode": mode, "probe.detuning_ghz": detuning,
                                "probe.reference": "sigma_plus", **extra})
    return run_sweep(spec, tree)


def test_fig2a_analog(tree):
    ds = voltage_sweep(tree, "sigma_minus")
    v, diff = ds.axes[0][1], ds.columns["diff"]
    params = cfg.trion_parameters(tree)
    probe = cfg.probe_field(cfg.apply_overrides(copy.deepcopy(tree), [
        "probe.detuning_ghz=30", "probe.reference=sigma_plus"]), params)
    full_up = mixed_reading(1.0, probe, 0.415, 1.0, params).diff
    offset = mixed_reading(0.0, probe, 0.415, 1.0, params).diff
    i415 = int(np.argmin(np.abs(v - 415.0)))
    assert diff[i415] == pytest.approx(full_up, rel=0.03)
    assert abs(diff[i415] - offset) > 0.5 * abs(full_up - offset)  # a jump, not the offset
    assert np.all(diff[v > 450.0] == 0.0)
    assert ds.metadata["mode"] == "sweep voltage"


def test_prep_polarity_at_415(tree):
    tree["field"]["gate_mv"] = 415.0
    out = {}
    for mode in ("sigma_minus", "sigma_plus"):
        spec = SweepSpec("probe.detuning_ghz", np.array([29.0, 30.0]),
                         overrides={"prep.mode": mode, "probe.reference": "sigma_plus"})
        out[mode] = run_sweep(spec, tree).columns["diff"][1]
    assert out["sigma_minus"] * out["sigma_plus"] < 0
    assert abs(out["sigma_plus"]) < abs(out["sigma_minus"])


def test_ideal_preparation_flips_sign_everywhere(tree):
    up = voltage_sweep(tree, "up").columns["diff"]
    down = voltage_sweep(tree, "down").columns["diff"]
    v = np.linspace(390.0, 460.0, 71)
    inside = v <= 450.0
    assert np.all(np.sign(up[inside]) == -np.sign(down[inside]))
    assert np.all(up[~inside] == 0.0) and np.all(down[~inside] == 0.0)


PROBE_GHZ = [30.0, 56.0, 66.0, 92.0]


def test_rotation_vs_preparation(tree):
    ds = rotation_vs_preparation(tree, PROBE_GHZ, np.array([-300.0, 0.0, 300.0]))
    theta = ds.columns["theta_urad_sigma_minus_prep"][:, 1]
    mags = np.abs(theta)
    assert np.all(np.diff(mags) < 0)
    assert theta[0] / theta[2] == pytest.approx(2.2, rel=0.02)
    # oracle: phase of the bare line response at 100 and 220 linewidths
    p = TrionParameters()
    ratio = np.angle(complex_transmission(100 * p.gamma, p)) / \
        np.angle(complex_transmission(220 * p.gamma, p))
    assert theta[0] / theta[2] == pytest.approx(ratio, rel=0.02)
    # sigma+ pumping prepares spin down: opposite direction
    assert np.all(ds.columns["theta_urad_sigma_plus_prep"][:, 1] * theta < 0)
    # far-detuned preparation leaves the unprepared offset
    for col in ("theta_urad_sigma_minus_prep", "theta_urad_sigma_plus_prep"):
        far = ds.columns[col][:, [0, 2]]
        unprep = ds.columns["theta_urad_unprepared"][:, [0, 2]]
        assert np.allclose(far, unprep, rtol=1e-3)
    assert np.all(ds.columns["theta_urad_singlet"] == 0.0)


def test_rotation_proportional_to_occupation(tree):
    ds = rotation_vs_preparation(tree, [30.0], np.linspace(-3, 3, 13))
    rho = ds.columns["rho_sigma_minus_prep"][0]
    theta = ds.columns["theta_urad_sigma_minus_prep"][0]
    slope, icpt = np.polyfit(rho, theta, 1)
    assert np.max(np.abs(theta - (slope * rho + icpt))) < 1e-3 * np.max(np.abs(theta))


def test_rotation_vs_preparation_linear_response_guard(tree):
    with pytest.raises(DomainError):
        rotation_vs_preparation(tree, [1.0], [0.0])


def map_spec(center_ghz, noise="none", time_ms=100.0, reference="sigma_minus", mode="sigma_plus"):
    return SweepSpec("field.gate_mv", np.linspace(390.0, 460.0, 71),
                     "probe.detuning_ghz", np.linspace(center_ghz - 2, center_ghz + 2, 21),
                     overrides={"prep.mode": mode, "probe.reference": reference},
                     measurement_time=units.ms_to_s(time_ms), noise=noise)


def test_map_inverse_detuning(tree):
    near = run_map(map_spec(56.0), tree)
    far = run_map(map_spec(92.0), tree)
    prepared = np.abs(near.columns["rho_prepared"]) > 0.9
    assert prepared.sum() >= 21
    ratio = near.columns["diff"][prepared] / far.columns["diff"][prepared]
    assert np.all(np.abs(ratio / 1.64 - 1) < 0.05)


def test_map_singlet_zone(tree):
    ds = run_map(map_spec(56.0), tree)
    v = ds.axes[0][1]
    assert np.all(ds.columns["diff"][v > 450.0] == 0.0)


def test_map_shot_noise_scaling(tree):
    clean = run_map(map_spec(56.0), tree).columns["diff"]
    short = run_map(map_spec(56.0, "shot", 100.0), tree, seed=1).columns["diff"] - clean
    long_ = run_map(map_spec(56.0, "shot", 60000.0), tree, seed=2).columns["diff"] - clean
    assert short.std() / long_.std() == pytest.approx(math.sqrt(600), rel=0.10)


def test_map_requires_voltage_and_detuning(tree):
    spec = SweepSpec("field.b_t", np.linspace(0.5, 1, 3), "probe.detuning_ghz", np.linspace(1, 2, 3))
    with pytest.raises(ConfigError):
        run_map(spec, tree)
    with pytest.raises(ConfigError):
        run_map(SweepSpec("field.gate_mv", np.linspace(400, 410, 3)), tree)


def test_deterministic_bytes_and_threads(tree):
    spec = map_spec(56.0, "shot")
    a = sfio.dataset_table("map", tree, run_map(spec, tree)).to_csv()
    b = sfio.dataset_table("map", tree, run_map(spec, tree)).to_csv()
    c = sfio.dataset_table("map", tree, run_map(spec, tree, threads=4)).to_csv()
    assert a == b == c


def test_mirror_symmetry(tree):
    a = voltage_sweep(tree, "sigma_minus", detuning=40.0, **{"probe.reference": "bare"})
    mirrored = copy.deepcopy(tree)
    mirrored["field"]["b_t"] = -tree["field"]["b_t"]
    b = voltage_sweep(mirrored, "sigma_plus", detuning=40.0, **{"probe.reference": "bare"})
    assert np.allclose(b.columns["diff"], -a.columns["diff"], rtol=1e-12, atol=0)
    assert np.allclose(b.columns["sum"], a.columns["sum"], rtol=1e-12, atol=0)


@pytest.mark.parametrize("mode", ["sigma_minus", "sigma_plus", "off"])
def test_continuity_inside_plateau(tree, mode):
    def steps(n):
        spec = SweepSpec("field.gate_mv", np.linspace(390.5, 449.5, n),
                         overrides={"prep.mode": mode, "probe.reference": "sigma_plus",
                                    "probe.detuning_ghz": 30.0})
        return np.max(np.abs(np.diff(run_sweep(spec, tree).columns["diff"])))

    coarse, fine = steps(591), steps(1181)
    assert fine <= 0.6 * coarse + 1e-9 * coarse


def test_unknown_axis_lists_valid_names(tree):
    with pytest.raises(ConfigError, match="probe.detuning_ghz"):
        run_sweep(SweepSpec("probe.detuning_mhz", np.linspace(0, 1, 3)), tree)


@pytest.mark.parametrize("values", [np.array([1.0]), np.array([0.0, np.inf])])
def test_axis_validation(tree, values):
    with pytest.raises(ConfigError):
        run_sweep(SweepSpec("probe.detuning_ghz", values), tree)


def test_zero_field_has_no_polarization(tree):
    tree["field"]["b_t"] = 0.0
    tree["prep"]["mode"] = "sigma_minus"
    assert prepared_polarization(tree) == 0.0
