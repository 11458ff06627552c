import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinfaraday import units
from spinfaraday.errors import ContractError, DomainError
from spinfaraday.physics import (IDENTITY, SIGMA_MINUS, ProbeField, SpinState,
                                 TrionParameters, calibrate_linewidth,
                                 complex_transmission, response_for_spin,
                                 susceptibility,
                                 saturation_parameter, scattering_rate,
                                 transition_detunings)
from spinfaraday.polarimetry import faraday_angle

PAIRS = [(30.0, 100.0), (56.0, 185.0), (66.0, 220.0), (92.0, 306.0)]


def lstsq_gamma_ghz():
    # independent oracle: numpy least squares of f = g * n through the origin
    n = np.array([[p[1]] for p in PAIRS])
    f = np.array([p[0] for p in PAIRS])
    return float(np.linalg.lstsq(n, f, rcond=None)[0][0])


def test_linewidth_calibration_matches_lstsq():
    fit, resid = calibrate_linewidth()
    assert fit == pytest.approx(lstsq_gamma_ghz(), rel=1e-12)
    assert fit == pytest.approx(0.30, rel=0.01)
    assert np.max(np.abs(resid)) < 0.02


def test_default_parameters_use_calibrated_linewidth(params):
    assert units.angular_to_ghz(params.gamma) == pytest.approx(0.30)
    assert params.gamma_hz == pytest.approx(0.30e9)


@pytest.mark.parametrize("field,value", [("alpha0", 1.5), ("alpha0", 0.0), ("gamma", -1.0),
                                         ("branching_ratio", 2.0), ("p_sat", 0.0)])
def test_parameter_validation(field, value):
    with pytest.raises(DomainError, match=field):
        TrionParameters(**{field: value})


def test_on_resonance_transmission(params):
    t = complex(complex_transmission(0.0, params))
    assert t == 1 - params.alpha0 / 2
    assert 1 - abs(t) ** 2 == pytest.approx(params.alpha0, rel=params.alpha0)


def test_alpha0_from_saturated_contrast():
    # contrast 0.15% measured at rabi == gamma, i.e. s = 2 on resonance
    from scipy.optimize import brentq

    def contrast(alpha0):
        p = TrionParameters(alpha0=alpha0)
        s = saturation_parameter(p.gamma, 0.0, p.gamma)
        return 1 - abs(complex(complex_transmission(0.0, p, s))) ** 2 - 0.0015

    assert saturation_parameter(1.0, 0.0, 1.0) == pytest.approx(2.0)
    assert brentq(contrast, 1e-4, 0.1) == pytest.approx(0.0045, rel=1e-3)


@pytest.mark.parametrize("k", [50.0, 100.0, 306.0, 1e3])
def test_inverse_detuning_phase(params, k):
    d = k * params.gamma
    ratio = np.angle(complex_transmission(2 * d, params)) / np.angle(complex_transmission(d, params))
    assert ratio == pytest.approx(0.5, rel=1e-3)


def test_phase_asymptote(params):
    d = 500 * params.gamma
    for s in (0.0, 0.5):
        phase = np.angle(complex_transmission(d, params, s))
        assert phase == pytest.approx(-params.alpha0 * params.gamma / (4 * d) / (1 + s), rel=1e-3)


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_non_finite_detuning(params, bad):
    with pytest.raises(DomainError):
        complex_transmission(bad, params)


def test_negative_saturation_rejected(params):
    with pytest.raises(DomainError):
        complex_transmission(0.0, params, -0.1)


def test_transition_detunings(params):
    dp, dm = transition_detunings(0.0, 0.415, 1.0, params)
    assert dp - dm == pytest.approx(-units.ghz_to_angular(26.0), rel=1e-12)
    for v in (0.39, 0.415, 0.44):
        dp, dm = transition_detunings(1e9, v, 0.0, params)
        assert dp == dm


def test_probe_92ghz_is_306_linewidths(params):
    gamma = units.ghz_to_angular(lstsq_gamma_ghz())
    p = TrionParameters(gamma=gamma)
    offset = units.ghz_to_angular(92.0 + 13.0)  # 92 GHz above the sigma+ line at +13 GHz
    dp, _ = transition_detunings(offset, 0.415, 1.0, p)
    assert dp / p.gamma == pytest.approx(306, rel=0.01)


def test_stark_shift_is_common(params):
    a = transition_detunings(0.0, 0.415, 1.0, params)
    b = transition_detunings(0.0, 0.450, 1.0, params)
    shift = units.ghz_to_angular(15.0)
    assert a[0] - b[0] == pytest.approx(shift, rel=1e-9)
    assert a[1] - b[1] == pytest.approx(shift, rel=1e-9)


def _near_minus(params, k=5.0):
    return ProbeField(-units.ghz_to_angular(13.0) + k * params.gamma, 1e-9)


def test_response_singlet(params):
    assert response_for_spin(SpinState.singlet(), _near_minus(params), 0.415, 1.0, params) == IDENTITY


def test_response_down_addresses_sigma_minus(params):
    r = response_for_spin(SpinState.down(), _near_minus(params), 0.415, 1.0, params)
    assert r.t_plus == 1
    assert r.t_minus != 1


def test_response_up_addresses_sigma_plus(params):
    r = response_for_spin(SpinState.up(), _near_minus(params), 0.415, 1.0, params)
    assert r.t_minus == 1
    assert r.t_plus != 1


@pytest.mark.parametrize("spin", [SpinState.up(), SpinState.down()])
def test_response_outside_plateau(params, spin):
    assert response_for_spin(spin, _near_minus(params), 0.460, 1.0, params) == IDENTITY


def test_response_mixed_is_contract_violation(params):
    with pytest.raises(ContractError):
        response_for_spin(SpinState.mixed(0.3), _near_minus(params), 0.415, 1.0, params)


def test_response_unit_modulus_bound(params):
    r = response_for_spin(SpinState.down(), _near_minus(params, 0.0), 0.415, 1.0, params)
    assert abs(r.t_minus) <= 1 and abs(r.t_plus) <= 1


def test_probe_polarization_normalized():
    with pytest.raises(DomainError):
        ProbeField(0.0, 1e-9, polarization=(1.0, 1.0))


def test_rabi_scales_as_sqrt_power(params):
    a = ProbeField(0.0, 1e-7).rabi(params)
    b = ProbeField(0.0, 2e-7).rabi(params)
    assert b / a == pytest.approx(math.sqrt(2))
    assert ProbeField(0.0, params.p_sat).rabi(params) == pytest.approx(params.gamma)


def test_scattering_rate_examples(params):
    assert scattering_rate(0.0, 0.0, params) == 0.0
    rabi = ProbeField(0.0, 1e-6).rabi(params)
    assert rabi ** 2 == pytest.approx(50 * params.gamma ** 2)
    delta = 306 * params.gamma
    # hand evaluation of (Gamma/2) s/(1+s)
    s = (rabi ** 2 / 2) / (delta ** 2 + params.gamma ** 2 / 4)
    expected = params.gamma / 2 * s / (1 + s)
    rate = scattering_rate(rabi, delta, params)
    assert rate == pytest.approx(expected, rel=1e-12)
    assert 2e-6 <= 1 / rate <= 18e-6
    assert 20e-3 <= 1 / (rate * 1e-4) <= 180e-3


def test_scattering_rate_monotone(params):
    g = params.gamma
    rabis = np.linspace(0, 5, 30) * g
    assert np.all(np.diff(scattering_rate(rabis, 3 * g, params)) > 0)
    deltas = np.linspace(0, 50, 30) * g
    assert np.all(np.diff(scattering_rate(g, deltas, params)) < 0)


# -- properties ---------------------------------------------------------------

def test_susceptibility_is_one_minus_t(params):
    d = np.linspace(-20, 20, 101) * params.gamma
    assert np.allclose(1 - complex_transmission(d, params, 0.3), susceptibility(d, params, 0.3),
                       rtol=0, atol=1e-15)


def test_parity(params):
    d = np.linspace(-50, 50, 1000) * params.gamma
    chi, chi_r = susceptibility(d, params), susceptibility(-d, params)
    assert np.max(np.abs(chi.real - chi_r.real)) < 1e-12
    assert np.max(np.abs(chi.imag + chi_r.imag)) < 1e-12


@given(st.floats(0.01, 1e4), st.booleans())
def test_dispersive_ratio(k, neg):
    p = TrionParameters()
    d = (-k if neg else k) * p.gamma
    chi = complex(susceptibility(d, p))
    assert abs(chi.imag / chi.real) == pytest.approx(2 * k, rel=1e-9)


def test_dispersive_dominance_at_340(params):
    chi = complex(susceptibility(340 * params.gamma, params))
    assert abs(chi.imag / chi.real) == pytest.approx(680, rel=1e-9)


@given(st.floats(-1e4, 1e4), st.floats(0, 100), st.floats(1e-4, 0.99))
def test_intensity_transmission_bound(k, s, alpha0):
    p = TrionParameters(alpha0=alpha0)
    t = complex(complex_transmission(k * p.gamma, p, s))
    assert abs(t) ** 2 >= 1 - alpha0 - 1e-15
    assert abs(t) <= 1


def test_sign_conditionality_outside_lines(params):
    # probe blue of both lines: the two spin states rotate in opposite directions
    probe = ProbeField(units.ghz_to_angular(13.0) + 100 * params.gamma, 1e-6)
    up = faraday_angle(response_for_spin(SpinState.up(), probe, 0.415, 1.0, params))
    down = faraday_angle(response_for_spin(SpinState.down(), probe, 0.415, 1.0, params))
    assert up * down < 0
    assert down > 0


def test_between_lines_same_direction(params):
    # with the probe exactly between the lines both states rotate the same way
    probe = ProbeField(0.0, 1e-6)
    up = faraday_angle(response_for_spin(SpinState.up(), probe, 0.415, 1.0, params))
    down = faraday_angle(response_for_spin(SpinState.down(), probe, 0.415, 1.0, params))
    assert up == pytest.approx(down, rel=1e-12)


@settings(max_examples=50)
@given(st.floats(30.5, 1e4), st.floats(0, 0.3))
def test_scattering_asymptote(k, rabi_in_gamma):
    p = TrionParameters()
    rabi, delta = rabi_in_gamma * p.gamma, k * p.gamma
    exact = scattering_rate(rabi, delta, p)
    assert exact == pytest.approx(rabi ** 2 * p.gamma / (4 * delta ** 2), rel=0.01, abs=1e-300)


def test_circular_polarization_constant():
    assert abs(SIGMA_MINUS[0]) == 0 and abs(SIGMA_MINUS[1]) == 1
