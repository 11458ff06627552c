"""Laboratory-unit <-> SI conversions.

Everything inside the package works in SI with angular frequencies
(rad/s). Config files and reports use GHz, mV, nW, ms. All crossings
between the two go through this module.
"""

import math

TWO_PI = 2.0 * math.pi
PLANCK = 6.62607015e-34  # J s
SPEED_OF_LIGHT = 299792458.0  # m/s


def hz_to_angular(f_hz):
    return TWO_PI * f_hz


def angular_to_hz(w):
    return w / TWO_PI


def ghz_to_angular(f_ghz):
    return TWO_PI * f_ghz * 1e9


def angular_to_ghz(w):
    return w / TWO_PI / 1e9


def mv_to_v(v_mv):
    return v_mv * 1e-3


def v_to_mv(v):
    return v * 1e3


def nw_to_w(p_nw):
    return p_nw * 1e-9


def ms_to_s(t_ms):
    return t_ms * 1e-3


def nm_to_m(x_nm):
    return x_nm * 1e-9


def photon_energy(wavelength):
    """Photon energy in joules for a vacuum wavelength in metres."""
    return PLANCK * SPEED_OF_LIGHT / wavelength


def photon_flux(power, wavelength):
    """Photons per second carried by ``power`` watts at ``wavelength``."""
    return power / photon_energy(wavelength)
