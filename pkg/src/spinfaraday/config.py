"""Run configuration: schema, defaults, loading and conversion to SI objects.

Config files are TOML. Every physical quantity carries its unit in the
key name (``_ghz``, ``_mv``, ``_nw``, ``_ms``, ...). Unknown keys are
rejected. This module is the only place laboratory units are turned into
the SI objects used by the physics code.
"""

from __future__ import annotations

import copy
import difflib
import json
import math
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import units
from .dynamics import CotunnelingModel, PrepLaser
from .errors import ConfigError, ConfigFileNotFound, ConfigParseError
from .physics import (LINEAR_X, SIGMA_MINUS, SIGMA_PLUS, ProbeField, TrionParameters,
                      line_offset)

BUNDLED_DEFAULT = Path(__file__).with_name("data") / "default.toml"

POLARIZATIONS = {
    "linear": LINEAR_X,
    "circular": SIGMA_MINUS,  # couples the spin-down line
    "sigma_plus": SIGMA_PLUS,
    "sigma_minus": SIGMA_MINUS,
}
REFERENCES = ("bare", "sigma_plus", "sigma_minus")
PREP_MODES = ("off", "sigma_plus", "sigma_minus", "up", "down")
NOISE_MODES = ("none", "shot")
SWEEP_SECTIONS = ("spectrum", "map")


def _positive(x):
    return x > 0


def _nonneg(x):
    return x >= 0


def _unit_interval_open(x):
    return 0 < x < 1


def _efficiency(x):
    return 0 < x <= 1


def _auto_or_number(x):
    return x == "auto" or (isinstance(x, (int, float)) and not isinstance(x, bool))


def _sweep_defaults(axis1, range1, points1, axis2="", range2=(0.0, 1.0), points2=2,
                    overrides=None, time_ms=100.0, noise="none"):
    return {
        "axis1": axis1, "axis1_range": list(range1), "axis1_points": points1,
        "axis2": axis2, "axis2_range": list(range2), "axis2_points": points2,
        "set": dict(overrides or {}),
        "measurement_time_ms": time_ms,
        "noise": noise,
    }


# section -> key -> (default, constraint or None, description of constraint)
SCHEMA = {
    "dot": {
        "gamma_ghz": (0.30, _positive, "> 0"),
        "alpha0": (0.0045, _unit_interval_open, "0 < alpha0 < 1"),
        "zeeman_ghz_per_t": (26.0, _nonneg, ">= 0"),
        "stark_ghz_per_v": (15.0 / 0.035, None, ""),
        "resonance_mv": (415.0, None, ""),
        "plateau_min_mv": (390.0, None, ""),
        "plateau_max_mv": (450.0, None, ""),
        "branching_ratio": (1e-4, _unit_interval_open, "0 < branching_ratio < 1"),
        "wavelength_nm": (950.0, _positive, "> 0"),
        "p_sat_nw": (20.0, _positive, "> 0"),
        "t1_ms": (1.0, _positive, "> 0"),
        "cotunneling_edge_per_s": (1e6, _nonneg, ">= 0"),
        "cotunneling_center_per_s": (0.0, _nonneg, ">= 0"),
        "cotunneling_length_mv": (2.0, _nonneg, ">= 0"),
    },
    "field": {
        "b_t": (1.0, None, ""),
        "gate_mv": (415.0, None, ""),
    },
    "probe": {
        "detuning_ghz": (66.0, None, ""),
        "reference": ("sigma_plus", REFERENCES.__contains__, f"one of {REFERENCES}"),
        "power_nw": (1000.0, _nonneg, ">= 0"),
        "polarization": ("linear", POLARIZATIONS.__contains__,
                         f"one of {tuple(POLARIZATIONS)}"),
    },
    "prep": {
        "mode": ("off", PREP_MODES.__contains__, f"one of {PREP_MODES}"),
        "offset_ghz": (0.0, None, ""),
        "rabi_gamma": (1.0, _nonneg, ">= 0"),
    },
    "detector": {
        "efficiency": (0.1, _efficiency, "0 < efficiency <= 1"),
        "analysis_deg": (45.0, None, ""),
    },
    "spectrum": _sweep_defaults(
        "probe.detuning_ghz", (-3.0, 3.0), 241,
        overrides={"probe.reference": "sigma_minus", "probe.power_nw": 20.0,
                   "field.gate_mv": 415.0},
        time_ms=60000.0),
    "map": _sweep_defaults(
        "field.gate_mv", (390.0, 460.0), 71,
        axis2="probe.detuning_ghz", range2=(28.0, 32.0), points2=21,
        overrides={"prep.mode": "sigma_minus"}, time_ms=100.0, noise="shot"),
    "prepare": {
        "offset_range_ghz": [-3.0, 3.0],
        "points": 121,
        "probe_detunings_ghz": [30.0, 66.0],
    },
    "budget": {
        "beta_sweep": [1e-4, 1e-3],
        "spin": ("down", ("up", "down").__contains__, "'up' or 'down'"),
    },
    "trajectory": {
        "duration_ms": (2000.0, _positive, "> 0"),
        "bin_ms": (20.0, _positive, "> 0"),
        "initial_spin": ("steady", ("steady", "up", "down").__contains__,
                         "'steady', 'up' or 'down'"),
        "fidelity_threshold": ("auto", _auto_or_number, "'auto' or a number"),
    },
    "seed": (20071, None, ""),
}


def _default_value(entry):
    return copy.deepcopy(entry[0]) if isinstance(entry, tuple) else copy.deepcopy(entry)


def default_tree():
    tree = {}
    for section, body in SCHEMA.items():
        if isinstance(body, tuple):
            tree[section] = _default_value(body)
        else:
            tree[section] = {k: _default_value(v) for k, v in body.items()}
    return tree


def valid_keys():
    keys = []
    for section, body in SCHEMA.items():
        if isinstance(body, tuple):
            keys.append(section)
        else:
            keys.extend(f"{section}.{k}" for k in body)
    return keys


def numeric_keys():
    """Dotted keys that hold a scalar number (valid sweep axes)."""
    tree = default_tree()
    out = []
    for key in valid_keys():
        value = get_key(tree, key)
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            out.append(key)
    return out


def _unknown(key, choices):
    near = difflib.get_close_matches(key, choices, n=1, cutoff=0.0)
    hint = f"; nearest valid key: {near[0]!r}" if near else ""
    return ConfigError(f"unknown key {key!r}{hint}")


def get_key(tree, dotted):
    node = tree
    for part in dotted.split("."):
        node = node[part]
    return node


def set_key(tree, dotted, value):
    """Set ``dotted`` in ``tree`` after checking it names a schema key."""
    if dotted not in valid_keys():
        raise _unknown(dotted, valid_keys())
    parts = dotted.split(".")
    node = tree
    for part in parts[:-1]:
        node = node[part]
    node[parts[-1]] = value


def _merge(tree, data, prefix=""):
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if prefix == "" and key in tree and isinstance(tree[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{dotted}: expected a table")
            for sub in value:
                if sub not in tree[key]:
                    choices = [f"{key}.{k}" for k in tree[key]]
                    raise _unknown(f"{key}.{sub}", choices)
            _merge_section(tree[key], value, key)
        elif prefix == "" and key in tree:
            tree[key] = value
        else:
            raise _unknown(dotted, valid_keys())


def _merge_section(section, data, name):
    for key, value in data.items():
        if key == "set" and name in SWEEP_SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"{name}.set: expected a table of overrides")
            section["set"] = dict(value)
        else:
            section[key] = value


def _check_number(dotted, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{dotted}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{dotted}: must be finite")


def validate(tree):
    """Check types and constraints; raises ConfigError naming the key."""
    for section, body in SCHEMA.items():
        if isinstance(body, tuple):
            entries = {section: (tree[section], body)}
        elif section in SWEEP_SECTIONS:
            _validate_sweep(section, tree[section])
            continue
        else:
            entries = {f"{section}.{k}": (tree[section][k], spec)
                       for k, spec in body.items() if isinstance(spec, tuple)}
        for dotted, (value, spec) in entries.items():
            default, check, rule = spec
            if isinstance(default, (int, float)) and not isinstance(default, bool):
                _check_number(dotted, value)
            if check is not None and not check(value):
                raise ConfigError(f"{dotted}={value!r} violates constraint {rule}")
    dot = tree["dot"]
    if not dot["plateau_min_mv"] < dot["resonance_mv"] < dot["plateau_max_mv"]:
        raise ConfigError("dot.resonance_mv must lie strictly inside "
                          "[dot.plateau_min_mv, dot.plateau_max_mv]")
    if not isinstance(tree["seed"], int) or isinstance(tree["seed"], bool) or tree["seed"] < 0:
        raise ConfigError("seed: must be a non-negative integer")
    prep = tree["prepare"]
    _check_range("prepare.offset_range_ghz", prep["offset_range_ghz"])
    _check_points("prepare.points", prep["points"])
    for d in prep["probe_detunings_ghz"]:
        _check_number("prepare.probe_detunings_ghz", d)
    for b in tree["budget"]["beta_sweep"]:
        _check_number("budget.beta_sweep", b)
        if not 0 < b < 1:
            raise ConfigError("budget.beta_sweep entries must lie in (0, 1)")
    traj = tree["trajectory"]
    if traj["duration_ms"] < traj["bin_ms"]:
        raise ConfigError("trajectory.duration_ms must be >= trajectory.bin_ms")
    # building the physics objects runs their own invariant checks
    try:
        trion_parameters(tree)
    except ValueError as exc:
        raise ConfigError(f"dot: {exc}") from exc
    return tree


def _check_range(dotted, rng):
    if not (isinstance(rng, (list, tuple)) and len(rng) == 2):
        raise ConfigError(f"{dotted}: expected [start, stop]")
    for x in rng:
        _check_number(dotted, x)


def _check_points(dotted, n):
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ConfigError(f"{dotted}: need an integer >= 2")


def _validate_sweep(name, sweep):
    axes = numeric_keys()
    for i in (1, 2):
        axis = sweep[f"axis{i}"]
        if i == 2 and axis == "":
            continue
        if axis not in axes:
            raise ConfigError(f"{name}.axis{i}: unknown sweep parameter {axis!r}; "
                              f"valid names: {', '.join(axes)}")
        _check_range(f"{name}.axis{i}_range", sweep[f"axis{i}_range"])
        _check_points(f"{name}.axis{i}_points", sweep[f"axis{i}_points"])
    for key, value in sweep["set"].items():
        if key not in valid_keys() or key.split(".")[0] in SWEEP_SECTIONS:
            raise _unknown(f"{name}.set.{key}", valid_keys())
    _check_number(f"{name}.measurement_time_ms", sweep["measurement_time_ms"])
    if sweep["measurement_time_ms"] <= 0:
        raise ConfigError(f"{name}.measurement_time_ms must be > 0")
    if sweep["noise"] not in NOISE_MODES:
        raise ConfigError(f"{name}.noise must be one of {NOISE_MODES}")


def parse_value(text):
    """Parse a --set value as a TOML value, falling back to a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(tree, assignments):
    tree = copy.deepcopy(tree)
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, text = item.split("=", 1)
        key = key.strip()
        if key.split(".")[0] in SWEEP_SECTIONS and key.split(".")[1:2] == ["set"]:
            section, _, sub = key.split(".", 2)
            tree[section]["set"][sub] = parse_value(text.strip())
            continue
        set_key(tree, key, parse_value(text.strip()))
    return validate(tree)


@dataclass(frozen=True)
class RunConfig:
    """A validated, fully resolved configuration tree."""

    tree: dict

    def to_json(self):
        return json.dumps(self.tree, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_tree(cls, tree):
        merged = default_tree()
        _merge(merged, tree)
        return cls(validate(merged))

    def with_overrides(self, assignments):
        return RunConfig(apply_overrides(self.tree, assignments))

    @property
    def seed(self):
        return self.tree["seed"]

    def echo(self):
        """Human-readable summary of the key resolved values."""
        params = trion_parameters(self.tree)
        return (f"Gamma/2pi = {params.gamma_hz / 1e9:.2f} GHz\n"
                f"Delta_Z(1 T) = {params.zeeman_split_per_tesla / 1e9:.2f} GHz\n"
                f"plateau = [{self.tree['dot']['plateau_min_mv']:g}, "
                f"{self.tree['dot']['plateau_max_mv']:g}] mV\n"
                f"seed = {self.seed}")


def load_config(path=None) -> RunConfig:
    """Load a TOML config, merge it over the defaults and validate it."""
    if path is None:
        path = BUNDLED_DEFAULT
    path = Path(path)
    if not path.is_file():
        raise ConfigFileNotFound(f"config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text())
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    return RunConfig.from_tree(data)


# SI conversion layer

def trion_parameters(tree) -> TrionParameters:
    dot = tree["dot"]
    return TrionParameters(
        gamma=units.ghz_to_angular(dot["gamma_ghz"]),
        alpha0=dot["alpha0"],
        zeeman_split_per_tesla=dot["zeeman_ghz_per_t"] * 1e9,
        stark_slope=dot["stark_ghz_per_v"] * 1e9,
        resonance_voltage_prep=units.mv_to_v(dot["resonance_mv"]),
        plateau=(units.mv_to_v(dot["plateau_min_mv"]), units.mv_to_v(dot["plateau_max_mv"])),
        branching_ratio=dot["branching_ratio"],
        wavelength=units.nm_to_m(dot["wavelength_nm"]),
        p_sat=units.nw_to_w(dot["p_sat_nw"]),
    )


def gate_voltage(tree):
    return units.mv_to_v(tree["field"]["gate_mv"])


def b_field(tree):
    return float(tree["field"]["b_t"])


def probe_field(tree, params=None) -> ProbeField:
    """Probe with detuning converted to the bare-transition reference.

    ``probe.detuning_ghz`` is measured from the ``probe.reference`` line as
    positioned at the preparation-resonance voltage and the configured field.
    """
    params = params or trion_parameters(tree)
    probe = tree["probe"]
    ref = line_offset(probe["reference"], params.resonance_voltage_prep, b_field(tree), params)
    return ProbeField(
        detuning=units.ghz_to_angular(probe["detuning_ghz"]) + ref,
        power=units.nw_to_w(probe["power_nw"]),
        polarization=POLARIZATIONS[probe["polarization"]],
    )


def prep_laser(tree, params=None):
    params = params or trion_parameters(tree)
    prep = tree["prep"]
    if prep["mode"] not in ("sigma_plus", "sigma_minus"):
        return None
    return PrepLaser(prep["mode"], prep["rabi_gamma"] * params.gamma,
                     units.ghz_to_angular(prep["offset_ghz"]))


def cotunneling_model(tree):
    dot = tree["dot"]
    return CotunnelingModel(dot["cotunneling_edge_per_s"], dot["cotunneling_center_per_s"],
                            units.mv_to_v(dot["cotunneling_length_mv"]))


def t1(tree):
    return units.ms_to_s(tree["dot"]["t1_ms"])


def efficiency(tree):
    return tree["detector"]["efficiency"]


def analysis_angle(tree):
    return math.radians(tree["detector"]["analysis_deg"])
