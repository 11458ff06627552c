"""Parameter sweeps over a run configuration.

A sweep varies one or two numeric config keys over linear grids. Every
grid point is evaluated independently from a copy of the config tree, so
points can run on a thread pool; results are assembled in grid order and
shot-noise streams are seeded per point from (seed, point index), which
keeps the output independent of the thread count.
"""

from __future__ import annotations

import copy
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import config as cfg
from . import units
from .dynamics import preparation_steady_state
from .errors import ConfigError, DomainError
from .polarimetry import angle_from_ratio, mixed_reading

COLUMNS = ("sum", "diff", "sum_norm", "diff_norm", "theta_urad", "rho_prepared")


@dataclass(frozen=True)
class SweepSpec:
    axis1: str
    axis1_values: np.ndarray
    axis2: str = ""
    axis2_values: np.ndarray = field(default_factory=lambda: np.empty(0))
    overrides: dict = field(default_factory=dict)
    measurement_time: float = 0.1
    noise: str = "none"

    @classmethod
    def from_section(cls, section):
        """Build from a ``[spectrum]``/``[map]`` config section."""
        def grid(i):
            start, stop = section[f"axis{i}_range"]
            return np.linspace(start, stop, section[f"axis{i}_points"])

        axis2 = section["axis2"]
        return cls(
            axis1=section["axis1"],
            axis1_values=grid(1),
            axis2=axis2,
            axis2_values=grid(2) if axis2 else np.empty(0),
            overrides=dict(section["set"]),
            measurement_time=units.ms_to_s(section["measurement_time_ms"]),
            noise=section["noise"],
        )

    @property
    def shape(self):
        if self.axis2:
            return (len(self.axis1_values), len(self.axis2_values))
        return (len(self.axis1_values),)

    def validate(self, min_points=2):
        names = cfg.numeric_keys()
        for axis, values in ((self.axis1, self.axis1_values), (self.axis2, self.axis2_values)):
            if axis == "" and axis is self.axis2:
                continue
            if axis not in names:
                raise ConfigError(f"unknown sweep parameter {axis!r}; valid names: "
                                  f"{', '.join(names)}")
            if len(values) < min_points or not np.all(np.isfinite(values)):
                raise ConfigError(f"axis {axis!r} needs >= {min_points} finite points")
        if self.noise not in cfg.NOISE_MODES:
            raise ConfigError(f"noise must be one of {cfg.NOISE_MODES}")
        if not self.measurement_time > 0:
            raise ConfigError("measurement time must be > 0")

    def describe(self):
        return {
            "axis1": self.axis1, "axis1_values": [float(v) for v in self.axis1_values],
            "axis2": self.axis2, "axis2_values": [float(v) for v in self.axis2_values],
            "set": dict(self.overrides), "measurement_time_s": self.measurement_time,
            "noise": self.noise,
        }


@dataclass
class Dataset:
    axes: list
    columns: dict
    metadata: dict

    @property
    def shape(self):
        return tuple(len(values) for _, values in self.axes)

    def column(self, name):
        return self.columns[name]


def sweep_mode(spec: SweepSpec):
    """'sweep laser', 'sweep voltage' or both, for the dataset metadata."""
    axes = {spec.axis1, spec.axis2}
    modes = []
    if "probe.detuning_ghz" in axes:
        modes.append("sweep laser")
    if "field.gate_mv" in axes:
        modes.append("sweep voltage")
    return " + ".join(modes) or "other"


def prepared_polarization(tree, params=None):
    """Spin polarization set by the preparation configuration at this point."""
    params = params or cfg.trion_parameters(tree)
    v = cfg.gate_voltage(tree)
    if not params.in_plateau(v):
        return 0.0
    if params.zeeman_splitting(cfg.b_field(tree)) == 0:
        # degenerate lines: hyperfine mixing leaves no net polarization
        return 0.0
    mode = tree["prep"]["mode"]
    if mode == "up":
        return 1.0
    if mode == "down":
        return -1.0
    laser = cfg.prep_laser(tree, params)
    if laser is None:
        return 0.0
    kappa = cfg.cotunneling_model(tree).rate(v, params)
    return preparation_steady_state(laser.detuning(v, params), laser.rabi, v, params,
                                    cotunneling_rate=kappa, pumped=laser.line,
                                    t1=cfg.t1(tree))


def evaluate_point(tree):
    """Noise-free record for one fully specified configuration."""
    params = cfg.trion_parameters(tree)
    probe = cfg.probe_field(tree, params)
    rho = prepared_polarization(tree, params)
    eff = cfg.efficiency(tree)
    angle = cfg.analysis_angle(tree)
    reading = mixed_reading(rho, probe, cfg.gate_voltage(tree), cfg.b_field(tree), params,
                            angle, eff)
    norm = eff * units.photon_flux(probe.power, params.wavelength)
    return {
        "sum": reading.sum,
        "diff": reading.diff,
        "sum_norm": reading.sum / norm if norm > 0 else 0.0,
        "diff_norm": reading.diff / norm if norm > 0 else 0.0,
        "theta_urad": reading.theta * 1e6,
        "rho_prepared": rho,
        "_norm": norm,
        "_angle": angle,
    }


def point_rng(seed, index):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def _add_shot_noise(record, t_meas, rng):
    # Gaussian approximation of Poisson difference counts, valid for counts >> 1
    sigma = math.sqrt(record["sum"] * t_meas) / t_meas
    diff = record["diff"] + sigma * rng.standard_normal()
    record["diff"] = diff
    norm = record["_norm"]
    record["diff_norm"] = diff / norm if norm > 0 else 0.0
    record["theta_urad"] = angle_from_ratio(diff, record["sum"], record["_angle"]) * 1e6
    return record


def _resolve(tree, spec: SweepSpec):
    base = copy.deepcopy(tree)
    for key, value in spec.overrides.items():
        cfg.set_key(base, key, value)
    return base


def run_sweep(spec: SweepSpec, tree, seed=None, threads=1, min_points=2) -> Dataset:
    """Evaluate ``spec`` over its grid on top of the config ``tree``."""
    spec.validate(min_points)
    base = _resolve(tree, spec)
    cfg.validate(base)
    seed = base["seed"] if seed is None else seed
    points = []
    if spec.axis2:
        for a in spec.axis1_values:
            for b in spec.axis2_values:
                points.append((float(a), float(b)))
    else:
        points = [(float(a),) for a in spec.axis1_values]
    names = [spec.axis1] + ([spec.axis2] if spec.axis2 else [])

    def work(item):
        index, values = item
        point = copy.deepcopy(base)
        for name, value in zip(names, values):
            cfg.set_key(point, name, value)
        record = evaluate_point(point)
        if spec.noise == "shot":
            record = _add_shot_noise(record, spec.measurement_time, point_rng(seed, index))
        return record

    items = list(enumerate(points))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(work, items))
    else:
        records = [work(item) for item in items]

    shape = spec.shape
    columns = {name: np.array([r[name] for r in records], dtype=float).reshape(shape)
               for name in COLUMNS}
    axes = [(spec.axis1, np.asarray(spec.axis1_values, dtype=float))]
    if spec.axis2:
        axes.append((spec.axis2, np.asarray(spec.axis2_values, dtype=float)))
    metadata = {
        "config": tree,
        "sweep": spec.describe(),
        "seed": seed,
        "mode": sweep_mode(spec),
    }
    return Dataset(axes, columns, metadata)


def run_map(spec: SweepSpec, tree, seed=None, threads=1) -> Dataset:
    """Two-axis map over gate voltage and probe detuning."""
    if not spec.axis2:
        raise ConfigError("a map needs two axes (axis2 is empty)")
    if {spec.axis1, spec.axis2} != {"field.gate_mv", "probe.detuning_ghz"}:
        raise ConfigError("map axes must be field.gate_mv and probe.detuning_ghz, got "
                          f"{spec.axis1!r} and {spec.axis2!r}")
    return run_sweep(spec, tree, seed=seed, threads=threads)


def rotation_vs_preparation(tree, probe_detunings_ghz, prep_offsets_ghz, threads=1) -> Dataset:
    """Faraday angle versus preparation-laser detuning.

    ``probe_detunings_ghz`` are measured from the sigma+ line. For every
    probe setting the sweep is run with sigma- pumping (spin up), sigma+
    pumping (spin down), no preparation, and with the dot in the two-electron
    singlet regime.
    """
    params = cfg.trion_parameters(tree)
    gamma_ghz = units.angular_to_ghz(params.gamma)
    split_ghz = params.zeeman_split_per_tesla * cfg.b_field(tree) / 1e9
    for d in probe_detunings_ghz:
        nearest = min(abs(d), abs(d + split_ghz))
        if nearest <= 10 * gamma_ghz:
            raise DomainError(f"probe detuning {d} GHz within 10 linewidths of a line; "
                              "outside linear-response validity")
    offsets = np.asarray(prep_offsets_ghz, dtype=float)
    base = copy.deepcopy(tree)
    base["probe"]["reference"] = "sigma_plus"
    cases = {
        "sigma_minus_prep": {"prep.mode": "sigma_minus"},
        "sigma_plus_prep": {"prep.mode": "sigma_plus"},
        "unprepared": {"prep.mode": "off"},
    }
    columns = {}
    for label, overrides in cases.items():
        spec = SweepSpec("probe.detuning_ghz", np.asarray(probe_detunings_ghz, dtype=float),
                         "prep.offset_ghz", offsets, overrides=overrides)
        ds = run_sweep(spec, base, threads=threads, min_points=1)
        columns[f"theta_urad_{label}"] = ds.columns["theta_urad"]
        columns[f"rho_{label}"] = ds.columns["rho_prepared"]
    singlet = copy.deepcopy(base)
    singlet["field"]["gate_mv"] = singlet["dot"]["plateau_max_mv"] + 10.0
    spec = SweepSpec("probe.detuning_ghz", np.asarray(probe_detunings_ghz, dtype=float),
                     "prep.offset_ghz", offsets, overrides={"prep.mode": "sigma_minus"})
    columns["theta_urad_singlet"] = run_sweep(spec, singlet, threads=threads,
                                              min_points=1).columns["theta_urad"]
    axes = [("probe.detuning_ghz", np.asarray(probe_detunings_ghz, dtype=float)),
            ("prep.offset_ghz", offsets)]
    metadata = {"config": tree, "seed": tree["seed"], "mode": "sweep preparation",
                "probe_reference": "sigma_plus",
                "sweep": {"probe_detunings_ghz": list(map(float, probe_detunings_ghz)),
                          "prep_offsets_ghz": [float(v) for v in offsets]}}
    return Dataset(axes, columns, metadata)
