"""Scenario resolution and batch runners shared by the CLI and tests.

A scenario is a flat option set (config file and command line both map onto
it) that resolves into parameters, an initial state, a search window, and a
time grid.  Runners return in-memory results; CSV emission lives in csvio.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import csvio
from .dde import DdeConfig, dde_integrate
from .dynamics import (AmplitudeTrace, amplitudes_from_modes, compose_general_state,
                       single_atom_reference, time_grid)
from .errors import QbeatError
from .field import (DETECTOR_OFFSET, IntensityTrace, emitted_fraction,
                    intensity_at_detector, intensity_lightcone)
from .metrics import beat_visibility, first_beat_peak
from .params import (InitialState, SystemParams, canonical_params,
                     distance_in_units, derive_scales)
from .spectral import (ANTISYMMETRIC, SYMMETRIC, ModeExpansion, SearchWindow,
                       find_poles, residues, sector_from_label, window_preset)

#: backends must agree to this absolute amplitude tolerance (CLI exit 4)
BACKEND_DISAGREEMENT_TOL = 1e-2

SECTORS = ("sym", "antisym", "single")
BACKENDS = ("modes", "dde", "both")
WINDOWS = ("auto", "markovian", "nonmarkovian", "custom")
AXES = ("distance", "theta", "omega23")

DEFAULTS: dict = {
    "sector": "sym", "theta": None, "phi": 0.0,
    "distance": 1.0, "distance_unit": "beat",
    "backend": "both", "window": "auto", "re_max": None, "im_max": None,
    "tmax": 8.0, "dt": 5e-4, "jobs": 1, "out": "out", "name": None,
    "intensity": False, "snap": True,
    "gamma22": 1.0, "gamma33": 1.0, "gamma23": None, "gamma32": None,
    "omega23": 50.0, "omega21": 1.0e4, "velocity": 1.0,
    "axis": "distance", "start": 0.25, "stop": 1.5, "steps": 6,
}

_BOOL_KEYS = ("intensity", "snap")
_INT_KEYS = ("jobs", "steps")
_STR_KEYS = ("sector", "distance_unit", "backend", "window", "out", "name", "axis")


def parse_config(path) -> dict:
    """Flat key=value file; '#' starts a comment; unknown keys are errors."""
    out: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ValueError(f"{path}:{lineno}: unknown option {key!r}")
        out[key] = _coerce(key, value)
    return out


def _coerce(key: str, value: str):
    if key in _BOOL_KEYS:
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"option {key} expects a boolean, got {value!r}")
    if key in _INT_KEYS:
        return int(value)
    if key in _STR_KEYS:
        return value
    if value.lower() in ("none", ""):
        return None
    return float(value)


def merge_options(config: dict | None, cli: dict | None) -> dict:
    """defaults < config file < explicitly-set CLI flags."""
    opts = dict(DEFAULTS)
    opts.update(config or {})
    opts.update({k: v for k, v in (cli or {}).items() if v is not None})
    return opts


@dataclass(frozen=True)
class Scenario:
    """Fully-resolved run description."""

    opts: dict
    params: SystemParams
    init: InitialState | None       # None for the single-atom reference
    window: SearchWindow | None     # None when no spectral run is involved
    times: np.ndarray
    name: str

    @property
    def is_single_reference(self) -> bool:
        return self.opts["sector"] == "single" and self.opts["theta"] is None


def resolve_scenario(opts: dict, need_window: bool = True) -> Scenario:
    base = canonical_params(
        0.0, snap_phase=bool(opts["snap"]),
        gamma22=opts["gamma22"], gamma33=opts["gamma33"],
        gamma23=opts["gamma23"], gamma32=opts["gamma32"],
        omega23=opts["omega23"], omega21=opts["omega21"],
        velocity=opts["velocity"])
    dist = distance_in_units(float(opts["distance"]), opts["distance_unit"], base)
    params = canonical_params(
        dist, snap_phase=bool(opts["snap"]),
        gamma22=opts["gamma22"], gamma33=opts["gamma33"],
        gamma23=opts["gamma23"], gamma32=opts["gamma32"],
        omega23=opts["omega23"], omega21=opts["omega21"],
        velocity=opts["velocity"])

    theta = opts["theta"]
    if theta is not None:
        init = InitialState.from_angles(float(theta), float(opts["phi"] or 0.0))
    elif opts["sector"] == "sym":
        init = InitialState.symmetric()
    elif opts["sector"] == "antisym":
        init = InitialState.antisymmetric()
    elif opts["sector"] == "single":
        init = None
    else:
        raise ValueError(f"unknown sector {opts['sector']!r}")

    window = _resolve_window(opts, params) if need_window else None
    times = time_grid(float(opts["tmax"]), float(opts["dt"]), params.delay,
                      params.gamma22)
    name = opts["name"] or _default_name(opts)
    return Scenario(opts=opts, params=params, init=init, window=window,
                    times=times, name=name)


def _resolve_window(opts, params) -> SearchWindow:
    choice = opts["window"]
    if choice == "auto":
        coh = params.velocity / params.gamma22
        choice = "markovian" if params.distance < 0.5 * coh else "nonmarkovian"
    if choice == "custom":
        if opts["re_max"] is None or opts["im_max"] is None:
            raise ValueError("custom window needs re_max and im_max")
        return SearchWindow(float(opts["re_max"]), float(opts["im_max"]))
    return window_preset(choice, params)


def _default_name(opts) -> str:
    if opts["theta"] is not None:
        tag = f"theta{float(opts['theta']):g}"
    else:
        tag = opts["sector"]
    return f"{tag}_d{float(opts['distance']):g}{opts['distance_unit']}"


# -- runners ------------------------------------------------------------


def compute_expansions(scn: Scenario) -> dict[str, ModeExpansion]:
    """Completed mode expansions needed by the scenario's spectral path."""
    if scn.opts["theta"] is not None:
        sectors = [SYMMETRIC, ANTISYMMETRIC]
    else:
        sectors = [sector_from_label(scn.opts["sector"])]
    return {sec.label: residues(find_poles(scn.params, sec, scn.window))
            for sec in sectors}


def mode_trace(scn: Scenario, expansions: dict[str, ModeExpansion]) -> AmplitudeTrace:
    if scn.opts["theta"] is not None:
        plus = amplitudes_from_modes(expansions["sym"], scn.times)
        minus = amplitudes_from_modes(expansions["antisym"], scn.times)
        return compose_general_state(scn.init, plus, minus)
    (only,) = expansions.values()
    return amplitudes_from_modes(only, scn.times)


def dde_trace(scn: Scenario) -> AmplitudeTrace:
    cfg = DdeConfig(step=float(scn.opts["dt"]), t_max=float(scn.opts["tmax"]))
    return dde_integrate(scn.params, scn.init, cfg)


@dataclass
class DynamicsResult:
    scenario: Scenario
    traces: dict = field(default_factory=dict)       # backend -> AmplitudeTrace
    expansions: dict = field(default_factory=dict)   # sector label -> ModeExpansion
    deviation: np.ndarray | None = None
    intensity: IntensityTrace | None = None

    @property
    def primary_trace(self) -> AmplitudeTrace:
        for key in ("dde", "modes", "closed_form"):
            if key in self.traces:
                return self.traces[key]
        raise KeyError("no trace computed")

    @property
    def max_deviation(self) -> float | None:
        if self.deviation is None:
            return None
        return float(self.deviation.max())


def detector_position(params: SystemParams) -> float:
    return 0.5 * params.distance + DETECTOR_OFFSET * params.velocity / params.gamma22


def run_dynamics(opts: dict) -> DynamicsResult:
    backend = opts["backend"]
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    scn = resolve_scenario(opts, need_window=backend in ("modes", "both"))
    res = DynamicsResult(scenario=scn)

    if scn.is_single_reference:
        # isolated-atom share: no partner, no spectral machinery
        trace = single_atom_reference(scn.params, scn.times)
        res.traces["closed_form"] = trace
        if opts["intensity"]:
            solo = canonical_params(0.0, snap_phase=bool(opts["snap"]),
                                    gamma22=scn.params.gamma22, gamma33=scn.params.gamma33,
                                    gamma23=scn.params.gamma23, gamma32=scn.params.gamma32,
                                    omega23=scn.params.omega23, omega21=scn.params.omega21,
                                    velocity=scn.params.velocity)
            res.intensity = intensity_lightcone(trace, solo, detector_position(solo))
        return res

    if backend in ("modes", "both"):
        res.expansions = compute_expansions(scn)
        res.traces["modes"] = mode_trace(scn, res.expansions)
    if backend in ("dde", "both"):
        res.traces["dde"] = dde_trace(scn)
    if backend == "both":
        diff = np.zeros(scn.times.shape)
        for a, b in zip(res.traces["modes"].amplitude_components(),
                        res.traces["dde"].amplitude_components()):
            diff = np.maximum(diff, np.abs(a - b))
        res.deviation = diff

    if opts["intensity"]:
        x_det = detector_position(scn.params)
        if backend == "modes" and scn.opts["theta"] is None:
            (expansion,) = res.expansions.values()
            res.intensity = intensity_at_detector(expansion, scn.times)
        else:
            res.intensity = intensity_lightcone(res.primary_trace, scn.params, x_det)
    return res


def write_dynamics(res: DynamicsResult, out_dir) -> list[Path]:
    scn = res.scenario
    base = Path(out_dir) / scn.name
    written = []
    trace = next(iter(res.traces.values())) if len(res.traces) == 1 else res.traces.get("modes")
    extra = {"scenario": scn.name, "tmax": float(scn.opts["tmax"]),
             "dt": float(scn.opts["dt"]), "backend": scn.opts["backend"]}
    path = base / "amplitudes.csv"
    csvio.write_amplitudes_csv(path, trace, scn.params,
                               deviation=res.deviation, extra=extra)
    written.append(path)
    if "dde" in res.traces and len(res.traces) > 1:
        path = base / "amplitudes_dde.csv"
        csvio.write_amplitudes_csv(path, res.traces["dde"], scn.params, extra=extra)
        written.append(path)
    if res.intensity is not None:
        path = base / "intensity.csv"
        csvio.write_intensity_csv(path, res.intensity, scn.params, extra=extra)
        written.append(path)
    for label, expansion in res.expansions.items():
        path = base / ("poles.csv" if len(res.expansions) == 1 else f"poles_{label}.csv")
        csvio.write_poles_csv(path, expansion, extra={"scenario": scn.name})
        written.append(path)
    return written


# -- sweeps -------------------------------------------------------------

SWEEP_METRICS = ["first_beat_peak_pop3", "beat_visibility", "emitted_fraction"]


def _sweep_point(task: tuple) -> tuple[float, dict | None, str]:
    opts, axis, value = task
    opts = dict(opts)
    if axis == "distance":
        opts["distance"] = value
    elif axis == "theta":
        opts["theta"] = value
    elif axis == "omega23":
        opts["omega23"] = value
    else:
        return value, None, f"unknown axis {axis!r}"
    try:
        scn = resolve_scenario(opts, need_window=False)
        trace = dde_trace(scn)
        tau = scn.params.delay
        period = 2.0 * math.pi / abs(scn.params.omega23)
        peak = first_beat_peak(trace.times, trace.pop3a, t_start=tau)
        inten = intensity_lightcone(trace, scn.params, detector_position(scn.params))
        vis = beat_visibility(inten.times, inten.values, tau, period)
        frac = emitted_fraction(trace, scn.params)
        if peak is None:
            return value, None, "no beat peak located"
        return value, {"first_beat_peak_pop3": peak[1], "beat_visibility": vis,
                       "emitted_fraction": frac}, ""
    except (QbeatError, ValueError) as exc:
        return value, None, str(exc)


def run_sweep(opts: dict) -> list[tuple[float, dict | None, str]]:
    axis = opts["axis"]
    if axis not in AXES:
        raise ValueError(f"unknown sweep axis {axis!r}")
    n = int(opts["steps"])
    if n < 2:
        raise ValueError("sweep needs at least 2 steps")
    lo, hi = float(opts["start"]), float(opts["stop"])
    if not hi > lo:
        raise ValueError("sweep range must satisfy stop > start")
    values = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
    base = {k: v for k, v in opts.items() if k in DEFAULTS}
    tasks = [(base, axis, v) for v in values]
    jobs = int(opts["jobs"])
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, tasks))
    return [_sweep_point(t) for t in tasks]
