"""Scenario configuration: JSON with mandatory unit suffixes.

A run is described by a JSON document

    {
      "scenario": "<name>",
      "seed": 42,
      "output_directory": "out",
      "params": { ... scenario specific ... }
    }

Every physical quantity inside params is a unit-suffixed string ("2 MHz",
"200 us"); bare numbers are reserved for dimensionless fields.  Unknown
keys anywhere are rejected, which catches typos before they silently
change physics.  Parsing resolves everything to base units and returns
plain dicts of floats ready for the scenario drivers.
"""

from __future__ import annotations

import json
from pathlib import Path

from .units import UnitError, parse_number, parse_quantity

SCENARIOS = (
    "synthesize-noise",
    "repeated-ramsey",
    "rabi-chevron",
    "feedback-run",
    "psd-analysis",
    "diffusion-analysis",
    "predict-t2",
    "gst-violation",
)


class ConfigError(ValueError):
    """Raised for malformed, incomplete or out-of-range configuration."""


class _Block:
    """One level of a config mapping with take-and-check access."""

    def __init__(self, data: dict, path: str):
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected an object")
        self._data = dict(data)
        self._path = path

    def _key(self, name: str) -> str:
        return f"{self._path}.{name}" if self._path else name

    def has(self, name: str) -> bool:
        return name in self._data

    def quantity(self, name: str, dimension: str, default=None, required: bool = False):
        if name not in self._data:
            if required:
                raise ConfigError(f"{self._key(name)}: required {dimension} quantity missing")
            return default
        try:
            return parse_quantity(self._data.pop(name), dimension, self._key(name))
        except UnitError as exc:
            raise ConfigError(str(exc)) from exc

    def number(self, name: str, default=None, required: bool = False,
               minimum=None, maximum=None):
        if name not in self._data:
            if required:
                raise ConfigError(f"{self._key(name)}: required number missing")
            return default
        try:
            value = parse_number(self._data.pop(name), self._key(name))
        except UnitError as exc:
            raise ConfigError(str(exc)) from exc
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self._key(name)}: {value} is below the minimum {minimum}")
        if maximum is not None and value > maximum:
            raise ConfigError(f"{self._key(name)}: {value} is above the maximum {maximum}")
        return value

    def integer(self, name: str, default=None, required: bool = False, minimum=None):
        if name not in self._data:
            if required:
                raise ConfigError(f"{self._key(name)}: required integer missing")
            return default
        raw = self._data.pop(name)
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{self._key(name)}: expected an integer, got {raw!r}")
        if minimum is not None and raw < minimum:
            raise ConfigError(f"{self._key(name)}: {raw} is below the minimum {minimum}")
        return raw

    def string(self, name: str, default=None, required: bool = False, choices=None):
        if name not in self._data:
            if required:
                raise ConfigError(f"{self._key(name)}: required string missing")
            return default
        raw = self._data.pop(name)
        if not isinstance(raw, str):
            raise ConfigError(f"{self._key(name)}: expected a string, got {raw!r}")
        if choices is not None and raw not in choices:
            raise ConfigError(
                f"{self._key(name)}: {raw!r} is not one of {sorted(choices)}"
            )
        return raw

    def boolean(self, name: str, default=False):
        if name not in self._data:
            return default
        raw = self._data.pop(name)
        if not isinstance(raw, bool):
            raise ConfigError(f"{self._key(name)}: expected true/false, got {raw!r}")
        return raw

    def block(self, name: str, required: bool = False):
        if name not in self._data:
            if required:
                raise ConfigError(f"{self._key(name)}: required section missing")
            return None
        return _Block(self._data.pop(name), self._key(name))

    def list_of_quantities(self, name: str, dimension: str, required: bool = False):
        if name not in self._data:
            if required:
                raise ConfigError(f"{self._key(name)}: required list missing")
            return None
        raw = self._data.pop(name)
        if not isinstance(raw, list) or not raw:
            raise ConfigError(f"{self._key(name)}: expected a non-empty list")
        try:
            return [
                parse_quantity(item, dimension, f"{self._key(name)}[{i}]")
                for i, item in enumerate(raw)
            ]
        except UnitError as exc:
            raise ConfigError(str(exc)) from exc

    def finish(self):
        if self._data:
            extras = ", ".join(sorted(self._data))
            raise ConfigError(f"{self._path or 'config'}: unknown keys: {extras}")


def _powerlaw_block(block: _Block) -> dict:
    out = {
        "amplitude": block.quantity("amplitude", "psd", required=True),
        "exponent": block.number("exponent", required=True, minimum=0.0, maximum=3.0),
        "f_low": block.quantity("f_low", "frequency", required=True),
        "f_high": block.quantity("f_high", "frequency", required=True),
    }
    block.finish()
    if not 0 < out["f_low"] < out["f_high"]:
        raise ConfigError("powerlaw: need 0 < f_low < f_high")
    if out["amplitude"] < 0:
        raise ConfigError("powerlaw: amplitude must be >= 0")
    return out


def _telegraph_block(block: _Block) -> dict:
    out = {
        "amplitude": block.quantity("amplitude", "frequency", required=True),
        "switching_rate": block.quantity("switching_rate", "frequency", required=True),
    }
    block.finish()
    if out["amplitude"] < 0 or out["switching_rate"] <= 0:
        raise ConfigError("telegraph: need amplitude >= 0 and switching_rate > 0")
    return out


def _qubit_block(block: _Block | None) -> dict:
    out = {
        "alpha": 0.0,
        "beta_vis": 1.0,
        "theta": 0.0,
        "readout_fidelity_down": 1.0,
        "readout_fidelity_up": 1.0,
    }
    if block is None:
        return out
    out["alpha"] = block.number("alpha", default=0.0, minimum=-1.0, maximum=1.0)
    out["beta_vis"] = block.number("beta_vis", default=1.0, minimum=-1.0, maximum=1.0)
    out["theta"] = block.number("theta", default=0.0)
    out["readout_fidelity_down"] = block.number(
        "readout_fidelity_down", default=1.0, minimum=0.0, maximum=1.0
    )
    out["readout_fidelity_up"] = block.number(
        "readout_fidelity_up", default=1.0, minimum=0.0, maximum=1.0
    )
    block.finish()
    return out


def _timing_block(block: _Block | None) -> dict:
    out = {"manipulation_and_wait": 60e-6, "readout": 140e-6, "calculation": 40e-6}
    if block is None:
        return out
    for key in list(out):
        value = block.quantity(key, "time")
        if value is not None:
            if value < 0:
                raise ConfigError(f"timing.{key}: must be >= 0")
            out[key] = value
    block.finish()
    return out


def _backaction_block(block: _Block | None) -> dict | None:
    if block is None:
        return None
    out = {
        "peak_gain": block.number("peak_gain", required=True, minimum=0.0),
        "period_mv": block.quantity("period", "voltage", default=12.0),
        "phase_mv": block.quantity("phase", "voltage", default=0.0),
    }
    block.finish()
    if out["period_mv"] <= 0:
        raise ConfigError("backaction.period: must be > 0")
    return out


def _noise_source(block: _Block, require_duration: bool) -> dict:
    powerlaw = block.block("powerlaw")
    telegraph = block.block("telegraph")
    out = {
        "powerlaw": _powerlaw_block(powerlaw) if powerlaw else None,
        "telegraph": _telegraph_block(telegraph) if telegraph else None,
        "static_sigma": block.quantity("static_sigma", "frequency", default=0.0),
        "dt": block.quantity("dt", "time", required=False),
        "duration": block.quantity("duration", "time", required=require_duration),
    }
    block.finish()
    if out["powerlaw"] is None and out["telegraph"] is None and out["static_sigma"] == 0.0:
        raise ConfigError("noise: need at least one of powerlaw, telegraph, static_sigma")
    if out["static_sigma"] < 0:
        raise ConfigError("noise.static_sigma: must be >= 0")
    for key in ("dt", "duration"):
        if out[key] is not None and out[key] <= 0:
            raise ConfigError(f"noise.{key}: must be > 0")
    return out


def _series_input(params: _Block) -> dict:
    """Input selector shared by the analysis scenarios: an existing CSV
    column or an internally synthesised trace."""
    input_csv = params.string("input_csv")
    synth = params.block("synthesize")
    if (input_csv is None) == (synth is None):
        raise ConfigError("params: provide exactly one of input_csv or synthesize")
    out = {"input_csv": input_csv, "synthesize": None, "column": None, "dt": None}
    if input_csv is not None:
        out["column"] = params.string("column", required=True)
        out["dt"] = params.quantity("dt", "time", required=True)
        if out["dt"] <= 0:
            raise ConfigError("params.dt: must be > 0")
    else:
        out["synthesize"] = _noise_source(synth, require_duration=True)
        if out["synthesize"]["dt"] is None:
            raise ConfigError("params.synthesize.dt: required time quantity missing")
    return out


def _parse_synthesize_noise(params: _Block) -> dict:
    out = {
        "duration": params.quantity("duration", "time", required=True),
        "dt": params.quantity("dt", "time", required=True),
    }
    powerlaw = params.block("powerlaw")
    telegraph = params.block("telegraph")
    out["powerlaw"] = _powerlaw_block(powerlaw) if powerlaw else None
    out["telegraph"] = _telegraph_block(telegraph) if telegraph else None
    out["static_sigma"] = params.quantity("static_sigma", "frequency", default=0.0)
    params.finish()
    if out["duration"] <= 0 or out["dt"] <= 0:
        raise ConfigError("params: duration and dt must be > 0")
    if out["powerlaw"] is None and out["telegraph"] is None and out["static_sigma"] == 0.0:
        raise ConfigError("params: need at least one noise ingredient")
    return out


def _parse_repeated_ramsey(params: _Block) -> dict:
    noise = params.block("noise", required=True)
    out = {
        "noise": _noise_source(noise, require_duration=False),
        "f_offset": params.quantity("f_offset", "frequency", default=2e6),
        "t_step": params.quantity("t_step", "time", required=True),
        "t_max": params.quantity("t_max", "time", required=True),
        "repetitions": params.integer("repetitions", required=True, minimum=1),
        "row_period": params.quantity("row_period", "time"),
        "probabilities": params.boolean("probabilities", default=False),
        "timing": _timing_block(params.block("timing")),
        "qubit": _qubit_block(params.block("qubit")),
    }
    params.finish()
    if not 0 < out["t_step"] <= out["t_max"]:
        raise ConfigError("params: need 0 < t_step <= t_max")
    return out


def _parse_rabi_chevron(params: _Block) -> dict:
    noise = params.block("noise", required=True)
    out = {
        "noise": _noise_source(noise, require_duration=True),
        "rabi_frequency": params.quantity("rabi_frequency", "frequency", required=True),
        "t2_rabi": params.quantity("t2_rabi", "time"),
        "detuning_span": params.quantity("detuning_span", "frequency", required=True),
        "t_max": params.quantity("t_max", "time", required=True),
        "n_detuning": params.integer("n_detuning", default=41, minimum=1),
        "n_time": params.integer("n_time", default=61, minimum=2),
        "averages": params.integer("averages", default=200, minimum=1),
        "epsilon_mv": params.quantity("epsilon", "voltage"),
        "backaction": _backaction_block(params.block("backaction")),
    }
    params.finish()
    if out["rabi_frequency"] <= 0 or out["t_max"] <= 0 or out["detuning_span"] < 0:
        raise ConfigError("params: rabi_frequency, t_max must be > 0, detuning_span >= 0")
    if (out["epsilon_mv"] is None) != (out["backaction"] is None):
        raise ConfigError("params: epsilon and backaction must be given together")
    return out


def _parse_feedback_run(params: _Block) -> dict:
    noise = params.block("noise", required=True)
    out = {
        "noise": _noise_source(noise, require_duration=False),
        "mode": params.string("mode", default="both", choices=("open", "closed", "both")),
        "n_cycles": params.integer("n_cycles", required=True, minimum=1),
        "n_shots": params.integer("n_shots", default=100, minimum=1),
        "t_step": params.quantity("t_step", "time", default=40e-9),
        "f_target": params.quantity("f_target", "frequency", default=2e6),
        "cycle_period": params.quantity("cycle_period", "time", default=24e-3),
        "prior_sigma": params.quantity("prior_sigma", "frequency", default=50e3),
        "timing": _timing_block(params.block("timing")),
        "qubit": _qubit_block(params.block("qubit")),
        "epsilon_mv": params.quantity("epsilon", "voltage"),
        "backaction": _backaction_block(params.block("backaction")),
        "record_shots": params.boolean("record_shots", default=False),
        "grid_f_min": params.quantity("grid_f_min", "frequency", default=0.0),
        "grid_f_max": params.quantity("grid_f_max", "frequency", default=12.5e6),
        "grid_bins": params.integer("grid_bins", default=2500, minimum=2),
    }
    params.finish()
    if out["t_step"] <= 0 or out["cycle_period"] <= 0:
        raise ConfigError("params: t_step and cycle_period must be > 0")
    if (out["epsilon_mv"] is None) != (out["backaction"] is None):
        raise ConfigError("params: epsilon and backaction must be given together")
    return out


def _parse_psd_analysis(params: _Block) -> dict:
    out = _series_input(params)
    out["method"] = params.string(
        "method", default="averaged-segments", choices=("periodogram", "averaged-segments")
    )
    out["n_segments"] = params.integer("n_segments", default=8, minimum=1)
    band = params.block("fit_band")
    if band is not None:
        out["fit_band"] = {
            "f_lo": band.quantity("f_lo", "frequency", required=True),
            "f_hi": band.quantity("f_hi", "frequency", required=True),
        }
        band.finish()
        if not 0 < out["fit_band"]["f_lo"] < out["fit_band"]["f_hi"]:
            raise ConfigError("params.fit_band: need 0 < f_lo < f_hi")
    else:
        out["fit_band"] = None
    params.finish()
    return out


def _parse_diffusion_analysis(params: _Block) -> dict:
    out = _series_input(params)
    out["intervals"] = params.list_of_quantities("intervals", "time", required=True)
    params.finish()
    if len(out["intervals"]) < 4:
        raise ConfigError("params.intervals: need at least 4 lags")
    if any(iv <= 0 for iv in out["intervals"]):
        raise ConfigError("params.intervals: lags must be > 0")
    return out


def _parse_predict_t2(params: _Block) -> dict:
    out = {
        "amplitude": params.quantity("amplitude", "psd", required=True),
        "exponent": params.number("exponent", required=True, minimum=0.0, maximum=3.0),
        "f0": params.quantity("f0", "frequency", required=True),
        "f1": params.quantity("f1", "frequency", required=True),
        "mode": params.string(
            "mode", default="both", choices=("quasi-static", "full-integral", "both")
        ),
        "curve_points": params.integer("curve_points", default=50, minimum=2),
    }
    params.finish()
    if out["amplitude"] < 0:
        raise ConfigError("params.amplitude: must be >= 0")
    if not 0 < out["f0"] < out["f1"]:
        raise ConfigError("params: need 0 < f0 < f1")
    return out


def _parse_gst_violation(params: _Block) -> dict:
    out = {
        "dataset_csv": params.string("dataset_csv", required=True),
        "k": params.integer("k", default=1, minimum=1),
        "confidence": params.number("confidence", default=0.95, minimum=0.5, maximum=0.9999),
    }
    params.finish()
    if not 0.5 < out["confidence"] < 1.0:
        raise ConfigError("params.confidence: must be in (0.5, 1)")
    return out


_PARSERS = {
    "synthesize-noise": _parse_synthesize_noise,
    "repeated-ramsey": _parse_repeated_ramsey,
    "rabi-chevron": _parse_rabi_chevron,
    "feedback-run": _parse_feedback_run,
    "psd-analysis": _parse_psd_analysis,
    "diffusion-analysis": _parse_diffusion_analysis,
    "predict-t2": _parse_predict_t2,
    "gst-violation": _parse_gst_violation,
}


def parse_config(
    document: dict,
    base_dir=None,
    scenario_override: str | None = None,
    seed_override: int | None = None,
    out_override=None,
) -> dict:
    """Validate a config document and resolve all units.

    Returns {"scenario", "seed", "output_directory", "base_dir", "params"}
    with params in base units.  CLI overrides take precedence over the
    document; the seed is mandatory one way or the other.
    """
    top = _Block(document, "")
    scenario = top.string("scenario", required=scenario_override is None)
    seed = top.integer("seed", required=seed_override is None)
    output_directory = top.string("output_directory", default="out")
    params_block = top.block("params", required=True)
    top.finish()
    if scenario_override is not None:
        scenario = scenario_override
    if seed_override is not None:
        seed = seed_override
    if out_override is not None:
        output_directory = str(out_override)
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario: {scenario!r} is not one of {list(SCENARIOS)}")
    if seed < 0:
        raise ConfigError("seed: must be a non-negative integer")
    params = _PARSERS[scenario](params_block)
    return {
        "scenario": scenario,
        "seed": seed,
        "output_directory": output_directory,
        "base_dir": str(base_dir) if base_dir is not None else ".",
        "params": params,
    }


def load_config(path, scenario_override=None, seed_override=None, out_override=None) -> dict:
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return parse_config(
        document,
        base_dir=path.parent,
        scenario_override=scenario_override,
        seed_override=seed_override,
        out_override=out_override,
    )
