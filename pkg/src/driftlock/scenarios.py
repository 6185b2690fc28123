"""Named end-to-end scenarios behind the CLI.

Each scenario consumes a resolved configuration (see config.parse_config),
derives all randomness from the single top-level seed, runs the simulation
or analysis, and emits CSV/JSON artifacts plus a manifest into the output
directory.  Identical (config, seed, version) produce byte-identical
files: floats are written in shortest round-trip form, JSON keys are
sorted and nothing wall-clock dependent is recorded.

Seed derivation: stream i uses numpy's SeedSequence([seed, i]) with
stream indices 0 power-law synthesis, 1 telegraph synthesis, 2 static
offset, 3 measurement shots, 4 closed-loop feedback, 5 open-loop
feedback.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from . import __version__
from .estimator import PosteriorGrid
from .feedback import FeedbackConfig, run_experiment
from .fileio import write_csv, write_json, write_matrix_csv
from .noise import (
    BackactionModel,
    NoiseTrace,
    PowerLawSpec,
    TelegraphSpec,
    backaction_gain,
    compose,
    synthesize_powerlaw,
    synthesize_telegraph,
)
from .qubit import QubitParams, ShotTiming, simulate_rabi_chevron, simulate_repeated_ramsey
from .spectra import (
    decoherence_w,
    estimate_psd,
    fit_diffusion,
    fit_powerlaw,
    predict_t2star,
)
from .violation import aggregate, read_dataset_csv

STREAM_POWERLAW = 0
STREAM_TELEGRAPH = 1
STREAM_STATIC = 2
STREAM_SHOTS = 3
STREAM_CLOSED = 4
STREAM_OPEN = 5


class ScenarioError(RuntimeError):
    """Raised when a scenario cannot run with the given inputs."""


def derive_seed(master: int, stream: int) -> int:
    """Child seed for a named stream, stable across runs and platforms."""
    return int(np.random.SeedSequence([master, stream]).generate_state(1)[0])


def build_trace(noise_params: dict, duration: float, dt: float, master_seed: int) -> NoiseTrace:
    """Assemble the additive noise stack described by a resolved config."""
    parts = []
    if noise_params.get("powerlaw"):
        spec = PowerLawSpec(**noise_params["powerlaw"])
        parts.append(
            synthesize_powerlaw(spec, duration, dt, derive_seed(master_seed, STREAM_POWERLAW))
        )
    if noise_params.get("telegraph"):
        spec = TelegraphSpec(**noise_params["telegraph"])
        parts.append(
            synthesize_telegraph(spec, duration, dt, derive_seed(master_seed, STREAM_TELEGRAPH))
        )
    trace = compose(parts) if parts else None
    sigma = noise_params.get("static_sigma", 0.0) or 0.0
    if sigma > 0.0:
        rng = np.random.default_rng(derive_seed(master_seed, STREAM_STATIC))
        offset = sigma * rng.standard_normal()
        if trace is None:
            n = int(round(duration / dt))
            trace = NoiseTrace(
                dt=dt,
                samples=np.full(n, offset),
                seed=master_seed,
                descriptor=f"static(sigma={sigma!r})",
            )
        else:
            trace = NoiseTrace(
                dt=trace.dt,
                samples=trace.samples + offset,
                seed=trace.seed,
                descriptor=trace.descriptor + f"+static(sigma={sigma!r})",
            )
    if trace is None:
        raise ScenarioError("noise stack is empty")
    return trace


def write_trace_csv(path, trace: NoiseTrace) -> None:
    times = np.arange(len(trace.samples)) * trace.dt
    write_csv(path, ["time_s", "delta_f_hz"], zip(times, trace.samples))


def write_trace_json(path, trace: NoiseTrace) -> None:
    write_json(
        path,
        {
            "dt_s": trace.dt,
            "seed": trace.seed,
            "descriptor": trace.descriptor,
            "samples_hz": list(trace.samples),
        },
    )


def write_posterior_csv(path, grid: PosteriorGrid) -> None:
    write_csv(path, ["f_hz", "probability"], zip(grid.centers, grid.probabilities))


def write_cycles_csv(path, cycles) -> None:
    write_csv(
        path,
        ["cycle", "start_time_s", "f_est_hz", "correction_hz", "true_detuning_hz"],
        (
            (c.cycle_index, c.start_time, c.f_est, c.correction_applied, c.true_mean_detuning)
            for c in cycles
        ),
    )


def write_shots_csv(path, cycles) -> None:
    rows = (
        (shot.timestamp, shot.evolution_time, shot.outcome)
        for cycle in cycles
        for shot in cycle.shots
    )
    write_csv(path, ["timestamp_s", "t_evolution_s", "outcome"], rows)


def _read_series_csv(path, column: str) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"input_csv {path} does not exist")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise ScenarioError(
                f"{path}: column {column!r} not found; available: {reader.fieldnames}"
            )
        values = [float(row[column]) for row in reader]
    series = np.asarray(values)
    if len(series) == 0:
        raise ScenarioError(f"{path}: no rows")
    if not np.all(np.isfinite(series)):
        raise ScenarioError(f"{path}: column {column!r} contains non-finite values")
    return series


def _series_from_params(params: dict, base_dir, master_seed: int) -> tuple[np.ndarray, float, dict]:
    if params["input_csv"] is not None:
        raw = Path(params["input_csv"])
        path = raw if raw.is_absolute() else Path(base_dir) / raw
        series = _read_series_csv(path, params["column"])
        meta = {"source": "csv", "input_csv": params["input_csv"], "column": params["column"]}
        return series, params["dt"], meta
    synth = params["synthesize"]
    trace = build_trace(synth, synth["duration"], synth["dt"], master_seed)
    meta = {"source": "synthesize", "descriptor": trace.descriptor}
    return trace.samples, trace.dt, meta


def _qubit_params(block: dict) -> QubitParams:
    return QubitParams(
        alpha=block["alpha"],
        beta_vis=block["beta_vis"],
        theta=block["theta"],
        readout_fidelity_down=block["readout_fidelity_down"],
        readout_fidelity_up=block["readout_fidelity_up"],
    )


def _timing(block: dict) -> ShotTiming:
    return ShotTiming(**block)


def _passive_gain(params: dict) -> float:
    if params.get("epsilon_mv") is None:
        return 1.0
    model = BackactionModel(**params["backaction"])
    return backaction_gain(model, params["epsilon_mv"])


def _run_synthesize_noise(resolved, outdir: Path):
    params = resolved["params"]
    trace = build_trace(params, params["duration"], params["dt"], resolved["seed"])
    write_trace_csv(outdir / "trace.csv", trace)
    write_trace_json(outdir / "trace.json", trace)
    summary = {
        "n_samples": len(trace.samples),
        "dt_s": trace.dt,
        "duration_s": trace.duration,
        "descriptor": trace.descriptor,
        "mean_hz": float(np.mean(trace.samples)),
        "variance_hz2": float(np.var(trace.samples)),
    }
    return ["trace.csv", "trace.json"], summary


def _run_repeated_ramsey(resolved, outdir: Path):
    params = resolved["params"]
    timing = _timing(params["timing"])
    t_max = params["t_max"]
    t_step = params["t_step"]
    n_cols = int(round(t_max / t_step))
    row_span = n_cols * timing.shot_period
    row_period = params["row_period"] if params["row_period"] is not None else row_span
    if row_period < row_span:
        raise ScenarioError(
            f"row_period {row_period} s is shorter than one row ({row_span} s)"
        )
    noise = params["noise"]
    dt = noise["dt"] if noise["dt"] is not None else timing.shot_period
    duration = noise["duration"]
    needed = (params["repetitions"] - 1) * row_period + row_span + dt
    if duration is None:
        duration = needed
    elif duration < needed:
        raise ScenarioError(
            f"noise.duration {duration} s is shorter than the acquisition ({needed} s)"
        )
    trace = build_trace(noise, duration, dt, resolved["seed"])
    ramsey = simulate_repeated_ramsey(
        trace,
        _qubit_params(params["qubit"]),
        timing,
        t_max=t_max,
        t_step=t_step,
        repetitions=params["repetitions"],
        seed=derive_seed(resolved["seed"], STREAM_SHOTS),
        f_offset=params["f_offset"],
        row_period=params["row_period"],
        return_probabilities=params["probabilities"],
    )
    write_matrix_csv(
        outdir / "ramsey_map.csv",
        "row_start_s",
        ramsey.evolution_times,
        ramsey.row_start_times,
        ramsey.values,
    )
    # magnitude FFT of each row along the evolution-time axis, DC removed,
    # so renderers can show the fringe-frequency side panel without any
    # physics of their own
    centred = ramsey.values - ramsey.values.mean(axis=1, keepdims=True)
    fft_mag = np.abs(np.fft.rfft(centred, axis=1))
    fft_freqs = np.fft.rfftfreq(len(ramsey.evolution_times), t_step)
    write_matrix_csv(
        outdir / "ramsey_fft.csv",
        "row_start_s",
        fft_freqs,
        ramsey.row_start_times,
        fft_mag,
    )
    summary = {
        "rows": int(ramsey.values.shape[0]),
        "cols": int(ramsey.values.shape[1]),
        "kind": ramsey.kind,
        "t_step_s": t_step,
        "row_period_s": row_period,
        "f_offset_hz": params["f_offset"],
        "mean_value": float(np.mean(ramsey.values)),
        "sampling_rate_rows_per_s": 1.0 / row_period,
    }
    return ["ramsey_map.csv", "ramsey_fft.csv"], summary


def _run_rabi_chevron(resolved, outdir: Path):
    params = resolved["params"]
    noise = params["noise"]
    trace = build_trace(noise, noise["duration"], noise["dt"], resolved["seed"])
    gain = _passive_gain(params)
    chevron = simulate_rabi_chevron(
        trace,
        rabi_frequency=params["rabi_frequency"],
        detuning_span=params["detuning_span"],
        t_max=params["t_max"],
        resolution=(params["n_detuning"], params["n_time"]),
        seed=derive_seed(resolved["seed"], STREAM_SHOTS),
        t2_rabi=params["t2_rabi"],
        averages=params["averages"],
        noise_gain=gain,
    )
    write_matrix_csv(
        outdir / "chevron.csv",
        "detuning_hz",
        chevron.times,
        chevron.detunings,
        chevron.values,
    )
    summary = {
        "rabi_frequency_hz": params["rabi_frequency"],
        "noise_gain": gain,
        "epsilon_mv": params["epsilon_mv"],
        "n_detuning": params["n_detuning"],
        "n_time": params["n_time"],
        "averages": params["averages"],
        "p_min": float(chevron.values.min()),
        "p_max": float(chevron.values.max()),
    }
    return ["chevron.csv"], summary


def _run_feedback_run(resolved, outdir: Path):
    params = resolved["params"]
    modes = ["closed", "open"] if params["mode"] == "both" else [params["mode"]]
    noise = params["noise"]
    dt = noise["dt"] if noise["dt"] is not None else params["cycle_period"]
    duration = noise["duration"]
    needed = params["n_cycles"] * params["cycle_period"]
    if duration is None:
        duration = needed + dt
    elif duration < needed:
        raise ScenarioError(
            f"noise.duration {duration} s is shorter than the run ({needed} s)"
        )
    trace = build_trace(noise, duration, dt, resolved["seed"])
    gain = _passive_gain(params)
    qubit = _qubit_params(params["qubit"])
    outputs = []
    summary: dict = {
        "f_target_hz": params["f_target"],
        "n_cycles": params["n_cycles"],
        "cycle_period_s": params["cycle_period"],
        "noise_dt_s": dt,
        "noise_gain": gain,
    }
    stream = {"closed": STREAM_CLOSED, "open": STREAM_OPEN}
    stds = {}
    for mode in modes:
        cfg = FeedbackConfig(
            n_shots=params["n_shots"],
            t_step=params["t_step"],
            timing=_timing(params["timing"]),
            f_target=params["f_target"],
            mode=mode,
            n_cycles=params["n_cycles"],
            cycle_period=params["cycle_period"],
            passive_gain=gain,
            record_shots=params["record_shots"],
            prior_sigma=params["prior_sigma"],
            f_min=params["grid_f_min"],
            f_max=params["grid_f_max"],
            n_bins=params["grid_bins"],
        )
        result = run_experiment(cfg, trace, qubit, derive_seed(resolved["seed"], stream[mode]))
        name = f"cycles_{mode}.csv"
        write_cycles_csv(outdir / name, result.cycles)
        outputs.append(name)
        if params["record_shots"]:
            shots_name = f"shots_{mode}.csv"
            write_shots_csv(outdir / shots_name, result.cycles)
            outputs.append(shots_name)
        estimates = np.array([c.f_est for c in result.cycles])
        good = np.isfinite(estimates)
        truths = np.array([c.true_mean_detuning for c in result.cycles])
        stds[mode] = float(np.std(estimates[good])) if good.any() else math.nan
        summary[mode] = {
            "n_degenerate": int((~good).sum()),
            "mean_f_est_hz": float(np.mean(estimates[good])) if good.any() else math.nan,
            "std_f_est_hz": stds[mode],
            "std_true_detuning_hz": float(np.std(truths)),
            "final_correction_hz": result.final_correction,
        }
    if len(modes) == 2 and stds["closed"] > 0:
        summary["suppression_ratio"] = stds["open"] / stds["closed"]
    return outputs, summary


def _run_psd_analysis(resolved, outdir: Path):
    params = resolved["params"]
    series, dt, meta = _series_from_params(params, resolved["base_dir"], resolved["seed"])
    psd = estimate_psd(series, dt, method=params["method"], n_segments=params["n_segments"])
    band = params["fit_band"]
    f_lo = band["f_lo"] if band else float(psd.freqs[0])
    f_hi = band["f_hi"] if band else float(psd.freqs[-1])
    fit = fit_powerlaw(psd, f_lo, f_hi)
    write_csv(outdir / "psd.csv", ["freq_hz", "psd_hz2_per_hz"], zip(psd.freqs, psd.power))
    write_csv(
        outdir / "psd_fit.csv",
        ["amplitude_hz2_per_hz", "exponent", "f_lo_hz", "f_hi_hz", "residual_rms_log10"],
        [(fit.amplitude, fit.exponent, fit.f_lo, fit.f_hi, fit.residual_rms_log10)],
    )
    df = float(psd.freqs[1] - psd.freqs[0]) if len(psd.freqs) > 1 else 0.0
    summary = {
        "input": meta,
        "method": psd.method,
        "n_segments": psd.n_segments,
        "n_points": len(psd.freqs),
        "dt_s": dt,
        "series_variance_hz2": float(np.var(series)),
        "psd_integral_hz2": float(np.sum(psd.power) * df),
        "fit": {
            "amplitude_hz2_per_hz": fit.amplitude,
            "exponent": fit.exponent,
            "f_lo_hz": fit.f_lo,
            "f_hi_hz": fit.f_hi,
            "residual_rms_log10": fit.residual_rms_log10,
        },
    }
    return ["psd.csv", "psd_fit.csv"], summary


def _run_diffusion_analysis(resolved, outdir: Path):
    params = resolved["params"]
    series, dt, meta = _series_from_params(params, resolved["base_dir"], resolved["seed"])
    fit = fit_diffusion(series, dt, params["intervals"])
    write_csv(
        outdir / "diffusion.csv",
        ["interval_s", "variance_hz2"],
        zip(fit.intervals, fit.variances),
    )
    write_csv(
        outdir / "diffusion_fit.csv",
        ["alpha", "d_alpha_hz2_per_s_alpha"],
        [(fit.alpha, fit.d_alpha)],
    )
    summary = {
        "input": meta,
        "dt_s": dt,
        "alpha": fit.alpha,
        "d_alpha_hz2_per_s_alpha": fit.d_alpha,
        "n_intervals": len(fit.intervals),
        "interval_min_s": float(fit.intervals[0]),
        "interval_max_s": float(fit.intervals[-1]),
        "sub_diffusive": bool(fit.alpha < 1.0),
    }
    return ["diffusion.csv", "diffusion_fit.csv"], summary


def _run_predict_t2(resolved, outdir: Path):
    params = resolved["params"]
    # the spectral support extends far beyond f1 so the full integral can
    # include the sinc tail; the prediction band itself is [f0, f1]
    spec = PowerLawSpec(
        amplitude=params["amplitude"],
        exponent=params["exponent"],
        f_low=params["f0"],
        f_high=1e12,
    )
    modes = (
        ["quasi-static", "full-integral"] if params["mode"] == "both" else [params["mode"]]
    )
    summary: dict = {
        "amplitude_hz2_per_hz": params["amplitude"],
        "exponent": params["exponent"],
        "f0_hz": params["f0"],
        "f1_hz": params["f1"],
    }
    reference_t2 = None
    for mode in modes:
        prediction = predict_t2star(spec, params["f0"], params["f1"], mode=mode)
        key = mode.replace("-", "_")
        if prediction is None:
            summary[key] = None
            continue
        summary[key] = {
            "t2_star_s": prediction.t2_star,
            "sigma_static_hz": prediction.sigma_static,
        }
        reference_t2 = prediction.t2_star if reference_t2 is None else reference_t2
    outputs = []
    if reference_t2 is not None:
        times = np.linspace(reference_t2 / 25.0, 2.5 * reference_t2, params["curve_points"])
        qs = predict_t2star(spec, params["f0"], params["f1"], mode="quasi-static")
        rows = []
        for t in times:
            w_full = decoherence_w(t, spec, f0=params["f0"], f_max=max(params["f1"], 50.0 / t))
            w_qs = math.exp(-0.5 * t**2 * (2.0 * math.pi * qs.sigma_static) ** 2)
            rows.append((t, w_full, w_qs))
        write_csv(outdir / "w_curve.csv", ["t_s", "w_full", "w_quasistatic"], rows)
        outputs.append("w_curve.csv")
    return outputs, summary


def _run_gst_violation(resolved, outdir: Path):
    params = resolved["params"]
    raw = Path(params["dataset_csv"])
    path = raw if raw.is_absolute() else Path(resolved["base_dir"]) / raw
    if not path.exists():
        raise ScenarioError(f"dataset_csv {path} does not exist")
    records = read_dataset_csv(path, k=params["k"])
    report = aggregate(records, confidence=params["confidence"])
    ordered = sorted(records, key=lambda r: (r.max_length, r.circuit_id))
    rows = [
        (rec.circuit_id, rec.germ_label, rec.max_length, rec.k, stat, flag)
        for rec, (_, stat, flag) in zip(ordered, report.per_circuit)
    ]
    write_csv(
        outdir / "violations.csv",
        ["circuit_id", "germ", "L", "k", "two_delta_loglik", "flag"],
        rows,
    )
    flags = [flag for _, _, flag in report.per_circuit]
    report_doc = {
        "confidence": report.confidence,
        "thresholds": {str(k): v for k, v in report.thresholds.items()},
        "aggregate_by_length": {str(length): v for length, v in report.aggregate_by_length.items()},
        "per_circuit": [
            {"circuit_id": cid, "two_delta_loglik": stat, "flag": flag}
            for cid, stat, flag in report.per_circuit
        ],
    }
    write_json(outdir / "report.json", report_doc)
    summary = {
        "input": params["dataset_csv"],
        "n_circuits": len(records),
        "k": params["k"],
        "confidence": report.confidence,
        "aggregate_by_length": {str(length): v for length, v in report.aggregate_by_length.items()},
        "n_consistent": flags.count("consistent"),
        "n_violation": flags.count("violation"),
        "n_fluctuation": flags.count("fluctuation"),
    }
    return ["violations.csv", "report.json"], summary


_RUNNERS = {
    "synthesize-noise": _run_synthesize_noise,
    "repeated-ramsey": _run_repeated_ramsey,
    "rabi-chevron": _run_rabi_chevron,
    "feedback-run": _run_feedback_run,
    "psd-analysis": _run_psd_analysis,
    "diffusion-analysis": _run_diffusion_analysis,
    "predict-t2": _run_predict_t2,
    "gst-violation": _run_gst_violation,
}


def run_scenario(resolved: dict) -> Path:
    """Run one resolved scenario config; returns the output directory."""
    scenario = resolved["scenario"]
    try:
        runner = _RUNNERS[scenario]
    except KeyError:
        raise ScenarioError(f"unknown scenario {scenario!r}")
    outdir = Path(resolved["output_directory"])
    outdir.mkdir(parents=True, exist_ok=True)
    outputs, summary = runner(resolved, outdir)
    write_json(outdir / "summary.json", summary)
    manifest = {
        "artifact": "driftlock",
        "version": __version__,
        "scenario": scenario,
        "seed": resolved["seed"],
        "params": resolved["params"],
        "outputs": sorted(outputs + ["summary.json", "manifest.json"]),
    }
    write_json(outdir / "manifest.json", manifest)
    return outdir
