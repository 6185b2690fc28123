import json
from pathlib import Path

import numpy as np
import pytest

from driftlock.config import parse_config
from driftlock.fileio import write_csv
from driftlock.scenarios import ScenarioError, build_trace, derive_seed, run_scenario
from driftlock.violation import record_with_statistic, two_delta_loglik

POWERLAW = {
    "amplitude": "0.00296 MHz^2/Hz",
    "exponent": 1.34,
    "f_low": "0.01 Hz",
    "f_high": "500 Hz",
}


def run(doc, tmp_path, name="run"):
    out = tmp_path / name
    doc = dict(doc)
    doc["output_directory"] = str(out)
    resolved = parse_config(doc, base_dir=tmp_path)
    run_scenario(resolved)
    summary = json.loads((out / "summary.json").read_text())
    manifest = json.loads((out / "manifest.json").read_text())
    return out, summary, manifest


def test_derive_seed_streams_are_distinct_and_stable():
    seeds = {derive_seed(42, stream) for stream in range(6)}
    assert len(seeds) == 6
    assert derive_seed(42, 0) == derive_seed(42, 0)
    assert derive_seed(42, 0) != derive_seed(43, 0)


def test_build_trace_stacks_static_offset():
    params = {"powerlaw": None, "telegraph": None, "static_sigma": 1e5}
    trace = build_trace(params, duration=1.0, dt=0.1, master_seed=3)
    assert len(trace.samples) == 10
    assert np.ptp(trace.samples) == 0.0
    again = build_trace(params, duration=1.0, dt=0.1, master_seed=3)
    assert trace.samples[0] == again.samples[0]
    with pytest.raises(ScenarioError, match="empty"):
        build_trace({"static_sigma": 0.0}, 1.0, 0.1, 3)


def test_synthesize_noise_outputs(tmp_path):
    doc = {
        "scenario": "synthesize-noise",
        "seed": 5,
        "params": {"duration": "10 s", "dt": "10 ms", "powerlaw": dict(POWERLAW)},
    }
    out, summary, manifest = run(doc, tmp_path)
    lines = (out / "trace.csv").read_text().splitlines()
    assert lines[0] == "time_s,delta_f_hz"
    assert len(lines) == 1001
    assert summary["n_samples"] == 1000
    assert summary["variance_hz2"] > 0
    trace_doc = json.loads((out / "trace.json").read_text())
    assert trace_doc["dt_s"] == pytest.approx(0.01)
    assert len(trace_doc["samples_hz"]) == 1000
    assert sorted(manifest["outputs"]) == [
        "manifest.json",
        "summary.json",
        "trace.csv",
        "trace.json",
    ]


def test_synthesize_noise_seed_changes_samples(tmp_path):
    doc = {
        "scenario": "synthesize-noise",
        "seed": 5,
        "params": {"duration": "2 s", "dt": "10 ms", "powerlaw": dict(POWERLAW)},
    }
    out_a, _, _ = run(doc, tmp_path, "a")
    out_b, _, _ = run({**doc, "seed": 6}, tmp_path, "b")
    assert (out_a / "trace.csv").read_text() != (out_b / "trace.csv").read_text()
    out_c, _, _ = run(doc, tmp_path, "c")
    assert (out_a / "trace.csv").read_text() == (out_c / "trace.csv").read_text()


def test_repeated_ramsey_outputs(tmp_path):
    doc = {
        "scenario": "repeated-ramsey",
        "seed": 7,
        "params": {
            "noise": {"static_sigma": "50 kHz"},
            "t_step": "40 ns",
            "t_max": "2 us",
            "repetitions": 8,
            "probabilities": True,
        },
    }
    out, summary, _ = run(doc, tmp_path)
    assert summary["rows"] == 8
    assert summary["cols"] == 50
    assert summary["kind"] == "probabilities"
    map_lines = (out / "ramsey_map.csv").read_text().splitlines()
    assert len(map_lines) == 9
    header = map_lines[0].split(",")
    assert header[0] == "row_start_s"
    assert len(header) == 51
    assert float(header[1]) == pytest.approx(40e-9)
    values = np.array([[float(x) for x in line.split(",")[1:]] for line in map_lines[1:]])
    assert values.min() >= 0.0 and values.max() <= 1.0
    fft_lines = (out / "ramsey_fft.csv").read_text().splitlines()
    assert len(fft_lines) == 9
    assert len(fft_lines[0].split(",")) == 27


def test_repeated_ramsey_row_period_validation(tmp_path):
    doc = {
        "scenario": "repeated-ramsey",
        "seed": 7,
        "output_directory": str(tmp_path / "x"),
        "params": {
            "noise": {"static_sigma": "50 kHz"},
            "t_step": "40 ns",
            "t_max": "2 us",
            "repetitions": 4,
            "row_period": "1 ms",
        },
    }
    with pytest.raises(ScenarioError, match="row_period"):
        run_scenario(parse_config(doc, base_dir=tmp_path))


def test_rabi_chevron_outputs(tmp_path):
    doc = {
        "scenario": "rabi-chevron",
        "seed": 9,
        "params": {
            "noise": {"static_sigma": "100 kHz", "dt": "1 ms", "duration": "1 s"},
            "rabi_frequency": "1 MHz",
            "detuning_span": "4 MHz",
            "t_max": "3 us",
            "n_detuning": 5,
            "n_time": 6,
            "averages": 10,
        },
    }
    out, summary, _ = run(doc, tmp_path)
    lines = (out / "chevron.csv").read_text().splitlines()
    assert lines[0].split(",")[0] == "detuning_hz"
    assert len(lines) == 6
    assert len(lines[1].split(",")) == 7
    assert 0.0 <= summary["p_min"] <= summary["p_max"] <= 1.0
    assert summary["noise_gain"] == 1.0


def test_feedback_run_both_modes(tmp_path):
    doc = {
        "scenario": "feedback-run",
        "seed": 21,
        "params": {
            "noise": {"static_sigma": "100 kHz"},
            "mode": "both",
            "n_cycles": 5,
            "record_shots": True,
        },
    }
    out, summary, manifest = run(doc, tmp_path)
    for name in ("cycles_closed.csv", "cycles_open.csv", "shots_closed.csv", "shots_open.csv"):
        assert name in manifest["outputs"]
    closed_lines = (out / "cycles_closed.csv").read_text().splitlines()
    assert closed_lines[0] == "cycle,start_time_s,f_est_hz,correction_hz,true_detuning_hz"
    assert len(closed_lines) == 6
    shots_lines = (out / "shots_closed.csv").read_text().splitlines()
    assert len(shots_lines) == 5 * 100 + 1
    assert summary["noise_dt_s"] == pytest.approx(24e-3)
    assert "suppression_ratio" in summary
    for mode in ("closed", "open"):
        assert summary[mode]["n_degenerate"] == 0
        assert summary[mode]["std_f_est_hz"] >= 0
    assert summary["open"]["final_correction_hz"] == 0.0


def test_feedback_run_duration_validation(tmp_path):
    doc = {
        "scenario": "feedback-run",
        "seed": 21,
        "output_directory": str(tmp_path / "x"),
        "params": {
            "noise": {"static_sigma": "100 kHz", "duration": "50 ms"},
            "mode": "closed",
            "n_cycles": 10,
        },
    }
    with pytest.raises(ScenarioError, match="duration"):
        run_scenario(parse_config(doc, base_dir=tmp_path))


def test_psd_analysis_from_csv_input(tmp_path):
    synth = {
        "scenario": "synthesize-noise",
        "seed": 33,
        "params": {"duration": "60 s", "dt": "1 ms", "powerlaw": dict(POWERLAW)},
    }
    trace_out, _, _ = run(synth, tmp_path, "traceout")
    doc = {
        "scenario": "psd-analysis",
        "seed": 34,
        "params": {
            "input_csv": str(Path(trace_out.name) / "trace.csv"),
            "column": "delta_f_hz",
            "dt": "1 ms",
            "method": "periodogram",
            "fit_band": {"f_lo": "0.1 Hz", "f_hi": "100 Hz"},
        },
    }
    out, summary, _ = run(doc, tmp_path, "psd")
    assert summary["input"]["source"] == "csv"
    assert summary["psd_integral_hz2"] == pytest.approx(
        summary["series_variance_hz2"], rel=1e-9
    )
    assert summary["fit"]["exponent"] == pytest.approx(1.34, abs=0.25)
    fit_lines = (out / "psd_fit.csv").read_text().splitlines()
    assert fit_lines[0] == "amplitude_hz2_per_hz,exponent,f_lo_hz,f_hi_hz,residual_rms_log10"
    assert len(fit_lines) == 2


def test_psd_analysis_missing_column(tmp_path):
    csv_path = tmp_path / "series.csv"
    write_csv(csv_path, ["time_s", "other"], [(0.0, 1.0), (1.0, 2.0)])
    doc = {
        "scenario": "psd-analysis",
        "seed": 1,
        "output_directory": str(tmp_path / "x"),
        "params": {"input_csv": "series.csv", "column": "delta_f_hz", "dt": "1 s"},
    }
    with pytest.raises(ScenarioError, match="delta_f_hz"):
        run_scenario(parse_config(doc, base_dir=tmp_path))


def test_diffusion_analysis_random_walk(tmp_path):
    rng = np.random.default_rng(2)
    walk = np.cumsum(rng.normal(0.0, 1e3, size=40000))
    csv_path = tmp_path / "walk.csv"
    write_csv(csv_path, ["value_hz"], ((v,) for v in walk))
    doc = {
        "scenario": "diffusion-analysis",
        "seed": 3,
        "params": {
            "input_csv": "walk.csv",
            "column": "value_hz",
            "dt": "10 ms",
            "intervals": ["10 ms", "20 ms", "50 ms", "100 ms", "200 ms", "500 ms"],
        },
    }
    out, summary, _ = run(doc, tmp_path, "diff")
    assert summary["alpha"] == pytest.approx(1.0, abs=0.2)
    assert summary["sub_diffusive"] in (True, False)
    lines = (out / "diffusion.csv").read_text().splitlines()
    assert lines[0] == "interval_s,variance_hz2"
    assert len(lines) == 7


def test_gst_violation_scenario(tmp_path):
    targets = {1: 0.5, 4: 3.0, 16: 6.5}
    rows = []
    for length, target in targets.items():
        rec = record_with_statistic(f"c{length}", "gxgy", length, target, n_total=2000)
        assert two_delta_loglik(rec) == pytest.approx(target, abs=1e-9)
        for outcome, (count, prob) in enumerate(zip(rec.outcome_counts, rec.model_probs)):
            rows.append((rec.circuit_id, rec.germ_label, length, outcome, count, prob))
    dataset = tmp_path / "dataset.csv"
    write_csv(dataset, ["circuit_id", "germ", "L", "outcome", "count", "model_prob"], rows)
    doc = {
        "scenario": "gst-violation",
        "seed": 11,
        "params": {"dataset_csv": "dataset.csv", "k": 1, "confidence": 0.95},
    }
    out, summary, _ = run(doc, tmp_path, "gst")
    assert summary["n_circuits"] == 3
    assert summary["n_consistent"] == 1
    assert summary["n_fluctuation"] == 1
    assert summary["n_violation"] == 1
    for length, target in targets.items():
        assert summary["aggregate_by_length"][str(length)] == pytest.approx(target, abs=1e-9)
    report = json.loads((out / "report.json").read_text())
    assert [c["circuit_id"] for c in report["per_circuit"]] == ["c1", "c4", "c16"]
    lines = (out / "violations.csv").read_text().splitlines()
    assert lines[0] == "circuit_id,germ,L,k,two_delta_loglik,flag"
    assert len(lines) == 4


def test_run_scenario_rejects_unknown_name(tmp_path):
    resolved = {
        "scenario": "mystery",
        "seed": 0,
        "output_directory": str(tmp_path / "x"),
        "base_dir": ".",
        "params": {},
    }
    with pytest.raises(ScenarioError, match="unknown scenario"):
        run_scenario(resolved)
