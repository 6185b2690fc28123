"""Regenerate the committed fixture data with the driftlock CLI.

Run from the figrender directory with driftlock installed:

    python3 fixtures/generate.py

Each fixture directory keeps its config.json next to the outputs, so every
file here is reproducible byte for byte.  The gst fixture additionally
needs an input dataset; it is constructed with driftlock's fixture helper
so its statistics land in prescribed bands.
"""

from __future__ import annotations

import csv
import json
import subprocess
import sys
from pathlib import Path

from driftlock.violation import record_with_statistic

HERE = Path(__file__).resolve().parent

SECONDS_PER_CYCLE = "24 ms"

FIXTURES: dict[str, dict] = {
    "ramsey": {
        "scenario": "repeated-ramsey",
        "seed": 11,
        "params": {
            "noise": {
                "powerlaw": {
                    "amplitude": "0.003 MHz^2/Hz",
                    "exponent": 1.3,
                    "f_low": "0.01 Hz",
                    "f_high": "1 kHz",
                },
                "dt": "5 ms",
            },
            "f_offset": "2 MHz",
            "t_step": "80 ns",
            "t_max": "2 us",
            "repetitions": 48,
            "probabilities": True,
        },
    },
    "ramsey_quiet": {
        "scenario": "repeated-ramsey",
        "seed": 12,
        "params": {
            "noise": {
                "powerlaw": {
                    "amplitude": "0 MHz^2/Hz",
                    "exponent": 1.0,
                    "f_low": "0.01 Hz",
                    "f_high": "1 kHz",
                },
                "dt": "5 ms",
            },
            "f_offset": "2 MHz",
            "t_step": "80 ns",
            "t_max": "2 us",
            "repetitions": 32,
            "probabilities": True,
        },
    },
    "psd": {
        "scenario": "psd-analysis",
        "seed": 21,
        "params": {
            "synthesize": {
                "powerlaw": {
                    "amplitude": "0.00296 MHz^2/Hz",
                    "exponent": 1.34,
                    "f_low": "0.01 Hz",
                    "f_high": "50 Hz",
                },
                "dt": "10 ms",
                "duration": "200 s",
            },
            "method": "averaged-segments",
            "n_segments": 8,
            "fit_band": {"f_lo": "0.05 Hz", "f_hi": "10 Hz"},
        },
    },
    "feedback": {
        "scenario": "feedback-run",
        "seed": 31,
        "params": {
            "noise": {
                "powerlaw": {
                    "amplitude": "0.00175 MHz^2/Hz",
                    "exponent": 1.17,
                    "f_low": "0.00333333333333 Hz",
                    "f_high": "0.1 MHz",
                },
            },
            "mode": "both",
            "n_cycles": 1200,
            "cycle_period": SECONDS_PER_CYCLE,
        },
    },
    "chevron": {
        "scenario": "rabi-chevron",
        "seed": 41,
        "params": {
            "noise": {"static_sigma": "150 kHz", "dt": "1 ms", "duration": "10 s"},
            "rabi_frequency": "2 MHz",
            "detuning_span": "8 MHz",
            "t_max": "1.5 us",
            "n_detuning": 31,
            "n_time": 41,
            "averages": 64,
        },
    },
    "diffusion": {
        "scenario": "diffusion-analysis",
        "seed": 51,
        "params": {
            "synthesize": {
                "powerlaw": {
                    "amplitude": "0.01 MHz^2/Hz",
                    "exponent": 1.5,
                    "f_low": "0.005 Hz",
                    "f_high": "10 Hz",
                },
                "dt": "50 ms",
                "duration": "400 s",
            },
            "intervals": ["0.05 s", "0.1 s", "0.25 s", "0.5 s", "1 s", "2.5 s", "5 s", "10 s"],
        },
    },
    "gst": {
        "scenario": "gst-violation",
        "seed": 61,
        "params": {"dataset_csv": "dataset.csv", "k": 1, "confidence": 0.95},
    },
}

# (circuit_id, germ, L, target statistic): one circuit per band at each
# length; k=1 throughout, so consistent < 1+sqrt(2) <= fluctuation < 3.84
GST_TARGETS = [
    ("c01", "Gx", 1, 0.8),
    ("c02", "Gy", 1, 3.0),
    ("c03", "Gi", 1, 15.0),
    ("c04", "Gx", 2, 0.9),
    ("c05", "Gy", 2, 3.2),
    ("c06", "Gi", 2, 22.0),
    ("c07", "Gx", 4, 1.1),
    ("c08", "Gy", 4, 2.8),
    ("c09", "Gi", 4, 40.0),
    ("c10", "Gx", 8, 0.7),
    ("c11", "Gy", 8, 3.5),
    ("c12", "Gi", 8, 90.0),
]


def write_gst_dataset(path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["circuit_id", "germ", "L", "outcome", "count", "model_prob"])
        for cid, germ, length, target in GST_TARGETS:
            record = record_with_statistic(cid, germ, length, target, n_total=2000)
            for outcome, count, prob in zip(
                ("up", "down"), record.outcome_counts, record.model_probs
            ):
                writer.writerow([cid, germ, length, outcome, int(count), repr(float(prob))])


def main() -> int:
    for name, config in FIXTURES.items():
        outdir = HERE / name
        outdir.mkdir(parents=True, exist_ok=True)
        if name == "gst":
            write_gst_dataset(outdir / "dataset.csv")
        config_path = outdir / "config.json"
        config_path.write_text(json.dumps(config, indent=2) + "\n")
        subprocess.run(
            ["driftlock", "--config", str(config_path), "--out", str(outdir)],
            check=True,
        )
        print(f"regenerated {name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
