"""Figure specs: one JSON document describing inputs, kind, and output.

```json
{
  "figure_kind": "loglog-psd",
  "output": "psd.png",
  "inputs": {"series": [{"psd_csv": "out/psd.csv", "fit_csv": "out/psd_fit.csv"}]},
  "options": {"title": "residual noise"}
}
```

Relative paths are resolved against the spec file's directory.  Unknown
keys anywhere are an error: a typo should fail, not fall back to a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

from . import figures, readers

FIGURE_KINDS = (
    "heatmap+fft",
    "loglog-psd",
    "histogram",
    "chevron",
    "diffusion",
    "violation-grid",
)

_OUTPUT_SUFFIXES = (".png", ".svg")


class SpecError(ValueError):
    """The figure spec document is malformed."""


@dataclass
class FigureSpec:
    figure_kind: str
    output: Path
    inputs: dict
    options: dict = field(default_factory=dict)
    base_dir: Path = Path(".")


def _require_keys(block: dict, where: str, required: tuple, optional: tuple = ()):
    if not isinstance(block, dict):
        raise SpecError(f"{where}: expected an object")
    for key in required:
        if key not in block:
            raise SpecError(f"{where}: required key {key!r} missing")
    unknown = sorted(set(block) - set(required) - set(optional))
    if unknown:
        raise SpecError(f"{where}: unknown keys: {', '.join(unknown)}")


def _string(block: dict, where: str, key: str) -> str:
    value = block[key]
    if not isinstance(value, str) or not value:
        raise SpecError(f"{where}.{key}: expected a non-empty string")
    return value


def parse_spec(document: dict, base_dir=".") -> FigureSpec:
    _require_keys(document, "spec", ("figure_kind", "output", "inputs"), ("options",))
    kind = _string(document, "spec", "figure_kind")
    if kind not in FIGURE_KINDS:
        raise SpecError(f"figure_kind: {kind!r} is not one of {list(FIGURE_KINDS)}")
    output = Path(_string(document, "spec", "output"))
    if output.suffix.lower() not in _OUTPUT_SUFFIXES:
        raise SpecError(f"output: {output.name!r} must end in one of {_OUTPUT_SUFFIXES}")
    options = document.get("options", {})
    allowed = ("title", "dpi", "bins") if kind == "histogram" else ("title", "dpi")
    _require_keys(options, "options", (), allowed)
    inputs = document["inputs"]
    if not isinstance(inputs, dict):
        raise SpecError("inputs: expected an object")
    return FigureSpec(
        figure_kind=kind,
        output=output,
        inputs=inputs,
        options=options,
        base_dir=Path(base_dir),
    )


def load_spec(path) -> FigureSpec:
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise SpecError(f"{path}: spec file does not exist") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise SpecError(f"{path}: top level must be an object")
    return parse_spec(document, base_dir=path.parent)


def _path(spec: FigureSpec, where: str, block: dict, key: str) -> Path:
    raw = Path(_string(block, where, key))
    return raw if raw.is_absolute() else spec.base_dir / raw


def _series_list(spec: FigureSpec, required: tuple, optional: tuple) -> list[dict]:
    raw = spec.inputs.get("series")
    if not isinstance(raw, list) or not raw:
        raise SpecError("inputs.series: expected a non-empty list")
    out = []
    for i, entry in enumerate(raw):
        _require_keys(entry, f"inputs.series[{i}]", required, optional)
        out.append(entry)
    return out


def _build_heatmap_fft(spec: FigureSpec):
    _require_keys(spec.inputs, "inputs", ("map_csv", "fft_csv"))
    ramsey = readers.read_matrix(_path(spec, "inputs", spec.inputs, "map_csv"), "row_start_s")
    fft = readers.read_matrix(_path(spec, "inputs", spec.inputs, "fft_csv"), "row_start_s")
    return figures.heatmap_fft(ramsey, fft, spec.options)


def _build_loglog_psd(spec: FigureSpec):
    series = []
    for i, entry in enumerate(_series_list(spec, ("psd_csv",), ("fit_csv", "label"))):
        where = f"inputs.series[{i}]"
        item = {
            "psd": readers.read_table(_path(spec, where, entry, "psd_csv"), readers.PSD_HEADER),
            "fit": None,
            "label": entry.get("label"),
        }
        if entry.get("fit_csv") is not None:
            item["fit"] = readers.read_table(
                _path(spec, where, entry, "fit_csv"), readers.PSD_FIT_HEADER
            )
        series.append(item)
    return figures.loglog_psd(series, spec.options)


def _build_histogram(spec: FigureSpec):
    series = []
    for i, entry in enumerate(
        _series_list(spec, ("cycles_csv",), ("label", "summary_json", "summary_key"))
    ):
        where = f"inputs.series[{i}]"
        table = readers.read_table(_path(spec, where, entry, "cycles_csv"), readers.CYCLES_HEADER)
        std_hz = None
        if (entry.get("summary_json") is None) != (entry.get("summary_key") is None):
            raise SpecError(f"{where}: summary_json and summary_key must be given together")
        if entry.get("summary_json") is not None:
            summary_path = _path(spec, where, entry, "summary_json")
            summary = readers.read_json(summary_path)
            std_hz = readers.summary_number(
                summary, _string(entry, where, "summary_key"), summary_path
            )
        series.append({"values": table["f_est_hz"], "label": entry.get("label"), "std_hz": std_hz})
    return figures.histogram(series, spec.options)


def _build_chevron(spec: FigureSpec):
    _require_keys(spec.inputs, "inputs", ("chevron_csv",))
    data = readers.read_matrix(_path(spec, "inputs", spec.inputs, "chevron_csv"), "detuning_hz")
    return figures.chevron(data, spec.options)


def _build_diffusion(spec: FigureSpec):
    _require_keys(spec.inputs, "inputs", ("diffusion_csv",), ("fit_csv",))
    points = readers.read_table(
        _path(spec, "inputs", spec.inputs, "diffusion_csv"), readers.DIFFUSION_HEADER
    )
    fit = None
    if spec.inputs.get("fit_csv") is not None:
        fit = readers.read_table(
            _path(spec, "inputs", spec.inputs, "fit_csv"), readers.DIFFUSION_FIT_HEADER
        )
    return figures.diffusion(points, fit, spec.options)


def _build_violation_grid(spec: FigureSpec):
    _require_keys(spec.inputs, "inputs", ("violations_csv",))
    rows = readers.read_violations(_path(spec, "inputs", spec.inputs, "violations_csv"))
    return figures.violation_grid(rows, spec.options)


_BUILDERS = {
    "heatmap+fft": _build_heatmap_fft,
    "loglog-psd": _build_loglog_psd,
    "histogram": _build_histogram,
    "chevron": _build_chevron,
    "diffusion": _build_diffusion,
    "violation-grid": _build_violation_grid,
}


def render(spec: FigureSpec) -> Path:
    """Render one spec to its output path; returns the path written."""
    output = spec.output if spec.output.is_absolute() else spec.base_dir / spec.output
    output.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(figures.STYLE):
        fig = _BUILDERS[spec.figure_kind](spec)
        figures.save_figure(fig, output, dpi=int(spec.options.get("dpi", 100)))
    return output
