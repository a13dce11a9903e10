"""Deterministic CSV emission and parsing for all artifact outputs.

Every file starts with '# key=value' comment lines holding the resolved
parameters, then a mandatory header row.  Floats are written with 17
significant digits so equal inputs produce byte-identical files.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .dynamics import AmplitudeTrace
from .field import IntensityTrace
from .params import SystemParams
from .spectral import ModeExpansion


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def param_header(params: SystemParams, extra: dict | None = None) -> list[str]:
    fields = {
        "gamma22": params.gamma22, "gamma33": params.gamma33,
        "gamma23": params.gamma23, "gamma32": params.gamma32,
        "omega23": params.omega23, "omega21": params.omega21,
        "distance": params.distance, "velocity": params.velocity,
        "phi2_effective": params.phi2_effective,
        "phi3_effective": params.phi3_effective,
    }
    lines = [f"# {k}={_fmt(v)}" for k, v in fields.items()]
    for k in sorted(extra or {}):
        v = (extra or {})[k]
        lines.append(f"# {k}={_fmt(v) if isinstance(v, float) else v}")
    return lines


def _write(path, comment_lines, header, rows):
    buf = io.StringIO()
    for line in comment_lines:
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(buf.getvalue())


POLE_COLUMNS = ["n", "re_s", "im_s", "re_alpha", "im_alpha", "re_beta", "im_beta",
                "re_alpha_bar", "im_alpha_bar", "re_beta_bar", "im_beta_bar"]


def write_poles_csv(path, expansion: ModeExpansion, extra: dict | None = None):
    meta = {"sector": expansion.sector.label,
            "window_re_max": float(expansion.window.re_max),
            "window_im_max": float(expansion.window.im_max)}
    meta.update(extra or {})
    rows = []
    for n, m in enumerate(expansion.modes):
        rows.append([n] + [_fmt(v) for v in (
            m.s.real, m.s.imag, m.alpha.real, m.alpha.imag, m.beta.real, m.beta.imag,
            m.alpha_bar.real, m.alpha_bar.imag, m.beta_bar.real, m.beta_bar.imag)])
    _write(path, param_header(expansion.params, meta), POLE_COLUMNS, rows)


AMPLITUDE_COLUMNS = ["t", "re_cA2", "im_cA2", "re_cA3", "im_cA3",
                     "re_cB2", "im_cB2", "re_cB3", "im_cB3",
                     "pop2A", "pop3A", "pop2B", "pop3B", "provenance"]


def write_amplitudes_csv(path, trace: AmplitudeTrace, params: SystemParams,
                         deviation: np.ndarray | None = None,
                         extra: dict | None = None):
    header = list(AMPLITUDE_COLUMNS)
    if deviation is not None:
        header.append("deviation")
    rows = []
    for i, t in enumerate(trace.times):
        row = [_fmt(t)]
        for comp in trace.amplitude_components():
            row += [_fmt(comp[i].real), _fmt(comp[i].imag)]
        row += [_fmt(trace.pop2a[i]), _fmt(trace.pop3a[i]),
                _fmt(trace.pop2b[i]), _fmt(trace.pop3b[i]), trace.provenance]
        if deviation is not None:
            row.append(_fmt(deviation[i]))
        rows.append(row)
    _write(path, param_header(params, extra), header, rows)


INTENSITY_COLUMNS = ["t", "x", "intensity_normalized", "provenance"]


def write_intensity_csv(path, trace: IntensityTrace, params: SystemParams,
                        extra: dict | None = None):
    meta = {"normalization": trace.normalization}
    meta.update(extra or {})
    rows = [[_fmt(t), _fmt(trace.x), _fmt(v), trace.provenance]
            for t, v in zip(trace.times, trace.values)]
    _write(path, param_header(params, meta), INTENSITY_COLUMNS, rows)


def write_sweep_csv(path, axis_name: str, metric_names: list[str], rows,
                    params: SystemParams, extra: dict | None = None):
    """rows: iterable of (axis_value, metrics dict or None, error str)."""
    header = [axis_name] + metric_names + ["error"]
    out = []
    for value, metrics, error in rows:
        line = [_fmt(value)]
        for name in metric_names:
            line.append(_fmt(metrics[name]) if metrics and name in metrics else "")
        line.append(error or "")
        out.append(line)
    _write(path, param_header(params, extra), header, out)


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    """Parse one artifact CSV into (comment params, header, rows)."""
    meta: dict[str, str] = {}
    header: list[str] = []
    rows: list[list[str]] = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = v.strip()
                continue
            if not header:
                header = next(csv.reader([line]))
            else:
                rows.append(next(csv.reader([line])))
    return meta, header, rows
