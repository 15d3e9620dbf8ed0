"""Report serialisation and SVG overlays of clustered element energies."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .model import Model
from .stability import SUSPECT, EnergyField, StabilityReport

SUSPECT_FILL = "#d62728"
WIRE_STROKE = "#808080"
NODE_FILL = "#404040"


def _fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    s = f"{x:.17g}"
    # keep floats recognisable as floats after a round trip
    if not any(ch in s for ch in ".eE"):
        s += ".0"
    return s


def _encode(obj, level: int = 0) -> str:
    pad = "  " * (level + 1)
    end = "  " * level
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in obj):
            return "[" + ", ".join(_encode(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (pad + json.dumps(str(k)) + ": " + _encode(v, level + 1) for k, v in obj.items())
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps_json(obj) -> str:
    """JSON text with floats at 17 significant digits; non-finite floats become strings."""
    return _encode(obj) + "\n"


def report_to_dict(report: StabilityReport) -> dict:
    cond = report.condition
    eig = report.eigen
    gap = report.gap
    return {
        "tool": "msa",
        "version": report.version,
        "input_digest": report.input_digest,
        "parameters": dict(report.parameters),
        "condition": {
            "kappa_est": cond.kappa_est,
            "lambda_max_est": cond.lambda_max_est,
            "lambda_min_est": cond.lambda_min_est,
            "ill_conditioned": cond.ill_conditioned,
            "singular": cond.singular,
            "threshold": cond.threshold,
        },
        "eigenvalues": {
            "n": eig.n,
            "shift": eig.shift,
            "smallest": eig.smallest_values,
            "smallest_residuals": eig.smallest_residuals,
            "largest": eig.largest_values,
            "largest_residuals": eig.largest_residuals,
        },
        "gap": None if gap is None else {
            "k": gap.k,
            "gf": gap.gf,
            "table": [{"k": k, "left": a, "right": b} for k, a, b in gap.table],
        },
        "fields": [
            {
                "kind": f.kind,
                "eigen_index": f.eigen_index,
                "eigenvalue": f.eigenvalue,
                "degenerate": f.degenerate,
                "separated": f.separated,
                "elements": [
                    {"id": eid, "raw": raw, "normalized": nv, "cluster": lab}
                    for eid, raw, nv, lab in zip(f.element_ids, f.raw.tolist(),
                                                 f.normalized.tolist(), f.labels)
                ],
            }
            for f in report.fields
        ],
        "warnings": list(report.warnings),
    }


def report_to_json(report: StabilityReport) -> str:
    return dumps_json(report_to_dict(report))


def write_report(report: StabilityReport, path) -> None:
    Path(path).write_text(report_to_json(report), encoding="utf-8")


def _num(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def emit_svg(model: Model, field: EnergyField, path=None, r_max_frac: float = 0.04) -> str:
    """Circle overlay of one energy field on the model wireframe.

    Each suspect element gets a circle at its midpoint with radius
    ``r_max * sqrt(normalized energy)``; sound elements display as zero and get
    no circle. ``r_max`` is ``r_max_frac`` of the larger model extent. Model y
    points up, so it is negated in SVG coordinates.
    """
    coords = model.coordinates()
    xs = [c[0] for c in coords.values()]
    ys = [-c[1] for c in coords.values()]
    xmin, xmax, ymin, ymax = min(xs), max(xs), min(ys), max(ys)
    span = max(xmax - xmin, ymax - ymin) or 1.0
    w = (xmax - xmin) or span
    h = (ymax - ymin) or span
    cx0, cy0 = (xmin + xmax) / 2, (ymin + ymax) / 2
    x0, y0 = cx0 - w / 2 - 0.05 * w, cy0 - h / 2 - 0.05 * h
    vw, vh = 1.1 * w, 1.1 * h
    r_max = r_max_frac * span
    stroke = 0.005 * span

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{_num(x0)} {_num(y0)} {_num(vw)} {_num(vh)}">',
        f"<title>{field.kind}-energy, eigenpair {field.eigen_index}</title>",
        f'<g id="wireframe" stroke="{WIRE_STROKE}" stroke-width="{_num(stroke)}" fill="none">',
    ]
    for el in model.sorted_elements():
        (xa, ya), (xb, yb) = coords[el.nodes[0]], coords[el.nodes[1]]
        out.append(f'<line id="e{el.id}" x1="{_num(xa)}" y1="{_num(-ya)}" '
                   f'x2="{_num(xb)}" y2="{_num(-yb)}"/>')
    out.append("</g>")
    out.append(f'<g id="nodes" fill="{NODE_FILL}">')
    for nid in sorted(coords):
        x, y = coords[nid]
        out.append(f'<circle id="n{nid}" cx="{_num(x)}" cy="{_num(-y)}" r="{_num(2 * stroke)}"/>')
    out.append("</g>")
    out.append(f'<g id="energy" fill="{SUSPECT_FILL}" fill-opacity="0.6">')
    by_id = {el.id: el for el in model.elements}
    for eid, value, label in zip(field.element_ids, field.normalized, field.labels):
        shown = value if label == SUSPECT else 0.0
        if not shown > 0:
            continue
        el = by_id[eid]
        (xa, ya), (xb, yb) = coords[el.nodes[0]], coords[el.nodes[1]]
        r = r_max * math.sqrt(shown)
        out.append(f'<circle class="energy" data-element="{eid}" cx="{_num((xa + xb) / 2)}" '
                   f'cy="{_num(-(ya + yb) / 2)}" r="{_num(r)}"/>')
    out.append("</g>")
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def svg_filename(field: EnergyField) -> str:
    return f"{field.kind}_{field.eigen_index:04d}.svg"
