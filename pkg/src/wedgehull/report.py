"""Deterministic report serialization, CSV trace emission, figure rendering.

Reports are JSON with sorted keys, floats printed to 17 significant digits,
and rationals carried as "p/q" strings, so identical inputs and seeds give
byte-identical output.  Trace families inside a report payload become one
CSV file each; figures are a rendering convenience layered on the same rows.
"""

from __future__ import annotations

import csv
import math
import re
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ProblemFormatError
from .series import rational_str

_NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def jsonable(value):
    """Normalize payload values for canonical serialization."""
    if isinstance(value, Fraction):
        return rational_str(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, complex):
        return [jsonable(value.real), jsonable(value.imag)]
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, dict):
        out = {}
        for key, val in value.items():
            if not isinstance(key, str):
                key = str(key)
            out[key] = jsonable(val)
        return out
    if value is None or isinstance(value, (bool, int, str, float)):
        return value
    return str(value)


def _render(value, out: list, indent: int) -> None:
    pad = "  " * indent
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        text = format_float(value)
        # JSON has no spelling for non-finite numbers; quote them
        out.append(f'"{text}"' if text.strip("-").isalpha() else text)
    elif isinstance(value, str):
        out.append(_escape(value))
    elif isinstance(value, list):
        if not value:
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(value):
            out.append(pad + "  ")
            _render(item, out, indent + 1)
            out.append(",\n" if i + 1 < len(value) else "\n")
        out.append(pad + "]")
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(value)
        for i, key in enumerate(keys):
            out.append(pad + "  " + _escape(key) + ": ")
            _render(value[key], out, indent + 1)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(pad + "}")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def _escape(text: str) -> str:
    out = ['"']
    for ch in text:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def canonical_json(obj) -> str:
    out: list = []
    _render(jsonable(obj), out, 0)
    out.append("\n")
    return "".join(out)


def build_report(*, command: str, target: str | None, version: str,
                 input_digest: str, seed: int, degree_cap: int | None,
                 config: dict, payload: dict, timing_ms: float) -> dict:
    return {
        "meta": {
            "tool": "wedgehull",
            "version": version,
            "command": command,
            "target": target,
            "input_digest": input_digest,
            "seed": seed,
            "degree_cap": degree_cap,
            "config": config,
            "timing_ms": timing_ms,
        },
        "payload": payload,
    }


def render_report(report: dict) -> str:
    return canonical_json(report)


def trace_family(name: str, columns, rows) -> dict:
    if not _NAME_RE.match(name):
        raise ValueError(f"trace family name {name!r} is not filesystem-safe")
    return {"name": name, "columns": list(columns),
            "rows": [[_cell_value(c) for c in row] for row in rows]}


def _cell_value(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, Fraction):
        return rational_str(value)
    return value


def _cell_text(value) -> str:
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, Fraction):
        return rational_str(value)
    return str(value)


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell_text(c) for c in row])


def emit_plot(report: dict, out_dir) -> list[Path]:
    """Write one CSV per trace family in the report payload."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ProblemFormatError(f"cannot create plot directory: {exc}", str(out_dir))
    written = []
    for family in report.get("payload", {}).get("traces", []) or []:
        name = family.get("name", "")
        if not _NAME_RE.match(name):
            raise ProblemFormatError(f"bad trace family name {name!r}", "payload.traces")
        path = out_dir / f"{name}.csv"
        write_csv(path, family["columns"], family["rows"])
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# figures: a convenience view of the same rows the CSV files carry


def render_figures(report: dict, out_dir) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for family in report.get("payload", {}).get("traces", []) or []:
        name = family["name"]
        fig = plt.figure(figsize=(6.0, 4.5), dpi=120)
        ax = fig.add_subplot(111)
        try:
            if name == "screen_discs":
                _draw_screens(ax, family)
            elif name.startswith("lewy_disc"):
                _draw_lewy(ax, family)
            else:
                drawn = _draw_generic(ax, family)
                if not drawn:
                    plt.close(fig)
                    continue
            ax.set_title(name.replace("_", " "))
            path = out_dir / f"{name}.png"
            fig.tight_layout()
            fig.savefig(path)
            written.append(path)
        finally:
            plt.close(fig)
    return written


def _columns(family) -> dict:
    rows = family["rows"]
    return {col: [row[i] for row in rows]
            for i, col in enumerate(family["columns"])}


def _draw_screens(ax, family) -> None:
    cols = _columns(family)
    groups: dict = {}
    for t, arc, e1, e2 in zip(cols["t"], cols["arc"], cols["eta1"], cols["eta2"]):
        groups.setdefault((t, arc), ([], []))
        groups[(t, arc)][0].append(e1)
        groups[(t, arc)][1].append(e2)
    for (t, arc), (xs, ys) in sorted(groups.items()):
        if arc.startswith("curve"):
            style = "--" if "half" in arc else "-"
            ax.plot(xs, ys, style, color="black", linewidth=1.4, label=arc)
        else:
            ax.plot(xs, ys, color="tab:blue", linewidth=0.4, alpha=0.5)
    ax.set_xlabel("eta1")
    ax.set_ylabel("eta2")
    ax.legend(loc="upper left", fontsize=8)


def _draw_lewy(ax, family) -> None:
    cols = _columns(family)
    colors = {"plus": "tab:red", "minus": "tab:blue", "edge": "black"}
    for label in ("plus", "minus", "edge"):
        xs = [x for x, lab in zip(cols["re_zeta"], cols["label"]) if lab == label]
        ys = [y for y, lab in zip(cols["im_zeta"], cols["label"]) if lab == label]
        if xs:
            ax.scatter(xs, ys, s=4 if label != "edge" else 24,
                       color=colors[label], label=label)
    ax.set_aspect("equal")
    ax.set_xlabel("Re zeta")
    ax.set_ylabel("Im zeta")
    ax.legend(loc="upper right", fontsize=8)


def _draw_generic(ax, family) -> bool:
    cols = _columns(family)
    numeric = [(name, vals) for name, vals in cols.items()
               if vals and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                               for v in vals)]
    if len(numeric) < 2:
        return False
    (xname, xs), (yname, ys) = numeric[0], numeric[1]
    ax.plot(xs, ys, "o-", markersize=3, linewidth=0.8)
    ax.set_xlabel(xname)
    ax.set_ylabel(yname)
    return True
