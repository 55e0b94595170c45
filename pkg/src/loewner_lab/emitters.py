"""
Output writers: JSON reports, CSV trajectories and SVG disk plots.

JSON and CSV output is byte-deterministic: floats use 17 significant digits
with lowercase exponents, lines end in LF, and non-finite JSON numbers are null.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import sys
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any, TextIO

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from loewner_lab.disk import PolarGrid  # noqa: E402

logger = logging.getLogger(__name__)

matplotlib.rcParams["svg.hashsalt"] = "loewner-lab"


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def _encode(value: Any, indent: int, level: int) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value) if math.isfinite(value) else "null"
    if isinstance(value, str):
        return json.dumps(value)
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if isinstance(value, Mapping):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in value) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    raise TypeError(f"cannot encode {type(value).__name__} as JSON")


def to_json(value: Any, indent: int = 2) -> str:
    """Serialize plain data (as produced by ``model_dump(mode="json")``)."""
    return _encode(value, indent, 0) + "\n"


def write_json(value: Any, path: str | Path | None = None) -> None:
    """Write JSON to ``path``, or to standard output when no path is given."""
    text = to_json(value)
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info(f"Wrote {path}")


def _write_rows(
    stream: TextIO, times: Sequence[float], points: Sequence[complex], status: str
) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["t", "re", "im"])
    for t, w in zip(times, points):
        writer.writerow([format_float(t), format_float(w.real), format_float(w.imag)])
    if status != "ok":
        stream.write(f"# status: {status}\n")


def write_trajectory_csv(
    path: str | Path | None,
    times: Sequence[float],
    points: Sequence[complex],
    status: str = "ok",
) -> None:
    """
    Write (t, re, im) rows; a failed solve appends a ``# status: ...`` footer.

    Writes to standard output when no path is given.
    """
    if path is None:
        _write_rows(sys.stdout, times, points, status)
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        _write_rows(f, times, points, status)
    logger.info(f"Wrote {len(times)} trajectory rows to {path}")


def plot_grid_svg(
    path: str | Path,
    grid: PolarGrid,
    images: Sequence[complex | None],
    fixed: Sequence[complex] = (),
    tau: complex | None = None,
) -> None:
    """
    Static SVG of a grid image: unit circle, image mesh, F and tau markers.

    ``images`` follows the order of ``grid.points()``; missing images break the mesh.
    """
    values = np.array([np.nan if w is None else complex(w) for w in images], dtype=complex)
    rings = values[1:].reshape(grid.n_radii, grid.n_angles)

    fig, ax = plt.subplots(figsize=(6, 6))
    theta = np.linspace(0.0, 2.0 * np.pi, 721)
    ax.plot(np.cos(theta), np.sin(theta), color="black", linewidth=1.0)
    for ring in rings:
        closed = np.append(ring, ring[0])
        ax.plot(closed.real, closed.imag, color="tab:blue", linewidth=0.6)
    for spoke in np.vstack([np.full(grid.n_angles, values[0]), rings]).T:
        ax.plot(spoke.real, spoke.imag, color="tab:blue", linewidth=0.6)
    if len(fixed):
        marks = np.array(fixed, dtype=complex)
        ax.plot(marks.real, marks.imag, "o", color="tab:red", label="F")
    if tau is not None:
        ax.plot([tau.real], [tau.imag], "*", color="tab:green", markersize=12, label="tau")
    if len(fixed) or tau is not None:
        ax.legend(loc="upper right")
    ax.set_aspect("equal")
    ax.set_xlim(-1.1, 1.1)
    ax.set_ylim(-1.1, 1.1)
    ax.set_axis_off()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Wrote plot {path}")
