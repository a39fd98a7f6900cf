"""Render phasemin CSV outputs into publication-style images.

Three figure kinds, one per producing command:

* ``fg_curve``   - the gain curves f, g and their ratio over the
  correlation level, with a reference line at 1 (f stays above it, g
  below, the ratio at or above).
* ``heatmap``    - empirical success rate over the (n, m) grid.
* ``trajectory`` - per-iteration correlation |c0| and error on a log
  scale for a single run.

Rendering is read-only and deterministic: fixed style, no timestamps or
random ids embedded, so rerendering the same CSV byte-reproduces the
image.
"""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

matplotlib.rcParams["svg.hashsalt"] = "phasemin-figures"

__all__ = ["SCHEMAS", "FigureSpec", "SchemaError", "load_table", "render"]

SCHEMAS = {
    "fg_curve": ["c", "f_hat", "f_stderr", "g_hat", "g_stderr", "ratio"],
    "heatmap": ["n", "m", "trials", "successes", "success_rate", "median_iterations"],
    "trajectory": ["k", "c0", "error"],
}


class SchemaError(ValueError):
    """The CSV header does not match the documented schema."""

    def __init__(self, kind: str, expected: list[str], found: list[str]):
        super().__init__(
            f"{kind}: expected columns {expected}, found {found}"
        )
        self.expected = expected
        self.found = found


@dataclass(frozen=True)
class FigureSpec:
    """One figure to render: input CSV, kind, output image path."""

    input_csv: str
    figure_kind: str
    output_image: str
    title: str | None = None

    def __post_init__(self):
        if self.figure_kind not in SCHEMAS:
            raise ValueError(
                f"unknown figure kind {self.figure_kind!r}; "
                f"choose from {sorted(SCHEMAS)}"
            )


def load_table(path: str, kind: str) -> dict[str, np.ndarray]:
    """Read a CSV and validate its header against the schema for ``kind``.

    Returns float column arrays (possibly empty: a header-only file is
    schema-valid).
    """
    expected = SCHEMAS[kind]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(kind, expected, []) from None
        if header != expected:
            raise SchemaError(kind, expected, header)
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.asarray(rows, dtype=float) if rows else np.empty((0, len(expected)))
    return {name: data[:, i] for i, name in enumerate(expected)}


def _save(fig, path: str) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    # Date metadata would break byte-reproducibility of SVG output
    metadata = {"Date": None} if out.suffix.lower() == ".svg" else None
    fig.savefig(out, metadata=metadata)
    plt.close(fig)


def _warn_empty(spec: FigureSpec) -> None:
    print(
        f"warning: {spec.input_csv} has no data rows; rendering empty axes",
        file=sys.stderr,
    )


def _render_fg_curve(spec: FigureSpec, table) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if table["c"].size:
        ax.plot(table["c"], table["f_hat"], label="f", color="tab:blue")
        ax.plot(table["c"], table["g_hat"], label="g", color="tab:orange")
        ax.plot(table["c"], table["ratio"], label="f/g", color="tab:green")
    else:
        _warn_empty(spec)
    ax.axhline(1.0, color="gray", linestyle="--", linewidth=1.0)
    ax.set_xlabel("correlation level c")
    ax.set_ylabel("one-step gain")
    ax.set_title(spec.title or "Expectation gains and their ratio")
    if table["c"].size:
        ax.legend(loc="best")
    fig.tight_layout()
    _save(fig, spec.output_image)


def _render_heatmap(spec: FigureSpec, table) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if table["n"].size:
        ns = np.unique(table["n"]).astype(int)
        ms = np.unique(table["m"]).astype(int)
        grid = np.full((len(ns), len(ms)), np.nan)
        for n, m, rate in zip(table["n"], table["m"], table["success_rate"]):
            grid[np.searchsorted(ns, int(n)), np.searchsorted(ms, int(m))] = rate
        im = ax.imshow(
            grid, origin="lower", aspect="auto", vmin=0.0, vmax=1.0,
            cmap="viridis",
        )
        ax.set_xticks(range(len(ms)), [str(m) for m in ms])
        ax.set_yticks(range(len(ns)), [str(n) for n in ns])
        fig.colorbar(im, ax=ax, label="success rate")
    else:
        _warn_empty(spec)
    ax.set_xlabel("measurements m")
    ax.set_ylabel("signal dimension n")
    ax.set_title(spec.title or "Recovery success rate")
    fig.tight_layout()
    _save(fig, spec.output_image)


def _render_trajectory(spec: FigureSpec, table) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if table["k"].size:
        ax.semilogy(table["k"], table["c0"], label="|c0|", color="tab:blue")
        err = np.asarray(table["error"])
        pos = err > 0
        ax.semilogy(table["k"][pos], err[pos], label="error", color="tab:red")
    else:
        _warn_empty(spec)
    ax.set_xlabel("iteration k")
    ax.set_ylabel("value (log scale)")
    ax.set_title(spec.title or "Iterate correlation and error")
    if table["k"].size:
        ax.legend(loc="best")
    fig.tight_layout()
    _save(fig, spec.output_image)


_RENDERERS = {
    "fg_curve": _render_fg_curve,
    "heatmap": _render_heatmap,
    "trajectory": _render_trajectory,
}


def render(spec: FigureSpec) -> str:
    """Validate the input CSV and write the figure; returns the image path."""
    table = load_table(spec.input_csv, spec.figure_kind)
    _RENDERERS[spec.figure_kind](spec, table)
    return spec.output_image
