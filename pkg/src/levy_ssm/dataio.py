"""Series files, flat key-value configs, and a small SVG plotter.

The on-disk series format is plain CSV (UTF-8, LF, ``.`` decimal) with a
header row, preceded by ``# key: value`` comment lines that record how the
file was produced (generator name, seed, model parameters).  Numbers are
written in shortest round-trip form so re-parsing reproduces the exact bit
patterns.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)


class SeriesFormatError(ValueError):
    """Malformed series or config file; message carries path and line."""


@dataclass
class Series:
    """An observation record: strictly ascending times with one value each."""

    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-d and equally long")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0.0):
            raise ValueError("series times must be strictly ascending")

    def __len__(self) -> int:
        return self.times.size


def _format_number(x: float) -> str:
    """Shortest decimal string that round-trips to the same float."""
    return repr(float(x))


def _meta_lines(meta: dict) -> list[str]:
    return [f"# {k}: {v}" for k, v in meta.items()]


def write_table(path, header, rows, meta=None) -> None:
    """Write a CSV table with ``# key: value`` provenance comments."""
    lines = _meta_lines(meta or {})
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_format_number(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_table(path):
    """Read a CSV table written by write_table.

    Returns ``(header, rows, meta)`` with rows as a 2-d float array (shaped
    (0, len(header)) when the table is empty).  Raises SeriesFormatError
    with a line number on malformed content.
    """
    path = Path(path)
    meta = {}
    header = None
    rows = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                k, v = body.split(":", 1)
                meta[k.strip()] = v.strip()
            continue
        if header is None:
            header = [c.strip() for c in line.split(",")]
            continue
        cells = line.split(",")
        if len(cells) < len(header):
            raise SeriesFormatError(
                f"{path}:{lineno}: expected {len(header)} columns, got {len(cells)}"
            )
        try:
            rows.append([float(c) for c in cells[: len(header)]])
        except ValueError as exc:
            raise SeriesFormatError(f"{path}:{lineno}: {exc}") from None
    if header is None:
        raise SeriesFormatError(f"{path}: no header row found")
    arr = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(header)))
    return header, arr, meta


def write_series(path, series: Series, meta=None) -> None:
    merged = dict(series.meta)
    merged.update(meta or {})
    write_table(path, ["time", "value"], zip(series.times, series.values), merged)


def read_series(path) -> Series:
    """Read a two-column (time, value) CSV, sorting and deduplicating.

    Input rows may be unsorted or carry duplicate timestamps (tick data
    often does); they are sorted and first-of-duplicates kept, with a
    warning stating how many rows were affected.
    """
    header, arr, meta = read_table(path)
    if len(header) < 2:
        raise SeriesFormatError(f"{path}: need at least two columns, got {header}")
    if arr.shape[0] == 0:
        return Series(np.empty(0), np.empty(0), meta)
    times = arr[:, 0]
    values = arr[:, 1]
    if np.any(~np.isfinite(times)):
        raise SeriesFormatError(f"{path}: non-finite timestamps")
    n_unsorted = int(np.sum(np.diff(times) < 0.0))
    if n_unsorted:
        order = np.argsort(times, kind="stable")
        times, values = times[order], values[order]
        log.warning("%s: sorted %d out-of-order rows", path, n_unsorted)
    keep = np.concatenate([[True], np.diff(times) > 0.0])
    n_dup = int(np.sum(~keep))
    if n_dup:
        times, values = times[keep], values[keep]
        log.warning("%s: dropped %d duplicate-timestamp rows", path, n_dup)
    return Series(times, values, meta)


def parse_config(path) -> dict:
    """Parse a flat ``key = value`` text file into a string mapping."""
    path = Path(path)
    out = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SeriesFormatError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise SeriesFormatError(f"{path}:{lineno}: empty key")
        out[key] = value.strip()
    return out


def _scale(lo: float, hi: float, pixels_lo: float, pixels_hi: float):
    span = hi - lo
    if span <= 0.0:
        span = 1.0
    k = (pixels_hi - pixels_lo) / span
    return lambda v: pixels_lo + (v - lo) * k


def svg_state_plot(
    path,
    times,
    means,
    sds,
    truth_times=None,
    truth_values=None,
    title="state estimate",
) -> None:
    """Self-contained SVG line plot of a mean with its +-3 sigma band."""
    times = np.asarray(times, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    sds = np.asarray(sds, dtype=np.float64)
    w, h = 900, 420
    ml, mr, mt, mb = 60, 15, 30, 40
    lo_y = float(np.min(means - 3.0 * sds))
    hi_y = float(np.max(means + 3.0 * sds))
    if truth_values is not None:
        lo_y = min(lo_y, float(np.min(truth_values)))
        hi_y = max(hi_y, float(np.max(truth_values)))
    pad = 0.05 * (hi_y - lo_y or 1.0)
    lo_y, hi_y = lo_y - pad, hi_y + pad
    lo_x, hi_x = float(times.min()), float(times.max())
    sx = _scale(lo_x, hi_x, ml, w - mr)
    sy = _scale(lo_y, hi_y, h - mb, mt)

    def pts(xs, ys):
        return " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))

    band = pts(times, means + 3.0 * sds) + " " + pts(times[::-1], (means - 3.0 * sds)[::-1])
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{ml}" y="18" font-family="sans-serif" font-size="14">{title}</text>',
        f'<polygon points="{band}" fill="#9ecae1" fill-opacity="0.45" stroke="none"/>',
        f'<polyline points="{pts(times, means)}" fill="none" stroke="#08519c" stroke-width="1.5"/>',
    ]
    if truth_times is not None and truth_values is not None:
        parts.append(
            f'<polyline points="{pts(np.asarray(truth_times, float), np.asarray(truth_values, float))}" '
            'fill="none" stroke="#d62728" stroke-width="1" stroke-dasharray="4,3"/>'
        )
    axis = 'stroke="black" stroke-width="1"'
    parts.append(f'<line x1="{ml}" y1="{h - mb}" x2="{w - mr}" y2="{h - mb}" {axis}/>')
    parts.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{h - mb}" {axis}/>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = lo_x + frac * (hi_x - lo_x)
        yv = lo_y + frac * (hi_y - lo_y)
        parts.append(
            f'<text x="{sx(xv):.2f}" y="{h - mb + 16}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle">{xv:.4g}</text>'
        )
        parts.append(
            f'<text x="{ml - 6}" y="{sy(yv):.2f}" font-family="sans-serif" '
            f'font-size="11" text-anchor="end" dominant-baseline="middle">{yv:.4g}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
