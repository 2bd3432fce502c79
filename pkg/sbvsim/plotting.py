"""
SVG Plots
Rate-vs-x and coverage C-CDF charts rendered as standalone SVG text
"""

import math
from typing import List, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np
import pandas as pd

from .coverage import COVERAGE_COLUMNS, OPERATOR_COLUMN
from .exceptions import SchemaError
from .fileio import PathLike, read_csv_checked
from .linkrate import SWEEP_COLUMNS
from .logging_config import get_logger

logger = get_logger(__name__)

PLOT_KINDS = ("rate-vs-x", "ccdf")

WIDTH, HEIGHT = 720, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 200, 30, 60
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")
DASHES = {"NV": "6,4", "SBV": "", "FULL_VECTOR": "2,3"}

PREAMBLE = """\
<?xml version="1.0" encoding="UTF-8" standalone="no"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="%(width)d" height="%(height)d" viewBox="0 0 %(width)d %(height)d">
<title>%(title)s</title>
<rect x="0" y="0" width="%(width)d" height="%(height)d" style="fill:#ffffff"/>
"""

POSTAMBLE = "</svg>\n"

Series = Tuple[str, str, np.ndarray, np.ndarray]


def _nice_ceiling(value: float) -> float:
    if value <= 0:
        return 1.0
    exponent = math.floor(math.log10(value))
    for step in (1, 2, 2.5, 5, 10):
        candidate = step * 10 ** exponent
        if candidate >= value * (1 - 1e-12):
            return candidate
    return 10 ** (exponent + 1)


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _tick_label(value: float) -> str:
    return f"{value:g}"


class SvgChart:
    """Minimal line chart: axes, ticks, one polyline per series, legend"""

    def __init__(self, title: str, x_label: str, y_label: str, x_max: float, y_max: float):
        self.title = title
        self.x_label = x_label
        self.y_label = y_label
        self.x_max = _nice_ceiling(x_max)
        self.y_max = _nice_ceiling(y_max)
        self.commands: List[str] = []

    def _px(self, x: float) -> float:
        return LEFT + (WIDTH - LEFT - RIGHT) * x / self.x_max

    def _py(self, y: float) -> float:
        return HEIGHT - BOTTOM - (HEIGHT - TOP - BOTTOM) * y / self.y_max

    def axes(self, ticks: int = 5):
        x0, y0 = self._px(0), self._py(0)
        self.commands.append(
            f'<path d="M {_fmt(x0)} {_fmt(self._py(self.y_max))} L {_fmt(x0)} {_fmt(y0)} '
            f'L {_fmt(self._px(self.x_max))} {_fmt(y0)}" style="fill:none;stroke:#000000;stroke-width:1"/>'
        )
        for i in range(ticks + 1):
            xv = self.x_max * i / ticks
            yv = self.y_max * i / ticks
            px, py = self._px(xv), self._py(yv)
            self.commands.append(f'<line x1="{_fmt(px)}" y1="{_fmt(y0)}" x2="{_fmt(px)}" y2="{_fmt(y0 + 5)}" '
                                 f'style="stroke:#000000"/>')
            self.commands.append(f'<text x="{_fmt(px)}" y="{_fmt(y0 + 18)}" text-anchor="middle" '
                                 f'font-size="11">{_tick_label(xv)}</text>')
            self.commands.append(f'<line x1="{_fmt(x0 - 5)}" y1="{_fmt(py)}" x2="{_fmt(x0)}" y2="{_fmt(py)}" '
                                 f'style="stroke:#000000"/>')
            self.commands.append(f'<text x="{_fmt(x0 - 8)}" y="{_fmt(py + 4)}" text-anchor="end" '
                                 f'font-size="11">{_tick_label(yv)}</text>')
        mid_x = (LEFT + WIDTH - RIGHT) / 2
        mid_y = (TOP + HEIGHT - BOTTOM) / 2
        self.commands.append(f'<text x="{_fmt(mid_x)}" y="{HEIGHT - 20}" text-anchor="middle" '
                             f'font-size="13">{escape(self.x_label)}</text>')
        self.commands.append(f'<text x="20" y="{_fmt(mid_y)}" text-anchor="middle" font-size="13" '
                             f'transform="rotate(-90 20 {_fmt(mid_y)})">{escape(self.y_label)}</text>')

    def polyline(self, xs: np.ndarray, ys: np.ndarray, color: str, dash: str, label: str):
        points = " ".join(f"{_fmt(self._px(x))},{_fmt(self._py(y))}" for x, y in zip(xs, ys))
        style = f"fill:none;stroke:{color};stroke-width:2"
        if dash:
            style += f";stroke-dasharray:{dash}"
        self.commands.append(f'<polyline class="series" points="{points}" style="{style}">'
                             f'<title>{escape(label)}</title></polyline>')

    def legend(self, entries: Sequence[Tuple[str, str, str]]):
        x = WIDTH - RIGHT + 15
        for i, (label, color, dash) in enumerate(entries):
            y = TOP + 10 + 18 * i
            style = f"stroke:{color};stroke-width:2" + (f";stroke-dasharray:{dash}" if dash else "")
            self.commands.append(f'<line class="legend" x1="{x}" y1="{y}" x2="{x + 24}" y2="{y}" style="{style}"/>')
            self.commands.append(f'<text x="{x + 30}" y="{y + 4}" font-size="11">{escape(label)}</text>')

    def render(self) -> str:
        head = PREAMBLE % {"width": WIDTH, "height": HEIGHT, "title": escape(self.title)}
        return head + "".join(c + "\n" for c in self.commands) + POSTAMBLE


def _chart(series: Sequence[Series], title: str, x_label: str, y_label: str, y_max: float) -> str:
    x_max = max(float(np.max(xs)) for _, _, xs, _ in series)
    chart = SvgChart(title, x_label, y_label, x_max, y_max)
    chart.axes()
    entries = []
    for i, (label, mode, xs, ys) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        dash = DASHES.get(mode, "")
        chart.polyline(xs, ys, color, dash, label)
        entries.append((label, color, dash))
    chart.legend(entries)
    return chart.render()


def _numeric(frame: pd.DataFrame, columns: Sequence[str], path: PathLike):
    for column in columns:
        values = pd.to_numeric(frame[column], errors="coerce")
        if values.isna().any():
            row = int(np.flatnonzero(values.isna().to_numpy())[0]) + 1
            raise SchemaError(f"{path}: non-numeric {column} in row {row}")
        frame[column] = values


def render_rate_plot(frame: pd.DataFrame, source: PathLike = "<frame>") -> str:
    """Rate per (operator, mode) series against distance or f_max"""
    _numeric(frame, ["x", "operator", "rate_mbps"], source)
    is_fmax = float(frame["x"].max()) > 1e5
    scale = 1e6 if is_fmax else 1.0
    series = []
    for (mode, op), group in frame.groupby(["mode", "operator"], sort=True):
        group = group.sort_values("x", kind="mergesort")
        label = f"{mode} operator {int(op)}"
        series.append((label, str(mode), group["x"].to_numpy() / scale, group["rate_mbps"].to_numpy()))
    y_max = float(frame["rate_mbps"].max())
    x_label = "f_max (MHz)" if is_fmax else "distance (m)"
    return _chart(series, "Per-operator downstream rate", x_label, "rate (Mbit/s)", y_max)


def render_ccdf_plot(frame: pd.DataFrame, source: PathLike = "<frame>") -> str:
    """Coverage against rate threshold, one series per (mode, f_max, n_us) and operator when present"""
    keys = ["mode", "f_max_hz", "n_us"]
    if OPERATOR_COLUMN in frame.columns:
        keys.append(OPERATOR_COLUMN)
    _numeric(frame, ["threshold_mbps", "coverage"] + keys[1:], source)
    series = []
    for values, group in frame.groupby(keys, sort=True):
        mode, f_max, n_us = values[:3]
        group = group.sort_values("threshold_mbps", kind="mergesort")
        label = f"{mode} {f_max / 1e6:g} MHz n_us={int(n_us)}"
        if len(values) > 3:
            label += f" operator {int(values[3])}"
        series.append((label, str(mode), group["threshold_mbps"].to_numpy(), group["coverage"].to_numpy()))
    return _chart(series, "Coverage (C-CDF)", "rate threshold (Mbit/s)", "coverage", 1.0)


def plot_csv(path: PathLike, kind: str) -> str:
    """Render a sweep or coverage CSV; the SVG text is returned for the caller to write"""
    if kind not in PLOT_KINDS:
        raise SchemaError(f"unknown plot kind '{kind}', expected one of {', '.join(PLOT_KINDS)}")
    required = SWEEP_COLUMNS if kind == "rate-vs-x" else COVERAGE_COLUMNS
    frame = read_csv_checked(path, required)
    if frame.empty:
        raise SchemaError(f"{path}: no data rows")
    svg = render_rate_plot(frame, path) if kind == "rate-vs-x" else render_ccdf_plot(frame, path)
    logger.debug(f"Rendered {kind} plot from {path}")
    return svg
