"""Static SVG output: choropleth maps and line charts.

Rendering is a pure function of its inputs: no clock, no randomness,
fixed two-decimal coordinate text. Calling a renderer twice with the
same data yields identical bytes, which is what makes image output
testable at all.

Geometry is projected with a plate carree that scales longitude by the
cosine of the mid-latitude, which is plenty for a single-country extent,
and rings are thinned with Douglas-Peucker in pixel space so detail
adapts to the output size rather than the source resolution.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence
from xml.sax.saxutils import escape, quoteattr

from .errors import EmptyInput, NonNumericColumn
from .geo import FeatureSet, GeoTable
from .ods import canonical_number
from .table import ColumnKind, TidyTable

# ColorBrewer YlGnBu, 7 steps, light to dark
YLGNBU_7 = (
    "#ffffcc",
    "#c7e9b4",
    "#7fcdbb",
    "#41b6c4",
    "#1d91c0",
    "#225ea8",
    "#0c2c84",
)

# Okabe-Ito colour-blind-safe cycle, orange first so single-series
# charts do not come out black
OKABE_ITO = (
    "#e69f00",
    "#56b4e9",
    "#009e73",
    "#f0e442",
    "#0072b2",
    "#d55e00",
    "#cc79a7",
    "#000000",
)

NO_DATA_FILL = "#cccccc"


def sample_palette(palette: Sequence[str], classes: int) -> list[str]:
    """Evenly spaced picks from a palette, endpoints included."""
    if classes == len(palette):
        return list(palette)
    if classes == 1:
        return [palette[-1]]
    last = len(palette) - 1
    return [palette[round(i * last / (classes - 1))] for i in range(classes)]


def _numeric_values(values, cap: float | None) -> list[float]:
    out = []
    for v in values:
        if v is None:
            continue
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise NonNumericColumn(
                f"cannot class {type(v).__name__} value {v!r}"
            )
        out.append(float(v) if cap is None else min(float(v), float(cap)))
    return out


def class_breaks(
    values,
    classes: int = 7,
    method: str = "quantile",
    cap: float | None = None,
) -> list[float]:
    """Upper thresholds splitting values into ``classes`` bins.

    Returns ``classes - 1`` ascending break values. ``quantile`` uses
    nearest-rank quantiles of the data; ``equal_interval`` splits the
    observed range evenly. Values above ``cap`` count as ``cap``.
    """
    if classes < 2:
        raise ValueError("need at least 2 classes")
    data = sorted(_numeric_values(values, cap))
    if not data:
        raise EmptyInput("no numeric values to classify")
    if method == "quantile":
        n = len(data)
        return [data[math.ceil(k * n / classes) - 1] for k in range(1, classes)]
    if method == "equal_interval":
        lo, hi = data[0], data[-1]
        step = (hi - lo) / classes
        return [lo + k * step for k in range(1, classes)]
    raise ValueError(f"method must be 'quantile' or 'equal_interval', not {method!r}")


def classify(value: float, breaks: Sequence[float], cap: float | None = None) -> int:
    """Bin index for a value: 0 is ``v <= breaks[0]``, the last bin is
    ``v > breaks[-1]``."""
    v = float(value)
    if cap is not None:
        v = min(v, float(cap))
    return bisect_left(breaks, v)


# -- projection and simplification -------------------------------------


@dataclass(frozen=True)
class _Projection:
    min_lon: float
    max_lat: float
    cos_lat: float
    scale: float
    x0: float
    y0: float

    def __call__(self, lon: float, lat: float) -> tuple[float, float]:
        return (
            self.x0 + (lon - self.min_lon) * self.cos_lat * self.scale,
            self.y0 + (self.max_lat - lat) * self.scale,
        )


def _fit_projection(
    bounds: tuple[float, float, float, float],
    width: float,
    height: float,
    x_offset: float,
    y_offset: float,
) -> _Projection:
    min_lon, min_lat, max_lon, max_lat = bounds
    cos_lat = math.cos(math.radians((min_lat + max_lat) / 2))
    span_x = (max_lon - min_lon) * cos_lat
    span_y = max_lat - min_lat
    candidates = []
    if span_x > 0:
        candidates.append(width / span_x)
    if span_y > 0:
        candidates.append(height / span_y)
    scale = min(candidates) if candidates else 1.0
    return _Projection(
        min_lon=min_lon,
        max_lat=max_lat,
        cos_lat=cos_lat,
        scale=scale,
        x0=x_offset + (width - span_x * scale) / 2,
        y0=y_offset + (height - span_y * scale) / 2,
    )


def simplify(points: list[tuple[float, float]], tolerance: float) -> list[tuple[float, float]]:
    """Douglas-Peucker thinning in the coordinate space given.

    Closed rings (first point repeated at the end) stay closed. With a
    tolerance of 0, points pass through untouched.
    """
    if tolerance <= 0 or len(points) <= 4:
        return points
    closed = points[0] == points[-1]
    pts = points[:-1] if closed else points
    if len(pts) <= 2:
        return points
    keep = [False] * len(pts)
    keep[0] = keep[-1] = True
    stack = [(0, len(pts) - 1)]
    while stack:
        a, b = stack.pop()
        if b - a < 2:
            continue
        ax, ay = pts[a]
        bx, by = pts[b]
        dx, dy = bx - ax, by - ay
        norm = math.hypot(dx, dy)
        worst = -1.0
        worst_at = -1
        for i in range(a + 1, b):
            px, py = pts[i]
            if norm == 0.0:
                d = math.hypot(px - ax, py - ay)
            else:
                d = abs(dx * (py - ay) - dy * (px - ax)) / norm
            if d > worst:
                worst, worst_at = d, i
        if worst > tolerance:
            keep[worst_at] = True
            stack.append((a, worst_at))
            stack.append((worst_at, b))
    out = [p for p, k in zip(pts, keep) if k]
    if closed:
        out.append(out[0])
    return out


def _px(v: float) -> str:
    text = f"{v:.2f}"
    return "0.00" if text == "-0.00" else text


def _fmt(v: float) -> str:
    return canonical_number(round(float(v), 2))


# -- choropleth ---------------------------------------------------------


@dataclass(frozen=True)
class ChoroplethSpec:
    width: int = 800
    height: int = 600
    padding: int = 16
    classes: int = 7
    method: str = "quantile"
    cap: float | None = None
    palette: tuple[str, ...] = YLGNBU_7
    no_data_fill: str = NO_DATA_FILL
    stroke: str = "#ffffff"
    stroke_width: float = 0.5
    simplify_tolerance: float = 0.5
    title: str | None = None
    legend: bool = True
    background: str = "#ffffff"


def choropleth(
    geo: GeoTable | FeatureSet,
    values: str | Mapping[str, float | int | None],
    spec: ChoroplethSpec = ChoroplethSpec(),
    path: str | Path | None = None,
) -> bytes:
    """Colour every boundary by its value.

    ``geo`` is either a joined ``GeoTable`` with ``values`` naming one
    of its numeric columns, or a bare ``FeatureSet`` with a code-to-value
    mapping. Areas without a value get the no-data fill. Exactly one
    ``<path>`` element is emitted per feature; the legend is rects and
    text only.
    """
    if isinstance(geo, GeoTable):
        featureset = geo.featureset
        if not isinstance(values, str):
            raise TypeError("with a GeoTable, values must name a column")
        column = geo.table.column(values)
        if column.kind not in (ColumnKind.INT, ColumnKind.FLOAT):
            raise NonNumericColumn(
                f"column {values!r} is {column.kind.value}; maps need numbers"
            )
        value_map = geo.value_map(values)
    else:
        featureset = geo
        if isinstance(values, str):
            raise TypeError("with a FeatureSet, values must be a mapping")
        value_map = dict(values)

    numeric = [v for v in value_map.values() if v is not None]
    if not numeric:
        raise EmptyInput("no values to map")
    breaks = class_breaks(numeric, spec.classes, spec.method, spec.cap)
    colors = sample_palette(spec.palette, spec.classes)

    legend_width = 150 if spec.legend else 0
    title_height = 32 if spec.title else 0
    proj = _fit_projection(
        featureset.bounds(),
        spec.width - 2 * spec.padding - legend_width,
        spec.height - 2 * spec.padding - title_height,
        spec.padding,
        spec.padding + title_height,
    )

    parts = [_svg_open(spec.width, spec.height, spec.background)]
    if spec.title:
        parts.append(
            f'<text x="{_px(spec.width / 2)}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{escape(spec.title)}</text>'
        )

    for feature in featureset.features:
        value = value_map.get(feature.code)
        if value is None:
            fill = spec.no_data_fill
            value_attr = ""
        else:
            fill = colors[classify(value, breaks, spec.cap)]
            value_attr = f" data-value={quoteattr(canonical_number(float(value)))}"
        d = _feature_path(feature, proj, spec.simplify_tolerance)
        parts.append(
            f'<path d="{d}" fill="{fill}" stroke="{spec.stroke}" '
            f'stroke-width="{_px(spec.stroke_width)}" fill-rule="evenodd" '
            f"data-code={quoteattr(feature.code)}{value_attr}/>"
        )

    if spec.legend:
        parts.extend(
            _legend(
                breaks,
                colors,
                spec.no_data_fill,
                x=spec.width - legend_width + 10,
                y=spec.padding + title_height + 4,
            )
        )
    parts.append("</svg>\n")
    data = "\n".join(parts).encode("utf-8")
    if path is not None:
        Path(path).write_bytes(data)
    return data


def _feature_path(feature, proj: _Projection, tolerance: float) -> str:
    chunks = []
    for polygon in feature.geometry.polygons:
        for ring in polygon:
            projected = [proj(lon, lat) for lon, lat in ring]
            thinned = simplify(projected, tolerance)
            if not thinned:
                continue
            coords = [f"{_px(x)},{_px(y)}" for x, y in thinned]
            # drop the repeated closing point, Z closes the subpath
            if len(coords) > 1 and coords[0] == coords[-1]:
                coords.pop()
            chunks.append("M" + "L".join(coords) + "Z")
    return "".join(chunks)


def _legend(breaks, colors, no_data_fill, x: float, y: float) -> list[str]:
    labels = []
    for i in range(len(colors)):
        if i == 0:
            labels.append(f"<= {_fmt(breaks[0])}")
        elif i == len(colors) - 1:
            labels.append(f"> {_fmt(breaks[-1])}")
        else:
            labels.append(f"{_fmt(breaks[i - 1])} to {_fmt(breaks[i])}")
    labels.append("no data")
    swatches = list(colors) + [no_data_fill]
    parts = ['<g font-family="sans-serif" font-size="11">']
    for i, (color, label) in enumerate(zip(swatches, labels)):
        top = y + i * 18
        parts.append(
            f'<rect x="{_px(x)}" y="{_px(top)}" width="12" height="12" '
            f'fill="{color}" stroke="#999999" stroke-width="0.5"/>'
        )
        parts.append(
            f'<text x="{_px(x + 17)}" y="{_px(top + 10)}">{escape(label)}</text>'
        )
    parts.append("</g>")
    return parts


# -- line charts --------------------------------------------------------


@dataclass(frozen=True)
class LineChartSpec:
    width: int = 800
    height: int = 450
    padding: int = 52
    palette: tuple[str, ...] = OKABE_ITO
    stroke_width: float = 1.8
    title: str | None = None
    x_label: str | None = None
    y_label: str | None = None
    ticks: int = 5
    legend: bool = True
    background: str = "#ffffff"
    grid: str = "#e6e6e6"


def line_chart(
    table: TidyTable,
    x: str,
    ys: Sequence[str],
    spec: LineChartSpec = LineChartSpec(),
    path: str | Path | None = None,
) -> bytes:
    """One polyline run per non-null stretch of each series.

    Null y values break the line; an isolated point becomes a small
    circle so it stays visible. The x column orders the points.
    """
    if not ys:
        raise EmptyInput("no series named")
    x_col = _numeric_column(table, x)
    series = [(name, _numeric_column(table, name)) for name in ys]

    points_by_series = []
    for name, col in series:
        pts = [
            (float(xv), None if yv is None else float(yv))
            for xv, yv in zip(x_col.values, col.values)
            if xv is not None
        ]
        pts.sort(key=lambda p: p[0])
        points_by_series.append((name, pts))

    xs = [p[0] for _, pts in points_by_series for p in pts]
    ys_all = [p[1] for _, pts in points_by_series for p in pts if p[1] is not None]
    if not xs or not ys_all:
        raise EmptyInput("nothing to plot: all values are null")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    pad = spec.padding
    title_height = 28 if spec.title else 0
    plot_w = spec.width - 2 * pad
    plot_h = spec.height - 2 * pad - title_height
    top = pad + title_height

    def sx(v: float) -> float:
        return pad + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return top + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    parts = [_svg_open(spec.width, spec.height, spec.background)]
    if spec.title:
        parts.append(
            f'<text x="{_px(spec.width / 2)}" y="22" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16">{escape(spec.title)}</text>'
        )

    # grid and tick labels
    parts.append('<g font-family="sans-serif" font-size="11" fill="#333333">')
    ticks = max(2, spec.ticks)
    for k in range(ticks):
        frac = k / (ticks - 1)
        yv = y_lo + frac * (y_hi - y_lo)
        ypix = sy(yv)
        parts.append(
            f'<line x1="{_px(pad)}" y1="{_px(ypix)}" x2="{_px(pad + plot_w)}" '
            f'y2="{_px(ypix)}" stroke="{spec.grid}" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_px(pad - 6)}" y="{_px(ypix + 4)}" '
            f'text-anchor="end">{escape(_fmt(yv))}</text>'
        )
        xv = x_lo + frac * (x_hi - x_lo)
        xpix = sx(xv)
        parts.append(
            f'<text x="{_px(xpix)}" y="{_px(top + plot_h + 16)}" '
            f'text-anchor="middle">{escape(_fmt(xv))}</text>'
        )
    parts.append("</g>")

    # axes
    parts.append(
        f'<line x1="{_px(pad)}" y1="{_px(top)}" x2="{_px(pad)}" '
        f'y2="{_px(top + plot_h)}" stroke="#333333" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_px(pad)}" y1="{_px(top + plot_h)}" x2="{_px(pad + plot_w)}" '
        f'y2="{_px(top + plot_h)}" stroke="#333333" stroke-width="1"/>'
    )
    if spec.x_label:
        parts.append(
            f'<text x="{_px(pad + plot_w / 2)}" y="{_px(spec.height - 10)}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="12">'
            f"{escape(spec.x_label)}</text>"
        )
    if spec.y_label:
        cx, cy = 14, top + plot_h / 2
        parts.append(
            f'<text x="{_px(cx)}" y="{_px(cy)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 {_px(cx)} {_px(cy)})">{escape(spec.y_label)}</text>'
        )

    for index, (name, pts) in enumerate(points_by_series):
        color = spec.palette[index % len(spec.palette)]
        for segment in _segments(pts):
            if len(segment) == 1:
                xpix, ypix = sx(segment[0][0]), sy(segment[0][1])
                parts.append(
                    f'<circle cx="{_px(xpix)}" cy="{_px(ypix)}" r="2.5" '
                    f'fill="{color}" data-series={quoteattr(name)}/>'
                )
            else:
                coords = " ".join(
                    f"{_px(sx(px))},{_px(sy(py))}" for px, py in segment
                )
                parts.append(
                    f'<polyline points="{coords}" fill="none" stroke="{color}" '
                    f'stroke-width="{_px(spec.stroke_width)}" '
                    f"data-series={quoteattr(name)}/>"
                )

    if spec.legend:
        parts.append('<g font-family="sans-serif" font-size="11">')
        for index, (name, _) in enumerate(points_by_series):
            color = spec.palette[index % len(spec.palette)]
            ly = top + 8 + index * 16
            lx = pad + plot_w - 120
            parts.append(
                f'<rect x="{_px(lx)}" y="{_px(ly - 4)}" width="14" height="4" '
                f'fill="{color}"/>'
            )
            parts.append(f'<text x="{_px(lx + 19)}" y="{_px(ly)}">{escape(name)}</text>')
        parts.append("</g>")

    parts.append("</svg>\n")
    data = "\n".join(parts).encode("utf-8")
    if path is not None:
        Path(path).write_bytes(data)
    return data


def _numeric_column(table: TidyTable, name: str):
    column = table.column(name)
    if column.kind not in (ColumnKind.INT, ColumnKind.FLOAT):
        raise NonNumericColumn(
            f"column {name!r} is {column.kind.value}; charts need numbers"
        )
    return column


def _segments(points):
    run: list[tuple[float, float]] = []
    for xv, yv in points:
        if yv is None:
            if run:
                yield run
                run = []
        else:
            run.append((xv, yv))
    if run:
        yield run


def _svg_open(width: int, height: int, background: str) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="{background}"/>'
    )
