"""Self-contained SVG rendering of plots

Output only depends on the inputs: coordinates are written with a fixed
precision and elements are emitted in a fixed order.
Data elements carry a class: `bar`, `line`, `marker`, `point`, `errorbar`, `fit`.
"""

import math
from html import escape
from typing import List, Sequence, Tuple

from .plot import (
    AxisScale,
    PlotSpec,
    PlotType,
    SeriesData,
    linear_regression,
)
from .tools import ScopeError

WIDTH = 800
HEIGHT = 600
MARGIN = 60
TARGET_TICKS = 5

COLORS = [
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#ff7f0e",
    "#9467bd",
    "#8c564b",
]


class EmptyPlot(ScopeError):
    """No series has any point"""

class LogAxisDomain(ScopeError):
    def __init__(self, axis, value):
        self.axis = axis
        self.value = value
        super().__init__(f"{axis} axis is logarithmic but has non-positive value {value}")


def nice_number(value, round_result):
    """Round value to 1, 2, 5 or 10 times a power of 10"""
    exponent = math.floor(math.log10(value))
    fraction = value / 10**exponent
    if round_result:
        if fraction < 1.5:
            nice = 1
        elif fraction < 3:
            nice = 2
        elif fraction < 7:
            nice = 5
        else:
            nice = 10
    else:
        if fraction <= 1:
            nice = 1
        elif fraction <= 2:
            nice = 2
        elif fraction <= 5:
            nice = 5
        else:
            nice = 10
    return nice * 10**exponent


def _format_tick(value, decimals):
    text = f"{value:.{decimals}f}"
    if float(text) == 0:
        return "0"
    return text

def _format_category(value):
    if float(value).is_integer():
        return str(int(value))
    return f"{value:.15g}"


class Axis:
    """Map data values to pixels and compute ticks"""

    def __init__(self, name, scale, vmin, vmax, pmin, pmax):
        self.name = name
        self.scale = scale
        self.pmin = pmin
        self.pmax = pmax
        if scale is AxisScale.LOG10:
            lo = math.floor(math.log10(vmin))
            hi = math.ceil(math.log10(vmax))
            if hi == lo:
                hi = lo + 1
            self.lo, self.hi = lo, hi
            self.ticks = [(10.0**k, f"1e{k}" if abs(k) > 3 else _format_tick(10.0**k, max(0, -k))) for k in range(lo, hi + 1)]
        else:
            if vmin == vmax:
                pad = abs(vmin) * 0.5 or 1.0
                vmin, vmax = vmin - pad, vmax + pad
            span = nice_number(vmax - vmin, False)
            step = nice_number(span / (TARGET_TICKS - 1), True)
            lo = math.floor(vmin / step) * step
            hi = math.ceil(vmax / step) * step
            self.lo, self.hi = lo, hi
            decimals = max(0, -math.floor(math.log10(step)))
            count = int(round((hi - lo) / step))
            self.ticks = [(lo + i * step, _format_tick(lo + i * step, decimals)) for i in range(count + 1)]

    def __call__(self, value):
        if self.scale is AxisScale.LOG10:
            ratio = (math.log10(value) - self.lo) / (self.hi - self.lo)
        else:
            ratio = (value - self.lo) / (self.hi - self.lo)
        return self.pmin + ratio * (self.pmax - self.pmin)


def _check_domain(axis_name, scale, values):
    if scale is AxisScale.LOG10:
        for v in values:
            if v <= 0:
                raise LogAxisDomain(axis_name, v)


def _f(v):
    return f"{v:.2f}"


class _Canvas:
    def __init__(self):
        self.elements: List[str] = []

    def add(self, tag, text=None, **attrs):
        # attribute order is the keyword order
        attr_text = ''.join(f' {k.rstrip("_").replace("_", "-")}="{escape(str(v))}"' for k, v in attrs.items())
        if text is None:
            self.elements.append(f"<{tag}{attr_text}/>")
        else:
            self.elements.append(f"<{tag}{attr_text}>{escape(text)}</{tag}>")

    def line(self, x1, y1, x2, y2, **attrs):
        self.add('line', x1=_f(x1), y1=_f(y1), x2=_f(x2), y2=_f(y2), **attrs)

    def text(self, x, y, text, **attrs):
        self.add('text', text, x=_f(x), y=_f(y), **attrs)


def render(spec: PlotSpec, series: Sequence[SeriesData]) -> str:
    """Render series as an SVG document"""

    if all(not s.points for s in series):
        raise EmptyPlot("nothing to plot: all series are empty")

    left, right = MARGIN, WIDTH - MARGIN
    top, bottom = MARGIN, HEIGHT - MARGIN
    plot_type = spec.plot_type

    # regression fits, computed first so that fit lines are within the axes
    fits = {}
    if plot_type is PlotType.REGRESSION:
        for i, s in enumerate(series):
            if s.samples:
                fits[i] = linear_regression(s.samples)

    xs = [x for s in series for x, _, _ in s.points]
    ys = [y for s in series for _, y, _ in s.points]
    if plot_type is PlotType.REGRESSION:
        ys += [y for s in series for _, y in s.samples]
    _check_domain('x', spec.x_axis.scale, xs)
    _check_domain('y', spec.y_axis.scale, ys)

    # y extent, including error bars and fit lines
    y_extent = list(ys)
    for s in series:
        for _, y, err in s.points:
            y_extent.append(y + err)
            if spec.y_axis.scale is AxisScale.LINEAR or y - err > 0:
                y_extent.append(y - err)
    for i, (slope, intercept) in fits.items():
        sx = [x for x, _ in series[i].samples]
        fit_ys = [slope * min(sx) + intercept, slope * max(sx) + intercept]
        _check_domain('y', spec.y_axis.scale, fit_ys)
        y_extent += fit_ys
    if plot_type is PlotType.BAR and spec.y_axis.scale is AxisScale.LINEAR:
        y_extent.append(0.0)

    yaxis = Axis('y', spec.y_axis.scale, min(y_extent), max(y_extent), bottom, top)
    slots = sorted(set(xs))
    if plot_type is not PlotType.BAR:
        xaxis = Axis('x', spec.x_axis.scale, min(xs), max(xs), left, right)

    canvas = _Canvas()
    canvas.add('rect', x=0, y=0, width=WIDTH, height=HEIGHT, fill="#ffffff", class_="background")
    if spec.title:
        canvas.text(WIDTH / 2, MARGIN / 2, spec.title, text_anchor="middle", font_size=18, font_family="sans-serif", class_="title")

    # grid and y ticks
    for value, label in yaxis.ticks:
        py = yaxis(value)
        canvas.line(left, py, right, py, stroke="#d9d9d9", stroke_width=1, class_="grid")
        canvas.text(left - 6, py + 4, label, text_anchor="end", font_size=11, font_family="sans-serif", class_="tick")

    # x ticks
    if plot_type is PlotType.BAR:
        slot_width = (right - left) / len(slots)
        x_ticks = [(left + (j + 0.5) * slot_width, _format_category(x)) for j, x in enumerate(slots)]
    else:
        x_ticks = [(xaxis(v), label) for v, label in xaxis.ticks]
    for px, label in x_ticks:
        canvas.line(px, bottom, px, bottom + 5, stroke="#000000", stroke_width=1, class_="tick-mark")
        canvas.text(px, bottom + 18, label, text_anchor="middle", font_size=11, font_family="sans-serif", class_="tick")

    # axes and labels
    canvas.line(left, bottom, right, bottom, stroke="#000000", stroke_width=1.5, class_="axis")
    canvas.line(left, top, left, bottom, stroke="#000000", stroke_width=1.5, class_="axis")
    if spec.x_axis.label:
        canvas.text((left + right) / 2, HEIGHT - 15, spec.x_axis.label, text_anchor="middle", font_size=13, font_family="sans-serif", class_="axis-label")
    if spec.y_axis.label:
        canvas.text(18, (top + bottom) / 2, spec.y_axis.label, text_anchor="middle", font_size=13, font_family="sans-serif",
                    transform=f"rotate(-90 18 {_f((top + bottom) / 2)})", class_="axis-label")

    def errorbar(px, y, err, color):
        lo = y - err
        py_lo = yaxis(lo) if spec.y_axis.scale is AxisScale.LINEAR or lo > 0 else bottom
        canvas.line(px, py_lo, px, yaxis(y + err), stroke=color, stroke_width=1.5, class_="errorbar")

    # data
    for i, s in enumerate(series):
        color = COLORS[i % len(COLORS)]
        if plot_type is PlotType.BAR:
            group_width = slot_width * 0.8
            bar_width = group_width / len(series)
            if spec.y_axis.scale is AxisScale.LINEAR:
                base = yaxis(0.0)
            else:
                base = bottom
            for x, y, err in s.points:
                j = slots.index(x)
                bx = left + j * slot_width + slot_width * 0.1 + i * bar_width
                py = yaxis(y)
                canvas.add('rect', x=_f(bx), y=_f(min(py, base)), width=_f(bar_width), height=_f(abs(base - py)),
                           fill=color, class_="bar")
                if err > 0:
                    errorbar(bx + bar_width / 2, y, err, "#000000")
        else:
            if plot_type is PlotType.ERRORBAR and s.points:
                coords = ' '.join(f"{_f(xaxis(x))},{_f(yaxis(y))}" for x, y, _ in s.points)
                canvas.add('polyline', points=coords, fill="none", stroke=color, stroke_width=2, class_="line")
                for x, y, _ in s.points:
                    canvas.add('circle', cx=_f(xaxis(x)), cy=_f(yaxis(y)), r=3, fill=color, class_="marker")
            if plot_type is PlotType.REGRESSION:
                for x, y in s.samples:
                    canvas.add('circle', cx=_f(xaxis(x)), cy=_f(yaxis(y)), r=3, fill=color, class_="point")
            for x, y, err in s.points:
                if err > 0:
                    errorbar(xaxis(x), y, err, color)
            if i in fits:
                slope, intercept = fits[i]
                sx = [x for x, _ in s.samples]
                x0, x1 = min(sx), max(sx)
                canvas.line(xaxis(x0), yaxis(slope * x0 + intercept), xaxis(x1), yaxis(slope * x1 + intercept),
                            stroke=color, stroke_width=1.5, stroke_dasharray="6 3", class_="fit")

    # legend
    for i, s in enumerate(series):
        color = COLORS[i % len(COLORS)]
        ly = top + 14 + i * 18
        label = s.label
        if i in fits:
            slope, intercept = fits[i]
            label = f"{label} (y = {slope:.4g}x + {intercept:.4g})"
        canvas.line(right - 200, ly - 4, right - 176, ly - 4, stroke=color, stroke_width=3, class_="legend-swatch")
        canvas.text(right - 170, ly, label, text_anchor="start", font_size=12, font_family="sans-serif", class_="legend")

    header = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">\n'
    )
    return header + ''.join(f"  {e}\n" for e in canvas.elements) + '</svg>\n'
