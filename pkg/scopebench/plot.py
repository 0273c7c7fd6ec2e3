"""Plots described by spec files

A spec file is a YAML mapping:

    title: Copy bandwidth
    type: errorbar            # bar, errorbar or regplot
    xaxis: {label: bytes, scale: log}
    yaxis: {label: GB/s}
    series:
      - label: host
        input_file: results.json
        regex: Example_Copy
        xfield: name_arg0
        yfield: bytes
        yscale: 1.0e-9
    output:
      - name: copy.svg

Paths are used as written, relative to the current directory, like make does.
"""

import logging
import re
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from .results import BenchmarkRecord, ResultsDocument, load_document
from .tools import ScopeError, compile_regex, make_escape, write_file_atomic

logger = logging.getLogger(__name__)


class SpecSyntax(ScopeError):
    """Spec file cannot be parsed"""

class SpecSchema(ScopeError):
    """Spec file content is invalid"""

class MissingField(ScopeError):
    def __init__(self, field):
        self.field = field
        super().__init__(f"no matching benchmark has field '{field}'")

class DegenerateRegression(ScopeError):
    """Regression needs at least two distinct x values"""


class PlotType(Enum):
    BAR = 'bar'
    ERRORBAR = 'errorbar'
    REGRESSION = 'regplot'

class AxisScale(Enum):
    LINEAR = 'linear'
    LOG10 = 'log'

_scale_names = {'linear': AxisScale.LINEAR, 'log': AxisScale.LOG10, 'log10': AxisScale.LOG10}


@dataclass(frozen=True)
class AxisSpec:
    label: str = ''
    scale: AxisScale = AxisScale.LINEAR

@dataclass(frozen=True)
class SeriesSpec:
    label: str
    input_file: str
    xfield: str
    yfield: str
    regex: str = '.*'
    xscale: float = 1.0
    yscale: float = 1.0

@dataclass(frozen=True)
class OutputSpec:
    path: str
    format: str = 'svg'

@dataclass(frozen=True)
class PlotSpec:
    plot_type: PlotType
    series: Tuple[SeriesSpec, ...]
    outputs: Tuple[OutputSpec, ...]
    x_axis: AxisSpec = AxisSpec()
    y_axis: AxisSpec = AxisSpec()
    title: Optional[str] = None

    def __post_init__(self):
        if not self.series:
            raise ValueError("plot requires at least one series")
        if not self.outputs:
            raise ValueError("plot requires at least one output")

    def input_files(self) -> List[str]:
        """Input files, deduplicated, in order of first appearance"""
        return list(OrderedDict.fromkeys(s.input_file for s in self.series))

@dataclass(frozen=True)
class SeriesData:
    """Points of a series: (x, y mean, y sample stddev), sorted by x

    `samples` keeps the ungrouped (x, y) values.
    """

    label: str
    points: Tuple[Tuple[float, float, float], ...]
    samples: Tuple[Tuple[float, float], ...] = ()


def _check_keys(data, allowed, where):
    if not isinstance(data, dict):
        raise SpecSchema(f"{where} must be a mapping")
    unknown = [k for k in data if k not in allowed]
    if unknown:
        raise SpecSchema(f"unknown key(s) in {where}: {', '.join(map(str, unknown))}")

def _get(data, key, types, where, default=None, required=False):
    if key not in data:
        if required:
            raise SpecSchema(f"missing '{key}' in {where}")
        return default
    value = data[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise SpecSchema(f"invalid '{key}' in {where}: {value!r}")
    return value

def _parse_axis(data, where):
    if data is None:
        return AxisSpec()
    _check_keys(data, ('label', 'scale'), where)
    scale = _get(data, 'scale', str, where, 'linear')
    if scale not in _scale_names:
        raise SpecSchema(f"unknown scale in {where}: {scale}")
    return AxisSpec(label=str(_get(data, 'label', (str, int, float), where, '')), scale=_scale_names[scale])

def _parse_series(data, where):
    _check_keys(data, ('label', 'input_file', 'regex', 'xfield', 'yfield', 'xscale', 'yscale'), where)
    yfield = _get(data, 'yfield', str, where, required=True)
    return SeriesSpec(
        label=str(_get(data, 'label', (str, int, float), where, yfield)),
        input_file=_get(data, 'input_file', str, where, required=True),
        xfield=_get(data, 'xfield', str, where, required=True),
        yfield=yfield,
        regex=_get(data, 'regex', str, where, '.*'),
        xscale=float(_get(data, 'xscale', (int, float), where, 1.0)),
        yscale=float(_get(data, 'yscale', (int, float), where, 1.0)),
    )

def _parse_output(data, where):
    _check_keys(data, ('name', 'format'), where)
    fmt = _get(data, 'format', str, where, 'svg')
    if fmt != 'svg':
        raise SpecSchema(f"unsupported output format in {where}: {fmt}")
    return OutputSpec(_get(data, 'name', str, where, required=True), fmt)


def load_spec(text) -> PlotSpec:
    """Parse and validate spec file content"""

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise SpecSyntax(f"cannot parse spec: {e}".replace('\n', ' ')) from None

    _check_keys(data, ('title', 'type', 'xaxis', 'yaxis', 'series', 'output'), "spec")

    plot_type = _get(data, 'type', str, "spec", required=True)
    try:
        plot_type = PlotType(plot_type)
    except ValueError:
        raise SpecSchema(f"unknown plot type: {plot_type}") from None

    series = _get(data, 'series', list, "spec", required=True)
    outputs = _get(data, 'output', list, "spec", required=True)
    if not series:
        raise SpecSchema("'series' must not be empty")
    if not outputs:
        raise SpecSchema("'output' must not be empty")

    title = _get(data, 'title', (str, int, float), "spec")
    return PlotSpec(
        plot_type=plot_type,
        series=tuple(_parse_series(s, f"series {i}") for i, s in enumerate(series)),
        outputs=tuple(_parse_output(o, f"output {i}") for i, o in enumerate(outputs)),
        x_axis=_parse_axis(data.get('xaxis'), "xaxis"),
        y_axis=_parse_axis(data.get('yaxis'), "yaxis"),
        title=None if title is None else str(title),
    )

def load_spec_file(path) -> PlotSpec:
    logger.debug(f"load spec {path}")
    with open(path, encoding='utf-8') as f:
        return load_spec(f.read())


def spec_dependencies(spec: PlotSpec) -> str:
    """Return a make rule: outputs depend on input files"""
    targets = ' '.join(make_escape(o.path) for o in spec.outputs)
    prereqs = ' '.join(make_escape(p) for p in spec.input_files())
    return f"{targets}: {prereqs}\n"


_name_arg_re = re.compile(r'^name_arg(\d+)$')
_int_re = re.compile(r'^-?\d+$')

def field_value(record: BenchmarkRecord, field) -> Optional[float]:
    """Return a numeric field of a record, None if absent

    `name_arg<k>` is the k-th slash-separated integer argument of the name.
    """
    m = _name_arg_re.match(field)
    if m:
        parts = record.name.split('/')[1:]
        k = int(m.group(1))
        if k < len(parts) and _int_re.match(parts[k]):
            return int(parts[k])
        return None
    return record.get(field)


def build_series(ss: SeriesSpec, doc: ResultsDocument) -> SeriesData:
    """Extract series points from a document

    Matching records are grouped by x; each point is the mean of y with the
    sample standard deviation as error.
    """

    regex = compile_regex(ss.regex)
    matched = []
    for b in doc.benchmarks:
        if not regex.search(b.name):
            continue
        if b.error_occurred:
            logger.debug(f"{ss.label}: skip failed benchmark {b.name}")
            continue
        matched.append(b)
    if not matched:
        logger.warning(f"series {ss.label!r}: no benchmark matches {ss.regex!r}")
        return SeriesData(ss.label, (), ())

    values = [(field_value(b, ss.xfield), field_value(b, ss.yfield)) for b in matched]
    if all(x is None for x, _ in values):
        raise MissingField(ss.xfield)
    if all(y is None for _, y in values):
        raise MissingField(ss.yfield)

    samples = [(x * ss.xscale, y * ss.yscale) for x, y in values if x is not None and y is not None]
    groups: Dict[float, List[float]] = {}
    for x, y in samples:
        groups.setdefault(x, []).append(y)

    points = []
    for x in sorted(groups):
        ys = groups[x]
        err = float(np.std(ys, ddof=1)) if len(ys) > 1 else 0.0
        points.append((x, float(np.mean(ys)), err))
    return SeriesData(ss.label, tuple(points), tuple(samples))


def linear_regression(points: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """Ordinary least squares fit, return (slope, intercept)"""

    if len(points) < 2 or len({x for x, _ in points}) < 2:
        raise DegenerateRegression("regression requires at least two distinct x values")
    xs = np.array([float(x) for x, _ in points])
    ys = np.array([float(y) for _, y in points])
    a = np.vstack([xs, np.ones(len(xs))]).T
    (slope, intercept), *_ = np.linalg.lstsq(a, ys, rcond=None)
    return float(slope), float(intercept)


def build_plot_series(spec: PlotSpec, loader=load_document) -> List[SeriesData]:
    """Load input documents (once each) and extract all series"""
    docs = {path: loader(path) for path in spec.input_files()}
    return [build_series(ss, docs[ss.input_file]) for ss in spec.series]


def write_outputs(spec: PlotSpec, svg: str):
    for output in spec.outputs:
        logger.info(f"write plot {output.path}")
        with write_file_atomic(output.path) as f:
            f.write(svg)


def generate(spec: PlotSpec, loader=load_document) -> str:
    """Render a spec and write all its outputs, return the SVG"""
    from .svg import render
    svg = render(spec, build_plot_series(spec, loader))
    write_outputs(spec, svg)
    return svg


def bar_spec(input_file, xfield, yfield, title, output) -> PlotSpec:
    """Single-series bar plot spec, as used by quick_bar()"""
    return PlotSpec(
        plot_type=PlotType.BAR,
        series=(SeriesSpec(label=yfield, input_file=input_file, xfield=xfield, yfield=yfield),),
        outputs=(OutputSpec(output),),
        x_axis=AxisSpec(label=xfield),
        y_axis=AxisSpec(label=yfield),
        title=title,
    )

def quick_bar(input_file, xfield, yfield, title, output) -> str:
    """Bar plot of a single results file, without a spec file"""
    return generate(bar_spec(input_file, xfield, yfield, title, output))
