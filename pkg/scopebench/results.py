"""Object model for benchmark result documents

Documents follow the JSON format produced by the Google Benchmark library
(v1.4.0 schema): a `context` object followed by a `benchmarks` array.
Fields this module does not know about are kept, so that documents produced
by other versions of the library survive a parse/serialize cycle.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import chain
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .tools import (
    ScopeError,
    compile_regex,
    json_dumps,
    read_input,
    write_file_atomic,
)

logger = logging.getLogger(__name__)


class MalformedJson(ScopeError):
    """Input is not valid JSON"""

    def __init__(self, offset, reason):
        self.offset = offset
        self.reason = reason
        super().__init__(f"malformed JSON at byte {offset}: {reason}")

class SchemaError(ScopeError):
    """Input is valid JSON but not a results document"""

class EmptyInput(ScopeError):
    """No document to concatenate"""


AGGREGATE_SUFFIXES = ("_mean", "_median", "_stddev")


class RunType(Enum):
    ITERATION = 'iteration'
    AGGREGATE = 'aggregate'

class TimeUnit(Enum):
    ns = 'ns'
    us = 'us'
    ms = 'ms'
    s = 's'

    @property
    def per_second(self):
        """Number of units in one second"""
        return _units_per_second[self]

_units_per_second = {TimeUnit.ns: 1e9, TimeUnit.us: 1e6, TimeUnit.ms: 1e3, TimeUnit.s: 1.0}


def is_aggregate_name(name):
    return name.endswith(AGGREGATE_SUFFIXES)

def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


@dataclass(frozen=True)
class BenchmarkRecord:
    """One row of the `benchmarks` array

    Numeric fields outside of the fixed schema are stored in `counters`,
    other unknown fields in `extras`.
    """

    name: str
    run_type: RunType = RunType.ITERATION
    iterations: int = 0
    real_time: float = 0.0
    cpu_time: float = 0.0
    time_unit: TimeUnit = TimeUnit.ns
    counters: Dict[str, float] = field(default_factory=dict)
    error_occurred: bool = False
    error_message: Optional[str] = None
    extras: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if not self.name:
            raise ValueError("benchmark name must not be empty")
        if self.run_type is RunType.AGGREGATE and not is_aggregate_name(self.name):
            raise ValueError(f"aggregate benchmark name must end with one of {', '.join(AGGREGATE_SUFFIXES)}: {self.name}")

    def get(self, name, default=None):
        """Return a numeric field or counter value by name"""
        if name in ('iterations', 'real_time', 'cpu_time'):
            return getattr(self, name)
        return self.counters.get(name, default)

    def to_serializable(self):
        d = {
            'name': self.name,
            'run_type': self.run_type.value,
            'iterations': self.iterations,
            'real_time': self.real_time,
            'cpu_time': self.cpu_time,
            'time_unit': self.time_unit.value,
        }
        d.update(self.counters)
        if self.error_occurred:
            d['error_occurred'] = True
        if self.error_message is not None:
            d['error_message'] = self.error_message
        d.update(self.extras)
        return d

    @classmethod
    def from_serializable(cls, data):
        if not isinstance(data, dict):
            raise SchemaError(f"benchmark entry must be an object, got {type(data).__name__}")
        name = data.get('name')
        if name is None:
            raise SchemaError("benchmark entry without 'name'")
        if not isinstance(name, str) or not name:
            raise SchemaError(f"invalid benchmark name: {name!r}")

        run_type = data.get('run_type')
        if run_type is None:
            run_type = RunType.AGGREGATE if is_aggregate_name(name) else RunType.ITERATION
        else:
            try:
                run_type = RunType(run_type)
            except ValueError:
                raise SchemaError(f"{name}: unknown run_type {run_type!r}") from None

        try:
            time_unit = TimeUnit(data.get('time_unit', 'ns'))
        except ValueError:
            raise SchemaError(f"{name}: unknown time_unit {data['time_unit']!r}") from None

        values = {}
        for key in ('iterations', 'real_time', 'cpu_time'):
            v = data.get(key, 0)
            if not _is_number(v) or v < 0:
                raise SchemaError(f"{name}: '{key}' must be a non-negative number, got {v!r}")
            values[key] = v

        error_occurred = data.get('error_occurred', False)
        if not isinstance(error_occurred, bool):
            raise SchemaError(f"{name}: 'error_occurred' must be a boolean")

        counters = {}
        extras = {}
        for key, v in data.items():
            if key in _fixed_record_fields:
                continue
            if _is_number(v):
                counters[key] = v
            else:
                extras[key] = v

        try:
            return cls(
                name=name,
                run_type=run_type,
                time_unit=time_unit,
                counters=counters,
                error_occurred=error_occurred,
                error_message=data.get('error_message'),
                extras=extras,
                **values,
            )
        except ValueError as e:
            raise SchemaError(str(e)) from None

_fixed_record_fields = frozenset((
    'name', 'run_type', 'iterations', 'real_time', 'cpu_time', 'time_unit',
    'error_occurred', 'error_message',
))


@dataclass(frozen=True)
class RunContext:
    """Context block of a document: host description and enabled scopes"""

    date: str = ''
    executable: str = ''
    num_cpus: int = 0
    mhz_per_cpu: int = 0
    cpu_scaling_enabled: bool = False
    scope_version: str = ''
    scopes: Tuple[Tuple[str, str], ...] = ()
    extras: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        for name, _ in self.scopes:
            if not name:
                raise ValueError("scope name must not be empty")

    def to_serializable(self):
        d = {
            'date': self.date,
            'executable': self.executable,
            'num_cpus': self.num_cpus,
            'mhz_per_cpu': self.mhz_per_cpu,
            'cpu_scaling_enabled': self.cpu_scaling_enabled,
        }
        d.update(self.extras)
        # only emitted when set, to leave foreign documents untouched
        if self.scope_version:
            d['scope_version'] = self.scope_version
        if self.scopes:
            d['scopes'] = [{'name': name, 'version': version} for name, version in self.scopes]
        return d

    @classmethod
    def from_serializable(cls, data):
        if not isinstance(data, dict):
            raise SchemaError("'context' must be an object")
        scope_entries = data.get('scopes') or []
        if not isinstance(scope_entries, list):
            raise SchemaError("'scopes' must be an array")
        scopes = []
        for entry in scope_entries:
            if not isinstance(entry, dict) or not isinstance(entry.get('name'), str) or not entry['name']:
                raise SchemaError(f"invalid scope entry in context: {entry!r}")
            scopes.append((entry['name'], str(entry.get('version', ''))))
        extras = {k: v for k, v in data.items() if k not in _fixed_context_fields}
        return cls(
            date=data.get('date', ''),
            executable=data.get('executable', ''),
            num_cpus=data.get('num_cpus', 0),
            mhz_per_cpu=data.get('mhz_per_cpu', 0),
            cpu_scaling_enabled=data.get('cpu_scaling_enabled', False),
            scope_version=data.get('scope_version', ''),
            scopes=tuple(scopes),
            extras=extras,
        )

_fixed_context_fields = frozenset((
    'date', 'executable', 'num_cpus', 'mhz_per_cpu', 'cpu_scaling_enabled', 'scope_version', 'scopes',
))


@dataclass(frozen=True)
class ResultsDocument:
    context: RunContext = field(default_factory=RunContext)
    benchmarks: Tuple[BenchmarkRecord, ...] = ()

    def __len__(self):
        return len(self.benchmarks)

    def names(self) -> List[str]:
        return [b.name for b in self.benchmarks]

    def to_serializable(self):
        return {
            'context': self.context.to_serializable(),
            'benchmarks': [b.to_serializable() for b in self.benchmarks],
        }


@dataclass(frozen=True)
class Frame:
    """Tabular view of a document, one row per benchmark record

    Cells are None when a record does not have the column's field.
    """

    columns: Tuple[str, ...]
    rows: Tuple[Dict[str, object], ...]

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        if name not in self.columns:
            raise KeyError(name)
        return [row[name] for row in self.rows]


def parse_document(data: Union[bytes, str]) -> ResultsDocument:
    """Parse a JSON results document"""

    if isinstance(data, bytes):
        try:
            text = data.decode('utf-8')
        except UnicodeDecodeError as e:
            raise MalformedJson(e.start, "invalid UTF-8") from None
    else:
        text = data

    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        offset = len(text[:e.pos].encode('utf-8'))
        raise MalformedJson(offset, e.msg) from None

    if not isinstance(obj, dict):
        raise SchemaError("top-level value must be an object")
    benchmarks = obj.get('benchmarks')
    if not isinstance(benchmarks, list):
        raise SchemaError("missing 'benchmarks' array")
    context = RunContext.from_serializable(obj.get('context', {}))
    records = tuple(BenchmarkRecord.from_serializable(b) for b in benchmarks)
    return ResultsDocument(context, records)


def serialize_document(doc: ResultsDocument) -> str:
    """Serialize a document to JSON text"""
    return json_dumps(doc.to_serializable(), indent=2, ensure_ascii=False) + '\n'


def concat_documents(docs: Sequence[ResultsDocument]) -> ResultsDocument:
    """Concatenate records of all documents, keep the context of the first one"""

    if not docs:
        raise EmptyInput("no document to concatenate")
    if len(docs) > 1:
        logger.debug(f"concatenate {len(docs)} documents, keep first context")
    return ResultsDocument(docs[0].context, tuple(chain.from_iterable(d.benchmarks for d in docs)))


def filter_by_name(doc: ResultsDocument, pattern) -> ResultsDocument:
    """Keep records whose name contains a match of pattern"""

    regex = compile_regex(pattern) if isinstance(pattern, str) else pattern
    return ResultsDocument(doc.context, tuple(b for b in doc.benchmarks if regex.search(b.name)))


def to_frame(doc: ResultsDocument) -> Frame:
    fixed = ('name', 'iterations', 'real_time', 'cpu_time', 'time_unit')
    counter_names = sorted({k for b in doc.benchmarks for k in b.counters})
    columns = fixed + tuple(counter_names)
    rows = []
    for b in doc.benchmarks:
        row = {
            'name': b.name,
            'iterations': b.iterations,
            'real_time': b.real_time,
            'cpu_time': b.cpu_time,
            'time_unit': b.time_unit.value,
        }
        for k in counter_names:
            row[k] = b.counters.get(k)
        rows.append(row)
    return Frame(columns, tuple(rows))


def load_document(path) -> ResultsDocument:
    """Load a document from a file, `-` reads standard input"""
    logger.debug(f"load results from {path}")
    return parse_document(read_input(path))

def write_document(doc: ResultsDocument, path) -> None:
    logger.info(f"write results to {path}")
    with write_file_atomic(path) as f:
        f.write(serialize_document(doc))
