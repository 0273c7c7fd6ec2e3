"""Benchmark harness: registration, adaptive timing loop and statistics

A benchmark body receives a `BenchState` and iterates over it; the time spent
in the loop is measured. The harness grows the iteration count until a batch
lasts at least `min_time`, and only that last batch is reported.

    def body(state):
        data = bytes(state.range(0))
        for _ in state:
            bytearray(data)

    registry.register_benchmark(BenchmarkDefinition("Copy", body, args=[8, 64]))
"""

import logging
import os
import re
import time
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .results import (
    BenchmarkRecord,
    ResultsDocument,
    RunContext,
    RunType,
    TimeUnit,
)
from .tools import ScopeError, compile_regex

logger = logging.getLogger(__name__)


DEFAULT_MIN_TIME = 0.5
MAX_ITERATIONS = 10**9
MAX_GROWTH = 10
MIN_GROWTH = 2
GROWTH_SLACK = 1.4


class DuplicateName(ScopeError):
    """A benchmark instance with the same name is already registered"""

class LateRegistration(ScopeError):
    """Registration attempted after the registry has been frozen"""

class TooFewRepetitions(ScopeError):
    """Statistics require at least two measurements"""

class ManualTimeNotEnabled(ScopeError):
    """Manual iteration time reported by a benchmark not declared with manual time"""


class CounterKind(Enum):
    PLAIN = 'plain'
    RATE = 'rate'  # divided by the measured time
    AVG_ITERATIONS = 'avg_iterations'  # divided by the iteration count

@dataclass(frozen=True)
class Counter:
    value: float
    kind: CounterKind = CounterKind.PLAIN


class SystemClock:
    """Monotonic wall time and per-process CPU time, in nanoseconds"""

    def wall_ns(self) -> int:
        return time.perf_counter_ns()

    def cpu_ns(self) -> int:
        return time.process_time_ns()

    def on_iteration(self):
        pass

    def date(self) -> str:
        return datetime.now().isoformat(timespec='seconds')

class FakeClock:
    """Clock advancing by a fixed amount for each benchmark iteration

    Wall and CPU time advance together. The date is fixed.
    """

    def __init__(self, ns_per_iteration: int):
        self.ns_per_iteration = ns_per_iteration
        self.now_ns = 0

    def wall_ns(self) -> int:
        return self.now_ns

    def cpu_ns(self) -> int:
        return self.now_ns

    def on_iteration(self):
        self.now_ns += self.ns_per_iteration

    def date(self) -> str:
        return '1970-01-01T00:00:00'


class BenchState:
    """Iteration and timing state handed to a benchmark body

    Timing starts when the body starts iterating and stops when the loop ends,
    so setup code placed before the loop is not measured.
    """

    def __init__(self, iterations: int, args: Sequence[int] = (), manual_time=False, clock=None):
        self.requested_iterations = iterations
        self.args = tuple(args)
        self.counters: Dict[str, Counter] = {}
        self.error: Optional[str] = None
        self._manual_time = manual_time
        self._manual_time_total = 0.0
        self._clock = clock if clock is not None else SystemClock()
        self._completed = 0
        self._start = None
        self._stop = None

    def __iter__(self):
        self._start = (self._clock.wall_ns(), self._clock.cpu_ns())
        try:
            for _ in range(self.requested_iterations):
                if self.error is not None:
                    break
                yield
                self._completed += 1
                self._clock.on_iteration()
        finally:
            self.finish()

    def finish(self):
        """Stop timing (no-op if already stopped)"""
        if self._start is not None and self._stop is None:
            self._stop = (self._clock.wall_ns(), self._clock.cpu_ns())

    @property
    def iterations(self):
        return self.requested_iterations

    def range(self, index=0) -> int:
        return self.args[index]

    def skip_with_error(self, message: str):
        """Report an error; the iteration loop stops at the next iteration"""
        self.error = message

    def set_iteration_time(self, seconds: float):
        if not self._manual_time:
            raise ManualTimeNotEnabled("benchmark is not declared with manual time")
        self._manual_time_total += seconds

    def set_counter(self, name, value, kind=CounterKind.PLAIN):
        self.counters[name] = Counter(value, kind)

    @property
    def manual_time_accumulated(self) -> float:
        return self._manual_time_total

    @property
    def completed_iterations(self):
        return self._completed

    def elapsed_ns(self) -> Tuple[int, int]:
        """Return measured (wall, cpu) nanoseconds"""
        if self._start is None:
            return 0, 0
        self.finish()
        return self._stop[0] - self._start[0], self._stop[1] - self._start[1]


@dataclass(frozen=True)
class BenchmarkDefinition:
    base_name: str
    body: Callable[[BenchState], None]
    args: Tuple[Tuple[int, ...], ...] = ()
    uses_manual_time: bool = False
    min_time_override: Optional[float] = None
    repetitions_override: Optional[int] = None
    owning_scope: str = ''

    def __post_init__(self):
        if not self.base_name or '/' in self.base_name:
            raise ValueError(f"invalid benchmark name: {self.base_name!r}")
        # accept plain integers as single-argument tuples
        args = tuple((a,) if isinstance(a, int) else tuple(a) for a in self.args)
        if len({len(a) for a in args}) > 1:
            raise ValueError(f"{self.base_name}: argument tuples must have the same arity")
        object.__setattr__(self, 'args', args)
        if self.min_time_override is not None and self.min_time_override <= 0:
            raise ValueError(f"{self.base_name}: min_time must be positive")
        if self.repetitions_override is not None and self.repetitions_override < 1:
            raise ValueError(f"{self.base_name}: repetitions must be positive")

    def instances(self) -> List['BenchmarkInstance']:
        if not self.args:
            return [BenchmarkInstance(self, ())]
        return [BenchmarkInstance(self, a) for a in self.args]

@dataclass(frozen=True)
class BenchmarkInstance:
    """A definition specialized with one argument tuple"""

    definition: BenchmarkDefinition
    args: Tuple[int, ...]

    @property
    def name(self):
        return '/'.join([self.definition.base_name] + [str(a) for a in self.args])


@dataclass(frozen=True)
class RunConfig:
    filter: str = '.*'
    min_time: float = DEFAULT_MIN_TIME
    repetitions: int = 1
    out_path: Optional[str] = None
    report_aggregates_only: bool = False

    def __post_init__(self):
        if not self.min_time > 0:
            raise ValueError(f"min_time must be positive, got {self.min_time}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be at least 1, got {self.repetitions}")


@dataclass(frozen=True)
class Measurement:
    name: str
    iterations: int
    real_time_per_iter: float
    cpu_time_per_iter: float
    counters: Dict[str, float] = field(default_factory=dict)
    error: Optional[str] = None
    run_type: RunType = RunType.ITERATION

    @property
    def error_occurred(self):
        return self.error is not None

    def to_record(self, time_unit=TimeUnit.ns) -> BenchmarkRecord:
        scale = time_unit.per_second
        return BenchmarkRecord(
            name=self.name,
            run_type=self.run_type,
            iterations=self.iterations,
            real_time=self.real_time_per_iter * scale,
            cpu_time=self.cpu_time_per_iter * scale,
            time_unit=time_unit,
            counters=dict(self.counters),
            error_occurred=self.error_occurred,
            error_message=self.error,
        )


class BenchmarkRegistry:
    """Registered benchmark instances, in registration order"""

    def __init__(self):
        self._instances: Dict[str, BenchmarkInstance] = {}
        self.frozen = False

    def register_benchmark(self, definition: BenchmarkDefinition) -> List[BenchmarkInstance]:
        if self.frozen:
            raise LateRegistration(f"cannot register {definition.base_name}: runner already started")
        instances = definition.instances()
        for inst in instances:
            if inst.name in self._instances:
                raise DuplicateName(f"benchmark already registered: {inst.name}")
        for inst in instances:
            logger.debug(f"register benchmark {inst.name}")
            self._instances[inst.name] = inst
        return instances

    def freeze(self):
        self.frozen = True

    def instances(self) -> List[BenchmarkInstance]:
        return list(self._instances.values())

    def __len__(self):
        return len(self._instances)


def decide_iterations(prev_iters: int, elapsed: float, min_time: float) -> Optional[int]:
    """Return the iteration count of the next batch, None if done"""

    if elapsed >= min_time or prev_iters >= MAX_ITERATIONS:
        return None
    if elapsed <= 0:
        growth = MAX_GROWTH
    else:
        growth = min(MAX_GROWTH, max(MIN_GROWTH, GROWTH_SLACK * min_time / elapsed))
    return min(max(int(prev_iters * growth), prev_iters + 1), MAX_ITERATIONS)


def _run_batch(instance: BenchmarkInstance, iterations, clock) -> BenchState:
    definition = instance.definition
    state = BenchState(iterations, instance.args, manual_time=definition.uses_manual_time, clock=clock)
    try:
        definition.body(state)
    except Exception as e:
        state.skip_with_error(f"{type(e).__name__}: {e}")
    state.finish()
    if state.error is None and state.completed_iterations != iterations:
        state.skip_with_error("benchmark loop exited before all iterations were run")
    return state

def _measurement(name, state: BenchState, manual_time) -> Measurement:
    iters = state.requested_iterations
    wall_ns, cpu_ns = state.elapsed_ns()
    if manual_time:
        total = state.manual_time_accumulated
        real_per_iter = total / iters
    else:
        total = wall_ns / 1e9
        real_per_iter = wall_ns / iters / 1e9

    counters = {}
    for cname, counter in state.counters.items():
        if counter.kind is CounterKind.RATE:
            if manual_time:
                value = counter.value / total if total else 0.0
            else:
                value = counter.value * 1e9 / wall_ns if wall_ns else 0.0
        elif counter.kind is CounterKind.AVG_ITERATIONS:
            value = counter.value / iters
        else:
            value = counter.value
        counters[cname] = value

    return Measurement(name, iters, real_per_iter, cpu_ns / iters / 1e9, counters)


def run_one(instance: BenchmarkInstance, cfg: RunConfig, clock=None) -> List[Measurement]:
    """Run all repetitions of a benchmark instance"""

    if clock is None:
        clock = SystemClock()
    definition = instance.definition
    min_time = definition.min_time_override or cfg.min_time
    repetitions = definition.repetitions_override or cfg.repetitions
    name = instance.name

    measurements = []
    for rep in range(repetitions):
        iters = 1
        while True:
            state = _run_batch(instance, iters, clock)
            if state.error is not None:
                logger.warning(f"{name}: {state.error}")
                measurements.append(Measurement(name, iters, 0.0, 0.0, error=state.error))
                break
            if definition.uses_manual_time:
                elapsed = state.manual_time_accumulated
            else:
                elapsed = state.elapsed_ns()[0] / 1e9
            next_iters = decide_iterations(iters, elapsed, min_time)
            logger.debug(f"{name}: {iters} iterations in {elapsed:.6f}s, next: {next_iters}")
            if next_iters is None:
                measurements.append(_measurement(name, state, definition.uses_manual_time))
                break
            iters = next_iters
    return measurements


def compute_statistics(measurements: Sequence[Measurement]) -> List[Measurement]:
    """Compute mean, median and stddev aggregates over repetitions"""

    n = len(measurements)
    if n < 2:
        raise TooFewRepetitions(f"statistics require at least 2 measurements, got {n}")
    name = measurements[0].name
    if any(m.name != name for m in measurements):
        raise ValueError("measurements must share the same name")

    counter_names = []
    for m in measurements:
        for k in m.counters:
            if k not in counter_names:
                counter_names.append(k)

    def mean(values):
        return float(np.mean(values))

    def median(values):
        return float(np.median(values))

    def stdev(values):
        return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0

    aggregates = []
    for suffix, func in (('_mean', mean), ('_median', median), ('_stddev', stdev)):
        counters = {}
        for k in counter_names:
            counters[k] = func([m.counters[k] for m in measurements if k in m.counters])
        aggregates.append(Measurement(
            name=name + suffix,
            iterations=n,
            real_time_per_iter=func([m.real_time_per_iter for m in measurements]),
            cpu_time_per_iter=func([m.cpu_time_per_iter for m in measurements]),
            counters=counters,
            run_type=RunType.AGGREGATE,
        ))
    return aggregates


def list_benchmarks(registry: BenchmarkRegistry, cfg: RunConfig) -> List[str]:
    regex = compile_regex(cfg.filter)
    return [inst.name for inst in registry.instances() if regex.search(inst.name)]


def _cpu_mhz() -> int:
    try:
        with open('/proc/cpuinfo') as f:
            for line in f:
                m = re.match(r'^cpu MHz\s*:\s*([0-9.]+)', line)
                if m:
                    return int(float(m.group(1)))
    except OSError:
        pass
    return 0

def _cpu_scaling_enabled() -> bool:
    try:
        with open('/sys/devices/system/cpu/cpu0/cpufreq/scaling_governor') as f:
            return f.read().strip() != 'performance'
    except OSError:
        return False

def host_context(clock, executable='', scope_version='', scopes=()) -> RunContext:
    """Build a run context describing the current host"""
    return RunContext(
        date=clock.date(),
        executable=executable,
        num_cpus=os.cpu_count() or 0,
        mhz_per_cpu=_cpu_mhz(),
        cpu_scaling_enabled=_cpu_scaling_enabled(),
        scope_version=scope_version,
        scopes=tuple(scopes),
    )


def run_filtered(registry: BenchmarkRegistry, cfg: RunConfig, clock=None, context: Optional[RunContext] = None) -> ResultsDocument:
    """Run instances matching the configured filter, in registration order"""

    regex = compile_regex(cfg.filter)
    if clock is None:
        clock = SystemClock()
    if context is None:
        context = host_context(clock)
    registry.freeze()

    records = []
    for inst in registry.instances():
        if not regex.search(inst.name):
            continue
        logger.info(f"running {inst.name}")
        measurements = run_one(inst, cfg, clock)

        aggregates = []
        valid = [m for m in measurements if not m.error_occurred]
        if len(measurements) > 1:
            if len(valid) >= 2:
                aggregates = compute_statistics(valid)
            else:
                logger.warning(f"{inst.name}: not enough successful repetitions for statistics")

        if not (cfg.report_aggregates_only and aggregates):
            records.extend(m.to_record() for m in measurements)
        records.extend(m.to_record() for m in aggregates)

    if not records:
        logger.warning(f"no benchmark matched {cfg.filter!r}")
    return ResultsDocument(context, tuple(records))
