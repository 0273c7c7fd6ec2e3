import random
import tracemalloc
import pytest
from scopebench.harness import (
    MAX_ITERATIONS,
    BenchmarkDefinition,
    BenchmarkRegistry,
    BenchState,
    CounterKind,
    DuplicateName,
    FakeClock,
    LateRegistration,
    ManualTimeNotEnabled,
    Measurement,
    RunConfig,
    TooFewRepetitions,
    compute_statistics,
    decide_iterations,
    list_benchmarks,
    run_filtered,
    run_one,
)
from scopebench.results import RunContext, RunType, TimeUnit
from scopebench.tools import BadRegex

MS = 1_000_000


def noop(state):
    for _ in state:
        pass


def registry_with(*names):
    registry = BenchmarkRegistry()
    for name in names:
        registry.register_benchmark(BenchmarkDefinition(name, noop))
    return registry


@pytest.mark.parametrize("base, args, names", [
    ("Copy", [8, 64], ["Copy/8", "Copy/64"]),
    ("Copy", [(8,), (64,)], ["Copy/8", "Copy/64"]),
    ("Noop", [], ["Noop"]),
    ("Comm", [(1, 2), (4, 8)], ["Comm/1/2", "Comm/4/8"]),
])
def test_register_instance_names(base, args, names):
    registry = BenchmarkRegistry()
    instances = registry.register_benchmark(BenchmarkDefinition(base, noop, args=args))
    assert [i.name for i in instances] == names
    assert [i.name for i in registry.instances()] == names

def test_register_duplicate():
    registry = BenchmarkRegistry()
    registry.register_benchmark(BenchmarkDefinition("Copy", noop, args=[8]))
    with pytest.raises(DuplicateName):
        registry.register_benchmark(BenchmarkDefinition("Copy", noop, args=[8]))
    # nothing registered by the failed call
    with pytest.raises(DuplicateName):
        registry.register_benchmark(BenchmarkDefinition("Copy", noop, args=[16, 8]))
    assert [i.name for i in registry.instances()] == ["Copy/8"]

def test_register_late():
    registry = registry_with("A")
    registry.freeze()
    with pytest.raises(LateRegistration):
        registry.register_benchmark(BenchmarkDefinition("B", noop))

@pytest.mark.parametrize("kwargs", [
    dict(base_name=""),
    dict(base_name="A/B"),
    dict(base_name="A", args=[(1,), (1, 2)]),
    dict(base_name="A", min_time_override=0),
    dict(base_name="A", repetitions_override=0),
])
def test_definition_invalid(kwargs):
    with pytest.raises(ValueError):
        BenchmarkDefinition(body=noop, **kwargs)

@pytest.mark.parametrize("kwargs", [
    dict(min_time=0),
    dict(min_time=-1.0),
    dict(repetitions=0),
])
def test_run_config_invalid(kwargs):
    with pytest.raises(ValueError):
        RunConfig(**kwargs)


@pytest.mark.parametrize("prev, elapsed, min_time, expected", [
    (1, 0.6, 0.5, None),
    (1, 0.5, 0.5, None),
    (1, 0.001, 0.5, 10),
    (MAX_ITERATIONS, 0.0001, 0.5, None),
    (5, 0.0, 0.5, 50),
    (100, 0.4, 0.5, 200),
    (5 * 10**8, 0.0001, 0.5, MAX_ITERATIONS),
])
def test_decide_iterations(prev, elapsed, min_time, expected):
    assert decide_iterations(prev, elapsed, min_time) == expected

def test_decide_iterations_monotone():
    rng = random.Random(42)
    for _ in range(1000):
        prev = rng.randint(1, MAX_ITERATIONS - 1)
        min_time = rng.uniform(1e-3, 2.0)
        elapsed = rng.uniform(0, min_time * 0.999)
        next_iters = decide_iterations(prev, elapsed, min_time)
        assert prev < next_iters <= MAX_ITERATIONS

def test_decide_iterations_matches_simulation():
    # 1 ms per iteration, 0.1 s minimum
    iters, batches = 1, []
    while iters is not None:
        batches.append(iters)
        iters = decide_iterations(iters, iters * 0.001, 0.1)
    assert batches == [1, 10, 100]


def test_bench_state_loop():
    clock = FakeClock(MS)
    state = BenchState(5, (8,), clock=clock)
    count = sum(1 for _ in state)
    assert count == 5
    assert state.completed_iterations == 5
    assert state.elapsed_ns() == (5 * MS, 5 * MS)
    assert state.range(0) == 8

def test_bench_state_error_stops_loop():
    state = BenchState(10, clock=FakeClock(MS))
    count = 0
    for _ in state:
        count += 1
        if count == 3:
            state.skip_with_error("device lost")
    assert count == 3
    assert state.error == "device lost"

def test_bench_state_manual_time_disabled():
    state = BenchState(1, clock=FakeClock(MS))
    with pytest.raises(ManualTimeNotEnabled):
        state.set_iteration_time(0.1)

def test_bench_state_manual_time_constant_memory():
    state = BenchState(10**6, manual_time=True, clock=FakeClock(1))
    tracemalloc.start()
    try:
        for _ in state:
            state.set_iteration_time(0.0)
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    assert state.completed_iterations == 10**6
    assert state.manual_time_accumulated == 0.0
    assert peak < 100_000

def test_bench_state_manual_time_sum():
    state = BenchState(1000, manual_time=True, clock=FakeClock(1))
    for _ in state:
        state.set_iteration_time(0.001)
    assert state.manual_time_accumulated == pytest.approx(1.0, rel=1e-12)


def copy_body(state):
    for _ in state:
        pass
    state.set_counter("bytes", 1024 * state.iterations, CounterKind.RATE)

def test_run_one_fake_clock():
    inst, = BenchmarkDefinition("Copy", copy_body, args=[1024]).instances()
    measurements = run_one(inst, RunConfig(min_time=0.1), FakeClock(MS))
    assert len(measurements) == 1
    m = measurements[0]
    assert m.iterations == 100
    assert m.real_time_per_iter == 0.001
    assert m.cpu_time_per_iter == 0.001
    assert m.counters == {"bytes": 1024 * 1000}
    record = m.to_record()
    assert record.time_unit is TimeUnit.ns
    assert record.real_time == 1e6

def test_run_one_manual_time():
    def body(state):
        for _ in state:
            state.set_iteration_time(0.002)

    inst, = BenchmarkDefinition("Manual", body, uses_manual_time=True).instances()
    m, = run_one(inst, RunConfig(), FakeClock(5 * MS))
    assert m.real_time_per_iter == pytest.approx(0.002, rel=1e-12)
    assert m.cpu_time_per_iter == pytest.approx(0.005, rel=1e-12)

def test_run_one_manual_rate_counter():
    def body(state):
        for _ in state:
            state.set_iteration_time(1.0)
        state.set_counter("bytes", 1024, CounterKind.RATE)

    inst, = BenchmarkDefinition("Rate", body, uses_manual_time=True).instances()
    m, = run_one(inst, RunConfig(), FakeClock(MS))
    assert m.iterations == 1
    assert m.counters["bytes"] == 1024

def test_run_one_avg_iterations_counter():
    def body(state):
        for _ in state:
            pass
        state.set_counter("items", 3 * state.iterations, CounterKind.AVG_ITERATIONS)
        state.set_counter("plain", 7)

    inst, = BenchmarkDefinition("Items", body).instances()
    m, = run_one(inst, RunConfig(min_time=0.1), FakeClock(MS))
    assert m.counters == {"items": 3, "plain": 7}

def test_run_one_repetitions():
    inst, = BenchmarkDefinition("Noop", noop).instances()
    measurements = run_one(inst, RunConfig(min_time=0.01, repetitions=3), FakeClock(MS))
    assert len(measurements) == 3
    assert all(m.iterations == 10 for m in measurements)

def test_run_one_overrides():
    inst, = BenchmarkDefinition("Noop", noop, min_time_override=0.1, repetitions_override=2).instances()
    measurements = run_one(inst, RunConfig(min_time=0.01, repetitions=5), FakeClock(MS))
    assert [m.iterations for m in measurements] == [100, 100]

@pytest.mark.parametrize("body", [
    lambda state: state.skip_with_error("no device"),
    lambda state: 1 / 0,
    lambda state: None,
])
def test_run_one_error(body):
    inst, = BenchmarkDefinition("Fail", body).instances()
    m, = run_one(inst, RunConfig(min_time=0.01), FakeClock(MS))
    assert m.error_occurred
    assert m.error
    record = m.to_record()
    assert record.error_occurred
    assert record.error_message == m.error


def measurements(name, real_times, **counters):
    return [
        Measurement(name, 10, t, t / 2, {k: v[i] for k, v in counters.items()})
        for i, t in enumerate(real_times)
    ]

def test_statistics_textbook():
    mean, median, stddev = compute_statistics(measurements("X", [1.0, 2.0, 3.0]))
    assert [m.name for m in (mean, median, stddev)] == ["X_mean", "X_median", "X_stddev"]
    assert mean.real_time_per_iter == 2
    assert median.real_time_per_iter == 2
    assert stddev.real_time_per_iter == 1
    assert all(m.iterations == 3 for m in (mean, median, stddev))
    assert all(m.run_type is RunType.AGGREGATE for m in (mean, median, stddev))
    assert all(type(m.real_time_per_iter) is float for m in (mean, median, stddev))

def test_statistics_constant():
    mean, median, stddev = compute_statistics(measurements("X", [5.0, 5.0]))
    assert (mean.real_time_per_iter, median.real_time_per_iter, stddev.real_time_per_iter) == (5, 5, 0)

def test_statistics_even_median():
    _, median, _ = compute_statistics(measurements("X", [4.0, 1.0, 3.0, 2.0]))
    assert median.real_time_per_iter == 2.5

def test_statistics_counters():
    aggregates = compute_statistics(measurements("X", [1.0, 2.0], bytes=[10.0, 30.0]))
    assert [m.counters["bytes"] for m in aggregates] == [20.0, 20.0, pytest.approx(14.142135623730951)]

def test_statistics_too_few():
    with pytest.raises(TooFewRepetitions):
        compute_statistics(measurements("X", [1.0]))

def test_statistics_oracle():
    rng = random.Random(7)
    values = [rng.uniform(1e-6, 1e-2) for _ in range(200)]
    mean, median, stddev = compute_statistics(measurements("X", values))

    n = len(values)
    exp_mean = sum(values) / n
    ordered = sorted(values)
    exp_median = (ordered[n // 2 - 1] + ordered[n // 2]) / 2
    exp_stddev = (sum((v - exp_mean) ** 2 for v in values) / (n - 1)) ** 0.5

    assert mean.real_time_per_iter == pytest.approx(exp_mean, rel=1e-12)
    assert median.real_time_per_iter == pytest.approx(exp_median, rel=1e-12)
    assert stddev.real_time_per_iter == pytest.approx(exp_stddev, rel=1e-12)


def test_list_benchmarks():
    registry = registry_with("A", "B")
    assert list_benchmarks(registry, RunConfig()) == ["A", "B"]
    assert list_benchmarks(registry, RunConfig(filter="A")) == ["A"]
    assert list_benchmarks(BenchmarkRegistry(), RunConfig()) == []
    with pytest.raises(BadRegex):
        list_benchmarks(registry, RunConfig(filter="("))

def test_run_filtered_filter():
    registry = BenchmarkRegistry()
    registry.register_benchmark(BenchmarkDefinition("Copy", copy_body, args=[8, 64]))
    doc = run_filtered(registry, RunConfig(filter="Copy/8$", min_time=0.01), FakeClock(MS), RunContext())
    assert doc.names() == ["Copy/8"]
    assert registry.frozen

def test_run_filtered_no_match():
    doc = run_filtered(registry_with("A"), RunConfig(filter="^Z", min_time=0.01), FakeClock(MS), RunContext())
    assert doc.benchmarks == ()

def test_run_filtered_repetitions():
    cfg = RunConfig(min_time=0.01, repetitions=3)
    doc = run_filtered(registry_with("A", "B"), cfg, FakeClock(MS), RunContext())
    assert doc.names() == ["A"] * 3 + ["A_mean", "A_median", "A_stddev"] + ["B"] * 3 + ["B_mean", "B_median", "B_stddev"]
    stddev = doc.benchmarks[5]
    assert stddev.run_type is RunType.AGGREGATE
    assert stddev.real_time == 0
    assert stddev.cpu_time == 0
    assert stddev.iterations == 3

def test_run_filtered_aggregates_only():
    cfg = RunConfig(min_time=0.01, repetitions=3, report_aggregates_only=True)
    doc = run_filtered(registry_with("A", "B"), cfg, FakeClock(MS), RunContext())
    assert doc.names() == ["A_mean", "A_median", "A_stddev", "B_mean", "B_median", "B_stddev"]

def test_run_filtered_error_keeps_running():
    registry = BenchmarkRegistry()
    registry.register_benchmark(BenchmarkDefinition("Fail", lambda state: state.skip_with_error("boom")))
    registry.register_benchmark(BenchmarkDefinition("Noop", noop))
    doc = run_filtered(registry, RunConfig(min_time=0.01), FakeClock(MS), RunContext())
    assert doc.names() == ["Fail", "Noop"]
    assert doc.benchmarks[0].error_occurred
    assert not doc.benchmarks[1].error_occurred

def test_run_filtered_deterministic():
    cfg = RunConfig(min_time=0.01, repetitions=2)
    doc1 = run_filtered(registry_with("A", "B"), cfg, FakeClock(MS), RunContext(date="fixed"))
    doc2 = run_filtered(registry_with("A", "B"), cfg, FakeClock(MS), RunContext(date="fixed"))
    assert doc1 == doc2
