from scopebench.harness import CounterKind

# 1 KiB to 1 MiB, by powers of 4
COPY_SIZES = [2**k for k in range(10, 21, 2)]


def copy_bytes(state):
    """Copy a buffer of `state.range(0)` bytes"""

    size = state.range(0)
    src = bytes(size)
    dst = bytearray(size)
    for _ in state:
        dst[:] = src
    state.set_counter("bytes", size * state.iterations, CounterKind.RATE)


def noop(state):
    for _ in state:
        pass


def register(registry):
    registry.benchmark("Example_Copy", args=COPY_SIZES)(copy_bytes)
    registry.benchmark("Example_Noop")(noop)
