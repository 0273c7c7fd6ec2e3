"""Example scope: a template showing how a scope is structured

- `benchmarks.py` registers the benchmarks
- `init.py` declares command-line options and init hooks
- `docs/` describes each benchmark
"""

from scopebench.plugin import ScopeDescriptor
from . import benchmarks, init

SCOPE_NAME = "example"
SCOPE_VERSION = "1.0.0"


def build_example_scope() -> ScopeDescriptor:
    def register(registry):
        benchmarks.register(registry)
        init.register(registry)

    return ScopeDescriptor(
        name=SCOPE_NAME,
        version=SCOPE_VERSION,
        register_fn=register,
        description="template scope with a memory copy and a no-op benchmark",
    )
