import logging
logger = logging.getLogger(__name__)

__version__ = "1.0.0"

from scopebench.results import (
    BenchmarkRecord,
    ResultsDocument,
    RunContext,
    parse_document,
    serialize_document,
    load_document,
)
from scopebench.harness import (
    BenchState,
    BenchmarkDefinition,
    CounterKind,
    RunConfig,
)
from scopebench.plugin import (
    Registry,
    ScopeDescriptor,
    OptionSpec,
)
from scopebench.plot import (
    load_spec,
    quick_bar,
)
