"""Benchmark binary: run the benchmarks of all enabled scopes

    scopebench-run --benchmark_filter=Copy --benchmark_out=results.json
"""

import sys
import logging

from . import __version__
from .harness import FakeClock, SystemClock, host_context, list_benchmarks, run_filtered
from .plugin import Exit, Phase, UsageError, build_registry, disabled_scopes_from_argv
from .results import RunContext, serialize_document, write_document
from .scopes import builtin_scopes
from .tools import BadRegex, ScopeError, configure_logging

logger = logging.getLogger(__name__)

PROG = 'scopebench-run'


def _error(message):
    print(f"{PROG}: error: {message}", file=sys.stderr)


def main(argv=None, scopes=None, clock=None):
    """Entry point of the benchmark binary, return the exit status

    `scopes` defaults to the bundled scopes, `clock` to the system clock.
    """

    if argv is None:
        argv = sys.argv[1:]
    argv = list(argv)
    if scopes is None:
        scopes = builtin_scopes()

    registry = build_registry(scopes, disabled_scopes_from_argv(argv), version=__version__)

    result = registry.run_init(Phase.BEFORE_PARSE, argv)
    if isinstance(result, Exit):
        if result.message:
            print(result.message, file=sys.stderr)
        return result.code

    parser = registry.create_parser(PROG)
    try:
        config, args = registry.parse_args(argv, parser)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        _error(e)
        return 2

    if args.help:
        parser.print_help()
        return 0

    configure_logging(args.verbose)
    for diagnostic in args.diagnostics:
        logger.warning(diagnostic)

    if args.version:
        for line in registry.version_lines():
            print(line)
        return 0

    result = registry.run_init(Phase.AFTER_PARSE, config)
    if isinstance(result, Exit):
        if result.message:
            print(result.message, file=sys.stderr)
        return result.code

    registry.freeze()

    try:
        if args.benchmark_list_tests:
            for name in list_benchmarks(registry.benchmarks, config):
                print(name)
            return 0

        if args.benchmark_fake_clock is not None:
            clock = FakeClock(args.benchmark_fake_clock)
            # nothing from the host, to get reproducible output
            context = RunContext(date=clock.date(), executable=PROG, scope_version=__version__,
                                 scopes=tuple(registry.enabled_scopes()))
        else:
            if clock is None:
                clock = SystemClock()
            context = host_context(clock, sys.argv[0], __version__, registry.enabled_scopes())

        doc = run_filtered(registry.benchmarks, config, clock, context)
    except BadRegex as e:
        parser.print_usage(sys.stderr)
        _error(e)
        return 2

    try:
        if config.out_path is None:
            sys.stdout.write(serialize_document(doc))
        else:
            write_document(doc, config.out_path)
    except (ScopeError, OSError) as e:
        _error(e)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
