"""Scopes: benchmark plugins registered into the harness

A scope is described by a `ScopeDescriptor`. When registered (and enabled),
its `register_fn` is called with the `Registry` and may add benchmarks,
command-line options and init hooks. Everything a scope contributes is
tagged with its name.

Disabled scopes contribute nothing: no benchmark, no flag, no hook and no
entry in the results context.
"""

import argparse
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .harness import (
    BenchmarkDefinition,
    BenchmarkRegistry,
    LateRegistration,
    RunConfig,
)
from .tools import ScopeError

logger = logging.getLogger(__name__)


class DuplicateScope(ScopeError):
    """A scope with the same name is already registered"""

class DuplicateOption(ScopeError):
    """A command-line flag is already used by the harness or another scope"""

class BadOption(ScopeError):
    """Invalid option declaration"""

class UsageError(ScopeError):
    """Invalid command line"""

class UnknownFlag(UsageError):
    def __init__(self, flag):
        self.flag = flag
        super().__init__(f"unknown flag: {flag}")

class MissingValue(UsageError):
    def __init__(self, flag):
        self.flag = flag
        super().__init__(f"missing value for {flag}")

class BadValue(UsageError):
    def __init__(self, flag, text, reason):
        self.flag = flag
        self.text = text
        super().__init__(f"invalid value for {flag}: {text!r} ({reason})")


class Phase(Enum):
    BEFORE_PARSE = 'before_parse'
    AFTER_PARSE = 'after_parse'

class Arity(Enum):
    FLAG = 'flag'
    ONE_VALUE = 'one_value'


@dataclass(frozen=True)
class Continue:
    """Init hook result: carry on with the startup"""

CONTINUE = Continue()

@dataclass(frozen=True)
class Exit:
    """Init hook result: stop the process with the given status"""

    code: int
    message: str = ''

InitResult = Union[Continue, Exit]


@dataclass(frozen=True)
class OptionSpec:
    flag: str
    binding: Callable[[str], None]
    value_arity: Arity = Arity.ONE_VALUE
    description: str = ''
    owning_scope: str = ''

    def __post_init__(self):
        if not self.flag.startswith('--') or len(self.flag) <= 2:
            raise BadOption(f"option flag must start with '--': {self.flag!r}")

@dataclass(frozen=True)
class InitHook:
    fn: Callable[[object], Optional[InitResult]]
    phase: Phase = Phase.AFTER_PARSE
    priority: int = 0
    owning_scope: str = ''

@dataclass(frozen=True)
class ScopeDescriptor:
    name: str
    version: str
    register_fn: Callable[['Registry'], None]
    enabled: bool = True
    description: str = ''


def scope_logger(name):
    """Return the logger scopes should use for their output"""
    return logging.getLogger(f"scopebench.scopes.{name}")


def _parse_bool(text):
    value = text.lower()
    if value in ('true', '1', 'yes'):
        return True
    if value in ('false', '0', 'no'):
        return False
    raise ValueError(f"not a boolean: {text}")


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser raising errors instead of exiting"""

    def error(self, message):
        raise UsageError(message)


class Registry:
    """Scopes and everything they contribute

    Registration happens at startup, from a single thread. The registry is
    frozen before benchmarks run.
    """

    # flags handled by the harness itself
    core_flags = (
        '--benchmark_filter',
        '--benchmark_min_time',
        '--benchmark_repetitions',
        '--benchmark_out',
        '--benchmark_list_tests',
        '--benchmark_report_aggregates_only',
        '--benchmark_fake_clock',
        '--disable-scope',
        '--version',
        '--verbose',
        '--help',
    )

    def __init__(self, version=''):
        self.version = version
        self.benchmarks = BenchmarkRegistry()
        self.scopes: Dict[str, ScopeDescriptor] = {}
        self.options: List[OptionSpec] = []
        self.hooks: List[InitHook] = []
        self.frozen = False
        self._current_scope = None

    def _check_not_frozen(self, what):
        if self.frozen:
            raise LateRegistration(f"cannot register {what}: startup already finished")

    def register_scope(self, desc: ScopeDescriptor):
        self._check_not_frozen(f"scope {desc.name}")
        if not desc.name:
            raise ValueError("scope name must not be empty")
        if desc.name in self.scopes:
            raise DuplicateScope(f"scope already registered: {desc.name}")
        self.scopes[desc.name] = desc
        if not desc.enabled:
            logger.info(f"scope {desc.name} is disabled")
            return

        logger.debug(f"register scope {desc.name} {desc.version}")
        self._current_scope = desc.name
        try:
            desc.register_fn(self)
        finally:
            self._current_scope = None

    def register_benchmark(self, definition: BenchmarkDefinition):
        self._check_not_frozen(f"benchmark {definition.base_name}")
        if self._current_scope is not None and not definition.owning_scope:
            definition = replace(definition, owning_scope=self._current_scope)
        return self.benchmarks.register_benchmark(definition)

    def benchmark(self, name, args=(), **kwargs):
        """Decorator registering a benchmark body"""
        def decorator(body):
            self.register_benchmark(BenchmarkDefinition(name, body, args=args, **kwargs))
            return body
        return decorator

    def register_option(self, spec: OptionSpec):
        self._check_not_frozen(f"option {spec.flag}")
        if spec.flag in self.core_flags or any(o.flag == spec.flag for o in self.options):
            raise DuplicateOption(f"flag already registered: {spec.flag}")
        if self._current_scope is not None and not spec.owning_scope:
            spec = replace(spec, owning_scope=self._current_scope)
        self.options.append(spec)

    def register_init(self, fn, phase=Phase.AFTER_PARSE, priority=0):
        self._check_not_frozen("init hook")
        self.hooks.append(InitHook(fn, phase, priority, self._current_scope or ''))

    def freeze(self):
        self.frozen = True
        self.benchmarks.freeze()

    def enabled_scopes(self) -> List[Tuple[str, str]]:
        return [(s.name, s.version) for s in self.scopes.values() if s.enabled]

    def scopes_help(self) -> Optional[str]:
        """Describe enabled scopes, for the end of --help"""
        lines = []
        for s in self.scopes.values():
            if s.enabled:
                line = f"  {s.name} {s.version}"
                if s.description:
                    line += f": {s.description}"
                lines.append(line)
        if not lines:
            return None
        return "enabled scopes:\n" + "\n".join(lines)

    def version_lines(self) -> List[str]:
        return [f"scopebench {self.version}"] + [f"{name} {version}" for name, version in self.enabled_scopes()]

    def run_init(self, phase: Phase, arg) -> InitResult:
        """Run hooks of a phase, ordered by priority then registration

        The first Exit stops the remaining hooks and is returned.
        """
        # sort is stable: registration order is kept for equal priorities
        hooks = sorted((h for h in self.hooks if h.phase is phase), key=lambda h: h.priority)
        for hook in hooks:
            result = hook.fn(arg)
            if isinstance(result, Exit):
                logger.info(f"init hook of scope {hook.owning_scope or '<core>'} requested exit ({result.code})")
                return result
        return CONTINUE

    def create_parser(self, prog='scopebench-run'):
        parser = _ArgumentParser(prog, add_help=False, allow_abbrev=False, exit_on_error=False,
                                 formatter_class=argparse.RawDescriptionHelpFormatter,
                                 description="Run registered benchmarks and report results as JSON",
                                 epilog=self.scopes_help())
        parser.add_argument('--benchmark_filter', default='.*', metavar='REGEX',
                            help="run benchmarks whose name matches the regex (default: all)")
        parser.add_argument('--benchmark_min_time', type=float, default=None, metavar='SECONDS',
                            help="minimum duration of the measured batch")
        parser.add_argument('--benchmark_repetitions', type=int, default=1, metavar='N',
                            help="run each benchmark N times and report statistics")
        parser.add_argument('--benchmark_out', default=None, metavar='PATH',
                            help="write results to PATH instead of standard output")
        parser.add_argument('--benchmark_list_tests', nargs='?', const=True, default=False, type=_parse_bool,
                            help="list benchmark names and exit")
        parser.add_argument('--benchmark_report_aggregates_only', nargs='?', const=True, default=False, type=_parse_bool,
                            help="only report aggregates when repetitions are used")
        parser.add_argument('--benchmark_fake_clock', type=int, default=None, help=argparse.SUPPRESS)
        parser.add_argument('--disable-scope', dest='disabled_scopes', action='append', default=[], metavar='NAME',
                            help="disable a scope (can be repeated)")
        parser.add_argument('--version', action='store_true',
                            help="print versions of the harness and scopes")
        parser.add_argument('-v', '--verbose', action='count', default=0,
                            help="be verbose")
        parser.add_argument('-h', '--help', action='store_true',
                            help="show this help message and exit")

        if self.options:
            group = parser.add_argument_group("scope options")
            for i, opt in enumerate(self.options):
                if opt.value_arity is Arity.FLAG:
                    group.add_argument(opt.flag, dest=f"scope_option_{i}", action='store_true', help=opt.description)
                else:
                    group.add_argument(opt.flag, dest=f"scope_option_{i}", default=None, metavar='VALUE', help=opt.description)
        return parser

    def parse_args(self, argv: Sequence[str], parser=None) -> Tuple[RunConfig, argparse.Namespace]:
        """Parse the command line into a RunConfig, fire scope option bindings

        The returned namespace also holds non-run flags (listing, version, ...)
        and a `diagnostics` list of non-fatal remarks.
        """

        if parser is None:
            parser = self.create_parser()
        try:
            args, leftover = parser.parse_known_args(list(argv))
        except argparse.ArgumentError as e:
            flag = e.argument_name
            if e.message.startswith('expected'):
                raise MissingValue(flag) from None
            if e.message.startswith('invalid'):
                raise BadValue(flag, e.message.split(': ', 1)[-1], e.message) from None
            raise UsageError(str(e)) from None

        for arg in leftover:
            if arg.startswith('-'):
                raise UnknownFlag(arg.split('=', 1)[0])
            raise UsageError(f"unexpected argument: {arg}")

        args.diagnostics = [f"unknown scope: {name}" for name in args.disabled_scopes if name not in self.scopes]
        if args.benchmark_fake_clock is not None and args.benchmark_fake_clock <= 0:
            raise BadValue('--benchmark_fake_clock', str(args.benchmark_fake_clock), "must be positive")

        min_time = args.benchmark_min_time
        try:
            config = RunConfig(
                filter=args.benchmark_filter,
                repetitions=args.benchmark_repetitions,
                out_path=args.benchmark_out,
                report_aggregates_only=args.benchmark_report_aggregates_only,
                **({} if min_time is None else {'min_time': min_time}),
            )
        except ValueError as e:
            flag = '--benchmark_repetitions' if 'repetitions' in str(e) else '--benchmark_min_time'
            raise BadValue(flag, str(getattr(args, flag[2:])), str(e)) from None

        for i, opt in enumerate(self.options):
            value = getattr(args, f"scope_option_{i}")
            if value is None or value is False:
                continue
            text = 'true' if value is True else value
            try:
                opt.binding(text)
            except ValueError as e:
                raise BadValue(opt.flag, text, str(e)) from None

        return config, args


def disabled_scopes_from_argv(argv: Sequence[str]) -> List[str]:
    """Extract `--disable-scope` values, before scopes are registered"""
    parser = _ArgumentParser(add_help=False, allow_abbrev=False)
    parser.add_argument('--disable-scope', dest='disabled_scopes', action='append', default=[])
    try:
        args, _ = parser.parse_known_args(list(argv))
    except (UsageError, argparse.ArgumentError):
        # reported by the full parser
        return []
    return args.disabled_scopes


def build_registry(scopes: Sequence[ScopeDescriptor], disabled=(), version='') -> Registry:
    """Register scopes in order, disabling those named in `disabled`"""
    registry = Registry(version)
    for desc in scopes:
        if desc.name in disabled:
            desc = replace(desc, enabled=False)
        registry.register_scope(desc)
    return registry
