from scopebench.plugin import (
    CONTINUE,
    Exit,
    OptionSpec,
    Phase,
    scope_logger,
)

logger = scope_logger("example")


class ExampleInit:
    """Options making the process exit during initialization

    `--example-fail` and `--example-exit` both take a value. If any of them is
    given, the init hook stops the process with status 1 before any benchmark
    runs.
    """

    def __init__(self):
        self.fail = None
        self.exit = None

    def set_fail(self, value):
        self.fail = value

    def set_exit(self, value):
        self.exit = value

    def after_parse(self, config):
        if self.fail is not None:
            return Exit(1, f"example scope: failing as requested by --example-fail {self.fail}")
        if self.exit is not None:
            return Exit(1, f"example scope: exiting as requested by --example-exit {self.exit}")
        logger.debug("example scope initialized")
        return CONTINUE


def register(registry):
    init = ExampleInit()
    registry.register_option(OptionSpec("--example-fail", init.set_fail,
                                        description="make the example scope fail during initialization"))
    registry.register_option(OptionSpec("--example-exit", init.set_exit,
                                        description="make the example scope exit during initialization"))
    registry.register_init(init.after_parse, Phase.AFTER_PARSE)
