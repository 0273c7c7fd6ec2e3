"""Scopes bundled with scopebench"""

from .example import build_example_scope


def builtin_scopes():
    """Return the bundled scopes, in registration order"""
    return [
        build_example_scope(),
    ]
