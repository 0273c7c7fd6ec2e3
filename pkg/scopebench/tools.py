import logging
import os
import re
import sys
import tempfile
from contextlib import contextmanager

try:
    import ujson
    def json_dump(obj, fp, **kwargs):
        return ujson.dump(obj, fp, **kwargs, escape_forward_slashes=False)
    def json_dumps(obj, **kwargs):
        return ujson.dumps(obj, **kwargs, escape_forward_slashes=False)
except ImportError:
    import json
    json_dump = json.dump
    json_dumps = json.dumps


class ScopeError(Exception):
    """Base class for all errors reported by scopebench"""


class BadRegex(ScopeError):
    """A regular expression failed to compile"""

    def __init__(self, pattern, position, reason):
        self.pattern = pattern
        self.position = position
        self.reason = reason
        if position is None:
            super().__init__(f"invalid regex {pattern!r}: {reason}")
        else:
            super().__init__(f"invalid regex {pattern!r} at position {position}: {reason}")


def compile_regex(pattern):
    """Compile a regex, raise BadRegex on failure"""
    try:
        return re.compile(pattern)
    except re.error as e:
        raise BadRegex(pattern, e.pos, e.msg) from None


def _new_file_mode(path):
    """Return the mode of an existing file, or the default mode of new files"""
    try:
        return os.stat(path).st_mode & 0o7777
    except FileNotFoundError:
        umask = os.umask(0)
        os.umask(umask)
        return 0o666 & ~umask


@contextmanager
def write_file_atomic(path, binary=False):
    """Open a file for writing, create its parent directory if needed

    Data is written to a temporary file in the same directory, which replaces
    `path` only once the writing succeeds. On error, the temporary file is
    removed and `path` is left untouched.
    """
    dirname = os.path.dirname(path) or '.'
    os.makedirs(dirname, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=dirname, prefix=f".{os.path.basename(path)}.", suffix='.tmp')
    try:
        with open(fd, 'wb' if binary else 'w', encoding=None if binary else 'utf-8', newline=None if binary else '') as f:
            yield f
        os.chmod(tmp_path, _new_file_mode(path))
        os.replace(tmp_path, path)
    except:
        # remove partially written file
        try:
            os.remove(tmp_path)
        except OSError:
            pass
        raise


def read_input(path):
    """Read a file as bytes, `-` reads standard input"""
    if path == '-':
        return sys.stdin.buffer.read()
    with open(path, 'rb') as f:
        return f.read()


def make_escape(path):
    """Escape a path for use in a make rule"""
    return str(path).replace('$', '$$').replace(' ', '\\ ').replace('#', '\\#')


def configure_logging(verbose):
    """Configure logging on standard error from a `-v` count"""

    if verbose >= 3:
        loglevel = logging.DEBUG
    elif verbose >= 1:
        loglevel = logging.INFO
    else:
        loglevel = logging.WARNING

    logging.basicConfig(
        level=loglevel,
        datefmt='%H:%M:%S',
        format='%(asctime)s %(levelname)s %(name)s - %(message)s',
    )

    logger = logging.getLogger('scopebench')
    if verbose >= 2:
        logger.setLevel(logging.DEBUG)
    elif verbose >= 1:
        logger.setLevel(logging.INFO)
