#!/usr/bin/env python3
import sys
import argparse
import textwrap
import scopebench
from scopebench.plot import (
    generate,
    load_spec_file,
    quick_bar,
    spec_dependencies,
)
from scopebench.results import (
    concat_documents,
    filter_by_name,
    load_document,
    serialize_document,
)
from scopebench.tools import ScopeError, configure_logging


def command_spec(parser, args):
    spec = load_spec_file(args.spec)
    generate(spec)


def command_deps(parser, args):
    spec = load_spec_file(args.spec)
    sys.stdout.write(spec_dependencies(spec))


def command_bar(parser, args):
    quick_bar(args.input, args.xfield, args.yfield, args.title, args.output)


def command_cat(parser, args):
    if args.files.count('-') > 1:
        parser.error("standard input can be used only once")
    doc = concat_documents([load_document(path) for path in args.files])
    sys.stdout.write(serialize_document(doc))


def command_filter_name(parser, args):
    doc = filter_by_name(load_document(args.file), args.regex)
    sys.stdout.write(serialize_document(doc))


def create_parser():
    parser = argparse.ArgumentParser('scopebench',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description=textwrap.dedent("""
            Tools for benchmark results

            Results are JSON files in the format of the Google Benchmark
            library, as written by scopebench-run.
            `-` can be used for standard input in place of a results file.
        """),
    )

    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help="be verbose")
    parser.add_argument('--version', action='version', version=f"%(prog)s {scopebench.__version__}")

    subparsers = parser.add_subparsers(dest='command', metavar="COMMAND", required=True)

    # plots

    subparser = subparsers.add_parser('spec',
                                      help="generate the plots described by a spec file")
    subparser.add_argument('spec',
                           help="YAML spec file")

    subparser = subparsers.add_parser('deps',
                                      help="print a make rule with the outputs and inputs of a spec file")
    subparser.add_argument('spec',
                           help="YAML spec file")

    subparser = subparsers.add_parser('bar',
                                      help="bar plot of a single results file")
    subparser.add_argument('--xfield', required=True,
                           help="field used for x values, `name_argN` for the N-th name argument")
    subparser.add_argument('--yfield', required=True,
                           help="field used for y values")
    subparser.add_argument('--title',
                           help="plot title")
    subparser.add_argument('input',
                           help="results file")
    subparser.add_argument('output',
                           help="SVG file to write")

    # results files

    subparser = subparsers.add_parser('cat',
                                      help="concatenate benchmarks of results files")
    subparser.add_argument('files', nargs='+',
                           help="results files, the context of the first one is kept")

    subparser = subparsers.add_parser('filter_name',
                                      help="keep benchmarks whose name matches a regex")
    subparser.add_argument('file',
                           help="results file")
    subparser.add_argument('regex',
                           help="regular expression searched in benchmark names")

    return parser


def main(argv = None):
    parser = create_parser()
    args = parser.parse_args(argv)

    configure_logging(args.verbose)

    try:
        globals()[f"command_{args.command.replace('-', '_')}"](parser, args)
    except FileNotFoundError as e:
        print(f"{parser.prog}: error: {e.filename}: file not found", file=sys.stderr)
        return 1
    except (ScopeError, OSError) as e:
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
