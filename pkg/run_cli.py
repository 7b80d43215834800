#!/usr/bin/env python3
"""
Entry point script to run the Sysmel kernel driver.
"""

import sys
import argparse
from src.data_structures import DriverConfig, PassOptions
from src.main import run_driver, DUMP_STAGES
from src.engines import ENGINES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Run Sysmel programs on the bootstrap kernel')
    parser.add_argument('input', nargs='?', help='Source file to run')
    parser.add_argument('-e', dest='expression', metavar='EXPR', help='Evaluate EXPR and print its value')
    parser.add_argument('--engine', default='interp', choices=list(ENGINES), help='Execution engine (default: interp)')
    for stage in DUMP_STAGES:
        parser.add_argument(f'--dump-{stage}', dest='dumps', action='append_const', const=stage,
                            help=f'Print the {stage} form of every function')
    parser.add_argument('--emit-image', metavar='PATH', help='Write an image of the traced program to PATH')
    parser.add_argument('--load-image', metavar='PATH', help='Load an image and run its main function')
    parser.add_argument('--roots', default='main', choices=['main', 'all'],
                        help='Trace images from main only or from main and the global namespace')
    parser.add_argument('--strip-ast', action='store_true', help='Leave analyzed function bodies out of images')
    parser.add_argument('--no-constprop', action='store_true', help='Disable constant propagation')
    parser.add_argument('--no-simplify-cfg', action='store_true', help='Disable control flow simplification')
    parser.add_argument('--no-inline', action='store_true', help='Disable inlining')
    parser.add_argument('--inline-threshold', type=int, default=24, metavar='N',
                        help='Largest callee inlined, in instructions (default: 24)')
    parser.add_argument('--repl', action='store_true', help='Read statements interactively')
    parser.add_argument('--log-level', default='WARNING', help='Console log level (default: WARNING)')
    parser.add_argument('--log-file', help='Log file path (default: per-user log folder)')
    return parser


def config_from_args(args: argparse.Namespace) -> DriverConfig:
    return DriverConfig(
        input_path=args.input,
        expression=args.expression,
        engine=args.engine,
        dumps=args.dumps or [],
        pass_options=PassOptions(
            constant_propagation=not args.no_constprop,
            simplify_control_flow=not args.no_simplify_cfg,
            inlining=not args.no_inline,
            inline_threshold=args.inline_threshold,
        ),
        roots=args.roots,
        emit_image=args.emit_image,
        load_image=args.load_image,
        strip_ast=args.strip_ast,
        repl=args.repl,
        log_level=args.log_level,
        log_file=args.log_file,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    result = run_driver(config_from_args(args), configure_logging=True)
    return result.exit_status


if __name__ == '__main__':
    sys.exit(main())
