"""
Command-line entry point

    python main.py sample  --spec FILE --seed S [--dot]
    python main.py run     --config FILE --out DIR
    python main.py sweep   --config FILE --out DIR
    python main.py verify  --suite NAME [--budget N]
    python main.py moments --spec FILE

Exit codes: 0 success, 1 suite failure, 2 configuration error
"""

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from config import configure_logging, validate_config
from harness import (
    load_experiment_config,
    moments_report,
    run_trials,
    sample_report,
    sweep,
    write_run_outputs,
    write_sweep_outputs,
)
from model import ConfigError, GraphUnionError, InvalidSpecError, load_spec
from suites import SUITES, verify

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

logger = logging.getLogger("MAIN")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='graph-union-lab',
        description='Simulate and verify unions of random subgraphs of K_n',
    )
    parser.add_argument('--log-level', default=None, help='override GRAPH_UNION_LAB_LOG_LEVEL')
    commands = parser.add_subparsers(dest='command', required=True)

    sample = commands.add_parser('sample', help='draw one union graph and summarize it')
    sample.add_argument('--spec', required=True)
    sample.add_argument('--seed', required=True, type=int)
    sample.add_argument('--dot', action='store_true', help='print Graphviz DOT instead of a summary')

    for name, text in (('run', 'run a seeded trial batch'), ('sweep', 'run a threshold sweep')):
        cmd = commands.add_parser(name, help=text)
        cmd.add_argument('--config', required=True)
        cmd.add_argument('--out', required=True)

    check = commands.add_parser('verify', help='run a verification suite')
    check.add_argument('--suite', required=True, choices=sorted(SUITES))
    check.add_argument('--budget', type=int, default=None, help='trial count for Monte Carlo suites')

    moments = commands.add_parser('moments', help='print analytic moments of a spec')
    moments.add_argument('--spec', required=True)
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == 'sample':
        print(sample_report(load_spec(args.spec), args.seed, dot=args.dot), end='' if args.dot else '\n')
        return EXIT_OK

    if args.command == 'moments':
        print(json.dumps(moments_report(load_spec(args.spec)), sort_keys=True, indent=2))
        return EXIT_OK

    if args.command == 'run':
        config = load_experiment_config(args.config)
        paths = write_run_outputs(run_trials(config), args.out)
        logger.info("wrote %s", ', '.join(str(p) for p in paths.values()))
        return EXIT_OK

    if args.command == 'sweep':
        config = load_experiment_config(args.config)
        if config.sweep is None:
            raise ConfigError('config.sweep', 'missing')
        paths = write_sweep_outputs(sweep(config), args.out)
        logger.info("wrote %s", ', '.join(str(p) for p in paths.values()))
        return EXIT_OK

    result = verify(args.suite, args.budget)
    for check in result.checks:
        print(json.dumps({'suite': result.name, **check.__dict__}, sort_keys=True))
    print(json.dumps({
        'suite': result.name,
        'passed': result.passed,
        'elapsed_seconds': result.elapsed_seconds,
    }, sort_keys=True))
    return EXIT_OK if result.passed else EXIT_FAILURE


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    _, errors = validate_config()
    for error in errors:
        logger.warning("config: %s", error)

    try:
        return _dispatch(args)
    except (ConfigError, InvalidSpecError, json.JSONDecodeError, FileNotFoundError) as e:
        logger.error("%s", e)
        return EXIT_CONFIG
    except GraphUnionError as e:
        logger.error("%s", e)
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
