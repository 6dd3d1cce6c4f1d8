import argparse
import logging
import os
import sys

import dotenv

from cehpo.cli.config import COMMANDS, load_config
from cehpo.cli.runner import EXIT_CONFIG_ERROR, EXIT_RUN_ERROR, execute
from cehpo.errors import CehpoError, ConfigError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cehpo",
                                     description='Tune hyperparameters with the cross-entropy method')
    parser.add_argument('command', type=str, choices=COMMANDS, help='what to run')
    parser.add_argument('--config', dest='config', type=str, required=True, help='path to the JSON run config')
    parser.add_argument('--seed', dest='seed', type=int, default=None, help='overrides the seed of the config')
    parser.add_argument('--out', dest='out_dir', type=str, default=None,
                        help='overrides the output directory of the config')
    parser.add_argument('--threads', dest='threads', type=int, default=None,
                        help='number of worker threads (default: config, then CEHPO_THREADS, then 1)')
    parser.add_argument('--log-level', dest='log_level', type=str, default=None,
                        help='DEBUG, INFO, WARNING or ERROR (default: CEHPO_LOG_LEVEL, then INFO)')
    return parser


def configure_logging(level: str | None):
    if level is None:
        level = os.getenv("CEHPO_LOG_LEVEL", "INFO")
    logging.basicConfig(level=level.upper(), format="[%(name)s] %(levelname)s %(message)s")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    dotenv.load_dotenv()
    try:
        configure_logging(args.log_level)
    except ValueError as e:
        print(f"Invalid log level: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    try:
        config = load_config(args.config, seed=args.seed, out_dir=args.out_dir, threads=args.threads)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except (CehpoError, OSError) as e:
        logger.error(f"Cannot load {args.config}: {e}")
        return EXIT_RUN_ERROR

    if config.command != args.command:
        logger.error(f"The config is for the {config.command} command, not {args.command}")
        return EXIT_CONFIG_ERROR

    return execute(config)


if __name__ == "__main__":
    sys.exit(main())
