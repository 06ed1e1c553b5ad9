"""
Tricritical Dicke Lab - Command-line Orchestrator

Runs one lab command: sweep, boundary, scaling, ed or resonance.

Usage:
    python main.py sweep --x-count 200 --y-count 200 --lambdas 0.1,1,10 --output sweep.csv
    python main.py scaling --target qtp --side superradiant --output qtp.json
    python main.py sweep --config sweep.csv.manifest.json --output rerun.csv

Every option can come from a key=value config file (--config) and be
overridden by a flag; the resolved configuration is recorded in the manifest.
"""

import argparse
import logging

from commands import boundary, ed, resonance, scaling, sweep
from model.errors import EXIT_OK, exit_code_for
from utils.config import config_from_sources

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

# --- Command Mapping ---
# Maps a subcommand name to the module providing SCHEMA, DEFAULTS and run()
COMMAND_MAP = {
    "sweep": sweep,
    "boundary": boundary,
    "scaling": scaling,
    "ed": ed,
    "resonance": resonance,
}

COMMON_FLAGS = ("format", "threads", "seed")


def build_parser():
    parser = argparse.ArgumentParser(prog="tricritical-dicke-lab", description="Tricritical Dicke model lab")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, module in COMMAND_MAP.items():
        sub = subparsers.add_parser(name, allow_abbrev=False, help=(module.__doc__ or "").strip().splitlines()[0])
        sub.add_argument("--config", help="key=value config file or a run manifest (JSON)")
        sub.add_argument("--output", required=True, help="output file")
        sub.add_argument("--format", choices=("csv", "json"), default=None)
        sub.add_argument("--threads", default=None, help="worker threads for grid evaluation")
        sub.add_argument("--seed", default=None, help="seed for iterative-solver start vectors")
        sub.add_argument("--log-level", choices=LOG_LEVELS, default="INFO")
        for key in module.SCHEMA:
            if key in COMMON_FLAGS:
                continue
            sub.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None,
                             help=f"override '{key}' (default {module.DEFAULTS[key]!r})")
    return parser


def _overrides(args, module):
    return {key: getattr(args, key) for key in module.SCHEMA if getattr(args, key, None) is not None}


def run_task(name, module, args):
    """Resolves the configuration, runs the command and maps failures to exit codes."""
    try:
        logging.info(f"Starting task: {name}")
        config = config_from_sources(module.SCHEMA, module.DEFAULTS, args.config, _overrides(args, module))
        module.run(config, args.output)
        logging.info(f"Finished task: {name}")
        return name, EXIT_OK
    except Exception as e:
        code = exit_code_for(e)
        logging.error(f"Task failed: {name} (exit code {code}): {e}", exc_info=True)
        return name, code


def main(argv=None):
    """
    Entry point.

    Args:
        argv: Argument list (sys.argv[1:] when None).

    Returns:
        int: Process exit code (0 ok, 2 usage, 3 domain, 4 numerical, 5 I/O).
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
    logging.getLogger().setLevel(args.log_level)

    logging.info("Tricritical Dicke Lab - Processing started")
    name, code = run_task(args.command, COMMAND_MAP[args.command], args)
    if code == EXIT_OK:
        logging.info(f"{name} - OK")
    else:
        logging.error(f"{name} - FAILED")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
