"""
Command-line plumbing shared by ``run_scenarios.py`` and the tools: the
argument parser, config setup and per-scenario output preparation.
"""
import argparse
import logging
import os
import sys

from ..config import load_config, validate_config
from ..utils.file_io import PathManager
from ..utils.logger import setup_logger

__all__ = ["default_argument_parser", "setup", "default_setup", "override_opts", "setup_cli_logger"]


def default_argument_parser(epilog=None):
    """
    Create a parser with the ``run`` and ``list`` subcommands.

    Returns:
        argparse.ArgumentParser:
    """
    parser = argparse.ArgumentParser(
        epilog=epilog
        or f"""
Examples:

Run one scenario:
    $ {sys.argv[0]} run configs/envelope/example1_constant.yaml

Run every bundled scenario on a finer grid:
    $ {sys.argv[0]} run --all --grid 401 --out ./output

Change some config options:
    $ {sys.argv[0]} run configs/synthesis/levels.yaml --opts SYNTHESIS.K 0.5 TOLERANCE.CALIBRATION 20.0

List the bundled scenarios:
    $ {sys.argv[0]} list
""",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    run = sub.add_parser("run", help="run scenario configs and write reports")
    run.add_argument("config_files", nargs="*", metavar="FILE", help="path to scenario config files")
    run.add_argument("--all", action="store_true", help="run every bundled scenario")
    run.add_argument("--config-root", default=None, help="directory of bundled scenarios (default: configs/)")
    run.add_argument("--grid", type=int, default=None, help="override GRID.N_POINTS")
    run.add_argument("--out", default=None, help="override OUTPUT_DIR")
    run.add_argument("--seed", type=int, default=None, help="override SEED")
    run.add_argument("--format", choices=("json", "csv", "both"), default=None, help="override OUTPUT_FORMAT")
    run.add_argument(
        "--opts",
        help="Modify config options by adding 'KEY VALUE' pairs at the end of the command.",
        default=[],
        nargs=argparse.REMAINDER,
    )

    listing = sub.add_parser("list", help="list the bundled scenarios")
    listing.add_argument("--config-root", default=None, help="directory of bundled scenarios (default: configs/)")
    return parser


def override_opts(args):
    """``KEY VALUE`` pairs for the flags that were given, followed by ``--opts``."""
    opts = []
    if getattr(args, "grid", None) is not None:
        opts += ["GRID.N_POINTS", args.grid]
    if getattr(args, "out", None) is not None:
        opts += ["OUTPUT_DIR", args.out]
    if getattr(args, "seed", None) is not None:
        opts += ["SEED", args.seed]
    if getattr(args, "format", None) is not None:
        opts += ["OUTPUT_FORMAT", args.format]
    return opts + list(getattr(args, "opts", None) or [])


def setup(config_file, opts=None):
    """
    Create the config of one scenario and validate it.

    Raises:
        ConfigError: the file or an override is malformed.
    """
    cfg = load_config(config_file, opts)
    validate_config(cfg)
    return cfg


def default_setup(cfg, output_folder):
    """
    Prepare the scenario's output folder: log the config and save a copy of
    it next to the reports.
    """
    logger = logging.getLogger("envscreen")
    logger.info(f"Running scenario {cfg.SCENARIO.NAME} ({cfg.SCENARIO.KIND})")
    logger.debug("Full config:\n" + cfg.dump())
    if output_folder:
        PathManager.mkdirs(output_folder)
        path = os.path.join(output_folder, "config.yaml")
        with PathManager.open(path, "w") as f:
            f.write(cfg.dump())


def setup_cli_logger(args):
    """Console logging, plus ``log.txt`` under ``--out`` when it is given."""
    return setup_logger(output=getattr(args, "out", None), name="envscreen")
