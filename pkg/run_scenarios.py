"""
envscreen scenario runner.

This script runs bundled or user-written scenario configs and writes one
report folder per scenario. The exit code is 0 when every scenario meets its
expected verdict, 2 on a verdict mismatch and 1 on errors.
"""
import logging
import sys

from envscreen.engine import (
    ScenarioRunner,
    catalog_table,
    default_argument_parser,
    exit_code,
    override_opts,
    setup_cli_logger,
    summary_table,
)
from envscreen.scenarios import ScenarioCatalog

logger = logging.getLogger("envscreen")


def list_scenarios(args):
    catalog = ScenarioCatalog(args.config_root)
    print(f"{len(catalog)} scenarios under {catalog.root}:\n" + catalog_table(catalog))
    return 0 if len(catalog) else 1


def main(args):
    if args.command == "list":
        return list_scenarios(args)

    setup_cli_logger(args)
    config_files = list(args.config_files)
    if args.all:
        config_files += ScenarioCatalog(args.config_root).paths()
    if not config_files:
        logger.error("no scenario given; pass config files or --all")
        return 1

    outcomes = ScenarioRunner(override_opts(args)).run(config_files)
    logger.info("Scenario summary:\n" + summary_table(outcomes))
    return exit_code(outcomes)


if __name__ == "__main__":
    args = default_argument_parser().parse_args()
    print("Command Line Args:", args)
    sys.exit(main(args))
