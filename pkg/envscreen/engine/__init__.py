from .defaults import default_argument_parser, default_setup, override_opts, setup, setup_cli_logger
from .runner import ScenarioOutcome, ScenarioRunner, catalog_table, exit_code, summary_table
