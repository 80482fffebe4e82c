import logging
import os
from collections import OrderedDict, namedtuple

from tabulate import tabulate
from termcolor import colored

from ..config import scenario_mode
from ..evaluation import (
    BlackwellEvaluator,
    EnvelopeEvaluator,
    InfoMarketEvaluator,
    ScreeningEvaluator,
    SynthesisEvaluator,
    write_json,
)
from ..scenarios import build_scenario_inputs
from ..utils.errors import ConfigError, EnvscreenError
from .defaults import default_setup, setup

__all__ = ["ScenarioOutcome", "ScenarioRunner", "catalog_table", "exit_code", "summary_table"]

logger = logging.getLogger(__name__)

# status is "pass", "mismatch" or "error"
ScenarioOutcome = namedtuple(
    "ScenarioOutcome", ["name", "kind", "expected", "verdict", "status", "output_folder", "message"]
)

EXIT_OK, EXIT_ERROR, EXIT_MISMATCH = 0, 1, 2


class ScenarioRunner:
    """
    Runs scenario configs one after another. Each scenario gets its own
    output folder ``OUTPUT_DIR/<name>`` holding ``report.json``, the CSV
    tables and a copy of the config.
    """

    def __init__(self, opts=None):
        self._opts = list(opts or [])

    @classmethod
    def build_evaluator(cls, cfg, output_folder=None):
        """
        Create the evaluator for a scenario kind.
        """
        if output_folder is None:
            output_folder = os.path.join(cfg.OUTPUT_DIR, cfg.SCENARIO.NAME)
        evaluator_type = cfg.SCENARIO.KIND
        if evaluator_type == "envelope":
            return EnvelopeEvaluator(cfg, output_folder)
        if evaluator_type == "synthesis":
            return SynthesisEvaluator(cfg, output_folder)
        if evaluator_type == "screening":
            return ScreeningEvaluator(cfg, output_folder)
        if evaluator_type == "blackwell":
            return BlackwellEvaluator(cfg, output_folder)
        if evaluator_type == "info_market":
            return InfoMarketEvaluator(cfg, output_folder)
        raise NotImplementedError(f"no evaluator for scenario kind {evaluator_type}")

    def run_one(self, config_file) -> ScenarioOutcome:
        try:
            cfg = setup(config_file, self._opts)
        except ConfigError as e:
            logger.error(f"{config_file}: {e}")
            name = os.path.splitext(os.path.basename(config_file))[0]
            return ScenarioOutcome(name, "?", "", "ConfigError", "error", None, str(e))

        output_folder = os.path.join(cfg.OUTPUT_DIR, cfg.SCENARIO.NAME)
        default_setup(cfg, output_folder)
        expected = cfg.SCENARIO.EXPECT
        message = None
        try:
            evaluator = self.build_evaluator(cfg, output_folder)
            evaluator.reset()
            evaluator.process(build_scenario_inputs(cfg))
            results = evaluator.evaluate()
            verdict = results.pop("verdict", None)
        except EnvscreenError as e:
            # an expected failure is reported like any other verdict
            verdict, message = type(e).__name__, str(e)
            results = OrderedDict(error=message)
            if verdict != expected:
                logger.error(f"{cfg.SCENARIO.NAME}: {verdict}: {message}")

        if message is not None and verdict != expected:
            status = "error"
        elif expected and verdict != expected:
            status = "mismatch"
        else:
            status = "pass"

        if cfg.OUTPUT_FORMAT in ("json", "both"):
            report = OrderedDict()
            report["scenario"] = cfg.SCENARIO.NAME
            report["kind"] = cfg.SCENARIO.KIND
            report["mode"] = scenario_mode(cfg)
            report["n_points"] = cfg.GRID.N_POINTS
            report["seed"] = cfg.SEED
            report["expected"] = expected or None
            report["verdict"] = verdict
            report["passed"] = status == "pass"
            report["results"] = results
            write_json(os.path.join(output_folder, "report.json"), report)
        logger.info(f"{cfg.SCENARIO.NAME}: verdict {verdict} (expected {expected or '-'}) -> {status}")
        return ScenarioOutcome(cfg.SCENARIO.NAME, cfg.SCENARIO.KIND, expected, verdict, status, output_folder, message)

    def run(self, config_files):
        """Run every file in order; never stops at a failing scenario."""
        return [self.run_one(path) for path in config_files]


def summary_table(outcomes):
    colors = {"pass": "green", "mismatch": "yellow", "error": "red"}
    rows = [
        [o.name, o.kind, o.expected or "-", o.verdict, colored(o.status, colors[o.status])] for o in outcomes
    ]
    return tabulate(
        rows,
        headers=["scenario", "kind", "expected", "verdict", "status"],
        tablefmt="pipe",
        numalign="left",
        stralign="left",
    )


def catalog_table(catalog):
    rows = [[e.name, e.kind, e.anchor or "-", e.topic, e.expect or "-"] for e in catalog]
    return tabulate(
        rows, headers=["scenario", "kind", "anchor", "topic", "expected"], tablefmt="pipe", stralign="left"
    )


def exit_code(outcomes) -> int:
    """1 if anything errored (or nothing ran), else 2 on any verdict mismatch, else 0."""
    if not outcomes or any(o.status == "error" for o in outcomes):
        return EXIT_ERROR
    if any(o.status == "mismatch" for o in outcomes):
        return EXIT_MISMATCH
    return EXIT_OK
