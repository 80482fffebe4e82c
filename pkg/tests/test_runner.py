import json
import logging
import os
import tempfile
import unittest

from envscreen.config import get_cfg, load_config, scenario_mode, validate_config
from envscreen.engine import (
    ScenarioRunner,
    catalog_table,
    default_argument_parser,
    exit_code,
    override_opts,
    setup,
    summary_table,
)
from envscreen.scenarios import ScenarioCatalog, build_scenario_inputs, default_config_root
from envscreen.utils.errors import ConfigError
from envscreen.utils.logger import log_first_n, setup_logger

CONFIGS = default_config_root()


def config_path(*parts):
    return os.path.join(CONFIGS, *parts)


class TestConfig(unittest.TestCase):
    def test_base_files_are_merged(self):
        cfg = load_config(config_path("envelope", "example1_constant.yaml"))
        self.assertEqual(cfg.GRID.N_POINTS, 201)
        self.assertEqual(cfg.SCENARIO.KIND, "envelope")
        self.assertEqual(scenario_mode(cfg), "main")
        self.assertEqual(cfg.ENVELOPE.RULE_PARAMS.VALUE, 1.0)

    def test_default_mode(self):
        cfg = get_cfg()
        cfg.SCENARIO.KIND = "blackwell"
        self.assertEqual(scenario_mode(cfg), "compare")

    def test_small_grid_is_rejected(self):
        with self.assertRaises(ConfigError) as ctx:
            setup(config_path("envelope", "example1_constant.yaml"), ["GRID.N_POINTS", 2])
        self.assertEqual(ctx.exception.field, "GRID.N_POINTS")

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as ctx:
            setup(config_path("envelope", "example1_constant.yaml"), ["FOO.BAR", 1])
        self.assertEqual(ctx.exception.field, "FOO.BAR")

    def test_wrong_type(self):
        with self.assertRaises(ConfigError) as ctx:
            setup(config_path("envelope", "example1_constant.yaml"), ["GRID.N_POINTS", "many"])
        self.assertEqual(ctx.exception.field, "GRID.N_POINTS")

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config(config_path("envelope", "no_such_scenario.yaml"))

    def test_validation(self):
        cases = [
            ("SCENARIO.KIND", "auction"),
            ("SCENARIO.MODE", "sideways"),
            ("ENVELOPE.RULE", "no_such_rule"),
            ("ENVELOPE.MESH", [0.0, 0.5]),
            ("OUTPUT_FORMAT", "xml"),
        ]
        for field, value in cases:
            cfg = load_config(config_path("envelope", "example1_constant.yaml"), freeze=False)
            node, key = field.rsplit(".", 1) if "." in field else (None, field)
            target = cfg if node is None else cfg[node]
            target[key] = value
            with self.assertRaises(ConfigError) as ctx:
                validate_config(cfg)
            self.assertEqual(ctx.exception.field, field)

    def test_blackwell_indices(self):
        cfg = load_config(config_path("blackwell", "compare_nested.yaml"), ["BLACKWELL.RIGHT", 9])
        with self.assertRaises(ConfigError) as ctx:
            validate_config(cfg)
        self.assertEqual(ctx.exception.field, "BLACKWELL.RIGHT")

    def test_scenario_inputs(self):
        inputs = build_scenario_inputs(setup(config_path("info_market", "forecasting_menu.yaml")))
        self.assertEqual(inputs["kind"], "info_market")
        self.assertEqual(inputs["mode"], "price")
        self.assertEqual(len(inputs["allocation"]), 201)


class TestCatalog(unittest.TestCase):
    def test_bundled_scenarios(self):
        catalog = ScenarioCatalog()
        names = catalog.names()
        self.assertIn("example1_constant", names)
        self.assertIn("forecasting_menu", names)
        self.assertFalse(any(os.path.basename(p).startswith("Base-") for p in catalog.paths()))
        self.assertEqual(catalog.entries[0].kind, "envelope")
        self.assertEqual(catalog.entries[-1].kind, "info_market")
        self.assertEqual(len(names), len(set(names)))

    def test_every_entry_expects_something(self):
        for entry in ScenarioCatalog():
            self.assertTrue(entry.expect, entry.name)
            self.assertTrue(entry.topic, entry.name)
            self.assertTrue(entry.anchor, entry.name)

    def test_list_table_shows_anchors(self):
        catalog = ScenarioCatalog()
        self.assertEqual(len(catalog), 39)
        lines = catalog_table(catalog).splitlines()
        headers = [h.strip() for h in lines[0].strip("|").split("|")]
        self.assertEqual(headers, ["scenario", "kind", "anchor", "topic", "expected"])
        self.assertEqual(len(lines), len(catalog) + 2)
        rows = {line.strip("|").split("|")[0].strip(): line for line in lines[2:]}
        self.assertIn("envelope formula vs outer first-order condition: linear example", rows["example1_constant"])
        self.assertIn("information market: forecasting example", rows["forecasting_menu"])
        for entry in catalog:
            self.assertIn(entry.anchor, rows[entry.name])

    def test_lookup(self):
        catalog = ScenarioCatalog()
        self.assertEqual(catalog.get("forecasting_menu").kind, "info_market")
        with self.assertRaises(KeyError):
            catalog.get("no_such_scenario")


class TestLogging(unittest.TestCase):
    def test_log_first_n(self):
        name = "envscreen.tests.log_first_n"
        with self.assertLogs(name, level="WARNING") as logs:
            for i in range(5):
                log_first_n(logging.WARNING, f"attempt {i}", n=2, name=name, key="attempts")
            log_first_n(logging.WARNING, "other", name=name)
            log_first_n(logging.WARNING, "other", name=name)
        self.assertEqual([r.getMessage() for r in logs.records], ["attempt 0", "attempt 1", "other"])

    def test_setup_logger_is_cached(self):
        with tempfile.TemporaryDirectory() as out:
            logger = setup_logger(out, color=False, name="envscreen.tests.setup")
            self.assertIs(setup_logger(out, color=False, name="envscreen.tests.setup"), logger)
            self.assertEqual(len(logger.handlers), 2)
            logger.info("hello")
            for handler in logger.handlers:
                handler.flush()
            with open(os.path.join(out, "log.txt")) as f:
                self.assertIn("hello", f.read())


class TestArgumentParser(unittest.TestCase):
    def test_run_overrides(self):
        args = default_argument_parser().parse_args(
            ["run", "a.yaml", "--grid", "401", "--seed", "3", "--opts", "SYNTHESIS.K", "0.5"]
        )
        self.assertEqual(args.config_files, ["a.yaml"])
        self.assertEqual(override_opts(args), ["GRID.N_POINTS", 401, "SEED", 3, "SYNTHESIS.K", "0.5"])

    def test_list(self):
        args = default_argument_parser().parse_args(["list"])
        self.assertEqual(args.command, "list")
        self.assertEqual(override_opts(args), [])


class TestRunner(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.out = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def runner(self, *opts):
        return ScenarioRunner(["OUTPUT_DIR", self.out] + list(opts))

    def test_passing_scenario_writes_reports(self):
        outcome = self.runner().run_one(config_path("envelope", "example1_constant.yaml"))
        self.assertEqual(outcome.status, "pass")
        self.assertEqual(outcome.verdict, "BothHold")
        folder = os.path.join(self.out, "example1_constant")
        for name in ("report.json", "config.yaml", "grid.csv", "outer_foc.csv"):
            self.assertTrue(os.path.isfile(os.path.join(folder, name)), name)
        with open(os.path.join(folder, "report.json")) as f:
            report = json.load(f)
        self.assertEqual(
            list(report), ["scenario", "kind", "mode", "n_points", "seed", "expected", "verdict", "passed", "results"]
        )
        self.assertTrue(report["passed"])
        self.assertEqual(exit_code([outcome]), 0)

    def test_reports_are_reproducible(self):
        path = config_path("envelope", "example1_identity_rule.yaml")
        report = os.path.join(self.out, "example1_identity_rule", "report.json")
        self.runner().run_one(path)
        with open(report, "rb") as f:
            first = f.read()
        self.runner().run_one(path)
        with open(report, "rb") as f:
            self.assertEqual(f.read(), first)

    def test_coarse_grids_still_get_a_verdict(self):
        for n in (5, 8):
            outcome = self.runner("GRID.N_POINTS", n).run_one(config_path("envelope", "example1_constant.yaml"))
            self.assertEqual(outcome.status, "pass", outcome.message)
            self.assertEqual(outcome.verdict, "BothHold")

    def test_explicit_menu(self):
        outcome = self.runner("GRID.N_POINTS", 51).run_one(config_path("info_market", "explicit_menu.yaml"))
        self.assertEqual(outcome.status, "pass", outcome.message)
        self.assertEqual(outcome.verdict, "ICSharingProof")

    def test_expected_exception_counts_as_verdict(self):
        outcome = self.runner().run_one(config_path("envelope", "necessity_not_optimal.yaml"))
        self.assertEqual(outcome.verdict, "NotOptimalError")
        self.assertEqual(outcome.status, "pass")

    def test_mismatch(self):
        outcome = self.runner("SCENARIO.EXPECT", "BothFail").run_one(config_path("envelope", "example1_constant.yaml"))
        self.assertEqual(outcome.status, "mismatch")
        self.assertEqual(exit_code([outcome]), 2)

    def test_errors(self):
        outcomes = self.runner("GRID.N_POINTS", 2).run(
            [config_path("envelope", "example1_constant.yaml"), config_path("synthesis", "levels.yaml")]
        )
        self.assertEqual([o.status for o in outcomes], ["error", "error"])
        self.assertEqual(outcomes[0].verdict, "ConfigError")
        self.assertEqual(exit_code(outcomes), 1)
        self.assertEqual(exit_code([]), 1)
        self.assertIn("example1_constant", summary_table(outcomes))

    def test_other_kinds(self):
        files = [
            config_path("synthesis", "quasilinear_identity.yaml"),
            config_path("screening", "implement_levels.yaml"),
            config_path("blackwell", "compare_nested.yaml"),
            config_path("blackwell", "sharing_incomparable.yaml"),
        ]
        outcomes = self.runner("GRID.N_POINTS", 51, "OUTPUT_FORMAT", "json").run(files)
        self.assertEqual([o.status for o in outcomes], ["pass"] * 4, [o.message for o in outcomes])
        self.assertEqual(exit_code(outcomes), 0)


if __name__ == "__main__":
    unittest.main()
