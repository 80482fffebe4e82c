import logging
import os
from collections import OrderedDict

import fire
import numpy as np

from envscreen.engine import ScenarioRunner, setup
from envscreen.evaluation import write_csv, write_json
from envscreen.scenarios import build_scenario_inputs
from envscreen.utils import PathManager, setup_logger

logger = logging.getLogger("envscreen")


def _envelope_metrics(results):
    env, foc = results["max_abs_residuals"]
    return OrderedDict(envelope=env, outer_foc=foc)


def _synthesis_metrics(results):
    metrics = OrderedDict(envelope=results["max_envelope_residual"])
    if results.get("oracle_gap") is not None:
        metrics["oracle_gap"] = results["oracle_gap"]
    return metrics


def _screening_metrics(results):
    if "ic" in results:
        return OrderedDict(worst_violation=results["ic"]["worst_violation"])
    if "search" in results:
        return OrderedDict(best_violation=results["search"]["best_violation"])
    return OrderedDict()


_METRICS = {
    "envelope": _envelope_metrics,
    "synthesis": _synthesis_metrics,
    "screening": _screening_metrics,
    "info_market": _screening_metrics,
}


def sweep(config_file, grids=(51, 101, 201, 401), out="./output/sweep", opts=()):
    """
    Re-run one scenario on each grid size and write residual-vs-h data as
    ``sweep.csv`` (columns n, h and one per residual) and ``sweep.json``.
    """
    setup_logger(name="envscreen")
    rows, names = [], None
    for n in grids:
        cfg = setup(config_file, ["GRID.N_POINTS", int(n)] + list(opts))
        kind = cfg.SCENARIO.KIND
        if kind not in _METRICS:
            logger.warning(f"{cfg.SCENARIO.NAME}: {kind} scenarios have no grid-dependent residual")
            return
        evaluator = ScenarioRunner.build_evaluator(cfg, output_folder="")
        evaluator.process(build_scenario_inputs(cfg))
        metrics = _METRICS[kind](evaluator.evaluate())
        names = names or list(metrics)
        rows.append([int(n), 1.0 / (int(n) - 1)] + [float(metrics[k]) for k in names])
        logger.info(f"n={n}: " + ", ".join(f"{k}={metrics[k]:.4g}" for k in names))

    PathManager.mkdirs(out)
    columns = ["n", "h"] + names
    write_csv(os.path.join(out, "sweep.csv"), np.array(rows), columns)
    write_json(os.path.join(out, "sweep.json"), OrderedDict(
        scenario=cfg.SCENARIO.NAME, columns=columns, rows=rows
    ))
    print(f"wrote {len(rows)} grid sizes to {out}")


if __name__ == "__main__":
    fire.Fire(sweep)
