import copy
import json
import logging
import os
from collections import OrderedDict

import numpy as np

from ..utils.file_io import PathManager

__all__ = ["ScenarioEvaluator", "write_json", "write_csv"]


def _to_builtin(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def write_json(path, data):
    """Deterministic JSON: insertion-ordered keys, two-space indent, trailing newline."""
    with PathManager.open(path, "w") as f:
        f.write(json.dumps(data, indent=2, default=_to_builtin))
        f.write("\n")


def write_csv(path, table, columns):
    table = np.asarray(table, dtype=float)
    if table.ndim == 1:
        table = table[:, None]
    with PathManager.open(path, "w") as f:
        np.savetxt(f, table, delimiter=",", header=",".join(columns), comments="", fmt="%.17g")


class ScenarioEvaluator:
    """
    Base class for the per-kind evaluators.

    ``process(inputs)`` runs the checks of one scenario on the objects built
    by :func:`envscreen.scenarios.build_scenario_inputs`; ``evaluate()``
    writes the CSV tables and returns the results, whose "verdict" entry is
    compared with the scenario's expectation.
    """

    def __init__(self, cfg, output_dir=None):
        self._cfg = cfg
        self._output_dir = output_dir
        self._write_csv = cfg.OUTPUT_FORMAT in ("csv", "both")
        self._logger = logging.getLogger(__name__)
        self.reset()

    def reset(self):
        self._results = OrderedDict()
        self._tables = OrderedDict()

    def process(self, inputs):
        raise NotImplementedError

    def _add_table(self, name, table, columns):
        self._tables[name] = (table, columns)

    def evaluate(self):
        if not self._results:
            self._logger.warning(f"{type(self).__name__} did not receive valid inputs.")
            return OrderedDict()
        if self._output_dir and self._write_csv:
            PathManager.mkdirs(self._output_dir)
            for name, (table, columns) in self._tables.items():
                write_csv(os.path.join(self._output_dir, f"{name}.csv"), table, columns)
        return copy.deepcopy(self._results)
