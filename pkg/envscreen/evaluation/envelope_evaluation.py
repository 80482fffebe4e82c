import numpy as np

from ..envelope import calibrated_tolerance, check_classical_theorem, check_main_theorem, check_necessity
from .evaluator import ScenarioEvaluator

__all__ = ["EnvelopeEvaluator"]


class EnvelopeEvaluator(ScenarioEvaluator):
    """
    Envelope formula against the outer first-order condition ("main"), with
    a maximizer spot check ("necessity"), or against the classical condition
    for Lipschitz rules ("classical").
    """

    def process(self, inputs):
        cfg = self._cfg
        p, X, mode = inputs["problem"], inputs["rule"], inputs["mode"]
        tol = inputs["tol"] or calibrated_tolerance(p, X, cfg.TOLERANCE.CALIBRATION)

        if mode == "classical":
            report = check_classical_theorem(p, X, tol)
            self._results.update(report.to_dict())
            self._results["tolerance"] = tol.bound()
            self._add_table(
                "grid",
                np.column_stack(
                    [X.points, report.envelope_residual.values, report.classical_foc_residual.values]
                ),
                ["t", "envelope_residual", "classical_foc_residual"],
            )
            return

        if mode == "necessity":
            report = check_necessity(
                p,
                inputs["maximizer"],
                tol,
                n_points=cfg.GRID.N_POINTS,
                candidates=inputs["candidates"],
                mesh=inputs["mesh"],
            )
        else:
            report = check_main_theorem(p, X, tol, mesh=inputs["mesh"], richardson=cfg.ENVELOPE.RICHARDSON)
        self._results.update(report.to_dict())
        if report.bounded_variation_flag:
            self._logger.warning(
                f"{p.name}/{X.name}: value function variation grows by {report.variation_growth:.3g} "
                "on grid refinement; it may not be absolutely continuous"
            )
        self._add_table("grid", report.grid_table(), ["t", "value", "residual"])
        self._add_table("outer_foc", report.pair_table(), ["r", "t", "symmetric", "forward", "backward"])
