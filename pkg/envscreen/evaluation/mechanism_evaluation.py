import numpy as np

from ..grid import GridFn
from ..mechanism import (
    Mechanism,
    converse_check,
    ic_report,
    ic_tolerance,
    implement_increasing,
    quasilinear_payments,
    run_synthesis,
    search_ic_payments,
    single_crossing_differences_check,
    synthesize_payments,
    verify_envelope_consistency,
)
from .evaluator import ScenarioEvaluator

__all__ = ["SynthesisEvaluator", "ScreeningEvaluator"]

# closed-form payments must agree with the synthesized ones within this many grid steps
_ORACLE_STEPS = 5.0


def _numeric(Y):
    try:
        return np.array([float(y) for y in Y.outcomes])
    except (TypeError, ValueError):
        return None


def _schedule_table(Y, P, *extra):
    """Columns t, y (when numeric), P, then ``extra`` (name, values) pairs."""
    columns, data = ["t"], [Y.points]
    y = _numeric(Y)
    if y is not None:
        columns.append("y")
        data.append(y)
    columns.append("payment")
    data.append(P.values)
    for name, values in extra:
        columns.append(name)
        data.append(np.asarray(values, dtype=float))
    return np.column_stack(data), columns


class SynthesisEvaluator(ScenarioEvaluator):
    """
    Synthesize payments for an allocation and re-check the envelope formula
    on the result; optionally compare with the quasilinear closed form.
    Verdict "Consistent" or "Inconsistent".
    """

    def process(self, inputs):
        cfg = self._cfg
        pref, Y, k = inputs["preference"], inputs["allocation"], inputs["k"]
        tol = inputs["tol"] or ic_tolerance(pref, Y, cfg.TOLERANCE.CALIBRATION)

        result = run_synthesis(pref, Y, k, lattice_size=cfg.SYNTHESIS.PROBE_LATTICE)
        residual = verify_envelope_consistency(pref, Y, result.P, k)
        consistent = tol.allows(residual.max_abs())

        oracle_gap = None
        oracle = inputs.get("oracle")
        extra = [("value", result.W.values), ("residual", residual.values)]
        if oracle is not None:
            closed = quasilinear_payments(oracle[0], oracle[1], Y, k)
            oracle_gap = (result.P - closed).max_abs()
            consistent = consistent and oracle_gap <= _ORACLE_STEPS * Y.step
            extra.append(("closed_form", closed.values))

        self._results["verdict"] = "Consistent" if consistent else "Inconsistent"
        self._results["payments"] = result.P.tolist()
        self._results["value_path"] = result.W.tolist()
        self._results["max_envelope_residual"] = residual.max_abs()
        self._results["oracle_gap"] = oracle_gap
        self._results["tolerance"] = tol.bound()
        self._add_table("payments", *_schedule_table(Y, result.P, *extra))


class ScreeningEvaluator(ScenarioEvaluator):
    """
    Modes:
        implement: synthesize payments for a non-decreasing allocation and
            check IC exhaustively ("IC" / "NotIC").
        converse: check that an IC mechanism has a non-decreasing allocation
            ("OK" / "CounterexampleFound").
        search: look for IC payments among perturbations of the synthesized
            ones ("ICPaymentsFound" / "NoICPaymentsFound").
        single_crossing: single-crossing differences of the configured pairs
            ("SingleCrossing" / "NotSingleCrossing").
    """

    def process(self, inputs):
        cfg = self._cfg
        node = cfg.SCREENING
        pref, Y, k, mode = inputs["preference"], inputs["allocation"], inputs["k"], inputs["mode"]
        ic_tol = inputs["tol"] or ic_tolerance(pref, Y, cfg.TOLERANCE.CALIBRATION)

        if mode == "implement":
            P, report = implement_increasing(pref, Y, k, ic_tol=ic_tol)
            self._results["verdict"] = "IC" if report.is_ic else "NotIC"
            self._results["payments"] = P.tolist()
            self._results["ic"] = report.to_dict()
            self._ic_tables(Y, P, report)
        elif mode == "converse":
            if node.PAYMENTS == "zero":
                P = GridFn.constant(0.0, Y.n_points)
            else:
                P = synthesize_payments(pref, Y, k)
            m = Mechanism(pref, Y, P)
            converse = converse_check(m, ic_tol)
            self._results["verdict"] = converse.verdict
            self._results["payments"] = P.tolist()
            self._results["converse"] = converse.to_dict()
            self._ic_tables(Y, P, ic_report(m, ic_tol))
        elif mode == "search":
            search = search_ic_payments(
                pref,
                Y,
                k,
                ic_tol,
                n_perturbations=node.N_PERTURBATIONS,
                seed=cfg.SEED,
                amplitude=node.PERTURBATION_AMPLITUDE,
            )
            self._results["verdict"] = "ICPaymentsFound" if search.found_ic else "NoICPaymentsFound"
            self._results["search"] = search.to_dict()
            self._results["tolerance"] = ic_tol.bound()
            self._add_table("payments", *_schedule_table(Y, search.best_payments))
            self._add_table(
                "search",
                np.column_stack([np.arange(len(search.violations)), search.violations]),
                ["candidate", "worst_violation"],
            )
        else:
            report = single_crossing_differences_check(
                pref, inputs["pairs"], Y.points, strict=node.STRICT, tol=inputs["tol"]
            )
            self._results["verdict"] = "SingleCrossing" if report.holds else "NotSingleCrossing"
            self._results["single_crossing"] = report.to_dict()
            self._add_table("differences", *self._difference_table(pref, inputs["pairs"], Y.points))

    def _ic_tables(self, Y, P, report):
        self._add_table("payments", *_schedule_table(Y, P))
        self._add_table("violations", report.violation_table(), ["r", "t", "gain"])
        self._add_table("mimic_matrix", report.mimic_matrix, [f"t={t:.6g}" for t in Y.points])

    @staticmethod
    def _difference_table(pref, pairs, points):
        columns, data = ["t"], [points]
        for i, (low, high) in enumerate(pairs):
            columns.append(f"pair{i}")
            data.append([pref.evaluate(high[0], high[1], float(t)) - pref.evaluate(low[0], low[1], float(t)) for t in points])
        return np.column_stack(data), columns
