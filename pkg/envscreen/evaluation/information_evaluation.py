import numpy as np

from ..grid import Tolerance
from ..information import (
    bayes_plausible,
    blackwell_leq,
    convex_oracle_leq,
    expected_value,
    order_sanity_suite,
    price_information_menu,
    refute_decreasing_allocation,
    sharing_proof,
)
from ..utils.errors import ArgumentError
from .evaluator import ScenarioEvaluator

__all__ = ["BlackwellEvaluator", "InfoMarketEvaluator"]


class BlackwellEvaluator(ScenarioEvaluator):
    """
    Modes:
        compare: garbling LP for LEFT <= RIGHT, cross-checked by random
            convex test functions ("Leq" / "NotLeq").
        sharing: pairwise comparability of all distributions
            ("SharingProof" / "NotSharingProof").
        sanity: order axioms on all distributions ("Pass" / "Fail").
    """

    def process(self, inputs):
        cfg = self._cfg
        node = cfg.BLACKWELL
        ys, mu0, mode = inputs["distributions"], inputs["mu0"], inputs["mode"]
        tol = inputs["tol"] or Tolerance(abs_tol=cfg.TOLERANCE.LP_FEASIBILITY)
        for i, y in enumerate(ys):
            if not bayes_plausible(y, mu0, tol):
                raise ArgumentError(f"distribution {i} averages to {y.mean().tolist()}, not the prior {mu0}")
        self._results["distributions"] = [y.to_dict() for y in ys]

        if mode == "compare":
            left, right = ys[node.LEFT], ys[node.RIGHT]
            cert = blackwell_leq(left, right, tol)
            oracle = convex_oracle_leq(left, right, n_tests=node.N_ORACLE_TESTS, seed=cfg.SEED)
            if cert.feasible and not oracle:
                self._logger.warning("garbling LP is feasible but a convex test function separates the pair")
            self._results["verdict"] = "Leq" if cert.feasible else "NotLeq"
            self._results["certificate"] = cert.to_dict()
            self._results["convex_oracle"] = oracle
            if cert.joint is not None:
                self._add_table("joint", cert.joint, [f"j={j}" for j in range(right.size)])
        elif mode == "sharing":
            result = sharing_proof(ys, tol)
            self._results["verdict"] = "SharingProof" if result.holds else "NotSharingProof"
            self._results["incomparable_pair"] = list(result.pair) if result.pair else None
        else:
            report = order_sanity_suite(ys, tol)
            self._results["verdict"] = "Pass" if report.passed else "Fail"
            self._results["sanity"] = report.to_dict()
            n = len(ys)
            leq = np.array([[blackwell_leq(ys[i], ys[j], tol).feasible for j in range(n)] for i in range(n)])
            self._add_table("order", leq.astype(float), [f"j={j}" for j in range(n)])


class InfoMarketEvaluator(ScenarioEvaluator):
    """
    Modes:
        price: price a Blackwell-increasing menu ("ICSharingProof", or
            "NotIC" / "NotSharingProof").
        refute: search for IC payments for a decreasing menu
            ("NoICPaymentsFound" / "ICPaymentsFound").
    """

    def process(self, inputs):
        cfg = self._cfg
        ip, alloc, k, mode = inputs["info_preference"], inputs["allocation"], inputs["k"], inputs["mode"]
        points = np.linspace(0.0, 1.0, len(alloc))
        self._results["expected_value_at_top"] = expected_value(ip.voi, alloc[-1], 1.0)

        if mode == "price":
            pricing = price_information_menu(ip, alloc, k, ic_tol=inputs["tol"])
            if not pricing.ic.is_ic:
                verdict = "NotIC"
            elif not pricing.sharing.holds:
                verdict = "NotSharingProof"
            else:
                verdict = "ICSharingProof"
            self._results["verdict"] = verdict
            self._results.update(pricing.to_dict())
            values = [expected_value(ip.voi, y, float(t)) for y, t in zip(alloc, points)]
            self._add_table(
                "menu",
                np.column_stack([points, pricing.payments.values, values]),
                ["t", "payment", "value_of_information"],
            )
        else:
            report = refute_decreasing_allocation(
                ip, alloc, k, inputs["tol"], n_perturbations=cfg.INFO_MARKET.N_PERTURBATIONS, seed=cfg.SEED
            )
            self._results.update(report.to_dict())
            self._add_table(
                "payments",
                np.column_stack([points, report.search.best_payments.values]),
                ["t", "payment"],
            )
