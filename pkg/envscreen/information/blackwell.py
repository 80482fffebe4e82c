"""
Finite-support distributions of posterior beliefs and the Blackwell order.

``y <= y2`` in the Blackwell order iff ``y`` is a mean-preserving contraction
of ``y2``, i.e. iff there is a coupling ``q`` of the two weight vectors whose
conditional means reproduce the support of ``y``:

    sum_j q_ij = w_i,   sum_i q_ij = w2_j,   sum_j q_ij mu2_j = w_i mu_i.

Feasibility of that transportation polytope is decided by a phase-one simplex.
"""
import logging
from collections import OrderedDict, namedtuple
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..grid import Tolerance
from ..utils.errors import ArgumentError, PreconditionError
from .simplex import phase_one

__all__ = [
    "Belief",
    "PosteriorDistribution",
    "GarblingCertificate",
    "certificate_residuals",
    "SharingProofResult",
    "OrderSanityReport",
    "point_mass",
    "full_information",
    "symmetric_experiment",
    "mixture",
    "bayes_plausible",
    "blackwell_leq",
    "convex_oracle_leq",
    "signal_from_posteriors",
    "posteriors_from_signal",
    "sharing_proof",
    "order_sanity_suite",
]

logger = logging.getLogger(__name__)

MERGE_TOL = 1e-10
LP_FEASIBILITY_TOL = 1e-8
_SUM_TOL = 1e-12


class Belief:
    """A probability vector over a finite state set."""

    def __init__(self, probs: Sequence[float]):
        probs = np.array(probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise ArgumentError(f"a belief is a nonempty vector, got shape {probs.shape}")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > _SUM_TOL:
            raise ArgumentError(f"not a probability vector: {probs.tolist()}")
        probs.setflags(write=False)
        self.probs = probs

    @property
    def n_states(self) -> int:
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def __len__(self):
        return self.n_states

    def __eq__(self, other):
        return isinstance(other, Belief) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(self.probs.tobytes())

    def __repr__(self):
        return f"Belief({self.probs.tolist()})"


def _as_probs(mu) -> np.ndarray:
    if isinstance(mu, Belief):
        return mu.probs
    return Belief(mu).probs


class PosteriorDistribution:
    """
    A distribution over finitely many posterior beliefs.

    Beliefs within ``merge_tol`` (sup norm) of an earlier one are merged into
    it and zero-weight points are dropped, so the stored support is pairwise
    distinct. Support order follows first appearance.
    """

    def __init__(self, support: Sequence[Sequence[float]], weights: Sequence[float], merge_tol: float = MERGE_TOL):
        support = np.array([_as_probs(mu) for mu in support], dtype=float)
        weights = np.array(weights, dtype=float)
        if support.ndim != 2 or weights.shape != (support.shape[0],):
            raise ArgumentError(
                f"support and weights disagree: {support.shape} vs {weights.shape}"
            )
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > _SUM_TOL:
            raise ArgumentError(f"weights are not a probability vector: {weights.tolist()}")

        merged, merged_w = [], []
        for mu, w in zip(support, weights):
            if w == 0.0:
                continue
            for k, nu in enumerate(merged):
                if np.max(np.abs(mu - nu)) <= merge_tol:
                    merged_w[k] += w
                    break
            else:
                merged.append(mu)
                merged_w.append(w)
        self.support = np.array(merged)
        self.weights = np.array(merged_w)
        self.support.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n_states(self) -> int:
        return self.support.shape[1]

    @property
    def size(self) -> int:
        return self.support.shape[0]

    @property
    def beliefs(self) -> List[Belief]:
        return [Belief(mu / mu.sum()) for mu in self.support]

    def mean(self) -> np.ndarray:
        return self.weights @ self.support

    def expect(self, fn: Callable[[np.ndarray], float]) -> float:
        return float(sum(w * fn(mu) for mu, w in zip(self.support, self.weights)))

    def same_as(self, other: "PosteriorDistribution", tol: float = MERGE_TOL) -> bool:
        """Equality up to support order, within ``tol`` on beliefs and weights."""
        if self.size != other.size or self.n_states != other.n_states:
            return False
        unused = list(range(other.size))
        for mu, w in zip(self.support, self.weights):
            for k in unused:
                if np.max(np.abs(mu - other.support[k])) <= tol and abs(w - other.weights[k]) <= tol:
                    unused.remove(k)
                    break
            else:
                return False
        return True

    def to_dict(self, mu0: Optional[Sequence[float]] = None) -> "OrderedDict[str, Any]":
        ret = OrderedDict()
        ret["mu0"] = list(map(float, self.mean() if mu0 is None else mu0))
        ret["support"] = self.support.tolist()
        ret["weights"] = self.weights.tolist()
        return ret

    @classmethod
    def from_dict(cls, data) -> "PosteriorDistribution":
        for key in ("support", "weights"):
            if key not in data:
                raise ArgumentError(f"posterior distribution is missing '{key}'")
        y = cls(data["support"], data["weights"])
        if "mu0" in data and not bayes_plausible(y, data["mu0"], Tolerance(abs_tol=1e-9)):
            raise ArgumentError(f"posterior distribution does not average to mu0={list(data['mu0'])}")
        return y

    def __repr__(self):
        return f"PosteriorDistribution(size={self.size}, mean={np.round(self.mean(), 6).tolist()})"


def point_mass(mu0) -> PosteriorDistribution:
    """The uninformative experiment."""
    return PosteriorDistribution([_as_probs(mu0)], [1.0])


def full_information(mu0) -> PosteriorDistribution:
    """The fully revealing experiment: vertex beliefs weighted by the prior."""
    mu0 = _as_probs(mu0)
    return PosteriorDistribution(np.eye(mu0.size), mu0)


def symmetric_experiment(q: float, mu0) -> PosteriorDistribution:
    """Posteriors after a signal that equals the state with probability ``q``."""
    mu0 = _as_probs(mu0)
    d = mu0.size
    if d < 2:
        raise ArgumentError("a symmetric experiment needs at least two states")
    if not (0.0 <= q <= 1.0):
        raise ArgumentError(f"accuracy must lie in [0, 1], got {q}")
    other = (1.0 - q) / (d - 1)
    signal = np.full((d, d), other)
    np.fill_diagonal(signal, q)
    return posteriors_from_signal(signal, mu0)


def mixture(y: PosteriorDistribution, y2: PosteriorDistribution, lam: float = 0.5) -> PosteriorDistribution:
    """``lam * y + (1 - lam) * y2`` as a distribution over posteriors."""
    if not (0.0 <= lam <= 1.0):
        raise ArgumentError(f"mixture weight must lie in [0, 1], got {lam}")
    _check_dims(y, y2.n_states)
    support = np.vstack([y.support, y2.support])
    weights = np.concatenate([lam * y.weights, (1.0 - lam) * y2.weights])
    return PosteriorDistribution(support, weights / weights.sum())


def _check_dims(y: PosteriorDistribution, d: int):
    if y.n_states != d:
        raise ArgumentError(f"state-space size mismatch: {y.n_states} vs {d}")


def bayes_plausible(y: PosteriorDistribution, mu0, tol: Optional[Tolerance] = None) -> bool:
    """Whether the posteriors of ``y`` average to the prior ``mu0``."""
    if tol is None:
        tol = Tolerance(abs_tol=1e-9)
    mu0 = np.asarray(mu0, dtype=float)
    _check_dims(y, mu0.size)
    return bool(np.max(np.abs(y.mean() - mu0)) <= tol.abs_tol)


@dataclass
class GarblingCertificate:
    """
    ``joint[i, j]`` couples support point ``i`` of the less informative
    distribution with point ``j`` of the more informative one. ``residuals``
    are the max absolute violations of the row, column and barycenter
    constraints; ``joint`` is None when infeasible.
    """

    feasible: bool
    joint: Optional[np.ndarray]
    residuals: Tuple[float, float, float]
    infeasibility: float

    def to_dict(self) -> "OrderedDict[str, Any]":
        ret = OrderedDict()
        ret["feasible"] = self.feasible
        ret["joint"] = None if self.joint is None else self.joint.tolist()
        ret["residuals"] = list(self.residuals) if self.feasible else None
        ret["infeasibility"] = self.infeasibility
        return ret


def certificate_residuals(y: PosteriorDistribution, y2: PosteriorDistribution, q: np.ndarray):
    rows = np.max(np.abs(q.sum(axis=1) - y.weights))
    cols = np.max(np.abs(q.sum(axis=0) - y2.weights))
    bary = np.max(np.abs(q @ y2.support - y.weights[:, None] * y.support))
    return float(rows), float(cols), float(bary)


def blackwell_leq(
    y: PosteriorDistribution, y2: PosteriorDistribution, tol: Optional[Tolerance] = None
) -> GarblingCertificate:
    """
    Decide whether ``y`` is Blackwell below ``y2``.

    Raises:
        ArgumentError: the two distributions have different means.
        NumericError: the simplex iteration guard tripped.
    """
    feas_tol = LP_FEASIBILITY_TOL if tol is None else tol.abs_tol
    _check_dims(y, y2.n_states)
    if np.max(np.abs(y.mean() - y2.mean())) > max(feas_tol, 1e-9):
        raise ArgumentError(
            f"distributions have different priors: {y.mean().tolist()} vs {y2.mean().tolist()}"
        )
    k1, k2, d = y.size, y2.size, y.n_states
    # variable q_ij sits at column i * k2 + j
    A, b = [], []
    for i in range(k1):
        row = np.zeros(k1 * k2)
        row[i * k2:(i + 1) * k2] = 1.0
        A.append(row)
        b.append(y.weights[i])
    for j in range(k2):
        row = np.zeros(k1 * k2)
        row[j::k2] = 1.0
        A.append(row)
        b.append(y2.weights[j])
    for i in range(k1):
        for w in range(d):
            row = np.zeros(k1 * k2)
            row[i * k2:(i + 1) * k2] = y2.support[:, w]
            A.append(row)
            b.append(y.weights[i] * y.support[i, w])

    result = phase_one(np.array(A), np.array(b), tol=feas_tol)
    if not result.feasible:
        return GarblingCertificate(
            feasible=False, joint=None, residuals=(np.inf, np.inf, np.inf), infeasibility=result.infeasibility
        )
    q = result.x.reshape(k1, k2)
    residuals = certificate_residuals(y, y2, q)
    feasible = max(residuals) <= feas_tol
    if not feasible:
        logger.warning(f"garbling certificate fails its own check: residuals {residuals}")
    return GarblingCertificate(
        feasible=feasible, joint=q if feasible else None, residuals=residuals, infeasibility=result.infeasibility
    )


def convex_oracle_leq(
    y: PosteriorDistribution, y2: PosteriorDistribution, n_tests: int = 100, seed: int = 0, tol: float = 1e-9
) -> bool:
    """
    One-sided test of ``y <= y2`` with random convex functions, each the max
    of 1 to 5 affine functions with coefficients uniform in [-1, 1]. False is
    conclusive; True is only evidence.
    """
    _check_dims(y, y2.n_states)
    rng = np.random.default_rng(seed)
    d = y.n_states
    for _ in range(n_tests):
        n_affine = int(rng.integers(1, 6))
        slopes = rng.uniform(-1.0, 1.0, size=(n_affine, d))
        offsets = rng.uniform(-1.0, 1.0, size=n_affine)
        low = y.weights @ np.max(y.support @ slopes.T + offsets, axis=1)
        high = y2.weights @ np.max(y2.support @ slopes.T + offsets, axis=1)
        if low > high + tol:
            return False
    return True


def signal_from_posteriors(y: PosteriorDistribution, mu0, tol: Optional[Tolerance] = None) -> np.ndarray:
    """
    The signal ``pi[w, i]``: probability of realizing posterior ``i`` in state
    ``w``, i.e. ``mu_i(w) * w_i / mu0(w)``. Each row sums to one.

    Raises:
        PreconditionError: ``mu0`` has a zero entry, or ``y`` does not average to it.
    """
    mu0 = _as_probs(mu0)
    if np.any(mu0 <= 0):
        raise PreconditionError(f"prior {mu0.tolist()} is not interior to the simplex")
    if not bayes_plausible(y, mu0, tol):
        raise PreconditionError(f"posteriors do not average to the prior {mu0.tolist()}")
    return (y.support * y.weights[:, None]).T / mu0[:, None]


def posteriors_from_signal(signal, mu0) -> PosteriorDistribution:
    """Bayes-update a signal ``signal[w, s] = P(s | w)`` under the prior ``mu0``."""
    mu0 = _as_probs(mu0)
    signal = np.asarray(signal, dtype=float)
    if signal.ndim != 2 or signal.shape[0] != mu0.size:
        raise ArgumentError(f"signal shape {signal.shape} does not match {mu0.size} states")
    if np.any(signal < 0) or np.max(np.abs(signal.sum(axis=1) - 1.0)) > 1e-9:
        raise ArgumentError("signal rows must be probability vectors")
    joint = mu0[:, None] * signal
    weights = joint.sum(axis=0)
    keep = weights > 0
    support = (joint[:, keep] / weights[keep]).T
    return PosteriorDistribution(support, weights[keep] / weights[keep].sum())


SharingProofResult = namedtuple("SharingProofResult", ["holds", "pair"])


def _comparable(a: PosteriorDistribution, b: PosteriorDistribution, tol) -> Tuple[bool, bool]:
    return blackwell_leq(a, b, tol).feasible, blackwell_leq(b, a, tol).feasible


def sharing_proof(
    alloc: Sequence[PosteriorDistribution],
    tol: Optional[Tolerance] = None,
    comparator: Optional[Callable[[int, int], Tuple[bool, bool]]] = None,
) -> SharingProofResult:
    """
    Whether every two entries of ``alloc`` are Blackwell comparable. On
    failure ``pair`` holds the first incomparable ``(i, j)`` in list order.

    When consecutive distinct entries already form a chain, transitivity
    settles the remaining pairs without further LPs. ``comparator(i, j)``
    may supply cached ``(i <= j, j <= i)`` answers.
    """
    first_index = []
    for i, y in enumerate(alloc):
        if not any(alloc[j].same_as(y) for j in first_index):
            first_index.append(i)
    if len(first_index) < 2:
        return SharingProofResult(True, None)

    cache = {}

    def leq(i, j):
        if (i, j) not in cache:
            if comparator is not None:
                cache[(i, j)] = comparator(i, j)
            else:
                cache[(i, j)] = _comparable(alloc[i], alloc[j], tol)
        return cache[(i, j)]

    steps = [leq(i, j) for i, j in zip(first_index, first_index[1:])]
    if all(up for up, _ in steps) or all(down for _, down in steps):
        return SharingProofResult(True, None)

    for a, i in enumerate(first_index):
        for j in first_index[a + 1:]:
            up, down = leq(i, j)
            if not (up or down):
                logger.info(f"entries {i} and {j} are Blackwell incomparable")
                return SharingProofResult(False, (i, j))
    return SharingProofResult(True, None)


@dataclass
class OrderSanityReport:
    reflexive: bool
    transitive: bool
    antisymmetric: bool
    failures: List[Tuple[str, Tuple[int, ...]]]

    @property
    def passed(self) -> bool:
        return self.reflexive and self.transitive and self.antisymmetric

    def to_dict(self) -> "OrderedDict[str, Any]":
        return OrderedDict(
            [
                ("reflexive", self.reflexive),
                ("transitive", self.transitive),
                ("antisymmetric", self.antisymmetric),
                ("failures", [[name, list(idx)] for name, idx in self.failures]),
            ]
        )


def order_sanity_suite(
    samples: Sequence[PosteriorDistribution], tol: Optional[Tolerance] = None, equal_tol: float = 1e-6
) -> OrderSanityReport:
    """
    Check reflexivity, transitivity and antisymmetry (mutually below means
    equal up to ``equal_tol``) of :func:`blackwell_leq` on ``samples``.
    """
    n = len(samples)
    leq = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            leq[i, j] = blackwell_leq(samples[i], samples[j], tol).feasible

    failures = []
    for i in range(n):
        if not leq[i, i]:
            failures.append(("reflexive", (i,)))
    for i in range(n):
        for j in range(n):
            if not leq[i, j]:
                continue
            for k in range(n):
                if leq[j, k] and not leq[i, k]:
                    failures.append(("transitive", (i, j, k)))
    for i in range(n):
        for j in range(i + 1, n):
            if leq[i, j] and leq[j, i] and not samples[i].same_as(samples[j], equal_tol):
                failures.append(("antisymmetric", (i, j)))
    kinds = {name for name, _ in failures}
    return OrderSanityReport(
        reflexive="reflexive" not in kinds,
        transitive="transitive" not in kinds,
        antisymmetric="antisymmetric" not in kinds,
        failures=failures,
    )
