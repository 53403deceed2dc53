"""Parent-set search and structural risk minimization over (in-degree, cutoff) cells."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .bounds import (
    RiskBound,
    closed_form_bounds,
    confidence_term,
    srm_confidence,
    srm_prior,
    true_risk,
    vc_bound_ordered,
    vc_bound_unordered,
)
from .data import Dataset, family_counts, forward_sample
from .errors import GuardExceededError, InfeasibleFloorError
from .model import BayesNet, Dag
from .optimize import CutoffPolicy, family_log_loss, fit_graph

BOUND_KINDS = ("ordered", "unordered", "closed-form")
EXHAUSTIVE_MAX_N = 6
EXHAUSTIVE_MAX_DELTA = 2
# score differences below this are treated as ties so the documented tie-break decides
TIE_TOL = 1e-12


@dataclass(frozen=True)
class SrmConfig:
    delta_max: int = 2
    m_max: int = 8
    eta: float = 0.05
    order: tuple[int, ...] | None = None
    bound_kind: str = "ordered"
    exhaustive: bool = False
    ladder: tuple[float, ...] | None = None
    # weights q(k, m); None means 2**(-k-m) renormalized over the fitted cells
    prior: Callable[[int, int], float] | None = None

    def __post_init__(self):
        if self.delta_max < 0:
            raise ValueError("delta_max must be non-negative")
        if self.ladder is None and self.m_max < 1:
            raise ValueError("m_max must be at least 1")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.bound_kind not in BOUND_KINDS:
            raise ValueError(f"bound_kind must be one of {BOUND_KINDS}")
        if self.exhaustive and self.bound_kind == "ordered":
            raise ValueError("exhaustive search covers every ordering; use the unordered or closed-form bound")
        if self.exhaustive and self.order is not None:
            raise ValueError("exhaustive search does not take an order")
        if self.ladder is not None and not all(0 < lam <= 1 for lam in self.ladder):
            raise ValueError("ladder values must lie in (0, 1]")

    def lambdas(self) -> list[float]:
        if self.ladder is not None:
            return list(self.ladder)
        return [2.0**-m for m in range(1, self.m_max + 1)]


@dataclass(frozen=True)
class NodeChoice:
    node: int
    parents: tuple[int, ...]
    log_loss: float  # -(1/l) sum of log-probabilities of this node's family


@dataclass(frozen=True)
class GridCell:
    k: int
    m: int
    lam: float
    h: int
    q: float
    r_emp: float
    phi: float

    @property
    def bound(self) -> float:
        return self.r_emp + self.phi


@dataclass(frozen=True)
class SearchResult:
    net: BayesNet
    dag: Dag
    r_emp: float
    per_node_scores: tuple[NodeChoice, ...]
    risk_bound: RiskBound | None = None
    grid: tuple[GridCell, ...] = ()


class FamilyScorer:
    """Caches counts and constrained log-losses of (node, parent set) families for one dataset."""

    def __init__(self, data: Dataset):
        self.data = data
        self._counts: dict = {}
        self._loss: dict = {}

    def counts(self, node: int, parents: tuple[int, ...]) -> np.ndarray:
        key = (node, parents)
        if key not in self._counts:
            self._counts[key] = family_counts(self.data.rows, node, parents, self.data.domain.sizes)
        return self._counts[key]

    def loss(self, node: int, parents: tuple[int, ...], epsilon: float) -> float:
        key = (node, parents, epsilon)
        if key not in self._loss:
            self._loss[key] = family_log_loss(self.counts(node, parents), epsilon) / self.data.l
        return self._loss[key]


def _subsets(candidates: Sequence[int], delta: int) -> Iterator[tuple[int, ...]]:
    """Smaller subsets first, lexicographic within a size."""
    candidates = sorted(candidates)
    for size in range(min(delta, len(candidates)) + 1):
        yield from itertools.combinations(candidates, size)


def _finish(data: Dataset, dag: Dag, policy: CutoffPolicy, choices) -> SearchResult:
    net, r_emp = fit_graph(data, dag, policy)
    return SearchResult(net, dag, r_emp, tuple(choices))


def best_parents_per_node(
    data: Dataset,
    order: Sequence[int] | None,
    delta: int,
    policy: CutoffPolicy,
    scorer: FamilyScorer | None = None,
) -> SearchResult:
    """Best order-consistent network with in-degree at most ``delta``.

    The empirical risk is a sum of per-node family losses, so each node's
    parent set is chosen independently among subsets of its predecessors.
    """
    n = data.domain.n
    order = list(range(n)) if order is None else list(order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the node indices")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    policy.check(data.domain.sizes)
    scorer = scorer or FamilyScorer(data)
    parents: list[tuple[int, ...]] = [()] * n
    choices = []
    for pos, j in enumerate(order):
        best, best_loss = None, math.inf
        for s in _subsets(order[:pos], delta):
            loss = scorer.loss(j, s, policy.epsilon)
            if loss < best_loss - TIE_TOL:
                best, best_loss = s, loss
        parents[j] = best
        choices.append(NodeChoice(j, best, best_loss))
    choices.sort(key=lambda c: c.node)
    return _finish(data, Dag(tuple(parents)), policy, choices)


def dag_count_estimate(n: int, delta: int) -> int:
    """Number of parent-set assignments before the acyclicity filter."""
    return sum(math.comb(n - 1, d) for d in range(delta + 1)) ** n


def enumerate_dags(n: int, delta: int) -> Iterator[Dag]:
    """Every DAG on ``n`` nodes with in-degree at most ``delta``, each exactly once.

    Order: parent-set assignments in lexicographic order over nodes, each
    node's candidates ordered by size then lexicographically; cyclic
    assignments are pruned as soon as the cycle closes.
    """
    if n < 1 or delta < 0:
        raise ValueError("need n >= 1 and delta >= 0")
    if n > EXHAUSTIVE_MAX_N or delta > EXHAUSTIVE_MAX_DELTA:
        raise GuardExceededError(
            f"exhaustive enumeration is limited to n <= {EXHAUSTIVE_MAX_N}, delta <= {EXHAUSTIVE_MAX_DELTA}; "
            f"n={n}, delta={delta} would scan about {dag_count_estimate(n, delta)} parent assignments"
        )
    options = [list(_subsets([i for i in range(n) if i != j], delta)) for j in range(n)]
    children: list[set[int]] = [set() for _ in range(n)]
    chosen: list[tuple[int, ...]] = [()] * n

    def reaches(src: int, targets: set[int]) -> bool:
        stack, seen = [src], {src}
        while stack:
            v = stack.pop()
            if v in targets:
                return True
            for c in children[v]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def assign(j: int) -> Iterator[Dag]:
        if j == n:
            yield Dag(tuple(chosen))
            return
        for ps in options[j]:
            # adding p -> j closes a cycle iff j already reaches some p
            if ps and reaches(j, set(ps)):
                continue
            chosen[j] = ps
            for p in ps:
                children[p].add(j)
            yield from assign(j + 1)
            for p in ps:
                children[p].discard(j)
        chosen[j] = ()

    yield from assign(0)


def exhaustive_best(data: Dataset, delta: int, policy: CutoffPolicy, scorer: FamilyScorer | None = None) -> SearchResult:
    """Best network over all DAGs with in-degree at most ``delta`` (guarded to tiny n)."""
    policy.check(data.domain.sizes)
    scorer = scorer or FamilyScorer(data)
    eps = policy.epsilon
    best, best_loss = None, math.inf
    for dag in enumerate_dags(data.domain.n, delta):
        loss = sum(scorer.loss(j, ps, eps) for j, ps in enumerate(dag.parents))
        if loss < best_loss - TIE_TOL:
            best, best_loss = dag, loss
    choices = [NodeChoice(j, ps, scorer.loss(j, ps, eps)) for j, ps in enumerate(best.parents)]
    return _finish(data, best, policy, choices)


def class_vc_bound(data: Dataset, k: int, config: SrmConfig, order: Sequence[int]) -> int:
    domain = data.domain
    if config.bound_kind == "ordered":
        return vc_bound_ordered(domain, k, order).h
    if config.bound_kind == "unordered":
        return vc_bound_unordered(domain, k).h
    return closed_form_bounds(domain.n, max(domain.sizes), k)[2]


def srm_select(data: Dataset, config: SrmConfig = SrmConfig()) -> SearchResult:
    """Pick the (in-degree class k, cutoff index m) cell minimising R_emp + phi.

    Each cell is fitted with the per-transition floor lambda_m**(1/n); the
    returned bound holds with probability at least 1 - eta simultaneously for
    every cell of the grid. Cells whose floor is infeasible for some alphabet
    are skipped with a warning. Ties go to smaller k, then smaller m.
    """
    domain = data.domain
    n = domain.n
    order = list(range(n)) if config.order is None else list(config.order)
    ks = list(range(min(config.delta_max, n - 1) + 1))
    lambdas = config.lambdas()

    policies = {}
    for m, lam in enumerate(lambdas, start=1):
        policy = CutoffPolicy(lam, n)
        if policy.is_feasible(domain.sizes):
            policies[m] = policy
        else:
            warnings.warn(
                f"cutoff index m={m} (lambda={lam:.6g}, floor {policy.epsilon:.6g}) is infeasible "
                f"for alphabet sizes {domain.sizes}; skipped",
                stacklevel=2,
            )
    if not policies:
        raise InfeasibleFloorError("no cutoff in the ladder admits a feasible floor")

    if config.prior is None:
        z = sum(srm_prior(k, m) for k in ks for m in policies)

        def prior(k, m):
            return srm_prior(k, m) / z
    else:
        prior = config.prior
        if sum(prior(k, m) for k in ks for m in policies) > 1.0 + 1e-12:
            raise ValueError("prior weights over the grid sum to more than 1")
    scorer = FamilyScorer(data)
    cells, fits = [], {}
    for k in ks:
        h = class_vc_bound(data, k, config, order)
        for m, policy in policies.items():
            if config.exhaustive:
                fit = exhaustive_best(data, k, policy, scorer)
            else:
                fit = best_parents_per_node(data, order, k, policy, scorer)
            q = prior(k, m)
            if config.ladder is None:
                phi = srm_confidence(m, k, data.l, h, config.eta, q)
            else:
                phi = confidence_term(policy.lam, data.l, h, q * config.eta)
            cells.append(GridCell(k, m, policy.lam, h, q, fit.r_emp, phi))
            fits[(k, m)] = fit

    best = cells[0]
    for cell in cells[1:]:
        if cell.bound < best.bound:
            best = cell
    fit = fits[(best.k, best.m)]
    risk = RiskBound(best.r_emp, best.phi, config.eta, best.lam, best.h, best.k, best.m, best.q)
    return SearchResult(fit.net, fit.dag, fit.r_emp, fit.per_node_scores, risk, tuple(cells))


@dataclass(frozen=True)
class BoundExperimentReport:
    trials: int
    violations: int
    mean_slack: float
    eta: float
    outcomes: tuple = field(default=(), repr=False)  # (k, m, bound, true risk) per trial

    @property
    def violation_rate(self) -> float:
        return self.violations / self.trials

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "violations": self.violations,
            "violation_rate": self.violation_rate,
            "mean_slack": self.mean_slack,
            "eta": self.eta,
            "outcomes": [list(o) for o in self.outcomes],
        }


def validate_bound_experiment(
    truth: BayesNet, config: SrmConfig, l: int, trials: int, seed: int = 0
) -> BoundExperimentReport:
    """Repeat (sample, select, compare true risk with the certified bound) ``trials`` times."""
    if trials < 1:
        raise ValueError("need at least one trial")
    seeds = np.random.SeedSequence(seed).generate_state(trials)
    outcomes = []
    for s in seeds:
        data = forward_sample(truth, l, int(s))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = srm_select(data, config)
        rb = result.risk_bound
        outcomes.append((rb.k, rb.m, rb.bound, true_risk(result.net, truth)))
    violations = sum(1 for *_, bound, risk in outcomes if risk > bound)
    slack = float(np.mean([bound - risk for *_, bound, risk in outcomes]))
    return BoundExperimentReport(trials, violations, slack, config.eta, tuple(outcomes))
