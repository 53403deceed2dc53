"""Risk functionals, VC-dimension upper bounds and confidence terms.

Risk here is the negative mean log-likelihood (nats): non-negative, smaller
is better. For hypotheses whose joint probabilities are all at least ``lam``
the per-sample loss lies in [0, -ln lam], which is the range the confidence
terms are scaled by.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import Dataset
from .errors import DimensionMismatchError, SupportViolationError
from .model import BayesNet, CategoricalDomain, Dag, all_assignments, log_joint_rows

GIVEN_GRAPH = "given-graph"
ORDERED = "ordered-family"
UNORDERED = "unordered-family"
CLOSED_FORM = "closed-form"


@dataclass(frozen=True)
class VcBoundReport:
    h: int
    kind: str
    parameters: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RiskBound:
    r_emp: float
    phi: float
    eta: float
    lam: float
    h: int
    k: int | None = None
    m: int | None = None
    q: float | None = None

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.phi < 0:
            raise ValueError("confidence term must be non-negative")

    @property
    def bound(self) -> float:
        return self.r_emp + self.phi

    def to_dict(self) -> dict:
        return {
            "r_emp": self.r_emp,
            "phi": self.phi,
            "bound": self.bound,
            "eta": self.eta,
            "lambda": self.lam,
            "h": self.h,
            "k": self.k,
            "m": self.m,
            "q": self.q,
        }


def empirical_risk(net: BayesNet, data: Dataset) -> float:
    """-(1/l) sum_i ln P(x^i). Raises SupportViolationError on a zero-probability row."""
    if net.domain.sizes != data.domain.sizes:
        raise DimensionMismatchError("network and data domains differ")
    lj = log_joint_rows(net, data.rows)
    bad = np.flatnonzero(np.isneginf(lj))
    if bad.size:
        raise SupportViolationError(int(bad[0]))
    return float(-lj.mean())


def _joint_tables(truth: BayesNet, net: BayesNet | None = None):
    if net is not None and net.domain.sizes != truth.domain.sizes:
        raise DimensionMismatchError("network domains differ")
    states = all_assignments(truth.domain)
    log_p = log_joint_rows(truth, states)
    log_q = None if net is None else log_joint_rows(net, states)
    return np.exp(log_p), log_p, log_q


def true_risk(net: BayesNet, truth: BayesNet) -> float:
    """-sum_x P_truth(x) ln P_net(x), by exact enumeration; inf if net misses truth's support."""
    p, _, log_q = _joint_tables(truth, net)
    support = p > 0
    if np.isneginf(log_q[support]).any():
        return math.inf
    return float(-np.sum(p[support] * log_q[support]))


def entropy(net: BayesNet) -> float:
    p, log_p, _ = _joint_tables(net)
    support = p > 0
    return float(-np.sum(p[support] * log_p[support]))


def kl_divergence(truth: BayesNet, net: BayesNet) -> float:
    p, log_p, log_q = _joint_tables(truth, net)
    support = p > 0
    if np.isneginf(log_q[support]).any():
        return math.inf
    return float(np.sum(p[support] * (log_p[support] - log_q[support])))


def vc_bound_graph(domain: CategoricalDomain, dag: Dag) -> VcBoundReport:
    """sum_j prod_{i in parents(j) + {j}} m_i."""
    if dag.n != domain.n:
        raise DimensionMismatchError("dag and domain differ in node count")
    m = domain.sizes
    h = sum(m[j] * math.prod(m[i] for i in ps) for j, ps in enumerate(dag.parents))
    return VcBoundReport(h, GIVEN_GRAPH, {"n": domain.n, "parents": [list(p) for p in dag.parents], "sizes": list(m)})


def vc_bound_ordered(
    domain: CategoricalDomain, delta: int, order: Sequence[int] | None = None, literal: bool = False
) -> VcBoundReport:
    """Bound for all order-consistent graphs of in-degree at most ``delta``.

    For the node at position j the inner sum runs over subsets of its
    predecessors of size min(delta, j - 1), so nodes with fewer than
    ``delta`` predecessors still contribute their full table. ``literal``
    counts only subsets of size exactly ``delta``.
    """
    n = domain.n
    if not 0 <= delta < n:
        raise ValueError(f"in-degree must satisfy 0 <= delta < n, got {delta}")
    order = list(range(n)) if order is None else list(order)
    if sorted(order) != list(range(n)):
        raise ValueError("order must be a permutation of the node indices")
    m = domain.sizes
    h = 0
    for pos, j in enumerate(order):
        size = delta if literal else min(delta, pos)
        h += m[j] * sum(math.prod(m[i] for i in s) for s in itertools.combinations(order[:pos], size))
    return VcBoundReport(
        h, ORDERED, {"n": n, "delta": delta, "order": order, "sizes": list(m), "literal": literal}
    )


def vc_bound_unordered(domain: CategoricalDomain, delta: int) -> VcBoundReport:
    """sum over (delta+1)-subsets J of {1..n} of prod_{i in J} m_i."""
    n = domain.n
    if not 0 <= delta < n:
        raise ValueError(f"in-degree must satisfy 0 <= delta < n, got {delta}")
    m = domain.sizes
    h = sum(math.prod(m[i] for i in s) for s in itertools.combinations(range(n), delta + 1))
    return VcBoundReport(h, UNORDERED, {"n": n, "delta": delta, "sizes": list(m)})


def closed_form_bounds(n: int, l_max: int, delta: int) -> tuple[int, int, int]:
    """(given graph, ordered family, unordered family) with every alphabet of size l_max."""
    if not 0 <= delta < n:
        raise ValueError(f"in-degree must satisfy 0 <= delta < n, got {delta}")
    per_table = l_max ** (delta + 1)
    return (
        n * per_table,
        per_table * sum(math.comb(j - 1, delta) for j in range(1, n + 1)),
        math.comb(n, delta + 1) * per_table,
    )


def _capacity(l: int, h: int, eta: float) -> float:
    if l < 1 or h < 1:
        raise ValueError("sample size and VC bound must be at least 1")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    # h(ln(2l/h) + 1) peaks at h = 2l and upper-bounds ln of the growth function only up to there
    h = min(h, 2 * l)
    return (h * (math.log(2 * l / h) + 1) - math.log(eta / 4) + 1) / l


def confidence_term_ab(a: float, b: float, l: int, h: int, eta: float) -> float:
    """(B - A) sqrt([h(ln(2l/h) + 1) - ln(eta/4) + 1] / l) for losses in [A, B]."""
    if b < a:
        raise ValueError("upper loss bound below lower bound")
    return (b - a) * math.sqrt(_capacity(l, h, eta))


def confidence_term(lam: float, l: int, h: int, eta: float) -> float:
    if not 0 < lam <= 1:
        raise ValueError("cutoff lambda must lie in (0, 1]")
    return confidence_term_ab(0.0, -math.log(lam), l, h, eta)


def srm_prior(k: int, m: int) -> float:
    return 2.0 ** (-k - m)


def srm_confidence(m: int, k: int, l: int, h_k: int, eta: float, q: float | None = None) -> float:
    """Confidence term of grid cell (k, m): cutoff 2**-m, confidence q * eta."""
    if k < 0 or m < 1:
        raise ValueError("need k >= 0 and m >= 1")
    q = srm_prior(k, m) if q is None else q
    if not 0 < q <= 1:
        raise ValueError("prior weight must lie in (0, 1]")
    return confidence_term(2.0**-m, l, h_k, q * eta)


def srm_confidence_expanded(m: int, k: int, l: int, h_k: int, eta: float) -> float:
    """The same quantity for q = 2**(-k-m), written out with the prior moved into the radicand."""
    ln2 = math.log(2)
    h = min(h_k, 2 * l)
    radicand = h * (math.log(2 * l / h) + 1) - math.log(eta / 4) + (k + m) * ln2 + 1
    return m * ln2 * math.sqrt(radicand / l)
