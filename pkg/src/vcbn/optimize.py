"""Lower-bounded categorical maximum likelihood, per context and per graph.

The likelihood of a network separates over (node, parent configuration), so
the constrained fit of a whole graph is a collection of independent problems

    maximize   sum_i c_i ln p_i
    subject to sum_i p_i = 1,  p_i >= eps

each solved in closed form by water-filling: p_i = max(eps, c_i / nu).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import CountTable, Dataset, empirical_counts
from .errors import InfeasibleFloorError
from .model import BayesNet, Cpt, Dag

FEASIBILITY_SLACK = 1e-12


@dataclass(frozen=True)
class CutoffPolicy:
    """Joint-probability floor ``lam`` enforced through the per-transition floor lam**(1/n).

    ``lam == 0`` disables the floor. ``epsilon`` may be given directly, in
    which case it overrides the derived value.
    """

    lam: float
    n: int
    epsilon: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"cutoff lambda must lie in [0, 1], got {self.lam}")
        if self.n < 1:
            raise ValueError("variable count must be positive")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", self.lam ** (1.0 / self.n))
        elif not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"floor must lie in [0, 1], got {self.epsilon}")

    @classmethod
    def from_epsilon(cls, epsilon: float, n: int) -> "CutoffPolicy":
        return cls(epsilon**n, n, epsilon)

    @classmethod
    def unconstrained(cls, n: int) -> "CutoffPolicy":
        return cls(0.0, n, 0.0)

    def is_feasible(self, sizes: Sequence[int]) -> bool:
        return all(self.epsilon * m <= 1.0 + FEASIBILITY_SLACK for m in sizes)

    def check(self, sizes: Sequence[int]) -> None:
        for j, m in enumerate(sizes):
            if self.epsilon * m > 1.0 + FEASIBILITY_SLACK:
                raise InfeasibleFloorError(
                    f"floor {self.epsilon:.6g} times alphabet size {m} of node {j} exceeds 1"
                )


def solve_context(counts, epsilon: float = 0.0) -> np.ndarray:
    """Maximize sum c_i ln p_i over the simplex with p_i >= epsilon.

    Exact: the counts are sorted and every breakpoint (number of coordinates
    left above the floor) is tried until the KKT conditions hold. All-zero
    counts give the uniform vector.
    """
    c = np.asarray(counts, dtype=float)
    m = c.size
    if c.ndim != 1 or m < 2:
        raise ValueError("need a one-dimensional count vector with at least two entries")
    if (c < 0).any():
        raise ValueError("counts must be non-negative")
    if epsilon < 0:
        raise ValueError("floor must be non-negative")
    if epsilon * m > 1.0 + FEASIBILITY_SLACK:
        raise InfeasibleFloorError(f"floor {epsilon} times {m} values exceeds 1")

    total = c.sum()
    if total == 0:
        return np.full(m, 1.0 / m)
    if epsilon * m >= 1.0 - FEASIBILITY_SLACK:
        return np.full(m, epsilon)

    desc = np.sort(c)[::-1]
    head = np.cumsum(desc)
    for t in range(1, m + 1):
        # top t coordinates free, the remaining m - t clamped at the floor
        nu = head[t - 1] / (1.0 - (m - t) * epsilon)
        if desc[t - 1] < epsilon * nu:
            continue
        if t < m and desc[t] > epsilon * nu:
            continue
        p = c / nu
        p[p < epsilon] = epsilon
        return p
    raise AssertionError("no KKT breakpoint found")  # unreachable for valid input


def context_loglik(counts, p) -> float:
    """sum c_i ln p_i with the convention 0 * ln 0 = 0."""
    c = np.asarray(counts, dtype=float)
    p = np.asarray(p, dtype=float)
    mask = c > 0
    with np.errstate(divide="ignore"):
        return float(np.sum(c[mask] * np.log(p[mask])))


def brute_force_context(counts, epsilon: float = 0.0, resolution: float = 1e-4) -> np.ndarray:
    """Grid-search oracle for ``solve_context``; test use only.

    A coarse grid over the floored simplex is refined around its best point
    until the spacing reaches ``resolution``. The objective is concave, so the
    refinement cannot leave the basin of the optimum.
    """
    c = np.asarray(counts, dtype=float)
    m = c.size
    if m > 4:
        raise ValueError("brute force is limited to four categories")
    if resolution > 1e-3:
        raise ValueError("resolution must be at most 1e-3")
    if epsilon * m > 1.0 + FEASIBILITY_SLACK:
        raise InfeasibleFloorError(f"floor {epsilon} times {m} values exceeds 1")
    if c.sum() == 0:
        return np.full(m, 1.0 / m)

    # the largest count is never at the floor at the optimum, so it absorbs the slack
    last = int(np.argmax(c))
    free = [i for i in range(m) if i != last]
    hi = 1.0 - (m - 1) * epsilon

    def best_on(axes):
        grid = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, m - 1)
        rest = 1.0 - grid.sum(axis=1)
        ok = rest >= epsilon - 1e-15
        grid, rest = grid[ok], np.maximum(rest[ok], epsilon)
        p = np.zeros((grid.shape[0], m))
        p[:, free] = grid
        p[:, last] = rest
        with np.errstate(divide="ignore", invalid="ignore"):
            score = np.where(c > 0, c * np.log(p), 0.0).sum(axis=1)
        return p[int(np.argmax(score))]

    step = 0.02
    axes = [np.append(np.arange(epsilon, hi, step), hi) for _ in free]
    best = best_on(axes)
    while step > resolution:
        span = 2 * step
        step = max(step / 10, resolution)
        axes = []
        for i in free:
            pts = best[i] + step * np.arange(-round(span / step), round(span / step) + 1)
            pts = pts[(pts >= epsilon) & (pts <= hi)]
            axes.append(np.unique(np.append(pts, epsilon) if best[i] - span <= epsilon else pts))
        best = best_on(axes)
    return best


def fit_cpt(counts: CountTable, policy: CutoffPolicy) -> Cpt:
    """Constrained MLE of one node's table, solved context by context."""
    m = counts.counts.shape[1]
    policy.check([m])
    probs = np.vstack([solve_context(row, policy.epsilon) for row in counts.counts])
    return Cpt.from_probabilities(counts.node, probs)


def family_log_loss(counts: np.ndarray, epsilon: float) -> float:
    """Summed negative log-likelihood of one (node, parent set) family at its constrained optimum."""
    return -sum(context_loglik(row, solve_context(row, epsilon)) for row in counts)


def fit_graph(data: Dataset, dag: Dag, policy: CutoffPolicy) -> tuple[BayesNet, float]:
    """Best network in the floored family of ``dag`` and its empirical risk (nats)."""
    policy.check(data.domain.sizes)
    tables = empirical_counts(data, dag)
    cpts = tuple(fit_cpt(t, policy) for t in tables)
    net = BayesNet(data.domain, dag, cpts)
    with np.errstate(invalid="ignore"):
        r_emp = sum(-np.sum(np.where(t.counts > 0, t.counts * c.table, 0.0)) for t, c in zip(tables, cpts)) / data.l
    return net, float(r_emp)
