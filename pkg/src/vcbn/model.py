"""Categorical domains, DAGs, conditional probability tables and joint evaluation.

Tables are kept in log space (nats). A node's table has one row per parent
configuration and one column per child value, so the flat layout is mixed
radix over (parents ascending, child) with the child varying fastest.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CycleError, DimensionMismatchError, InvalidAssignmentError, StateSpaceTooLargeError

NORMALIZATION_TOL = 1e-9
MAX_ENUMERATED_STATES = 2**22


@dataclass(frozen=True)
class CategoricalDomain:
    names: tuple[str, ...]
    alphabets: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(str(s) for s in self.names))
        object.__setattr__(self, "alphabets", tuple(tuple(str(v) for v in a) for a in self.alphabets))
        if not self.names:
            raise ValueError("a domain needs at least one variable")
        if len(self.names) != len(self.alphabets):
            raise DimensionMismatchError("names and alphabets differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be distinct")
        for name, alphabet in zip(self.names, self.alphabets):
            if len(alphabet) < 2:
                raise ValueError(f"variable {name!r} needs at least two values")
            if len(set(alphabet)) != len(alphabet):
                raise ValueError(f"variable {name!r} has repeated values")

    @classmethod
    def binary(cls, n: int) -> "CategoricalDomain":
        return cls.from_sizes([2] * n)

    @classmethod
    def from_sizes(cls, sizes: Sequence[int], names: Sequence[str] | None = None) -> "CategoricalDomain":
        names = names or [f"X{j + 1}" for j in range(len(sizes))]
        return cls(tuple(names), tuple(tuple(str(v) for v in range(m)) for m in sizes))

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.alphabets)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def state_count(self) -> int:
        return math.prod(self.sizes)


def topological_order(parents) -> list[int]:
    """Kahn's algorithm, taking the smallest available index first.

    Accepts a ``Dag`` or any sequence of parent-index lists. Raises
    ``CycleError`` naming the nodes of one cycle when no order exists.
    """
    parents = parents.parents if isinstance(parents, Dag) else [tuple(p) for p in parents]
    n = len(parents)
    children = [[] for _ in range(n)]
    indegree = [0] * n
    for j, ps in enumerate(parents):
        for p in set(ps):
            children[p].append(j)
            indegree[j] += 1
    ready = [j for j in range(n) if indegree[j] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        j = heapq.heappop(ready)
        order.append(j)
        for c in children[j]:
            indegree[c] -= 1
            if indegree[c] == 0:
                heapq.heappush(ready, c)
    if len(order) < n:
        raise CycleError(_find_cycle(parents, set(range(n)) - set(order)))
    return order


def _find_cycle(parents, remaining: set[int]) -> list[int]:
    # every leftover node has a leftover parent, so walking parents must revisit a node
    node = min(remaining)
    seen: dict[int, int] = {}
    path = []
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = min(p for p in parents[node] if p in remaining)
    return sorted(path[seen[node]:])


@dataclass(frozen=True)
class Dag:
    parents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        canon = tuple(tuple(sorted(set(int(p) for p in ps))) for ps in self.parents)
        n = len(canon)
        for j, ps in enumerate(canon):
            if len(ps) != len(self.parents[j]):
                raise ValueError(f"node {j} lists a parent twice")
            for p in ps:
                if not 0 <= p < n:
                    raise ValueError(f"node {j} has out-of-range parent {p}")
                if p == j:
                    raise CycleError([j])
        object.__setattr__(self, "parents", canon)
        topological_order(canon)

    @classmethod
    def empty(cls, n: int) -> "Dag":
        return cls(tuple(() for _ in range(n)))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Dag":
        parents: list[list[int]] = [[] for _ in range(n)]
        for a, b in edges:
            parents[b].append(a)
        return cls(tuple(tuple(p) for p in parents))

    @property
    def n(self) -> int:
        return len(self.parents)

    def in_degree(self, j: int) -> int:
        return len(self.parents[j])

    @property
    def max_in_degree(self) -> int:
        return max((len(p) for p in self.parents), default=0)

    def edges(self) -> list[tuple[int, int]]:
        return [(p, j) for j, ps in enumerate(self.parents) for p in ps]

    def consistent_with(self, order: Sequence[int]) -> bool:
        rank = {v: i for i, v in enumerate(order)}
        return all(rank[p] < rank[j] for p, j in self.edges())


@dataclass(frozen=True)
class ConfigIndex:
    """Mixed-radix code for value tuples; the last radix varies fastest."""

    radices: tuple[int, ...]

    @property
    def size(self) -> int:
        return math.prod(self.radices)

    def encode(self, values: Sequence[int]) -> int:
        if len(values) != len(self.radices):
            raise DimensionMismatchError("value tuple length does not match radix count")
        code = 0
        for v, r in zip(values, self.radices):
            if not 0 <= v < r:
                raise InvalidAssignmentError(f"value {v} out of range for radix {r}")
            code = code * r + int(v)
        return code

    def decode(self, code: int) -> tuple[int, ...]:
        if not 0 <= code < self.size:
            raise InvalidAssignmentError(f"code {code} out of range")
        out = []
        for r in reversed(self.radices):
            code, v = divmod(code, r)
            out.append(v)
        return tuple(reversed(out))

    def encode_rows(self, columns: np.ndarray) -> np.ndarray:
        """Vectorized encode of an (l, k) integer array."""
        columns = np.asarray(columns, dtype=np.int64)
        if not self.radices:
            return np.zeros(columns.shape[0], dtype=np.int64)
        return np.ravel_multi_index(columns.T, self.radices)


def parent_configs(rows: np.ndarray, parents: Sequence[int], sizes: Sequence[int]) -> np.ndarray:
    """Parent-configuration index of every row."""
    return ConfigIndex(tuple(sizes[p] for p in parents)).encode_rows(rows[:, list(parents)])


@dataclass(frozen=True, eq=False)
class Cpt:
    """Log-probability table f_j(x_j, w) of shape (parent configs, child values)."""

    node: int
    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim != 2:
            raise DimensionMismatchError("a cpt table must be two-dimensional")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @classmethod
    def from_probabilities(cls, node: int, probs) -> "Cpt":
        with np.errstate(divide="ignore"):
            return cls(node, np.log(np.asarray(probs, dtype=float)))

    @property
    def parent_config_count(self) -> int:
        return self.table.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        return np.exp(self.table)

    def __eq__(self, other):
        return isinstance(other, Cpt) and self.node == other.node and np.array_equal(self.table, other.table)

    __hash__ = None


@dataclass(frozen=True)
class BayesNet:
    domain: CategoricalDomain
    dag: Dag
    cpts: tuple[Cpt, ...]

    def __post_init__(self):
        object.__setattr__(self, "cpts", tuple(self.cpts))
        if self.dag.n != self.domain.n or len(self.cpts) != self.domain.n:
            raise DimensionMismatchError("domain, dag and cpt list disagree on the node count")

    @property
    def n(self) -> int:
        return self.domain.n


def _check_rows(net: BayesNet, rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim != 2 or rows.shape[1] != net.n:
        raise InvalidAssignmentError(f"assignments must have {net.n} values")
    sizes = np.asarray(net.domain.sizes)
    bad = (rows < 0) | (rows >= sizes)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise InvalidAssignmentError(f"value {rows[i, j]} out of range for variable {net.domain.names[j]!r}")
    return rows


def log_joint_rows(net: BayesNet, rows) -> np.ndarray:
    """ln P(x) for every row of an (l, n) code array."""
    rows = _check_rows(net, rows)
    sizes = net.domain.sizes
    total = np.zeros(rows.shape[0])
    for j, cpt in enumerate(net.cpts):
        total += cpt.table[parent_configs(rows, net.dag.parents[j], sizes), rows[:, j]]
    return total


def log_joint(net: BayesNet, x: Sequence[int]) -> float:
    return float(log_joint_rows(net, np.asarray([x]))[0])


def all_assignments(domain: CategoricalDomain) -> np.ndarray:
    """Every joint state, in mixed-radix order. Refuses above 2**22 states."""
    count = domain.state_count()
    if count > MAX_ENUMERATED_STATES:
        raise StateSpaceTooLargeError(f"{count} joint states exceeds the enumeration limit {MAX_ENUMERATED_STATES}")
    return np.indices(domain.sizes).reshape(domain.n, -1).T


def validate(net: BayesNet) -> list[str]:
    """Describe every dimension or normalization defect; empty when the net is sound."""
    violations = []
    sizes = net.domain.sizes
    for j, cpt in enumerate(net.cpts):
        if cpt.node != j:
            violations.append(f"node {j}: cpt is labelled for node {cpt.node}")
        configs = math.prod(sizes[p] for p in net.dag.parents[j])
        if cpt.table.shape != (configs, sizes[j]):
            violations.append(
                f"node {j}: table shape {cpt.table.shape} does not match expected {(configs, sizes[j])}"
            )
            continue
        if np.isnan(cpt.table).any() or np.isposinf(cpt.table).any():
            violations.append(f"node {j}: table contains NaN or +inf")
            continue
        sums = np.exp(cpt.table).sum(axis=1)
        for w in np.flatnonzero(np.abs(sums - 1.0) > NORMALIZATION_TOL):
            violations.append(f"node {j}, parent config {int(w)}: row sums to {sums[w]:.12g} (defect {sums[w] - 1:+.3g})")
    return violations


def network_to_dict(net: BayesNet) -> dict:
    return {
        "domain": {"names": list(net.domain.names), "alphabets": [list(a) for a in net.domain.alphabets]},
        "dag": {"parents": [list(p) for p in net.dag.parents]},
        # json writes floats with repr, which round-trips every double exactly
        "cpts": [np.exp(c.table).tolist() for c in net.cpts],
    }


def network_from_dict(doc: dict) -> BayesNet:
    if "network" in doc:
        doc = doc["network"]
    domain = domain_from_dict(doc["domain"])
    dag = Dag(tuple(tuple(p) for p in doc["dag"]["parents"]))
    cpts = tuple(Cpt.from_probabilities(j, rows) for j, rows in enumerate(doc["cpts"]))
    return BayesNet(domain, dag, cpts)


def domain_from_dict(doc: dict) -> CategoricalDomain:
    return CategoricalDomain(tuple(doc["names"]), tuple(tuple(a) for a in doc["alphabets"]))


def save_network(net: BayesNet, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net), indent=2) + "\n")


def load_network(path) -> BayesNet:
    return network_from_dict(json.loads(Path(path).read_text()))
