"""Categorical datasets: CSV ingestion, per-family counts, and forward sampling."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateAlphabetError,
    DimensionMismatchError,
    EmptyDatasetError,
    FormatError,
    InvalidNetworkError,
    SchemaViolationError,
)
from .model import BayesNet, CategoricalDomain, Cpt, Dag, parent_configs, topological_order, validate

DEFAULT_SEED = 0


@dataclass(frozen=True, eq=False)
class Dataset:
    domain: CategoricalDomain
    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.int64).reshape(-1, self.domain.n)
        if rows.shape[0] == 0:
            raise EmptyDatasetError("dataset has no rows")
        if ((rows < 0) | (rows >= np.asarray(self.domain.sizes))).any():
            raise ValueError("row contains a code outside its variable's alphabet")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def l(self) -> int:
        return self.rows.shape[0]

    def __eq__(self, other):
        return isinstance(other, Dataset) and self.domain == other.domain and np.array_equal(self.rows, other.rows)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class CountTable:
    """c(x_j, w): rows are parent configurations, columns child values."""

    node: int
    parents: tuple[int, ...]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def parent_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)


def family_counts(rows: np.ndarray, node: int, parents: Sequence[int], sizes: Sequence[int]) -> np.ndarray:
    configs = math.prod(sizes[p] for p in parents)
    m = sizes[node]
    flat = parent_configs(rows, parents, sizes) * m + rows[:, node]
    return np.bincount(flat, minlength=configs * m).reshape(configs, m)


def empirical_counts(data: Dataset, dag: Dag) -> list[CountTable]:
    if dag.n != data.domain.n:
        raise DimensionMismatchError(f"dag has {dag.n} nodes but the data has {data.domain.n} variables")
    sizes = data.domain.sizes
    return [
        CountTable(j, dag.parents[j], family_counts(data.rows, j, dag.parents[j], sizes))
        for j in range(dag.n)
    ]


def _read_lines(path) -> list[tuple[int, list[str]]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            out.append((lineno, [cell.strip() for cell in line.split(",")]))
    return out


def load_schema(path) -> dict[str, list[str]]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise FormatError("schema must be a JSON object mapping variable name to alphabet")
    return {str(k): [str(v) for v in vals] for k, vals in doc.items()}


def load_csv(path, schema: Mapping[str, Sequence[str]] | None = None) -> tuple[CategoricalDomain, Dataset]:
    """Read a comma-separated file whose first non-comment line names the variables.

    Without ``schema`` each alphabet is the sorted set of tokens seen in its
    column; with one, tokens outside the declared alphabet are rejected.
    """
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path}: no header line")
    _, header = lines[0]
    if any(not h for h in header) or len(set(header)) != len(header):
        raise FormatError(f"{path}: header must list distinct, non-empty variable names")
    body = lines[1:]
    if not body:
        raise EmptyDatasetError(f"{path}: header only, no data rows")
    n = len(header)
    for lineno, cells in body:
        if len(cells) != n:
            raise FormatError(f"{path}:{lineno}: expected {n} cells, found {len(cells)}")
        if any(not c for c in cells):
            raise FormatError(f"{path}:{lineno}: empty cell")

    if schema is None:
        alphabets = []
        for j, name in enumerate(header):
            tokens = sorted({cells[j] for _, cells in body})
            if len(tokens) < 2:
                raise DegenerateAlphabetError(f"column {name!r} has a single value {tokens[0]!r}; supply a schema")
            alphabets.append(tokens)
    else:
        missing = [h for h in header if h not in schema]
        if missing:
            raise FormatError(f"schema does not declare columns {missing}")
        alphabets = [list(schema[h]) for h in header]

    domain = CategoricalDomain(tuple(header), tuple(tuple(a) for a in alphabets))
    lookup = [{tok: code for code, tok in enumerate(a)} for a in domain.alphabets]
    rows = np.empty((len(body), n), dtype=np.int64)
    for i, (lineno, cells) in enumerate(body):
        for j, tok in enumerate(cells):
            code = lookup[j].get(tok)
            if code is None:
                raise SchemaViolationError(lineno, header[j], tok)
            rows[i, j] = code
    return domain, Dataset(domain, rows)


def dataset_to_csv(data: Dataset) -> str:
    buf = io.StringIO()
    buf.write(",".join(data.domain.names) + "\n")
    alphabets = data.domain.alphabets
    for row in data.rows:
        buf.write(",".join(alphabets[j][v] for j, v in enumerate(row)) + "\n")
    return buf.getvalue()


def save_csv(data: Dataset, path) -> None:
    Path(path).write_text(dataset_to_csv(data), encoding="utf-8")


def make_rng(seed: int | None = DEFAULT_SEED) -> np.random.Generator:
    # Philox is counter-based, so streams are reproducible and cheaply splittable
    return np.random.Generator(np.random.Philox(DEFAULT_SEED if seed is None else seed))


def forward_sample(net: BayesNet, l: int, seed: int | None = DEFAULT_SEED) -> Dataset:
    """Draw ``l`` i.i.d. rows by inverse-CDF sampling in topological order.

    One uniform variate is consumed per (row, node), so a given seed always
    yields the same rows.
    """
    if l < 1:
        raise ValueError("sample count must be at least 1")
    violations = validate(net)
    if violations:
        raise InvalidNetworkError(violations)
    u = make_rng(seed).random((l, net.n))
    rows = np.zeros((l, net.n), dtype=np.int64)
    sizes = net.domain.sizes
    for j in topological_order(net.dag):
        cdf = np.cumsum(net.cpts[j].probabilities, axis=1)
        cdf[:, -1] = 1.0
        row_cdf = cdf[parent_configs(rows, net.dag.parents[j], sizes)]
        # zero-mass values have cdf equal to their predecessor's and are never selected
        rows[:, j] = (row_cdf <= u[:, j, None]).sum(axis=1)
    return Dataset(net.domain, rows)


def random_network(
    domain: CategoricalDomain, dag: Dag, seed: int | None = DEFAULT_SEED, low: float = 0.2, high: float = 0.8
) -> BayesNet:
    """Network with random CPT rows; for binary nodes every entry lies in [low, high].

    Larger alphabets draw entries from [low, high] and renormalize.
    """
    rng = make_rng(seed)
    cpts = []
    for j in range(domain.n):
        configs = math.prod(domain.sizes[p] for p in dag.parents[j])
        m = domain.sizes[j]
        if m == 2:
            p1 = rng.uniform(low, high, size=configs)
            probs = np.column_stack([1.0 - p1, p1])
        else:
            raw = rng.uniform(low, high, size=(configs, m))
            probs = raw / raw.sum(axis=1, keepdims=True)
        cpts.append(Cpt.from_probabilities(j, probs))
    return BayesNet(domain, dag, tuple(cpts))


def chain_dag(n: int) -> Dag:
    return Dag(tuple(() if j == 0 else (j - 1,) for j in range(n)))
