"""Command-line entry point: ``vcbn {learn,bound,sample,eval}``.

Exit codes: 0 success, 2 usage or ingestion error, 3 zero-probability row
during evaluation, 4 infeasible cutoff.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import bounds
from .data import DEFAULT_SEED, Dataset, dataset_to_csv, forward_sample, load_csv, load_schema
from .errors import InfeasibleFloorError, SupportViolationError, VcbnError
from .model import CategoricalDomain, Dag, domain_from_dict, load_network, network_to_dict
from .search import SrmConfig, srm_select

log = logging.getLogger("vcbn")

EXIT_OK, EXIT_USAGE, EXIT_SUPPORT, EXIT_INFEASIBLE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _write_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _parse_order(spec: str | None, domain: CategoricalDomain) -> tuple[int, ...] | None:
    if not spec:
        return None
    names = [s.strip() for s in spec.split(",")]
    try:
        order = tuple(domain.index(s) for s in names)
    except KeyError as exc:
        raise UsageError(str(exc)) from None
    if sorted(order) != list(range(domain.n)):
        raise UsageError("--order must name every variable exactly once")
    return order


def cmd_learn(args) -> int:
    schema = load_schema(args.schema) if args.schema else None
    domain, data = load_csv(args.csv, schema)
    bound_kind = args.bound_kind or ("unordered" if args.exhaustive else "ordered")
    try:
        config = SrmConfig(
            delta_max=args.delta_max,
            m_max=args.m_max,
            eta=args.eta,
            order=_parse_order(args.order, domain),
            bound_kind=bound_kind,
            exhaustive=args.exhaustive,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = srm_select(data, config)
    for w in caught:
        log.warning("%s", w.message)
    rb = result.risk_bound
    doc = {
        "network": network_to_dict(result.net),
        "risk_bound": rb.to_dict(),
        "per_node": [
            {"node": c.node, "parents": list(c.parents), "log_loss": c.log_loss} for c in result.per_node_scores
        ],
        "grid": [dict(asdict(c), bound=c.bound) for c in result.grid],
        "config": {
            "delta_max": config.delta_max,
            "m_max": config.m_max,
            "eta": config.eta,
            "order": None if config.order is None else list(config.order),
            "bound_kind": config.bound_kind,
            "exhaustive": config.exhaustive,
        },
        "l": data.l,
    }
    if args.out:
        _write_json(doc, args.out)
    edges = ", ".join(f"{domain.names[a]}->{domain.names[b]}" for a, b in result.dag.edges()) or "none"
    print(
        f"k={rb.k} m={rb.m} R_emp={rb.r_emp:.6f} phi={rb.phi:.6f} bound={rb.bound:.6f} "
        f"(eta={rb.eta}, h={rb.h}) edges: {edges}"
    )
    return EXIT_OK


def _bound_domain(args) -> tuple[CategoricalDomain, Dag | None, int]:
    if (args.dag is None) == (args.n is None):
        raise UsageError("supply exactly one of --dag or --n")
    if args.dag is not None:
        if args.binary or args.sizes:
            raise UsageError("--binary/--sizes apply only with --n")
        doc = json.loads(Path(args.dag).read_text())
        doc = doc.get("network", doc)
        domain = domain_from_dict(doc["domain"])
        dag = Dag(tuple(tuple(p) for p in doc["dag"]["parents"]))
        delta = dag.max_in_degree if args.delta is None else args.delta
        return domain, dag, delta
    if args.delta is None:
        raise UsageError("--n requires --delta")
    if args.binary and args.sizes:
        raise UsageError("--binary and --sizes are mutually exclusive")
    if args.sizes:
        sizes = [int(s) for s in args.sizes.split(",")]
        if len(sizes) != args.n:
            raise UsageError("--sizes must list --n alphabet sizes")
    else:
        sizes = [2] * args.n
    return CategoricalDomain.from_sizes(sizes), None, args.delta


def cmd_bound(args) -> int:
    domain, dag, delta = _bound_domain(args)
    if not 0 <= delta < domain.n:
        raise UsageError(f"--delta must satisfy 0 <= delta < n={domain.n}")

    def entry(report: bounds.VcBoundReport) -> dict:
        phi = bounds.confidence_term(args.lam, args.l, report.h, args.eta)
        return {"h": report.h, "kind": report.kind, "parameters": report.parameters, "phi": phi}

    exact = {}
    if dag is not None:
        exact["given_graph"] = entry(bounds.vc_bound_graph(domain, dag))
    exact["ordered"] = entry(bounds.vc_bound_ordered(domain, delta))
    exact["ordered_literal"] = entry(bounds.vc_bound_ordered(domain, delta, literal=True))
    exact["unordered"] = entry(bounds.vc_bound_unordered(domain, delta))
    closed = bounds.closed_form_bounds(domain.n, max(domain.sizes), delta)
    closed_doc = {
        name: {"h": h, "phi": bounds.confidence_term(args.lam, args.l, h, args.eta)}
        for name, h in zip(("given_graph", "ordered", "unordered"), closed)
    }
    doc = {
        "n": domain.n,
        "sizes": list(domain.sizes),
        "delta": delta,
        "lambda": args.lam,
        "l": args.l,
        "eta": args.eta,
        "exact": exact,
        "closed_form": closed_doc,
    }
    if args.out:
        _write_json(doc, args.out)
    for name, e in exact.items():
        print(f"h_{name}={e['h']} phi={e['phi']:.6f}")
    for name, e in closed_doc.items():
        print(f"closed_form_{name}={e['h']} phi={e['phi']:.6f}")
    return EXIT_OK


def cmd_sample(args) -> int:
    net = load_network(args.net)
    data = forward_sample(net, args.l, args.seed)
    text = dataset_to_csv(data)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {data.l} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _load_for_net(path, domain: CategoricalDomain) -> Dataset:
    _, data = load_csv(path, dict(zip(domain.names, domain.alphabets)))
    loaded_names = data.domain.names
    if set(loaded_names) != set(domain.names):
        raise UsageError("CSV columns do not match the network's variables")
    perm = [loaded_names.index(name) for name in domain.names]
    return Dataset(domain, np.asarray(data.rows)[:, perm])


def cmd_eval(args) -> int:
    if not args.csv and not args.truth:
        raise UsageError("eval needs --csv and/or --truth")
    net = load_network(args.net)
    doc: dict = {}
    if args.csv:
        data = _load_for_net(args.csv, net.domain)
        doc["empirical_risk"] = bounds.empirical_risk(net, data)
        doc["l"] = data.l
    if args.truth:
        truth = load_network(args.truth)
        doc["true_risk"] = bounds.true_risk(net, truth)
        doc["entropy"] = bounds.entropy(truth)
        doc["kl_divergence"] = bounds.kl_divergence(truth, net)
    if args.out:
        _write_json(doc, args.out)
    print(" ".join(f"{k}={v:.12g}" if isinstance(v, float) else f"{k}={v}" for k, v in doc.items()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vcbn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="select a network by structural risk minimization")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema")
    p.add_argument("--order", help="comma-separated variable names")
    p.add_argument("--delta-max", type=int, default=2)
    p.add_argument("--m-max", type=int, default=8)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--exhaustive", action="store_true", help="search all DAGs (n <= 6, delta <= 2)")
    p.add_argument("--bound-kind", choices=["ordered", "unordered", "closed-form"])
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("bound", help="VC-dimension bounds and confidence terms")
    p.add_argument("--n", type=int)
    p.add_argument("--binary", action="store_true")
    p.add_argument("--sizes", help="comma-separated alphabet sizes")
    p.add_argument("--dag", help="JSON document with domain and dag (a network file works)")
    p.add_argument("--delta", type=int)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sample", help="forward-sample a network to CSV")
    p.add_argument("--net", required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="empirical risk against a CSV and/or exact risk against a truth network")
    p.add_argument("--net", required=True)
    p.add_argument("--csv")
    p.add_argument("--truth")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SupportViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SUPPORT
    except InfeasibleFloorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, VcbnError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
