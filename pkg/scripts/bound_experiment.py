"""Empirical check of the certified bound: how often does the true risk exceed it?

    python scripts/bound_experiment.py --n 5 --l 500 --trials 200
"""

import argparse
import json

from vcbn.data import chain_dag, random_network
from vcbn.model import CategoricalDomain
from vcbn.search import SrmConfig, validate_bound_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--l", type=int, default=500)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--delta-max", type=int, default=2)
    ap.add_argument("--m-max", type=int, default=8)
    ap.add_argument("--eta", type=float, default=0.05)
    ap.add_argument("--truth-seed", type=int, default=2024)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--outcomes", action="store_true", help="include per-trial outcomes")
    args = ap.parse_args()

    truth = random_network(CategoricalDomain.binary(args.n), chain_dag(args.n), seed=args.truth_seed)
    config = SrmConfig(delta_max=args.delta_max, m_max=args.m_max, eta=args.eta)
    report = validate_bound_experiment(truth, config, args.l, args.trials, args.seed).to_dict()
    if not args.outcomes:
        report.pop("outcomes")
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
