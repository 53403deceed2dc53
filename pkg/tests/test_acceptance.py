"""Exit criteria. Each test records one PASS/FAIL line, summarised at the end of the run."""

import warnings

import numpy as np
import pytest

from conftest import conditional_entropy_sum, random_dag, record
from vcbn.bounds import confidence_term, kl_divergence, vc_bound_graph, vc_bound_ordered, vc_bound_unordered
from vcbn.data import Dataset, chain_dag, forward_sample, random_network
from vcbn.model import CategoricalDomain, Dag
from vcbn.optimize import CutoffPolicy, brute_force_context, fit_graph, solve_context
from vcbn.search import SrmConfig, best_parents_per_node, enumerate_dags, srm_select, validate_bound_experiment

TRUTH_SEED = 2024
CHAIN_CONFIG = SrmConfig(delta_max=2, m_max=8, eta=0.05)


@pytest.fixture(scope="module")
def chain_truth():
    # binary chain on 5 nodes, every CPT entry drawn from [0.2, 0.8]
    return random_network(CategoricalDomain.binary(5), chain_dag(5), seed=TRUTH_SEED, low=0.2, high=0.8)


def test_01_confidence_term_fidelity():
    # desk value: 4.60517 * sqrt(68.3652 / 1000)
    value = confidence_term(0.01, 1000, 10, 0.05)
    ok = abs(value - 1.2041) <= 1e-3
    record("01 confidence term", ok, f"phi={value:.6f}, target 1.2041 +/- 1e-3")
    assert ok


def test_02_optimizer_oracle_equivalence():
    rng = np.random.default_rng(20240501)
    worst = 0.0
    for i in range(500):
        m = int(rng.integers(2, 5))
        counts = rng.integers(0, 21, size=m)
        eps = (0.0, 0.05, 0.1)[i % 3]
        worst = max(worst, np.abs(solve_context(counts, eps) - brute_force_context(counts, eps, 1e-4)).max())
    ok = worst <= 2e-4
    record("02 optimizer vs grid oracle", ok, f"max |diff| over 500 cases = {worst:.2e} (limit 2e-4)")
    assert ok


def test_03_vc_bound_hand_values():
    b3 = CategoricalDomain.binary(3)
    got = (
        vc_bound_graph(b3, Dag(((), (0,), (1,)))).h,
        vc_bound_unordered(b3, 1).h,
        vc_bound_ordered(b3, 1).h,
        vc_bound_ordered(b3, 1, literal=True).h,
    )
    ok = got == (10, 12, 14, 12)
    record("03 VC bound hand values", ok, f"(graph, unordered, ordered, ordered literal) = {got}, expected (10, 12, 14, 12)")
    assert ok


def test_04_search_equivalence():
    rng = np.random.default_rng(777)
    worst = 0.0
    for _ in range(50):
        l = int(rng.integers(1, 51))
        data = Dataset(CategoricalDomain.binary(4), rng.integers(0, 2, size=(l, 4)))
        order = [int(v) for v in rng.permutation(4)]
        delta = int(rng.integers(1, 3))
        policy = CutoffPolicy.from_epsilon(float(rng.choice([0.0, 0.1, 0.25])), 4)
        fast = best_parents_per_node(data, order, delta, policy).r_emp
        slow = min(fit_graph(data, d, policy)[1] for d in enumerate_dags(4, delta) if d.consistent_with(order))
        worst = max(worst, abs(fast - slow))
    ok = worst <= 1e-9
    record("04 search equivalence", ok, f"max |R_emp(per-node) - R_emp(exhaustive)| = {worst:.2e} over 50 datasets")
    assert ok


def test_05_bound_soundness(chain_truth):
    report = validate_bound_experiment(chain_truth, CHAIN_CONFIG, l=500, trials=200, seed=5)
    ok = report.violation_rate <= 0.05
    record(
        "05 bound soundness",
        ok,
        f"violations {report.violations}/200 (rate {report.violation_rate:.3f}), mean slack {report.mean_slack:.3f} nats",
    )
    assert ok


def test_06_consistency_at_scale(chain_truth):
    data = forward_sample(chain_truth, 20_000, seed=6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = srm_select(data, CHAIN_CONFIG)
    kl = kl_divergence(chain_truth, result.net)
    rb = result.risk_bound
    ok = kl <= 0.01
    record("06 consistency at l=20000", ok, f"KL={kl:.4f} nats (limit 0.01), selected k={rb.k}, m={rb.m}")
    assert ok


def test_07_entropy_identity():
    rng = np.random.default_rng(31)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 6))
        sizes = [int(s) for s in rng.integers(2, 4, size=n)]
        l = int(rng.integers(1, 200))
        data = Dataset(CategoricalDomain.from_sizes(sizes), np.column_stack([rng.integers(0, m, size=l) for m in sizes]))
        dag = random_dag(rng, n, 2)
        _, r_emp = fit_graph(data, dag, CutoffPolicy.unconstrained(n))
        worst = max(worst, abs(r_emp - conditional_entropy_sum(data.rows, dag)))
    ok = worst <= 1e-9
    record("07 entropy identity", ok, f"max |R_emp - sum H(X_j | parents)| = {worst:.2e} over 20 pairs")
    assert ok


def test_08_monotonicity_suite():
    lin = max(
        abs(confidence_term(lam**2, l, h, eta) - 2 * confidence_term(lam, l, h, eta))
        for lam in (0.9, 0.5, 0.1, 0.01)
        for l in (10, 1000)
        for h in (1, 5, 9)
        for eta in (0.01, 0.05)
    )
    h_ok = all(
        confidence_term(0.1, l, h + 1, 0.05) > confidence_term(0.1, l, h, 0.05)
        for l in (5, 50, 500)
        for h in range(1, 2 * l - 1)
    )
    rng = np.random.default_rng(8)
    k_ok = True
    for _ in range(20):
        data = Dataset(CategoricalDomain.binary(5), rng.integers(0, 2, size=(int(rng.integers(5, 80)), 5)))
        policy = CutoffPolicy(2.0 ** -int(rng.integers(5, 12)), 5)
        risks = [best_parents_per_node(data, None, k, policy).r_emp for k in range(5)]
        k_ok &= all(b <= a + 1e-12 for a, b in zip(risks, risks[1:]))
    ok = lin <= 1e-12 and h_ok and k_ok
    record(
        "08 monotonicity suite",
        ok,
        f"max |phi(lam^2) - 2 phi(lam)| = {lin:.1e}; increasing in h: {h_ok}; R_emp non-increasing in k: {k_ok}",
    )
    assert ok
