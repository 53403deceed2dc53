import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import net_from_probs, random_dag, random_net
from vcbn.bounds import (
    RiskBound,
    closed_form_bounds,
    confidence_term,
    confidence_term_ab,
    empirical_risk,
    entropy,
    kl_divergence,
    srm_confidence,
    srm_confidence_expanded,
    true_risk,
    vc_bound_graph,
    vc_bound_ordered,
    vc_bound_unordered,
)
from vcbn.data import Dataset
from vcbn.errors import StateSpaceTooLargeError, SupportViolationError
from vcbn.model import CategoricalDomain, Dag, log_joint_rows, topological_order
from vcbn.optimize import CutoffPolicy, fit_graph

B3 = CategoricalDomain.binary(3)


def coin(p1):
    return net_from_probs(CategoricalDomain.binary(1), Dag(((),)), [[[1 - p1, p1]]])


def test_empirical_risk_uniform():
    net = net_from_probs(CategoricalDomain.binary(2), Dag.empty(2), [[[0.5, 0.5]]] * 2)
    data = Dataset(net.domain, [(0, 0), (1, 0), (1, 1), (0, 1)])
    assert empirical_risk(net, data) == pytest.approx(math.log(4), abs=1e-12)


def test_empirical_risk_constant_row_probability():
    net = net_from_probs(CategoricalDomain.binary(2), Dag.empty(2), [[[0.2, 0.8]], [[0.5, 0.5]]])
    data = Dataset(net.domain, [(1, 0), (1, 1)])
    assert empirical_risk(net, data) == pytest.approx(-math.log(0.4), abs=1e-12)


def test_empirical_risk_support_violation():
    net = coin(1.0)
    with pytest.raises(SupportViolationError) as exc:
        empirical_risk(net, Dataset(net.domain, [[1], [0], [1]]))
    assert exc.value.row == 1


def test_true_risk_examples(fair_coin):
    assert true_risk(fair_coin, fair_coin) == pytest.approx(math.log(2), abs=1e-12)
    expected = -(0.5 * math.log(0.9) + 0.5 * math.log(0.1))
    assert true_risk(coin(0.1), fair_coin) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(1.2040, abs=1e-4)


def test_entropy_examples(fair_coin):
    assert entropy(fair_coin) == pytest.approx(math.log(2), abs=1e-12)
    assert entropy(coin(1.0)) == 0.0
    assert kl_divergence(fair_coin, fair_coin) == pytest.approx(0.0, abs=1e-12)
    assert math.isinf(kl_divergence(fair_coin, coin(1.0)))


def test_true_risk_refuses_huge_state_space():
    domain = CategoricalDomain.binary(23)
    net = net_from_probs(domain, Dag.empty(23), [[[0.5, 0.5]]] * 23)
    with pytest.raises(StateSpaceTooLargeError):
        true_risk(net, net)


@given(st.integers(0, 2**32 - 1))
def test_risk_entropy_kl_identity(seed):
    rng = np.random.default_rng(seed)
    sizes = [2, 3, 2, 2]
    truth = random_net(rng, sizes, random_dag(rng, 4, 2))
    net = random_net(rng, sizes, random_dag(rng, 4, 2))
    tr, h, kl = true_risk(net, truth), entropy(truth), kl_divergence(truth, net)
    assert tr - h == pytest.approx(kl, abs=1e-12)
    assert kl >= -1e-12
    assert tr >= h - 1e-12


@given(st.integers(0, 2**32 - 1))
def test_sign_bridge(seed):
    rng = np.random.default_rng(seed)
    dag = random_dag(rng, 3, 2)
    a, b = random_net(rng, [2, 2, 3], dag), random_net(rng, [2, 2, 3], dag)
    data = Dataset(a.domain, np.column_stack([rng.integers(0, m, size=25) for m in (2, 2, 3)]))
    # the log-likelihood functional sum H(x) ln P(x) orders nets oppositely to the risk
    ll_a, ll_b = log_joint_rows(a, data.rows).mean(), log_joint_rows(b, data.rows).mean()
    ra, rb = empirical_risk(a, data), empirical_risk(b, data)
    assert (ra < rb) == (ll_a > ll_b)


def test_vc_bound_hand_values():
    assert vc_bound_graph(B3, Dag(((), (0,), (1,)))).h == 10
    assert vc_bound_graph(B3, Dag.empty(3)).h == 6
    assert vc_bound_graph(B3, Dag(((), (0,), (0, 1)))).h == 14
    assert vc_bound_unordered(B3, 1).h == 12
    assert vc_bound_ordered(B3, 1).h == 14
    assert vc_bound_ordered(B3, 1, literal=True).h == 12


@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_delta_zero(n):
    d = CategoricalDomain.binary(n)
    assert vc_bound_ordered(d, 0).h == 2 * n
    assert vc_bound_unordered(d, 0).h == 2 * n
    assert vc_bound_graph(d, Dag.empty(n)).h == 2 * n
    assert closed_form_bounds(n, 2, 0)[0] == 2 * n


@pytest.mark.parametrize("n, l_max, delta", [(3, 2, 1), (5, 3, 2), (6, 4, 0), (7, 2, 3)])
def test_unordered_equal_alphabets_closed_form(n, l_max, delta):
    d = CategoricalDomain.from_sizes([l_max] * n)
    assert vc_bound_unordered(d, delta).h == math.comb(n, delta + 1) * l_max ** (delta + 1)
    assert vc_bound_unordered(d, delta).h == closed_form_bounds(n, l_max, delta)[2]


def test_closed_form_examples():
    assert closed_form_bounds(3, 2, 1) == (12, 12, 12)
    assert closed_form_bounds(10, 2, 2) == (80, 960, 960)


def test_ordered_full_degree_dominates_complete_dag():
    for n in range(1, 7):
        d = CategoricalDomain.binary(n)
        complete = Dag(tuple(tuple(range(j)) for j in range(n)))
        assert vc_bound_ordered(d, n - 1).h >= vc_bound_graph(d, complete).h


def test_ordered_widened_by_brute_force():
    # widened subsets: node at position j contributes sum over min(delta, j-1)-subsets of predecessors
    sizes = [2, 3, 4, 2]
    d = CategoricalDomain.from_sizes(sizes)
    for delta in range(4):
        total = 0
        for j in range(4):
            for s in itertools.combinations(range(j), min(delta, j)):
                total += sizes[j] * math.prod(sizes[i] for i in s)
        assert vc_bound_ordered(d, delta).h == total


@given(st.integers(0, 2**32 - 1))
def test_graph_bound_below_ordered_bound(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    dag = random_dag(rng, n, 3)
    sizes = [int(s) for s in rng.integers(2, 5, size=n)]
    d = CategoricalDomain.from_sizes(sizes)
    order = topological_order(dag)
    h_graph = vc_bound_graph(d, dag).h
    assert h_graph <= vc_bound_ordered(d, dag.max_in_degree, order).h
    l_max = max(sizes)
    given_cf, ordered_cf, unordered_cf = closed_form_bounds(n, l_max, dag.max_in_degree)
    assert h_graph <= given_cf
    assert vc_bound_ordered(d, dag.max_in_degree, order, literal=True).h <= ordered_cf
    assert vc_bound_unordered(d, dag.max_in_degree).h <= unordered_cf


def test_widened_ordered_can_exceed_unordered_closed_form():
    # recorded deviation from the nesting property: at n=3, delta=1 the widened count is 14 > 12
    assert vc_bound_ordered(B3, 1).h > closed_form_bounds(3, 2, 1)[2]


def test_confidence_term_desk_value():
    radicand = (10 * (math.log(2000 / 10) + 1) - math.log(0.05 / 4) + 1) / 1000
    assert radicand == pytest.approx(0.0683652, abs=1e-6)
    assert confidence_term(0.01, 1000, 10, 0.05) == pytest.approx(1.2041, abs=1e-3)


def test_confidence_term_properties():
    assert confidence_term(1.0, 50, 7, 0.1) == 0.0
    assert confidence_term(0.01, 10**5, 10, 0.05) < confidence_term(0.01, 10**3, 10, 0.05)
    assert confidence_term_ab(1.0, 3.0, 100, 5, 0.1) == pytest.approx(confidence_term(math.exp(-2), 100, 5, 0.1))
    for bad in [(0.0, 10, 1, 0.1), (0.5, 0, 1, 0.1), (0.5, 10, 0, 0.1), (0.5, 10, 1, 1.0), (1.5, 10, 1, 0.1)]:
        with pytest.raises(ValueError):
            confidence_term(*bad)


@given(st.floats(1e-6, 0.999), st.integers(1, 10**5), st.integers(1, 200), st.floats(1e-4, 0.99))
def test_phi_linear_in_log_lambda(lam, l, h, eta):
    assert confidence_term(lam * lam, l, h, eta) == pytest.approx(2 * confidence_term(lam, l, h, eta), rel=1e-12)


def test_phi_increasing_in_h_decreasing_in_eta():
    for l in (10, 100, 1000):
        values = [confidence_term(0.1, l, h, 0.05) for h in range(1, 2 * l)]
        assert all(b > a for a, b in zip(values, values[1:]))
    etas = [0.01, 0.05, 0.1, 0.5, 0.9]
    values = [confidence_term(0.1, 100, 10, e) for e in etas]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_srm_confidence():
    assert srm_confidence(1, 0, 500, 6, 0.05) == confidence_term(0.5, 500, 6, 0.025)
    n, k, m, l, eta = 5, 2, 3, 10**4, 0.05
    h = n * 2 ** (k + 1)
    assert h == 40
    assert srm_confidence(m, k, l, h, eta) == pytest.approx(srm_confidence_expanded(m, k, l, h, eta), abs=1e-12)


def test_srm_confidence_grows_in_k_and_m():
    n, l, eta = 5, 10**4, 0.05
    for m in range(1, 7):
        vals = [srm_confidence(m, k, l, n * 2 ** (k + 1), eta) for k in range(1, 7)]
        assert all(b > a for a, b in zip(vals, vals[1:]))
    for k in range(1, 7):
        vals = [srm_confidence(m, k, l, n * 2 ** (k + 1), eta) for m in range(1, 7)]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def test_risk_bound_record():
    rb = RiskBound(1.0, 0.5, 0.05, 0.25, 10, 1, 2, 0.1)
    assert rb.bound == 1.5 and rb.to_dict()["bound"] == 1.5
    with pytest.raises(ValueError):
        RiskBound(1.0, -0.1, 0.05, 0.25, 10)


@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_floored_fit_risk_in_loss_range(seed, m):
    rng = np.random.default_rng(seed)
    data = Dataset(CategoricalDomain.binary(3), rng.integers(0, 2, size=(30, 3)))
    lam = 2.0**-m
    policy = CutoffPolicy(lam, 3)
    if not policy.is_feasible([2, 2, 2]):
        return
    net, r_emp = fit_graph(data, random_dag(rng, 3, 2), policy)
    assert 0 <= r_emp <= -math.log(lam) + 1e-12
    assert true_risk(net, net) <= -math.log(lam) + 1e-12
