"""Bayesian networks of bounded in-degree with VC-dimension generalization bounds."""

from .bounds import (
    RiskBound,
    VcBoundReport,
    closed_form_bounds,
    confidence_term,
    confidence_term_ab,
    empirical_risk,
    entropy,
    kl_divergence,
    srm_confidence,
    true_risk,
    vc_bound_graph,
    vc_bound_ordered,
    vc_bound_unordered,
)
from .data import CountTable, Dataset, empirical_counts, forward_sample, load_csv, random_network
from .model import BayesNet, CategoricalDomain, ConfigIndex, Cpt, Dag, log_joint, topological_order, validate
from .optimize import CutoffPolicy, brute_force_context, fit_cpt, fit_graph, solve_context
from .search import SrmConfig, SearchResult, best_parents_per_node, enumerate_dags, srm_select, validate_bound_experiment

__version__ = "0.1.0"
