"""Python access to the diluted-ferromagnet core library."""

import json

from ._core import (
    CapacityError,
    ParameterError,
    StructuralError,
    canonicalize,
    correlation,
    extract_identities,
    is_stochastically_stable,
    log_partition,
    monomial_expectation,
    run_cli,
    site_degree,
)
from . import _core


def sample_graph(model, alpha, n, seed):
    """Sample one quenched graph and return its JSON dump as a dict."""
    return json.loads(_core.sample_graph_json(model, alpha, n, seed))


def compare_methods(g, s, order=3):
    return json.loads(_core.compare_methods_json(g, s, order))


def residuals(model, alpha, n, beta, n_disorder=10, seed=0):
    """Exact-engine identity residuals as a report dict."""
    return json.loads(_core.residuals_json(model, alpha, n, beta, n_disorder, seed))


__all__ = [
    "CapacityError",
    "ParameterError",
    "StructuralError",
    "canonicalize",
    "compare_methods",
    "correlation",
    "extract_identities",
    "is_stochastically_stable",
    "log_partition",
    "monomial_expectation",
    "residuals",
    "run_cli",
    "sample_graph",
    "site_degree",
]
