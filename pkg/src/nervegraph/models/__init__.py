"""Likelihood models and synthetic-data generators."""
from nervegraph.models.backends import (
    Backend,
    ClaytonHypergraphBackend,
    ClaytonJTBackend,
    FlatBackend,
    GaussianHIWBackend,
)
from nervegraph.models.clayton import (
    clayton_cdf,
    clayton_log_density,
    jt_log_likelihood,
    sample_clayton,
    sample_clayton_conditional,
    sample_junction_tree_model,
)
from nervegraph.models.gaussian import HIWHyper, hiw_log_marginal, log_h, sample_gaussian_model
from nervegraph.models.hypergraph import (
    NormalizerCache,
    estimate_log_normalizer,
    hypergraph_log_likelihood,
    peel_factors,
)

__all__ = [
    "Backend",
    "ClaytonHypergraphBackend",
    "ClaytonJTBackend",
    "FlatBackend",
    "GaussianHIWBackend",
    "HIWHyper",
    "NormalizerCache",
    "clayton_cdf",
    "clayton_log_density",
    "estimate_log_normalizer",
    "hiw_log_marginal",
    "hypergraph_log_likelihood",
    "jt_log_likelihood",
    "log_h",
    "peel_factors",
    "sample_clayton",
    "sample_clayton_conditional",
    "sample_gaussian_model",
    "sample_junction_tree_model",
]
