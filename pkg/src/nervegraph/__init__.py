"""Graphs and hypergraphs parametrized by point configurations through nerves,
with point-process priors and Metropolis/Hastings structure inference."""

__version__ = "0.1.0"
