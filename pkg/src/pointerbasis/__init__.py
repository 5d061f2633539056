"""Exact simulations of measurement, decoherence by an atom environment,
information bookkeeping and redundant records for two-level systems."""

__version__ = "0.1.0"
