"""Simulation and diagnostics toolkit for Lohe-type aggregation models."""

__version__ = "0.1.0"
