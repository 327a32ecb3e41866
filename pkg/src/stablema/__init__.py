"""Simulation and kernel estimation for stable moving averages."""

__version__ = "0.1.0"
