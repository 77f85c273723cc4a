"""Solvers for the maximum-reliability stochastic network interdiction problem."""

__version__ = "0.1.0"
