"""Chaotic vs. regular dynamics of the dimensionless double pendulum."""

__version__ = "0.1.0"
