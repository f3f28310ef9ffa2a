"""Bandits with knapsacks: Lagrangian primal-dual algorithms, benchmarks and
lower-bound constructions."""

__version__ = "0.1.0"
