"""Solvers and benchmarks for monotone variational inequalities coupled
with fixed-point constraints."""

from .algorithms import Scheme, SolverConfig, solve
from .problems import RandomSpec, initial_points, make_example1, make_example2

__all__ = [
    "Scheme",
    "SolverConfig",
    "solve",
    "RandomSpec",
    "make_example1",
    "make_example2",
    "initial_points",
]

__version__ = "0.1.0"
