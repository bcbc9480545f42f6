"""Eigenvalue degeneracy of sparse Bernoulli-masked random matrices.

Graph criteria for distinct eigenvalues, constructive witnesses, exact
discriminants, and a reproducible Monte Carlo harness for the sparse regime.
"""
from .asymptotics import predict_distinct, predict_perfect_matching
from .bipartite import BipartiteMask, condition_4_1, has_perfect_matching, maximum_matching
from .models import SparseRegime, eigenvalues_distinct, sample_mask, sample_values
from .montecarlo import SimulationConfig, run, wilson_interval
from .polynomial import Polynomial, characteristic_polynomial, discriminant, has_multiple_root

__version__ = "0.1.0"
