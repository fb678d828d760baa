"""Metastability of Metropolis dynamics for the Ising model on two clusters.

Two complete graphs of ``n`` vertices are joined by a perfect matching of
cross edges.  Internal edges carry coupling 1, cross edges ``epsilon`` and
every vertex feels the field ``h``.  The package provides exact energies,
the symmetry-reduced chain on classes ``C(p1, p2, a)``, closed-form
landscape predictions, a brute-force oracle for small ``n`` and seeded
simulation and spectral tools.
"""
from .classes import (ClassState, LumpedChain, MoveType, NamedState, build_lumped_chain,
                      class_energy, class_size, classify, enumerate_classes)
from .errors import (CapacityError, DimensionError, ParameterError, RegimeError,
                     UnreachableTargetError)
from .landscape import RegimeTag, analyze, gamma_values, identify_states, regime
from .model import ClusteredGraph, Params, SpinConfig, build_graph, hamiltonian

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "ClassState", "ClusteredGraph", "DimensionError", "LumpedChain",
    "MoveType", "NamedState", "ParameterError", "Params", "RegimeError", "RegimeTag",
    "SpinConfig", "UnreachableTargetError", "analyze", "build_graph",
    "build_lumped_chain", "class_energy", "class_size", "classify", "enumerate_classes",
    "gamma_values", "hamiltonian", "identify_states", "regime",
]
