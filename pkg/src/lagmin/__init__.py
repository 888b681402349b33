"""Hamiltonian-minimal Lagrangian immersions in C^n: constructions and
numerical certification."""

__version__ = "0.1.0"
