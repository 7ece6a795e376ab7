"""Desk-scale simulation of the quantum reductions between LWE and extrapolated dihedral coset problems."""

__version__ = "0.1.0"
