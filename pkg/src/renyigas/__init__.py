"""Renyi entanglement entropies of the free Fermi gas.

Submodules
----------
entropy_functions
    Test functions eta_gamma and relatives, and the U defect integral.
thermo
    Hamiltonians, Fermi symbols, densities and the chemical potential.
widom
    Boundary coefficient B(a, Lambda; f) and the constant Sigma(d).
finite_size
    Discretized trace defects, the Hilbert-Schmidt oracle and scans.
matrix_checks
    Random-matrix checks of the operator and trace inequalities.
cli
    Command-line front end.
"""
from ._accel import backend, set_backend
from .quadrature import ConvergenceError, QuadratureSpec

__version__ = "0.1.0"

__all__ = ["backend", "set_backend", "ConvergenceError", "QuadratureSpec", "__version__"]
