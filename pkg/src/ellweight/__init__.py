"""Elliptic dynamical R-matrices, elliptic weight functions and their identities.

Submodules:

numerics     theta functions, brackets [u], q-Pochhammer symbols, elliptic gammas
partitions   index sets I, shapes lambda, dynamical shift counts, permutations
rmatrix      the dynamical R-matrix, DYBE and unitarity checkers
weights      compiled weight functions W_I, W~_I, omega_I
properties   triangularity, transition, R-cal coefficients, orthogonality, quasi-periodicity
shuffle      the elliptic shuffle product and wheel conditions
qkz          trace integrands, torus quadrature and the N = 2 q-KZ check
cli          command-line front end
"""

from .errors import ContourError, DomainError, PoleError
from .numerics import DEFAULT_PARAMS, EllipticParams, bracket, gamma2, gamma3, theta_p
from .partitions import LambdaShape, Partition, from_word
from .rmatrix import DynamicalParams, r_full, rbar
from .weights import Convention, VariableAssignment, WTilde, omega, w_entire, w_tilde

__all__ = [
    "ContourError", "DomainError", "PoleError",
    "DEFAULT_PARAMS", "EllipticParams", "bracket", "gamma2", "gamma3", "theta_p",
    "LambdaShape", "Partition", "from_word",
    "DynamicalParams", "r_full", "rbar",
    "Convention", "VariableAssignment", "WTilde", "omega", "w_entire", "w_tilde",
]

__version__ = "0.1.0"
