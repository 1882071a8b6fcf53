"""Exact linear (-1)-symplectic geometry, BV integrals and homotopy transfer.

Submodules, bottom up:

- ``graded``: graded spaces, subspaces, linear relations
- ``symplectic``: degree -1 symplectic spaces, Lagrangian relations, reductions
- ``densities``: Berezinians, linear densities and exact prefactors
- ``formal``: truncated formal functions, the odd bracket and the BV Laplacian
- ``bvintegral``: Gaussian BV integrals, fiber integrals, perturbation lemma
- ``quantum``: quantum L-infinity algebras, effective actions, relations
- ``serialization`` / ``cli``: JSON wire format and the command line
"""

from .densities import LinDensity, Prefactor
from .errors import DomainError, MalformedInput
from .formal import INF, FormalFunction
from .graded import GradedSpace, Subspace
from .symplectic import OddSympSpace, Relation

__version__ = "0.1.0"

__all__ = [
    "GradedSpace", "Subspace", "OddSympSpace", "Relation", "FormalFunction", "INF",
    "Prefactor", "LinDensity", "DomainError", "MalformedInput",
]
