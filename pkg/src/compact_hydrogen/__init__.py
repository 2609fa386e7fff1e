"""Hydrogen-like atom in R^4 and on R^3 x S^1 with the Gauss-law potential.

Modules
-------
potential
    Compactified Coulomb potential: closed form, image sum, remainder, axial integral.
variational
    Trial-function families and quadrature of the quadratic forms.
solver
    Finite-difference operators, eigenvalues and bound-state counts.
cli
    Radius sweeps and check suites from the command line.
"""

from .potential import PotentialSpec, SpacePoint, charge_to_Z, closed_form, image_sum
from .solver import GridSpec, assemble_compactified, lowest_eigenvalues
from .variational import RayleighReport, TrialFunction, ground_state_bound, rayleigh

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "PotentialSpec",
    "RayleighReport",
    "SpacePoint",
    "TrialFunction",
    "assemble_compactified",
    "charge_to_Z",
    "closed_form",
    "ground_state_bound",
    "image_sum",
    "lowest_eigenvalues",
    "rayleigh",
]
