"""Numerical workbench for level-1 Hecke eigenforms: exact q-expansions,
eigenbases, Petersson inner products on the modular surface, unfolding
identities and the prime-product bounds used for decorrelation."""

__version__ = "0.1.0"

from .eigen import EigenBasis, HeckeEigenform, eigenbasis
from .qexpansion import QSeries, miller_basis

__all__ = ["EigenBasis", "HeckeEigenform", "QSeries", "eigenbasis", "miller_basis", "__version__"]
