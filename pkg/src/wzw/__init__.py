"""Exact-arithmetic affine Lie algebra, Sugawara and WZW conformal block computations."""

from .core import SparseMatrix, Echelon, QuotientMap, TruncatedSeries
from .lie import SimpleLieAlgebra, FiniteIrrep, build_algebra, build_irrep, enumerate_P_ell
from .affine import build_module, sugawara, virasoro_check, epsilon_tensor
from .blocks import Insertion, BlockSpace, KZSystem, block, covariants, kz_system, flatness_check
from .fusion import FusionRing, fusion_ring, verlinde_dim, factorization_check, monodromy

__version__ = "0.1.0"

__all__ = [
    "SparseMatrix", "Echelon", "QuotientMap", "TruncatedSeries",
    "SimpleLieAlgebra", "FiniteIrrep", "build_algebra", "build_irrep", "enumerate_P_ell",
    "build_module", "sugawara", "virasoro_check", "epsilon_tensor",
    "Insertion", "BlockSpace", "KZSystem", "block", "covariants", "kz_system", "flatness_check",
    "FusionRing", "fusion_ring", "verlinde_dim", "factorization_check", "monodromy",
]
