"""Subnormal and underflow analysis of Cholesky factors of singularly perturbed FD systems."""

from .assembly import BandedSymmetricMatrix, assemble, export_matrix_market, import_matrix_market
from .cholesky import (
    DENORM_MIN,
    REALMIN,
    CholeskyFactor,
    FactorStats,
    FloatClass,
    Mode,
    classify_entry,
    factor,
    solve,
)
from .mesh import Mesh1D, MeshKind, ProblemSpec, get_problem, shishkin_mesh, uniform_mesh

__version__ = "0.1.0"
