"""Finite-difference assembly of the symmetrised 5-point operator in band storage.

Unknowns are ordered lexicographically with the x index fastest, which gives
an ``m**2 x m**2`` matrix (``m = N - 1``) of bandwidth ``m``.  Only the lower
band is stored: row ``i`` of ``band`` holds ``a(i, i-bw), ..., a(i, i)``, so the
diagonal lives in the last column and entries before column 0 of the matrix are
padded with zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from .errors import InvalidArgument, ModelViolation
from .mesh import Mesh1D, ProblemSpec


@dataclass(frozen=True, eq=False)
class BandedSymmetricMatrix:
    band: np.ndarray

    def __post_init__(self):
        if self.band.ndim != 2:
            raise InvalidArgument("band storage must be two-dimensional")

    @property
    def n(self) -> int:
        return self.band.shape[0]

    @property
    def bandwidth(self) -> int:
        return self.band.shape[1] - 1

    def diagonal(self, d: int = 0) -> np.ndarray:
        """Entries a(i, i-d) for i = d..n-1."""
        return self.band[d:, self.bandwidth - d]

    def __getitem__(self, ij: tuple[int, int]) -> float:
        i, j = ij
        if j > i:
            i, j = j, i
        d = i - j
        if d > self.bandwidth:
            return 0.0
        return float(self.band[i, self.bandwidth - d])

    def to_dense(self) -> np.ndarray:
        n, bw = self.n, self.bandwidth
        out = np.zeros((n, n))
        for d in range(bw + 1):
            idx = np.arange(d, n)
            out[idx, idx - d] = self.band[d:, bw - d]
            out[idx - d, idx] = self.band[d:, bw - d]
        return out

    def to_sparse(self) -> scipy.sparse.csr_matrix:
        """Full symmetric matrix as CSR."""
        lower = _band_to_coo(self.band)
        strict = scipy.sparse.tril(lower, k=-1)
        return (lower + strict.T).tocsr()

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.to_sparse() @ x

    @classmethod
    def from_dense(cls, a: np.ndarray, bandwidth: int | None = None) -> BandedSymmetricMatrix:
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        if bandwidth is None:
            rows, cols = np.nonzero(np.tril(a))
            bandwidth = int((rows - cols).max()) if rows.size else 0
        band = np.zeros((n, bandwidth + 1))
        for d in range(min(bandwidth, n - 1) + 1):
            idx = np.arange(d, n)
            band[d:, bandwidth - d] = a[idx, idx - d]
        return cls(band)

    def __eq__(self, other):
        if not isinstance(other, BandedSymmetricMatrix):
            return NotImplemented
        return self.band.shape == other.band.shape and np.array_equal(self.band, other.band)


def _band_to_coo(band: np.ndarray) -> scipy.sparse.coo_matrix:
    n, w = band.shape
    bw = w - 1
    rows, cols = np.nonzero(band)
    cols = rows - bw + cols
    return scipy.sparse.coo_matrix((band[rows, cols - rows + bw], (rows, cols)), shape=(n, n))


def assemble(mesh_x: Mesh1D, mesh_y: Mesh1D, spec: ProblemSpec) -> tuple[BandedSymmetricMatrix, np.ndarray]:
    """Build the system matrix and right-hand side on the tensor grid ``mesh_x x mesh_y``.

    Stencil legs that reach the boundary are moved to the right-hand side
    through the Dirichlet data ``spec.g``.
    """
    if mesh_x.N != mesh_y.N:
        raise InvalidArgument(f"anisotropic grids are not supported ({mesh_x.N} != {mesh_y.N})")
    N = mesh_x.N
    if N < 2:
        raise InvalidArgument("N must be at least 2")
    m = N - 1
    eps2 = spec.epsilon**2

    h, k = mesh_x.widths, mesh_y.widths
    hbar, kbar = mesh_x.half_sums, mesh_y.half_sums
    # 2D arrays indexed [j, i] so that ravel() gives x-fastest ordering
    H_w, K_s = np.meshgrid(h[:-1], k[:-1])
    H_e, K_n = np.meshgrid(h[1:], k[1:])
    HB, KB = np.meshgrid(hbar, kbar)
    X, Y = np.meshgrid(mesh_x.points[1:-1], mesh_y.points[1:-1])

    bvals = np.asarray(spec.b(X, Y), dtype=float)
    if np.any(bvals <= 0):
        raise ModelViolation("reaction coefficient b must be positive on the grid")
    if np.any(bvals < spec.beta**2):
        raise ModelViolation(f"reaction coefficient falls below beta**2 = {spec.beta**2}")

    west = eps2 * (KB / H_w)
    east = eps2 * (KB / H_e)
    south = eps2 * (HB / K_s)
    north = eps2 * (HB / K_n)
    diag = eps2 * (KB * (1 / H_w + 1 / H_e) + HB * (1 / K_s + 1 / K_n)) + HB * KB * bvals

    band = np.zeros((m * m, m + 1))
    band[:, m] = diag.ravel()
    if m > 1:
        w = -west.copy()
        w[:, 0] = 0.0
        band[:, m - 1] = w.ravel()
        s = -south.copy()
        s[0, :] = 0.0
        band[:, 0] = s.ravel()

    rhs = HB * KB * np.asarray(spec.f(X, Y), dtype=float)
    xs, ys = mesh_x.points, mesh_y.points
    rhs[:, 0] += west[:, 0] * spec.g(np.full(m, xs[0]), ys[1:-1])
    rhs[:, -1] += east[:, -1] * spec.g(np.full(m, xs[-1]), ys[1:-1])
    rhs[0, :] += south[0, :] * spec.g(xs[1:-1], np.full(m, ys[0]))
    rhs[-1, :] += north[-1, :] * spec.g(xs[1:-1], np.full(m, ys[-1]))
    return BandedSymmetricMatrix(band), rhs.ravel()


def export_matrix_market(band: np.ndarray | BandedSymmetricMatrix, path: str | Path, symmetric: bool = True) -> None:
    """Write the stored lower band in coordinate format.

    With ``symmetric=True`` the header declares a symmetric matrix (for A);
    otherwise a general lower-triangular one (for a Cholesky factor).
    """
    if isinstance(band, BandedSymmetricMatrix):
        band = band.band
    coo = _band_to_coo(band)
    order = np.lexsort((coo.row, coo.col))
    kind = "symmetric" if symmetric else "general"
    n = band.shape[0]
    with open(path, "w") as fh:
        fh.write(f"%%MatrixMarket matrix coordinate real {kind}\n")
        fh.write(f"% lower band storage, bandwidth {band.shape[1] - 1}\n")
        fh.write(f"{n} {n} {coo.nnz}\n")
        data = np.column_stack([coo.row[order] + 1, coo.col[order] + 1, coo.data[order]])
        np.savetxt(fh, data, fmt=["%d", "%d", "%.17g"])


def import_matrix_market(path: str | Path, bandwidth: int | None = None) -> np.ndarray:
    """Read a coordinate file back into lower band storage."""
    mat = scipy.sparse.tril(scipy.io.mmread(path)).tocoo()
    n = mat.shape[0]
    if bandwidth is None:
        bandwidth = _header_bandwidth(path)
    if bandwidth is None:
        bandwidth = int((mat.row - mat.col).max()) if mat.nnz else 0
    band = np.zeros((n, bandwidth + 1))
    band[mat.row, mat.col - mat.row + bandwidth] = mat.data
    return band


def _header_bandwidth(path) -> int | None:
    with open(path) as fh:
        for line in fh:
            if not line.startswith("%"):
                return None
            if "bandwidth" in line:
                return int(line.rsplit(None, 1)[-1])
    return None


def read_matrix(path: str | Path) -> BandedSymmetricMatrix:
    return BandedSymmetricMatrix(import_matrix_market(path))
