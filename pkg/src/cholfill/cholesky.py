"""Column-oriented band Cholesky with floating-point classification of the factor.

The kernel follows the textbook gaxpy ordering: column ``j`` of ``L`` is
``(a(j:, j) - sum_k l(j:, k) l(j, k)) / sqrt(pivot)`` with the sum taken over
``k`` in increasing order.  It runs in natural order on the lower band and
never pivots or reorders.

Subnormal arithmetic is left to the hardware (IEEE gradual underflow) unless
``Mode.FTZ`` is requested, in which case every produced entry smaller than
``REALMIN`` in magnitude is replaced by an exact zero in software.
"""

from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import asdict, dataclass

import numba
import numpy as np

from .assembly import BandedSymmetricMatrix
from .errors import InvalidArgument, NotPositiveDefinite

REALMIN = 2.0**-1022
DENORM_MIN = 2.0**-1074


class Mode(str, enum.Enum):
    IEEE = "ieee"
    FTZ = "ftz"


class FloatClass(enum.Enum):
    ZERO = "zero"
    SUBNORMAL = "subnormal"
    NORMAL = "normal"


def classify_entry(value: float) -> FloatClass:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidArgument(f"cannot classify non-finite value {value!r}")
    if value == 0.0:
        return FloatClass.ZERO
    if abs(value) < REALMIN:
        return FloatClass.SUBNORMAL
    return FloatClass.NORMAL


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    band: np.ndarray

    @property
    def n(self) -> int:
        return self.band.shape[0]

    @property
    def bandwidth(self) -> int:
        return self.band.shape[1] - 1

    def to_dense(self) -> np.ndarray:
        n, bw = self.n, self.bandwidth
        out = np.zeros((n, n))
        for d in range(min(bw, n - 1) + 1):
            idx = np.arange(d, n)
            out[idx, idx - d] = self.band[d:, bw - d]
        return out


@dataclass(frozen=True)
class FactorStats:
    n: int
    bandwidth: int
    mode: str
    nonzeros: int
    subnormals: int
    underflow_zeros: int
    elapsed_seconds: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> FactorStats:
        return cls(**json.loads(text))


@numba.njit(cache=True)
def _band_cholesky(L, flush):
    """In-place factorisation of the lower band ``L``; returns -1 or the failing column."""
    n, w = L.shape
    bw = w - 1
    for j in range(n):
        lo = max(0, j - bw)
        s = 0.0
        for k in range(lo, j):
            t = L[j, k - j + bw]
            s += t * t
        pivot = L[j, bw] - s
        if not pivot > 0.0:
            L[j, bw] = pivot
            return j
        ljj = math.sqrt(pivot)
        L[j, bw] = ljj
        for i in range(j + 1, min(n, j + bw + 1)):
            s = 0.0
            for k in range(max(0, i - bw), j):
                s += L[i, k - i + bw] * L[j, k - j + bw]
            v = (L[i, j - i + bw] - s) / ljj
            if flush and abs(v) < 2.0**-1022:
                v = 0.0
            L[i, j - i + bw] = v
    return -1


@numba.njit(cache=True)
def _first_nonzero(band):
    """Column offset of the first stored nonzero in each row (the row envelope)."""
    n, w = band.shape
    first = np.empty(n, dtype=np.int64)
    for i in range(n):
        first[i] = w - 1
        for c in range(w):
            if band[i, c] != 0.0:
                first[i] = c
                break
    return first


@numba.njit(cache=True)
def _census(L, first):
    n, w = L.shape
    nonzeros = 0
    subnormals = 0
    zeros = 0
    for i in range(n):
        for c in range(w):
            v = L[i, c]
            if v != 0.0:
                nonzeros += 1
                if abs(v) < 2.0**-1022:
                    subnormals += 1
            elif c >= first[i]:
                zeros += 1
    return nonzeros, subnormals, zeros


def structural_pattern_size(A: BandedSymmetricMatrix) -> int:
    """Number of lower-band positions inside the row envelope of ``A``."""
    first = _first_nonzero(A.band)
    return int(np.sum(A.bandwidth + 1 - first))


def factor(
    A: BandedSymmetricMatrix, mode: Mode | str = Mode.IEEE, overwrite: bool = False
) -> tuple[CholeskyFactor, FactorStats]:
    """Factor ``A = L L^T`` and count nonzero, subnormal and underflow-zero entries of ``L``.

    An entry is an underflow-zero when it is stored as exactly zero but lies
    inside the row envelope of ``A``, which for natural ordering is where fill
    occurs in exact arithmetic.  With ``overwrite=True`` the band of ``A`` is
    reused for ``L`` (saves a copy at large N; ``A`` is destroyed).
    """
    mode = Mode(mode)
    first = _first_nonzero(A.band)
    L = A.band if overwrite else A.band.copy()
    if not L.flags.c_contiguous or L.dtype != np.float64:
        L = np.ascontiguousarray(L, dtype=np.float64)
    t0 = time.perf_counter()
    bad = _band_cholesky(L, mode is Mode.FTZ)
    elapsed = time.perf_counter() - t0
    if bad >= 0:
        raise NotPositiveDefinite(int(bad), float(L[bad, -1]))
    nz, sub, zeros = _census(L, first)
    stats = FactorStats(
        n=L.shape[0],
        bandwidth=L.shape[1] - 1,
        mode=mode.value,
        nonzeros=int(nz),
        subnormals=int(sub),
        underflow_zeros=int(zeros),
        elapsed_seconds=elapsed,
    )
    return CholeskyFactor(L), stats


@numba.njit(cache=True)
def _band_solve(L, b):
    n, w = L.shape
    bw = w - 1
    y = b.copy()
    for i in range(n):
        s = y[i]
        for k in range(max(0, i - bw), i):
            s -= L[i, k - i + bw] * y[k]
        y[i] = s / L[i, bw]
    for i in range(n - 1, -1, -1):
        s = y[i]
        for r in range(i + 1, min(n, i + bw + 1)):
            s -= L[r, i - r + bw] * y[r]
        y[i] = s / L[i, bw]
    return y


def solve(L: CholeskyFactor, rhs: np.ndarray) -> np.ndarray:
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    if rhs.shape != (L.n,):
        raise InvalidArgument(f"right-hand side has shape {rhs.shape}, expected ({L.n},)")
    return _band_solve(L.band, rhs)


def warmup() -> None:
    """Trigger JIT compilation so later timings measure only the factorisation."""
    factor(BandedSymmetricMatrix(np.array([[0.0, 4.0], [-1.0, 4.0]])))
    factor(BandedSymmetricMatrix(np.array([[0.0, 4.0], [-1.0, 4.0]])), Mode.FTZ)
