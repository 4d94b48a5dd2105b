"""Analytic prediction of fill levels, magnitudes and counts for the uniform-mesh factor.

Everything here works from ``N`` and ``epsilon`` alone; nothing is factored.

Fill level ``p(i, j)`` of a factor entry is 0 on the pattern of ``A`` and
otherwise the smallest ``p(i, k) + p(j, k) + 1`` over earlier columns ``k``.
Level ``k`` entries have magnitude of order ``delta**(2(k+1)) * h`` with
``delta = eps / h``.  On the 5-point matrix there are ``m - 1`` block rows
below the first, each carrying the same level pattern, which gives closed
forms for the number of entries at or beyond any level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .cholesky import DENORM_MIN, REALMIN
from .errors import InvalidArgument, NoSolution

LEVEL_INF = np.iinfo(np.int64).max // 4


def five_point_pattern(N: int) -> np.ndarray:
    """Boolean lower-band mask (rows x (m+1)) of the 5-point matrix on an N-interval grid."""
    m = N - 1
    n = m * m
    mask = np.zeros((n, m + 1), dtype=bool)
    mask[:, m] = True
    if m > 1:
        rows = np.arange(n)
        mask[:, m - 1] = rows % m != 0
        mask[:, 0] = rows >= m
    return mask


@numba.njit(cache=True)
def _levels(mask, inf):
    n, w = mask.shape
    bw = w - 1
    P = np.full((n, w), inf, dtype=np.int64)
    for j in range(n):
        for i in range(j, min(n, j + bw + 1)):
            c = j - i + bw
            p = 0 if mask[i, c] else inf
            for k in range(max(0, i - bw), j):
                a = P[i, k - i + bw]
                b = P[j, k - j + bw]
                if a < inf and b < inf and a + b + 1 < p:
                    p = a + b + 1
            P[i, c] = p
    return P


@dataclass(frozen=True, eq=False)
class LevelMatrix:
    """Fill level of every lower-band position; ``LEVEL_INF`` marks exact zeros."""

    levels: np.ndarray

    @property
    def n(self) -> int:
        return self.levels.shape[0]

    @property
    def bandwidth(self) -> int:
        return self.levels.shape[1] - 1

    def __getitem__(self, ij: tuple[int, int]) -> int | float:
        """Level at 1-based matrix position (i, j), i >= j; ``math.inf`` outside the pattern."""
        i, j = ij
        d = i - j
        if d < 0 or d > self.bandwidth:
            raise IndexError(ij)
        v = int(self.levels[i - 1, self.bandwidth - d])
        return math.inf if v >= LEVEL_INF else v

    def structural_nonzeros(self) -> int:
        return int(np.count_nonzero(self._valid() & (self.levels < LEVEL_INF)))

    def census(self) -> dict[int, int]:
        """Number of positions at each finite level (level 0 included)."""
        vals = self.levels[self._valid() & (self.levels < LEVEL_INF)]
        ks, counts = np.unique(vals, return_counts=True)
        return {int(k): int(c) for k, c in zip(ks, counts)}

    def _valid(self) -> np.ndarray:
        # positions (i, i-d) with i-d >= 0
        n, w = self.levels.shape
        rows = np.arange(n)[:, None]
        d = self.bandwidth - np.arange(w)[None, :]
        return rows >= d


def symbolic_levels(N: int) -> LevelMatrix:
    if N < 3:
        raise InvalidArgument(f"symbolic_levels needs N >= 3, got {N}")
    return LevelMatrix(_levels(five_point_pattern(N), LEVEL_INF))


def levels_from_pattern(mask: np.ndarray) -> LevelMatrix:
    return LevelMatrix(_levels(np.ascontiguousarray(mask, dtype=np.bool_), LEVEL_INF))


@dataclass(frozen=True)
class Magnitude:
    """A positive real held as log2, so deep levels do not underflow on the way out."""

    level: int
    log2: float

    @property
    def value(self) -> float:
        # 0.0 once below the smallest subnormal
        return 2.0**self.log2 if self.log2 > -1100 else 0.0

    def __float__(self) -> float:
        return self.value


def level_magnitude(k: int, epsilon: float, h: float, pivot: float | None = None) -> Magnitude:
    """Representative size of level-``k`` entries, ``(eps/s)**(2(k+1)) * s`` with ``s = pivot or h``.

    ``pivot`` lets callers use the actual diagonal scale ``sqrt(h**2 b + 4 eps**2)``
    instead of ``h``.  Level 0 stands for the entries of ``A`` itself and
    returns ``max(s, eps**2 / s)``.
    """
    if k < 0 or epsilon <= 0 or h <= 0:
        raise InvalidArgument("need k >= 0, epsilon > 0, h > 0")
    s = h if pivot is None else pivot
    if k == 0:
        return Magnitude(0, math.log2(max(s, epsilon**2 / s)))
    return Magnitude(k, 2 * (k + 1) * math.log2(epsilon / s) + math.log2(s))


def exact_nonzeros(N: int) -> int:
    if N < 2:
        raise InvalidArgument(f"N must be >= 2, got {N}")
    m = N - 1
    return m**3 + m - 1


def per_level_count(N: int, k: int) -> int:
    """Number of level-``k`` fill entries in the whole factor."""
    m = N - 1
    if not 1 <= k <= m:
        raise InvalidArgument(f"level {k} outside 1..{m}")
    if k == 1:
        return (m - 1) * (m - 1)
    if k == 2:
        return (m - 1) * (m - 2)
    return (m - 1) * (2 * m - 2 * k + 1)


def cumulative_count(N: int, p: int) -> int:
    """Number of fill entries at level ``p`` or deeper."""
    m = N - 1
    if not 1 <= p <= m:
        raise InvalidArgument(f"level {p} outside 1..{m}")
    if p == 1:
        return (m - 1) ** 3
    if p == 2:
        return (m - 2) * (m - 1) ** 2
    return (m - 1) * (m - p + 1) ** 2


def tail_count(N: int, p: int) -> int:
    """``cumulative_count`` extended to all integers: everything below level 1 is all fill, past m is nothing."""
    m = N - 1
    if m < 2 or p > m:
        return 0
    return cumulative_count(N, max(p, 1))


def threshold_level(N: int, epsilon: float, threshold: float, b: float | None = None) -> float:
    """Real level ``k`` at which level magnitudes reach ``threshold``.

    With ``b=None`` this solves ``(eps N)**(2(k+1)) = threshold * N`` as is.
    Passing the reaction coefficient ``b`` replaces the mesh width by the
    pivot scale ``sqrt(b h**2 + 4 eps**2)`` of the uniform-mesh matrix.
    """
    if N < 1 or epsilon <= 0 or threshold <= 0:
        raise InvalidArgument("need N >= 1, epsilon > 0, threshold > 0")
    if epsilon * N >= 1:
        raise NoSolution(f"eps*N = {epsilon * N:g} >= 1: level magnitudes do not decay")
    h = 1.0 / N
    s = h if b is None else math.sqrt(b * h * h + 4 * epsilon * epsilon)
    return (math.log(threshold) - math.log(s)) / (2 * math.log(epsilon / s)) - 1


@dataclass(frozen=True)
class FillPrediction:
    N: int
    epsilon: float
    exact_nonzeros: int
    k_subnormal: int | None
    k_zero: int | None
    predicted_subnormals: int
    predicted_underflow_zeros: int
    per_level_counts: dict[int, int] = field(repr=False)

    @property
    def predicted_nonzeros(self) -> int:
        return self.exact_nonzeros - self.predicted_underflow_zeros

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "epsilon": self.epsilon,
            "exact_nonzeros": self.exact_nonzeros,
            "nonzeros": self.predicted_nonzeros,
            "subnormals": self.predicted_subnormals,
            "underflow_zeros": self.predicted_underflow_zeros,
            "k_subnormal": self.k_subnormal,
            "k_zero": self.k_zero,
            "per_level_counts": {str(k): v for k, v in self.per_level_counts.items() if v},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> FillPrediction:
        return cls(
            N=d["N"],
            epsilon=d["epsilon"],
            exact_nonzeros=d["exact_nonzeros"],
            k_subnormal=d["k_subnormal"],
            k_zero=d["k_zero"],
            predicted_subnormals=d["subnormals"],
            predicted_underflow_zeros=d["underflow_zeros"],
            per_level_counts={int(k): v for k, v in d["per_level_counts"].items()},
        )


def predict(N: int, epsilon: float, b: float = 1.0) -> FillPrediction:
    """Predict subnormal and underflow-zero counts of the IEEE factor on the uniform mesh.

    Outside the singularly perturbed regime (``eps * N >= 1``) magnitudes do
    not decay with level and nothing is predicted to underflow.
    """
    if N < 3:
        raise InvalidArgument(f"predict needs N >= 3, got {N}")
    m = N - 1
    levels = {k: per_level_count(N, k) for k in range(1, m + 1)}
    if epsilon * N >= 1:
        k_sub = k_zero = None
        sub = zeros = 0
    else:
        k_sub = max(1, math.ceil(threshold_level(N, epsilon, REALMIN, b)))
        k_zero = max(1, math.ceil(threshold_level(N, epsilon, DENORM_MIN, b)))
        zeros = tail_count(N, k_zero)
        sub = tail_count(N, k_sub) - zeros
    return FillPrediction(
        N=N,
        epsilon=epsilon,
        exact_nonzeros=exact_nonzeros(N),
        k_subnormal=k_sub,
        k_zero=k_zero,
        predicted_subnormals=sub,
        predicted_underflow_zeros=zeros,
        per_level_counts=levels,
    )


def g_of_N(N: float) -> float:
    """Largest eps for which an N-interval uniform grid produces factor entries below realmin."""
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    return 2.0 ** (-511.0 / N) * N ** (1.0 / (2 * N) - 1)
