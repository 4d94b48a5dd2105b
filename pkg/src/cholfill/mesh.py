"""One-dimensional meshes and the reaction-diffusion problem description.

The 2D grid is the tensor product of two ``Mesh1D`` objects with the same
interval count.  Two kinds are supported: uniform, and the piecewise-uniform
Shishkin mesh with fine bands of width ``tau`` at both ends.
"""

from __future__ import annotations

import configparser
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import InvalidArgument

GridFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


class MeshKind(str, enum.Enum):
    UNIFORM = "uniform"
    SHISHKIN = "shishkin"


@dataclass(frozen=True, eq=False)
class Mesh1D:
    points: np.ndarray
    widths: np.ndarray
    kind: MeshKind
    tau: float | None = None

    def __post_init__(self):
        self.points.setflags(write=False)
        self.widths.setflags(write=False)

    @property
    def N(self) -> int:
        return len(self.widths)

    @property
    def half_sums(self) -> np.ndarray:
        """Dual widths (h_i + h_{i+1}) / 2 at the interior points 1..N-1."""
        return (self.widths[:-1] + self.widths[1:]) / 2

    def __eq__(self, other):
        if not isinstance(other, Mesh1D):
            return NotImplemented
        return (
            self.kind == other.kind
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.widths, other.widths)
        )


def uniform_mesh(N: int) -> Mesh1D:
    if N < 2:
        raise InvalidArgument(f"uniform mesh needs N >= 2, got {N}")
    points = np.arange(N + 1, dtype=float) / N
    widths = np.full(N, 1.0 / N)
    return Mesh1D(points, widths, MeshKind.UNIFORM)


def shishkin_tau(N: int, epsilon: float, beta: float = 1.0, sigma: float = 2.0) -> float:
    return min(0.25, sigma * epsilon / beta * math.log(N))


def shishkin_mesh(N: int, epsilon: float, beta: float = 1.0, sigma: float = 2.0) -> Mesh1D:
    """Piecewise-uniform mesh: N/4 cells on [0, tau], N/2 on [tau, 1-tau], N/4 on [1-tau, 1].

    Collapses to ``uniform_mesh(N)`` once the transition point is capped at 1/4.
    """
    if N < 4 or N % 4:
        raise InvalidArgument(f"Shishkin mesh needs N divisible by 4, got {N}")
    if min(epsilon, beta, sigma) <= 0:
        raise InvalidArgument("epsilon, beta and sigma must be positive")
    tau = shishkin_tau(N, epsilon, beta, sigma)
    if tau == 0.25:
        return uniform_mesh(N)
    q = N // 4
    fine = tau / q
    coarse = (1 - 2 * tau) / (2 * q)
    widths = np.concatenate([np.full(q, fine), np.full(2 * q, coarse), np.full(q, fine)])
    i = np.arange(N + 1, dtype=float)
    points = np.empty(N + 1)
    points[: q + 1] = i[: q + 1] * fine
    points[q : 3 * q + 1] = tau + (i[q : 3 * q + 1] - q) * coarse
    points[3 * q :] = 1.0 - (N - i[3 * q :]) * fine
    return Mesh1D(points, widths, MeshKind.SHISHKIN, tau)


def make_mesh(kind: MeshKind | str, N: int, epsilon: float, beta: float = 1.0, sigma: float = 2.0) -> Mesh1D:
    if MeshKind(kind) is MeshKind.SHISHKIN:
        return shishkin_mesh(N, epsilon, beta, sigma)
    return uniform_mesh(N)


def _const(c: float) -> GridFunction:
    return lambda x, y: np.full(np.broadcast(x, y).shape, c)


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients of -eps^2 Lap u + b u = f on the unit square, u = g on the boundary."""

    epsilon: float
    beta: float = 1.0
    b: GridFunction = field(default=_const(1.0), repr=False)
    f: GridFunction = field(default=_const(1.0), repr=False)
    g: GridFunction = field(default=_const(0.0), repr=False)
    name: str = "ones"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidArgument(f"epsilon must be positive, got {self.epsilon}")
        if not self.beta > 0:
            raise InvalidArgument(f"beta must be positive, got {self.beta}")


def _ones(epsilon, beta):
    return ProblemSpec(epsilon, beta, b=_const(beta**2), name="ones")


def _constant_solution(epsilon, beta):
    # f = b and g = 1 make u = 1 the exact discrete solution
    b = lambda x, y: beta**2 + x * y
    return ProblemSpec(epsilon, beta, b=b, f=b, g=_const(1.0), name="constant-solution")


def _varying(epsilon, beta):
    b = lambda x, y: beta**2 * (1.5 + 0.5 * np.sin(np.pi * x) * np.cos(np.pi * y))
    f = lambda x, y: np.exp(x - y)
    return ProblemSpec(epsilon, beta, b=b, f=f, name="varying")


PROBLEMS: dict[str, Callable[[float, float], ProblemSpec]] = {
    "ones": _ones,
    "constant-solution": _constant_solution,
    "varying": _varying,
}


def get_problem(name: str, epsilon: float, beta: float = 1.0) -> ProblemSpec:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise InvalidArgument(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(epsilon, beta)


@dataclass(frozen=True)
class ProblemConfig:
    N: int
    epsilon: float
    beta: float = 1.0
    sigma: float = 2.0
    mesh: MeshKind = MeshKind.UNIFORM
    problem: str = "ones"

    def spec(self) -> ProblemSpec:
        return get_problem(self.problem, self.epsilon, self.beta)

    def meshes(self) -> tuple[Mesh1D, Mesh1D]:
        mx = make_mesh(self.mesh, self.N, self.epsilon, self.beta, self.sigma)
        return mx, mx


def load_config(path: str | Path) -> ProblemConfig:
    """Read an INI-style file with a ``[problem]`` section.

    Recognised keys: N, epsilon, beta, sigma, mesh, problem.
    """
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(path)
    sec = parser["problem"]
    return ProblemConfig(
        N=sec.getint("N"),
        epsilon=sec.getfloat("epsilon"),
        beta=sec.getfloat("beta", 1.0),
        sigma=sec.getfloat("sigma", 2.0),
        mesh=MeshKind(sec.get("mesh", "uniform")),
        problem=sec.get("problem", "ones"),
    )
