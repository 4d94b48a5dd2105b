"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class ModelViolation(ValueError):
    """The reaction coefficient breaks the positivity assumption b >= beta**2 > 0."""


class NotPositiveDefinite(ArithmeticError):
    def __init__(self, column: int, pivot: float):
        self.column = column
        self.pivot = pivot
        super().__init__(f"nonpositive pivot {pivot!r} at column {column}")


class NoSolution(ValueError):
    """Threshold equation has no level solution (no decay when eps*N >= 1)."""
