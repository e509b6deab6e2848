"""Exception types surfaced by hierarchy setup and the solvers."""


class SetupError(RuntimeError):
    """Hierarchy construction could not complete.

    ``level`` is the 0-based index of the fine level being coarsened.
    """

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class NegativeEigenvalueError(SetupError):
    """The damping eigenvalue estimate was not positive.

    This is the breakdown traditional smoothed aggregation hits when the
    filtered matrix loses diagonal dominance.
    """

    def __init__(self, value, level=None):
        super().__init__(
            f"negative eigenvalue estimate {value:.6g} for prolongator damping"
            + ("" if level is None else f" on level {level}"),
            level=level,
        )
        self.value = value


class ZeroDiagonalError(SetupError):
    """A diagonal approximation has a zero entry, so D^-1 does not exist."""
