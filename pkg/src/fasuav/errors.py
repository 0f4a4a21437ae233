"""Exception types raised across the package."""


class InvalidSelectionError(ValueError):
    """Port selection is out of range or not strictly increasing."""


class DegenerateGeometryError(ValueError):
    """A distance that must be positive came out as zero."""


class OutOfDomainError(ValueError):
    """Compression ratio outside the load model's domain."""


class SegmentMismatchError(ValueError):
    """Recovered compression ratio does not lie on the requested segment."""


class SegmentInfeasibleError(ValueError):
    """Trace budget interval of a segment is empty."""


class NoFeasibleSolutionError(ValueError):
    """No segment of the load model admits a feasible power split."""


class InvalidCovarianceError(ValueError):
    """Covariance is not Hermitian positive semidefinite."""


class InvalidBudgetError(ValueError):
    """Negative transmit power budget."""


class InfeasibleReturnError(RuntimeError):
    """An ant cannot get back to the start cell in the remaining slots."""


class ConfigError(ValueError):
    """Config document failed to parse or validate.

    ``problems`` holds one ``(field_path, message)`` pair per violation.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = [f"{path}: {msg}" for path, msg in self.problems]
        super().__init__("invalid config:\n  " + "\n  ".join(lines))
