"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when an operation receives arguments outside its domain."""


class NumericFailureError(RuntimeError):
    """Raised when an iterative routine cannot reach its accuracy target.

    The ``stats`` attribute, when present, carries the partial solver
    statistics of the failed run.
    """

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats
