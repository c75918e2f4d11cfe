"""Exception hierarchy.

Data problems (bad files, undeclared levels, degenerate columns) map to CLI
exit code 1; numerical failures (non-convergence, loss of definiteness) map
to exit code 2.
"""


class MixedGraphError(Exception):
    exit_code = 1

    def __init__(self, message, *, pair=None, column=None):
        super().__init__(message)
        self.pair = pair
        self.column = column

    def with_pair(self, pair, names=None):
        """Return a copy of this error tagged with the failing (j, k) pair."""
        label = pair if names is None else (names[pair[0]], names[pair[1]])
        err = type(self)(f"pair {label}: {self}", pair=pair, column=self.column)
        err.__cause__ = self
        return err


class DataError(MixedGraphError, ValueError):
    exit_code = 1


class ParseError(DataError):
    def __init__(self, message, *, row=None, col=None, **kw):
        super().__init__(message, **kw)
        self.row = row
        self.col = col


class ValidationError(DataError):
    pass


class DegenerateError(DataError):
    """Constant column, zero variance, or otherwise non-identifiable input."""


class NumericalError(MixedGraphError, ArithmeticError):
    exit_code = 2


class ConvergenceError(NumericalError):
    def __init__(self, message, *, residual=None, trace=None, **kw):
        super().__init__(message, **kw)
        self.residual = residual
        self.trace = trace
