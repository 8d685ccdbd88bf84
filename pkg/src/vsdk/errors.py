"""Exception hierarchy shared by the library and the command line tool.

Each class carries the process exit code the CLI uses when it escapes.
"""


class VSDKError(Exception):
    exit_code = 1


class ParameterError(VSDKError, ValueError):
    """Invalid argument combination or out-of-range parameter."""

    exit_code = 2


class DomainError(ParameterError):
    """A numeric input lies outside the domain of an operation."""


class ParseError(VSDKError, ValueError):
    exit_code = 3


class ValidationError(ParseError):
    """Well-formed file whose contents violate a value constraint (e.g. NaN)."""


class ConditioningError(VSDKError, ArithmeticError):
    """The kernel system could not be factorized even after regularization."""

    exit_code = 4

    def __init__(self, message, lam=None):
        super().__init__(message)
        self.lam = lam


class ConvergenceError(VSDKError, RuntimeError):
    exit_code = 5


class DuplicateNodesWarning(UserWarning):
    pass
