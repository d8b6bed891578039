"""Exception hierarchy. Each class maps to a stable CLI exit code."""


class EigenregError(Exception):
    """Base class for all errors raised by this package."""
    exit_code = 1


class DegenerateInputError(EigenregError):
    """Zero polynomial, variable-free input, or similar degenerate argument."""
    exit_code = 10


class NonUnivariateError(EigenregError):
    exit_code = 11


class WrongArityError(EigenregError):
    exit_code = 12


class EdgeNotOnPolygonError(EigenregError):
    exit_code = 13


class DegreeCapError(EigenregError):
    """Univariate factorization degree cap (64) exceeded."""
    exit_code = 14


class ParseError(EigenregError):
    exit_code = 15


class InvalidCodeError(EigenregError):
    """Not a valid 2-bridge code."""
    exit_code = 20


class InconsistentFamilyError(EigenregError):
    exit_code = 21


class EliminationCollapseError(EigenregError):
    exit_code = 22


class NoGeometricFactorError(EigenregError):
    exit_code = 23


class NoHyperbolicSolutionError(EigenregError):
    exit_code = 24


class NonCommutingInputError(EigenregError):
    exit_code = 30


class NotHandledError(EigenregError):
    """Matrix pair needs a field extension we do not construct."""
    exit_code = 31


class IndeterminateValueError(EigenregError):
    exit_code = 32


class UntemperedCurveError(EigenregError):
    exit_code = 33


class BranchPointError(EigenregError):
    exit_code = 40


class DivisorCollisionError(EigenregError):
    exit_code = 41


class InsufficientSamplesError(EigenregError):
    exit_code = 42


class OpenPathError(EigenregError):
    exit_code = 43


class ReconstructionFailureError(EigenregError):
    exit_code = 44


class DivergenceError(EigenregError):
    """Gluing-equation Newton solve left its basin."""
    exit_code = 50


class DeformationUnsupportedError(EigenregError):
    """Triangulation data carries no cusp equations for the requested cusp."""
    exit_code = 51


class SingularInputError(EigenregError):
    exit_code = 52
