"""Exception hierarchy shared by every stage of the pipeline."""


class LocalizationError(Exception):
    """Base class for all errors raised by rangeloc."""


class DegenerateInput(LocalizationError, ValueError):
    """Distances that cannot be realized by points in the plane."""


class CollinearNeighbors(LocalizationError, ValueError):
    """A neighbor triplet whose triangle has (numerically) zero area."""


class InconsistentMagnitudes(LocalizationError, ValueError):
    """No sign pattern makes the signed magnitudes sum to one."""


class NotZeroCase(LocalizationError, ValueError):
    pass


class AmbiguousZeroCase(LocalizationError, ValueError):
    pass


class NotAmbiguous(LocalizationError, ValueError):
    pass


class UnresolvableAmbiguity(LocalizationError, ValueError):
    pass


class SignResolutionError(LocalizationError):
    """Sign resolution failed for a specific sensor of a network."""

    def __init__(self, node, cause):
        self.node = node
        self.cause = cause
        super().__init__(f"sensor {node}: {type(cause).__name__}: {cause}")


class MissingCoefficient(LocalizationError, KeyError):
    pass


class IndexOutOfRange(LocalizationError, IndexError):
    pass


class NoConvergence(LocalizationError, ArithmeticError):
    pass


class DesignFailure(LocalizationError):
    """No diagonal gains were found for a cluster within the search budget."""

    def __init__(self, message, cluster=None):
        self.cluster = cluster
        super().__init__(message)


class NotSchur(LocalizationError):
    pass


class Diverged(LocalizationError, ArithmeticError):
    pass


class SingularSystem(LocalizationError, ArithmeticError):
    pass


class GenerationFailure(LocalizationError):
    pass


class ParseError(LocalizationError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class VersionMismatch(ParseError):
    pass
