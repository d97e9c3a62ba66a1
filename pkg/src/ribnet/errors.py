"""Exception types raised by ribnet."""


class RibnetError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class InvalidData(RibnetError):
    """Dataset is structurally inadmissible or cannot be parsed."""

    exit_code = 2


class DimensionMismatch(InvalidData):
    pass


class IndexOutOfRange(InvalidData):
    pass


class PreconditionViolated(InvalidData):
    pass


class OmegaNotFound(RibnetError):
    """No even differential with the prescribed divisor exists for the data."""


class SingularSystem(RibnetError):
    """The Baker-Akhiezer system is singular (or too ill-conditioned) at u."""


class EvalAtPole(RibnetError):
    pass


class EvalAtEssentialSingularity(RibnetError):
    pass


class CollinearTriple(RibnetError):
    pass


class DegeneratePoint(RibnetError):
    pass
