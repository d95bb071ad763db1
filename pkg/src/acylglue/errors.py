"""Exception hierarchy shared by all modules.

Validation failures raise subclasses of :class:`InvalidInputError`; negative
*results* (a hypothesis check that comes out false) are ordinary return
values, not exceptions, except where the caller explicitly asked to glue an
obstructed configuration.
"""


class AcylGlueError(Exception):
    """Base class for all library errors."""


class InvalidInputError(AcylGlueError, ValueError):
    """Malformed or inconsistent input data."""


class InsufficientSpectrumError(AcylGlueError):
    """A rate was requested beyond the cutoff of the computed root data."""


class CriticalRateError(AcylGlueError):
    """A weight sits on the wall of critical rates; the index is undefined."""


class ModelInconsistencyError(AcylGlueError):
    """Input data violates a structural identity of the model."""


class InsufficientDataError(AcylGlueError):
    """A check needs extra data (matrices) that was not supplied."""


class DatasetError(AcylGlueError):
    """Catalog dataset failed strict validation."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IllPosedBoundaryError(AcylGlueError):
    """A cap boundary condition is not well posed for some Fourier mode."""


class HypothesisViolatedError(AcylGlueError):
    """The matching kernel is nontrivial; the gluing hypothesis fails."""


class ContractionPreconditionError(AcylGlueError):
    """The smallness condition of the contraction lemma does not hold."""

    def __init__(self, norm_f0: float, bound: float):
        self.norm_f0 = norm_f0
        self.bound = bound
        super().__init__(
            f"|F(x0)| = {norm_f0:.6g} exceeds 1/(10 c_L^2 c_Q) = {bound:.6g}"
        )


class ConstantsInvalidError(AcylGlueError):
    """Observed contraction behaviour contradicts the supplied constants."""


class NoContractionStartError(AcylGlueError):
    """No grid value of the neck parameter satisfies the solve preconditions."""
