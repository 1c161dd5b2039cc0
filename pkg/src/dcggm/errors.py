"""Exception hierarchy shared by the solvers and the harness.

``ValidationError`` subclasses signal bad arguments (CLI exit code 1);
``NumericalError`` subclasses signal a failure of the computation itself
(CLI exit code 2).
"""


class DcggmError(Exception):
    pass


class ValidationError(DcggmError):
    pass


class NumericalError(DcggmError):
    pass


class NotPositiveDefinite(NumericalError):
    """A matrix required to be positive definite is not."""


class NonConvergence(NumericalError):
    """An iterative solver exhausted its sweep budget."""


class EtaUnderflow(NumericalError):
    """The penalty-weight search shrank below its floor without success."""


class GenerationFailed(NumericalError):
    """Ground-truth generation failed after the retry budget."""


class ShrinkageFailed(NumericalError):
    """No shrinkage weight on the grid produced a positive definite matrix."""


class InvalidK(ValidationError):
    """Cardinality parameter outside its admissible range."""


class InvalidEdgeCount(ValidationError):
    """Requested edge count outside the generator's range."""


class InvalidFolds(ValidationError):
    """Fold count incompatible with the sample size."""


class DimensionMismatch(ValidationError):
    """Operands have incompatible shapes."""
