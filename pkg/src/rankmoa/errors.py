"""Exception types shared across the package."""


class ProblemFormatError(ValueError):
    """A problem file failed to parse or validate."""


class QualificationError(RuntimeError):
    """An operation requires a certified constraint qualification that fails."""


class DivergenceError(RuntimeError):
    """The iterative solver detected objective blow-up."""
