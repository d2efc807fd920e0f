"""Exception types raised across the package.

Every error derives from ``ShapecalcError`` so the command line can turn any
of them into a one-line diagnostic with exit code 3.
"""


class ShapecalcError(ValueError):
    pass


class DuplicateLabel(ShapecalcError):
    pass


class UnknownLabel(ShapecalcError):
    pass


class CycleDetected(ShapecalcError):
    pass


class NotMonotone(ShapecalcError):
    pass


class CodomainMismatch(ShapecalcError):
    pass


class JoinsUndefined(ShapecalcError):
    pass


class MissingJoins(ShapecalcError):
    pass


class NoInitialObject(ShapecalcError):
    pass


class EmptyFiberOverInitial(ShapecalcError):
    pass


class SizeLimit(ShapecalcError):
    pass


class HypothesisViolated(ShapecalcError):
    pass


class NotFull(ShapecalcError):
    pass


class NotReduced(ShapecalcError):
    pass


class NotSurjective(ShapecalcError):
    pass


class NotCubical(ShapecalcError):
    pass


class NotShape(ShapecalcError):
    pass


class InaneShape(ShapecalcError):
    pass


class SquareNotCommuting(ShapecalcError):
    pass


class InitialFiberViolation(ShapecalcError):
    pass


class InconsistentClass(ShapecalcError):
    pass


class DocumentError(ShapecalcError):
    """Malformed JSON input."""


class ConsistencyError(AssertionError):
    """An internal invariant failed. This means a bug, not bad input."""


def check(condition, message):
    if not condition:
        raise ConsistencyError(message)
