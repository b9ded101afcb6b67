"""Exception hierarchy shared by every module."""

from __future__ import annotations


class RenetError(Exception):
    """Base class for all engine errors."""


class InputError(RenetError):
    """Malformed user input (nets, rules, files)."""


class UnknownLetter(InputError):
    pass


class PortIndexOutOfRange(InputError):
    pass


class PortDoubleOccupied(InputError):
    pass


class DuplicateTag(InputError):
    pass


class TagOnOccupiedPort(InputError):
    pass


class UnknownNode(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}" if line else message)


class BoundTooSmall(InputError):
    pass


class NotAPartition(InputError):
    pass


class DisconnectedBlock(InputError):
    pass


class DirectionMismatch(RenetError):
    pass


class NoFreePortOnImage(RenetError):
    pass


class ConditionViolated(RenetError):
    pass


class BoundaryMismatch(RenetError):
    pass


class PlaceholderArityMismatch(RenetError):
    pass


class HeightUndefined(RenetError):
    pass


class BudgetExhausted(RenetError):
    """A bounded computation stopped before reaching its fixpoint.

    ``partial`` carries whatever was computed before the cutoff; callers
    treat the verdict as unknown, never as a negative answer.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class StageBudgetExhausted(BudgetExhausted):
    def __init__(self, stage: str, cause: BudgetExhausted):
        super().__init__(f"stage {stage!r}: {cause}", cause.partial)
        self.stage = stage


class SearchExhausted(BudgetExhausted):
    pass


class NotSisters(RenetError):
    pass


class NotInConceptAlphabet(RenetError):
    pass


class ConstructionUnsupported(RenetError):
    pass


class RedexStraddlesUnsupported(ConstructionUnsupported):
    pass


class ClosureViolation(RenetError):
    pass


class NonTerminatingColouring(RenetError):
    def __init__(self, message: str, cycle=()):
        super().__init__(message)
        self.cycle = tuple(cycle)


class MissingInput(RenetError):
    pass


class NoFixpointWithinBudget(BudgetExhausted):
    pass


class GeneratorUnmapped(RenetError):
    pass


class CorruptEntry(RenetError):
    pass
