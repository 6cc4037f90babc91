"""Exception types shared across the engine."""


class RevchorError(Exception):
    """Base class for all engine errors."""


class ProjectionUndefined(RevchorError):
    pass


class BudgetExhausted(RevchorError):
    pass


class StateBudgetExceeded(BudgetExhausted):
    pass


class DuplicateBinding(RevchorError):
    pass


class UnboundVariable(RevchorError):
    pass


class StaleRedex(RevchorError):
    pass


class NotCoinitial(RevchorError):
    pass


class ResidualMissing(RevchorError):
    pass


class NotFirstOrder(RevchorError):
    pass


class MalformedType(RevchorError):
    pass


class SourceError(RevchorError):
    """Syntax or resolution error in a source unit; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)
