"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class InfoValueError(Exception):
    """Base class for all package errors."""


class NodeNotFound(InfoValueError, KeyError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"unknown node {node!r}")

    def __str__(self) -> str:
        return self.args[0]


class CyclicGraph(InfoValueError, ValueError):
    """Raised when edges close a directed cycle. ``cycle`` holds the node sequence."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("directed cycle: " + " -> ".join(map(str, self.cycle)))


class InvalidGraph(InfoValueError, ValueError):
    pass


class InvalidQuery(InfoValueError, ValueError):
    pass


class InvalidModel(InfoValueError, ValueError):
    """A model failed validation; ``violations`` lists every problem found."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid model: {lines}")


class ModelParseError(InfoValueError, ValueError):
    def __init__(self, message: str, location: str | None = None):
        self.location = location
        text = f"{location}: {message}" if location else message
        super().__init__(text)


class UnsupportedReformulation(InfoValueError):
    pass


class NonCanonicalQuery(InfoValueError):
    pass


class WouldCreateCycle(InfoValueError, ValueError):
    pass


class IncompleteAssignment(InfoValueError, ValueError):
    pass


class ModelTooLarge(InfoValueError):
    def __init__(self, cap: int, actual: int):
        self.cap = cap
        self.actual = actual
        super().__init__(
            f"enumeration needs {actual} scenario-policy evaluations, cap is {cap}"
        )


class CurveRangeError(InfoValueError, ValueError):
    pass


class BracketError(InfoValueError, ArithmeticError):
    pass


class InvalidCost(InfoValueError, ValueError):
    pass
