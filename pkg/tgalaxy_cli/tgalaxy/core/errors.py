"""
Exception hierarchy for the toolkit.

Every failure an operation can signal is a subclass of TGalaxyError so the CLI
can map library errors onto exit codes in one place.
"""
from typing import Optional


class TGalaxyError(Exception):
    """Root of all toolkit errors."""


# ordinal
class DominanceError(TGalaxyError, ArithmeticError):
    pass


class EmptySetError(TGalaxyError, ValueError):
    pass


class BelowValidFromError(TGalaxyError, ValueError):
    pass


class OmegaPowError(TGalaxyError, ValueError):
    pass


class SyntaxPositionError(TGalaxyError, ValueError):
    """Parse failure that knows where in the text it happened."""

    def __init__(self, message: str, text: str = "", position: Optional[int] = None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class OrdinalSyntaxError(SyntaxPositionError):
    pass


class PresentationSyntaxError(SyntaxPositionError):
    pass


# wgraph / metric
class InvalidPresentation(TGalaxyError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        super().__init__(f"presentation has {len(self.violations)} violation(s): {lines}")


class UnknownNode(TGalaxyError, KeyError):
    def __str__(self):
        return f"unknown node: {self.args[0] if self.args else ''}"


class InvalidWalk(TGalaxyError):
    pass


class InvalidDepth(TGalaxyError, ValueError):
    pass


class Disconnected(TGalaxyError):
    pass


class BoundTooSmall(TGalaxyError):
    pass


class FitFailure(TGalaxyError):
    pass


# ranks and sections
class RankAboveGraph(TGalaxyError):
    pass


class RankMismatch(TGalaxyError):
    pass


class ArrowOmegaRank(TGalaxyError):
    pass


class RankOrder(TGalaxyError):
    pass


class NotIncident(TGalaxyError):
    pass


class HypothesisViolated(TGalaxyError):
    pass


class SectionNotNested(TGalaxyError):
    pass


# hypernodes and galaxies
class ContextMismatch(TGalaxyError):
    pass


class NotMaximal(TGalaxyError):
    pass


class NoPrincipalReference(TGalaxyError):
    pass


class NotArmIndexed(TGalaxyError):
    pass
