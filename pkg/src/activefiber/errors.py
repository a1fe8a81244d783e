"""Exception hierarchy for the activefiber package."""


class ActiveFiberError(Exception):
    """Base class for all package errors."""


class DomainError(ActiveFiberError):
    """An input lies outside the mathematical domain of an operation."""


class InvertedElementError(ActiveFiberError):
    """An element maps to non-positive volume at a quadrature point."""

    def __init__(self, element: int, detail: str = ""):
        self.element = element
        msg = f"inverted element {element}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class OverflowGuardError(ActiveFiberError):
    """The passive-energy exponent exceeded the overflow guard.

    Raised instead of letting exp() produce inf inside a solve; the strain
    state is far outside the physiological range and the iteration is lost.
    """


class NonFiniteResidualError(ActiveFiberError):
    """A residual evaluation produced NaN or inf entries."""

    def __init__(self, rows):
        self.rows = list(rows)
        super().__init__(f"non-finite residual in rows {self.rows[:8]}"
                         + ("..." if len(self.rows) > 8 else ""))


class MeshError(ActiveFiberError):
    """Invalid mesh construction parameters or connectivity."""


class SolveError(ActiveFiberError):
    """A nonlinear solve failed in a way that cannot be reported softly."""


class ConfigError(ActiveFiberError):
    """A scenario configuration failed validation."""
