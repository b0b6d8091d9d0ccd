"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class JetGroupoidError(Exception):
    """Base class for all errors raised by jetgroupoid."""


# -- jet arithmetic ---------------------------------------------------------


class FieldMismatch(JetGroupoidError):
    pass


class DivisionByNonUnit(JetGroupoidError):
    pass


class NonPointedInner(JetGroupoidError):
    pass


class SingularLinearPart(JetGroupoidError):
    pass


# -- system DSL ---------------------------------------------------------------


class DSLSyntaxError(JetGroupoidError):
    def __init__(self, line: int, col: int, expected: str, found: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        msg = f"line {line}, col {col}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)


class UnknownVariable(JetGroupoidError):
    def __init__(self, name: str, line: int | None = None):
        self.name = name
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"unknown variable {name!r}{where}")


class ArityMismatch(JetGroupoidError):
    pass


class SystemValidationError(JetGroupoidError):
    pass


class ZeroDenominatorLiteral(SystemValidationError):
    pass


class FiberednessViolation(SystemValidationError):
    def __init__(self, component: str, variables):
        self.component = component
        self.variables = tuple(variables)
        super().__init__(
            f"component {component!r} depends on fiber variable(s) "
            f"{', '.join(self.variables)}"
        )


class EvalDivisionByZero(JetGroupoidError):
    """A denominator vanished during evaluation (pole or indeterminacy)."""


class DegreeOverflow(JetGroupoidError):
    pass


class PoleSaturated(JetGroupoidError):
    pass


# -- prolongation -------------------------------------------------------------


class IndeterminacyPoint(JetGroupoidError):
    def __init__(self, message: str = "map undefined at this frame", step: int | None = None):
        self.step = step
        if step is not None:
            message = f"{message} (iterate {step})"
        super().__init__(message)


class DegenerateImage(JetGroupoidError):
    pass


class OrderOverflow(JetGroupoidError):
    pass


# -- dimension probe ----------------------------------------------------------


class Unsaturated(JetGroupoidError):
    def __init__(self, message: str, estimate=None):
        self.estimate = estimate
        super().__init__(message)


# -- confluence ---------------------------------------------------------------


class NotIdentityAtSpecialValue(JetGroupoidError):
    def __init__(self, component: str):
        self.component = component
        super().__init__(f"component {component!r} is not the identity at the special value")


class PoleAtSpecialValue(JetGroupoidError):
    def __init__(self, component: str):
        self.component = component
        super().__init__(f"component {component!r} has a pole at the special value")


class RestrictionUndefined(JetGroupoidError):
    pass


class UnboundParameter(JetGroupoidError):
    def __init__(self, names):
        self.names = tuple(names)
        super().__init__(f"parameter(s) without a value: {', '.join(self.names)}")
