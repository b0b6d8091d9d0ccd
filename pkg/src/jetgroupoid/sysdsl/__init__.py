"""System-definition language: expressions, parser, systems, identity testing."""

from .expr import (
    Expr,
    Num,
    Var,
    const,
    eval_expr,
    free_variables,
    substitute,
    symbolic_derivative,
    to_text,
)
from .parser import parse_expr
from .system import (
    FiberedSystem,
    ParamFamily,
    ValidationReport,
    VectorFieldSpec,
    compose_systems,
    determinant_expr,
    fiber_jacobian,
    parse_system,
    promote_parameter,
    validate_fibered,
)
from .zerotest import ZeroTest, combine, expr_probably_zero, schwartz_zippel_bound

__all__ = [
    "Expr",
    "Num",
    "Var",
    "const",
    "eval_expr",
    "free_variables",
    "substitute",
    "symbolic_derivative",
    "to_text",
    "parse_expr",
    "FiberedSystem",
    "ParamFamily",
    "ValidationReport",
    "VectorFieldSpec",
    "compose_systems",
    "determinant_expr",
    "fiber_jacobian",
    "parse_system",
    "promote_parameter",
    "validate_fibered",
    "ZeroTest",
    "combine",
    "expr_probably_zero",
    "schwartz_zippel_bound",
]
