"""Fibered rational systems, vector fields and parametric families."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import permutations
from typing import Mapping, Sequence

from ..errors import (
    ArityMismatch,
    DSLSyntaxError,
    FiberednessViolation,
    UnboundParameter,
    UnknownVariable,
    ZeroDenominatorLiteral,
)
from .expr import (
    ZERO,
    Div,
    Expr,
    Num,
    Var,
    add,
    const,
    free_variables,
    mul,
    sub,
    substitute,
    symbolic_derivative,
    to_text,
)
from .parser import _Cursor, _expr, parse_rational, tokenize
from .zerotest import ZeroTest, expr_probably_zero

KEYWORDS = ("system", "base", "fiber", "params", "sigma", "map", "vfield", "let")


@dataclass(frozen=True)
class FiberedSystem:
    """A rational map Phi of M lifting sigma on B, with optional parameters.

    ``sigma`` has one expression per base variable, ``maps`` one per fiber
    variable.  ``vfield`` holds optional vector-field components and
    ``bindings`` optional parameter values.
    """

    name: str
    base: tuple
    fiber: tuple
    params: tuple = ()
    sigma: Mapping[str, Expr] = field(default_factory=dict)
    maps: Mapping[str, Expr] = field(default_factory=dict)
    vfield: Mapping[str, Expr] = field(default_factory=dict)
    bindings: Mapping[str, Fraction] = field(default_factory=dict)

    @property
    def q(self) -> int:
        return len(self.fiber)

    @property
    def variables(self) -> tuple:
        return self.base + self.fiber + self.params

    @property
    def phase_dim(self) -> int:
        return len(self.base) + len(self.fiber)

    def sigma_exprs(self) -> list[Expr]:
        return [self.sigma[b] for b in self.base]

    def map_exprs(self) -> list[Expr]:
        return [self.maps[x] for x in self.fiber]

    def bind(self, values: Mapping[str, object] | None = None, **kw) -> "FiberedSystem":
        values = dict(values or {}, **kw)
        for name in values:
            if name not in self.params:
                raise UnknownVariable(name)
        merged = dict(self.bindings)
        merged.update({k: Fraction(v) if not hasattr(v, "field") else v for k, v in values.items()})
        return replace(self, bindings=merged)

    def unbound_params(self) -> list[str]:
        return [p for p in self.params if p not in self.bindings]

    def parameter_values(self, fld) -> dict:
        missing = self.unbound_params()
        if missing:
            raise UnboundParameter(missing)
        return {p: fld.convert(v) for p, v in self.bindings.items()}

    def to_text(self) -> str:
        lines = [f"system {self.name}"]
        if self.base:
            lines.append("base " + " ".join(self.base))
        lines.append("fiber " + " ".join(self.fiber))
        if self.params:
            lines.append("params " + " ".join(self.params))
        for p, v in self.bindings.items():
            v = Fraction(v)
            lines.append(f"let {p} = {v.numerator}" + (f"/{v.denominator}" if v.denominator != 1 else ""))
        for b in self.base:
            lines.append(f"sigma {b} -> {to_text(self.sigma[b])}")
        for x in self.fiber:
            lines.append(f"map {x} -> {to_text(self.maps[x])}")
        for v, e in self.vfield.items():
            lines.append(f"vfield {v} -> {to_text(e)}")
        return "\n".join(lines) + "\n"

    def vector_field(self) -> "VectorFieldSpec":
        return VectorFieldSpec(
            base=self.base,
            fiber=self.fiber,
            params=self.params,
            base_components={b: self.vfield.get(b, ZERO) for b in self.base},
            fiber_components={x: self.vfield.get(x, ZERO) for x in self.fiber},
        )


@dataclass(frozen=True)
class VectorFieldSpec:
    """X = sum c_i(b) d/db_i + sum a_i(x, b) d/dx_i."""

    base: tuple
    fiber: tuple
    params: tuple
    base_components: Mapping[str, Expr]
    fiber_components: Mapping[str, Expr]

    def __post_init__(self):
        for b, e in self.base_components.items():
            bad = sorted(free_variables(e) & set(self.fiber))
            if bad:
                raise FiberednessViolation(f"vfield {b}", bad)

    def component(self, name: str) -> Expr:
        if name in self.base_components:
            return self.base_components[name]
        return self.fiber_components[name]

    def components(self) -> dict:
        return {**self.base_components, **self.fiber_components}


@dataclass(frozen=True)
class ParamFamily:
    """A system with one distinguished parameter and its special value."""

    system: FiberedSystem
    param: str
    special: Fraction

    def __post_init__(self):
        if self.param not in self.system.params:
            raise UnknownVariable(self.param)
        object.__setattr__(self, "special", Fraction(self.special))


@dataclass
class ValidationReport:
    name: str
    base: tuple
    fiber: tuple
    params: tuple
    fibered: bool
    warnings: list
    jacobian_test: ZeroTest | None = None

    def as_report(self) -> dict:
        return {
            "system": self.name,
            "base": list(self.base),
            "fiber": list(self.fiber),
            "params": list(self.params),
            "fibered": self.fibered,
            "warnings": list(self.warnings),
        }


# -- parsing ---------------------------------------------------------------------


def _idents(c: _Cursor) -> list[str]:
    out = []
    while c.tok.kind == "ident":
        out.append(c.advance().text)
    c.expect_end()
    return out


def _has_zero_literal_denominator(e: Expr) -> bool:
    stack, seen = [e], set()
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Div) and isinstance(node.right, Num) and node.right.value == 0:
            return True
        for child in ("left", "right", "operand", "base"):
            sub_node = getattr(node, child, None)
            if isinstance(sub_node, Expr):
                stack.append(sub_node)
    return False


def parse_system(text: str) -> FiberedSystem:
    """Parse a system-definition file into a resolved :class:`FiberedSystem`."""
    name = None
    decl: dict[str, list[str]] = {"base": [], "fiber": [], "params": []}
    seen_decl = set()
    comps: dict[str, dict] = {"sigma": {}, "map": {}, "vfield": {}}
    lines_of: dict[tuple, int] = {}
    bindings: dict[str, Fraction] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = tokenize(raw, lineno)
        if tokens[0].kind == "end":
            continue
        c = _Cursor(tokens)
        head = c.tok
        if head.kind != "ident" or head.text not in KEYWORDS:
            raise DSLSyntaxError(head.line, head.col, "a keyword (" + ", ".join(KEYWORDS) + ")", head.text)
        c.advance()
        kw = head.text
        if kw == "system":
            if name is not None:
                raise DSLSyntaxError(head.line, head.col, "a single 'system' line", "system")
            name = c.expect_kind("ident", "a system name").text
            c.expect_end()
        elif kw in decl:
            if kw in seen_decl:
                raise DSLSyntaxError(head.line, head.col, f"a single '{kw}' line", kw)
            seen_decl.add(kw)
            decl[kw] = _idents(c)
            if kw != "params" and not decl[kw]:
                raise DSLSyntaxError(head.line, c.tok.col, "at least one identifier", "end of line")
        elif kw == "let":
            p = c.expect_kind("ident", "a parameter name").text
            c.expect("=", "'='")
            bindings[p] = parse_rational(c.tokens[c.i :])
            lines_of[("let", p)] = lineno
        else:
            target = c.expect_kind("ident", "a variable name").text
            c.expect("->", "'->'")
            e = _expr(c)
            c.expect_end()
            if target in comps[kw]:
                raise ArityMismatch(f"line {lineno}: duplicate {kw} component for {target!r}")
            comps[kw][target] = e
            lines_of[(kw, target)] = lineno

    if name is None:
        raise DSLSyntaxError(1, 1, "a 'system <name>' line", "end of file")
    if not decl["fiber"]:
        raise ArityMismatch("no fiber variables declared")
    base, fiber, params = (tuple(decl[k]) for k in ("base", "fiber", "params"))
    everything = base + fiber + params
    dup = sorted({v for v in everything if everything.count(v) > 1})
    if dup:
        raise ArityMismatch(f"variable(s) declared twice: {', '.join(dup)}")
    known = set(everything)

    for (kw, target), lineno in lines_of.items():
        if kw == "let":
            if target not in params:
                raise UnknownVariable(target, lineno)
            continue
        allowed = {"sigma": base, "map": fiber, "vfield": base + fiber}[kw]
        if target not in allowed:
            if target not in known:
                raise UnknownVariable(target, lineno)
            raise ArityMismatch(f"line {lineno}: {kw} target {target!r} is not a valid variable for {kw}")
        unknown = sorted(free_variables(comps[kw][target]) - known)
        if unknown:
            raise UnknownVariable(unknown[0], lineno)

    missing = [f"sigma {b}" for b in base if b not in comps["sigma"]]
    missing += [f"map {x}" for x in fiber if x not in comps["map"]]
    if missing:
        raise ArityMismatch("missing component(s): " + ", ".join(missing))

    for kw in comps:
        for target, e in comps[kw].items():
            if _has_zero_literal_denominator(e):
                raise ZeroDenominatorLiteral(
                    f"line {lines_of[(kw, target)]}: {kw} {target} divides by the literal 0"
                )

    return FiberedSystem(
        name=name,
        base=base,
        fiber=fiber,
        params=params,
        sigma={b: comps["sigma"][b] for b in base},
        maps={x: comps["map"][x] for x in fiber},
        vfield=dict(comps["vfield"]),
        bindings=bindings,
    )


# -- validation and constructions -------------------------------------------------


def determinant_expr(matrix: Sequence[Sequence[Expr]]) -> Expr:
    """Leibniz-formula determinant of a small matrix of expressions."""
    n = len(matrix)
    total: Expr = ZERO
    for perm in permutations(range(n)):
        term: Expr = Num(1)
        for i, j in enumerate(perm):
            term = mul(term, matrix[i][j])
        inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        total = sub(total, term) if inversions % 2 else add(total, term)
    return total


def fiber_jacobian(sys: FiberedSystem) -> list[list[Expr]]:
    return [[symbolic_derivative(sys.maps[x], y) for y in sys.fiber] for x in sys.fiber]


def validate_fibered(sys: FiberedSystem, trials: int = 20, seed: int = 0) -> ValidationReport:
    """Check that sigma ignores the fiber; warn when the fiber Jacobian looks degenerate."""
    fiber = set(sys.fiber)
    for b in sys.base:
        bad = sorted(free_variables(sys.sigma[b]) & fiber)
        if bad:
            raise FiberednessViolation(f"sigma {b}", bad)
    for b in sys.base:
        if b in sys.vfield:
            bad = sorted(free_variables(sys.vfield[b]) & fiber)
            if bad:
                raise FiberednessViolation(f"vfield {b}", bad)
    warnings = []
    for kw, table in (("sigma", sys.sigma), ("map", sys.maps), ("vfield", sys.vfield)):
        for target, e in table.items():
            if _has_zero_literal_denominator(e):
                warnings.append(f"{kw} {target} divides by the literal 0")
    det = determinant_expr(fiber_jacobian(sys))
    jac = expr_probably_zero(det, trials=trials, seed=seed)
    if jac.is_zero:
        warnings.append("fiber Jacobian determinant vanishes identically (probabilistic): map is not dominant on fibers")
    return ValidationReport(sys.name, sys.base, sys.fiber, sys.params, True, warnings, jac)


def compose_systems(second: FiberedSystem, first: FiberedSystem) -> FiberedSystem:
    """The system ``second o first`` (apply ``first``, then ``second``)."""
    if (second.base, second.fiber, second.params) != (first.base, first.fiber, first.params):
        raise ArityMismatch("systems must share base, fiber and parameter variables")
    mapping = {b: first.sigma[b] for b in first.base}
    mapping.update({x: first.maps[x] for x in first.fiber})
    return FiberedSystem(
        name=f"{second.name}_o_{first.name}",
        base=first.base,
        fiber=first.fiber,
        params=first.params,
        sigma={b: substitute(second.sigma[b], mapping) for b in first.base},
        maps={x: substitute(second.maps[x], mapping) for x in first.fiber},
        bindings={**first.bindings, **second.bindings},
    )


def promote_parameter(sys: FiberedSystem, param: str) -> FiberedSystem:
    """Treat a parameter as an extra base coordinate fixed by sigma."""
    if param not in sys.params:
        raise UnknownVariable(param)
    bindings = {k: v for k, v in sys.bindings.items() if k != param}
    return FiberedSystem(
        name=sys.name,
        base=sys.base + (param,),
        fiber=sys.fiber,
        params=tuple(p for p in sys.params if p != param),
        sigma={**sys.sigma, param: Var(param)},
        maps=dict(sys.maps),
        vfield=dict(sys.vfield),
        bindings=bindings,
    )


def substitute_bindings(e: Expr, sys: FiberedSystem) -> Expr:
    return substitute(e, {p: const(v) for p, v in sys.bindings.items()})


def linear_combination(coeffs: Sequence, exprs: Sequence[Expr]) -> Expr:
    out: Expr = ZERO
    for c, e in zip(coeffs, exprs):
        term = mul(const(c), e)
        out = add(out, term)
    return out


__all__ = [
    "FiberedSystem",
    "VectorFieldSpec",
    "ParamFamily",
    "ValidationReport",
    "parse_system",
    "validate_fibered",
    "compose_systems",
    "promote_parameter",
    "determinant_expr",
    "fiber_jacobian",
    "substitute_bindings",
    "linear_combination",
]
