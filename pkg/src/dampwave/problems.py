"""Problem definitions for the damped wave equation u_tt = u_xx - gamma(x) u_t + g(x,t).

A problem bundles the domain, damping coefficient, forcing, initial and
boundary data, and (optionally) an exact solution. Problems can be built in
code, taken from the builtin catalog, or loaded from a JSON document whose
coefficient fields are strings in a small expression language.

Expression grammar (standard precedence, highest first):

    power   :=  atom ['^' unary]          # right-associative
    unary   :=  '-' unary | power
    term    :=  unary {('*' | '/') unary}
    expr    :=  term {('+' | '-') term}
    atom    :=  NUMBER | 'x' | 't' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
    FUNC    :=  sin | cos | exp | sqrt | abs

Note '^' binds tighter than unary minus: -x^2 == -(x^2).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional


class ExpressionError(ValueError):
    """Base class for expression parsing and evaluation failures."""


class ExpressionSyntaxError(ExpressionError):
    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = expected
        detail = f"{message} at offset {offset}"
        if expected:
            detail += " (expected " + " or ".join(repr(e) for e in expected) + ")"
        super().__init__(detail)


class UnknownIdentifierError(ExpressionError):
    def __init__(self, name: str, offset: int):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class EvaluationError(ExpressionError):
    def __init__(self, message: str, expression: "Expression"):
        self.expression = expression
        super().__init__(f"{message} in {format_expression(expression)!r}")


class ProblemConfigError(ValueError):
    """Raised when a JSON problem document violates the schema."""


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "x", "t" or "pi"


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Expression"


Expression = Num | Var | Neg | BinOp | Call

VARIABLES = ("x", "t", "pi")
FUNCTIONS = ("sin", "cos", "exp", "sqrt", "abs")

_FN = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "sqrt": math.sqrt,
    "abs": abs,
}


def format_expression(node: Expression) -> str:
    """Render an AST back to source text (fully parenthesized)."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{format_expression(node.arg)})"
    if isinstance(node, BinOp):
        return f"({format_expression(node.left)} {node.op} {format_expression(node.right)})"
    if isinstance(node, Call):
        return f"{node.fn}({format_expression(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def expression_variables(node: Expression) -> set[str]:
    """Names of the free variables ('x', 't') appearing in the tree."""
    if isinstance(node, Var):
        return {node.name} if node.name != "pi" else set()
    if isinstance(node, Neg):
        return expression_variables(node.arg)
    if isinstance(node, BinOp):
        return expression_variables(node.left) | expression_variables(node.right)
    if isinstance(node, Call):
        return expression_variables(node.arg)
    return set()


# ---------------------------------------------------------------------------
# Tokenizer / parser

_OPERATORS = "+-*/^()"


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Return (kind, text, offset) triples; kinds: num, ident, op, end."""
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPERATORS:
            tokens.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            # optional exponent part: 1e-3, 2.5E+4
            if j < n and text[j] in "eE":
                p = j + 1
                if p < n and text[p] in "+-":
                    p += 1
                if p < n and text[p].isdigit():
                    j = p
                    while j < n and text[j].isdigit():
                        j += 1
            try:
                float(text[i:j])
            except ValueError:
                raise ExpressionSyntaxError(f"malformed number {text[i:j]!r}", i) from None
            tokens.append(("num", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ExpressionSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, symbol: str) -> None:
        kind, text, offset = self.peek()
        if kind == "op" and text == symbol:
            self.advance()
            return
        raise ExpressionSyntaxError(
            f"unexpected {text!r}" if kind != "end" else "unexpected end of input",
            offset,
            expected=(symbol,),
        )

    def parse(self) -> Expression:
        node = self.expr()
        kind, text, offset = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected trailing {text!r}", offset)
        return node

    def expr(self) -> Expression:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.term())
            else:
                return node

    def term(self) -> Expression:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.unary())
            else:
                return node

    def unary(self) -> Expression:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            # right-associative; exponent may carry a unary minus
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expression:
        kind, text, offset = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            if text in VARIABLES:
                return Var(text)
            raise UnknownIdentifierError(text, offset)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionSyntaxError(
            f"unexpected {text!r}" if kind != "end" else "unexpected end of input",
            offset,
            expected=("number", "identifier", "("),
        )


def parse_expression(text: str) -> Expression:
    """Parse source text into an expression tree.

    Raises ExpressionSyntaxError (with byte offset and expected-token set) on
    malformed input and UnknownIdentifierError for names outside the language.
    """
    if not text or text.isspace():
        raise ExpressionSyntaxError("empty expression", 0)
    return _Parser(text).parse()


def eval_expression(expr: Expression, x: float, t: float) -> float:
    """Evaluate the tree at (x, t) with float semantics.

    Domain failures (division by zero, sqrt of a negative, overflow and other
    non-finite results) raise EvaluationError naming the offending
    sub-expression.
    """
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        return {"x": x, "t": t, "pi": math.pi}[expr.name]
    if isinstance(expr, Neg):
        return -eval_expression(expr.arg, x, t)
    if isinstance(expr, Call):
        v = eval_expression(expr.arg, x, t)
        try:
            out = _FN[expr.fn](v)
        except (ValueError, OverflowError) as exc:
            raise EvaluationError(str(exc), expr) from None
        return out
    if isinstance(expr, BinOp):
        a = eval_expression(expr.left, x, t)
        b = eval_expression(expr.right, x, t)
        try:
            if expr.op == "+":
                out = a + b
            elif expr.op == "-":
                out = a - b
            elif expr.op == "*":
                out = a * b
            elif expr.op == "/":
                out = a / b
            else:
                out = a ** b
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise EvaluationError(str(exc), expr) from None
        if isinstance(out, complex) or not math.isfinite(out):
            raise EvaluationError("non-finite result", expr)
        return out
    raise TypeError(f"not an expression node: {expr!r}")


# ---------------------------------------------------------------------------
# Problem record


@dataclass(frozen=True)
class DampedWaveProblem:
    """Data of u_tt = u_xx - gamma(x) u_t + g(x,t) on [a, b].

    gamma must be nonnegative (checked per grid node at assembly time).
    phi/psi are initial displacement/velocity; u_a/u_b the Dirichlet boundary
    data; exact, when present, is the reference solution used for error
    reporting.
    """

    domain: tuple[float, float]
    gamma: Callable[[float], float]
    g: Callable[[float, float], float]
    phi: Callable[[float], float]
    psi: Callable[[float], float]
    u_a: Callable[[float], float]
    u_b: Callable[[float], float]
    exact: Optional[Callable[[float, float], float]] = None
    name: str = "custom"

    def __post_init__(self):
        a, b = self.domain
        if not b > a:
            raise ValueError(f"domain must satisfy a < b, got ({a}, {b})")
        # corner compatibility is a modelling warning, not an error
        for point, data, label in ((a, self.u_a, "u_a"), (b, self.u_b, "u_b")):
            try:
                gap = abs(self.phi(point) - data(0.0))
            except ExpressionError:
                continue
            if gap > 1e-10:
                warnings.warn(
                    f"initial/boundary mismatch at x={point}: "
                    f"|phi - {label}(0)| = {gap:.3e}",
                    stacklevel=2,
                )


def sample_problem() -> DampedWaveProblem:
    """u_tt = u_xx - 2 u_t on [0, pi] with u(x,0)=sin x, u_t(x,0)=-sin x.

    Dirichlet-zero boundary; exact solution e^{-t} sin x.
    """
    return DampedWaveProblem(
        domain=(0.0, math.pi),
        gamma=lambda x: 2.0,
        g=lambda x, t: 0.0,
        phi=math.sin,
        psi=lambda x: -math.sin(x),
        u_a=lambda t: 0.0,
        u_b=lambda t: 0.0,
        exact=lambda x, t: math.exp(-t) * math.sin(x),
        name="sample",
    )


BUILTINS: dict[str, Callable[[], DampedWaveProblem]] = {
    "sample": sample_problem,
}

_SCHEMA_FIELDS = {
    "gamma": {"x"},
    "g": {"x", "t"},
    "phi": {"x"},
    "psi": {"x"},
    "u_a": {"t"},
    "u_b": {"t"},
}


def _compile(field: str, source: object, allowed: set[str]) -> tuple[Expression, Callable]:
    if not isinstance(source, str):
        raise ProblemConfigError(f"field {field!r} must be an expression string")
    try:
        tree = parse_expression(source)
    except ExpressionError as exc:
        raise ProblemConfigError(f"field {field!r}: {exc}") from exc
    used = expression_variables(tree)
    if not used <= allowed:
        raise ProblemConfigError(
            f"field {field!r} may only use {sorted(allowed)}, found {sorted(used - allowed)}"
        )
    return tree


def load_problem_config(text: str) -> DampedWaveProblem:
    """Build a problem from a JSON document.

    Either {"builtin": <name>} or the full schema with fields
    domain=[a,b], gamma(x), g(x,t), phi(x), psi(x), u_a(t), u_b(t) and an
    optional exact(x,t), each coefficient an expression string.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProblemConfigError("document must be a JSON object")

    if "builtin" in doc:
        name = doc["builtin"]
        if name not in BUILTINS:
            raise ProblemConfigError(
                f"unknown builtin {name!r}; available: {sorted(BUILTINS)}"
            )
        return BUILTINS[name]()

    if "domain" not in doc:
        raise ProblemConfigError("missing field 'domain'")
    domain = doc["domain"]
    if (
        not isinstance(domain, (list, tuple))
        or len(domain) != 2
        or not all(isinstance(v, (int, float)) for v in domain)
    ):
        raise ProblemConfigError("field 'domain' must be a pair of numbers [a, b]")
    a, b = float(domain[0]), float(domain[1])
    if not b > a:
        raise ProblemConfigError(f"field 'domain' must satisfy a < b, got [{a}, {b}]")

    trees: dict[str, Expression] = {}
    for field, allowed in _SCHEMA_FIELDS.items():
        if field not in doc:
            raise ProblemConfigError(f"missing field {field!r}")
        trees[field] = _compile(field, doc[field], allowed)
    exact_tree = None
    if "exact" in doc and doc["exact"] is not None:
        exact_tree = _compile("exact", doc["exact"], {"x", "t"})

    extras = set(doc) - set(_SCHEMA_FIELDS) - {"domain", "exact"}
    if extras:
        raise ProblemConfigError(f"unknown fields: {sorted(extras)}")

    def of_x(tree: Expression) -> Callable[[float], float]:
        return lambda x: eval_expression(tree, x, 0.0)

    def of_t(tree: Expression) -> Callable[[float], float]:
        return lambda t: eval_expression(tree, 0.0, t)

    def of_xt(tree: Expression) -> Callable[[float, float], float]:
        return lambda x, t: eval_expression(tree, x, t)

    return DampedWaveProblem(
        domain=(a, b),
        gamma=of_x(trees["gamma"]),
        g=of_xt(trees["g"]),
        phi=of_x(trees["phi"]),
        psi=of_x(trees["psi"]),
        u_a=of_t(trees["u_a"]),
        u_b=of_t(trees["u_b"]),
        exact=of_xt(exact_tree) if exact_tree is not None else None,
        name="config",
    )
