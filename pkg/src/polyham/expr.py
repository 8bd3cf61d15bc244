"""Scalar expression DSL over named coordinates.

Grammar (standard infix):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative, binds above unary -
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

Functions: sin cos tan exp log sqrt sinh cosh.  Variable references must
name a declared coordinate.  ASTs are immutable after parsing; evaluation
allocates per-call state only, so one Expression may be evaluated from any
number of threads.

There is deliberately no simplification, no common-subexpression rewriting
and no user-defined functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError, ExprSyntaxError, UnknownIdentifier
from .jets import Jet, JetSpace, jet_space

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Node:
    offset: int = field(compare=False, kw_only=True, default=-1)


@dataclass(frozen=True)
class Const(Node):
    value: float = 0.0


@dataclass(frozen=True)
class Var(Node):
    name: str = ""


@dataclass(frozen=True)
class Neg(Node):
    arg: Node = None


@dataclass(frozen=True)
class BinOp(Node):
    op: str = ""
    left: Node = None
    right: Node = None


@dataclass(frozen=True)
class Call(Node):
    fn: str = ""
    arg: Node = None


@dataclass(frozen=True)
class Expression:
    """A parsed scalar formula over declared coordinate names."""

    ast: Node
    variables: tuple[str, ...]
    source: str = field(compare=False, default="")

    def __str__(self) -> str:
        return unparse(self.ast)


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------
_OPS = set("+-*/^()")


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    """Returns (kind, text, offset) triples; kind in op/num/ident/end."""
    toks = []
    k = 0
    n = len(src)
    while k < n:
        ch = src[k]
        if ch.isspace():
            k += 1
            continue
        if ch in _OPS:
            toks.append(("op", ch, k))
            k += 1
            continue
        if ch.isdigit() or (ch == "." and k + 1 < n and src[k + 1].isdigit()):
            start = k
            while k < n and (src[k].isdigit() or src[k] == "."):
                k += 1
            if k < n and src[k] in "eE":
                j = k + 1
                if j < n and src[j] in "+-":
                    j += 1
                if j < n and src[j].isdigit():
                    k = j
                    while k < n and src[k].isdigit():
                        k += 1
            text = src[start:k]
            try:
                float(text)
            except ValueError:
                raise ExprSyntaxError(start, "a number") from None
            toks.append(("num", text, start))
            continue
        if ch.isalpha() or ch == "_":
            start = k
            while k < n and (src[k].isalnum() or src[k] == "_"):
                k += 1
            toks.append(("ident", src[start:k], start))
            continue
        raise ExprSyntaxError(k, f"a token (found {ch!r})")
    toks.append(("end", "", n))
    return toks


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------
class _Parser:
    def __init__(self, toks, declared):
        self.toks = toks
        self.pos = 0
        self.declared = declared

    def peek(self):
        return self.toks[self.pos]

    def advance(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(off, f"{op!r}")
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(off, "end of input")
        return node

    def expr(self) -> Node:
        node = self.term()
        while True:
            kind, text, off = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(op=text, left=node, right=self.term(), offset=off)
            else:
                return node

    def term(self) -> Node:
        node = self.unary()
        while True:
            kind, text, off = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(op=text, left=node, right=self.unary(), offset=off)
            else:
                return node

    def unary(self) -> Node:
        kind, text, off = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(arg=self.unary(), offset=off)
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        kind, text, off = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return BinOp(op="^", left=node, right=self.unary(), offset=off)
        return node

    def atom(self) -> Node:
        kind, text, off = self.advance()
        if kind == "num":
            return Const(value=float(text), offset=off)
        if kind == "ident":
            nkind, ntext, _ = self.peek()
            if nkind == "op" and ntext == "(":
                if text not in FUNCTIONS:
                    raise ExprSyntaxError(off, f"a function name (one of {', '.join(FUNCTIONS)})")
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return Call(fn=text, arg=arg, offset=off)
            if text not in self.declared:
                raise UnknownIdentifier(text, off)
            return Var(name=text, offset=off)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(off, "a number, variable, function or '('")


def parse(source: str, declared_vars) -> Expression:
    """Parse ``source`` against the declared coordinate names."""
    if not source or not source.strip():
        raise ExprSyntaxError(0, "a non-empty expression")
    declared = tuple(declared_vars)
    ast = _Parser(_tokenize(source), frozenset(declared)).parse()
    return Expression(ast=ast, variables=declared, source=source)


# ---------------------------------------------------------------------------
# unparse (minimal-parentheses canonical form)
# ---------------------------------------------------------------------------
_LEVEL = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _unparse(node: Node) -> tuple[str, int]:
    if isinstance(node, Const):
        return _fmt_number(node.value), _LEVEL["atom"]
    if isinstance(node, Var):
        return node.name, _LEVEL["atom"]
    if isinstance(node, Call):
        inner, _ = _unparse(node.arg)
        return f"{node.fn}({inner})", _LEVEL["atom"]
    if isinstance(node, Neg):
        text, lvl = _unparse(node.arg)
        if lvl < _LEVEL["neg"]:
            text = f"({text})"
        return f"-{text}", _LEVEL["neg"]
    if isinstance(node, BinOp):
        lvl = _LEVEL[node.op]
        ltext, llvl = _unparse(node.left)
        rtext, rlvl = _unparse(node.right)
        if node.op == "^":
            # right-assoc: parenthesise the left child at or below this level
            if llvl <= lvl:
                ltext = f"({ltext})"
            if rlvl < _LEVEL["neg"]:
                rtext = f"({rtext})"
        else:
            # left-assoc: an equal-level right child was explicitly grouped,
            # keep the parens so reparsing rebuilds the same tree
            if llvl < lvl:
                ltext = f"({ltext})"
            if rlvl <= lvl:
                rtext = f"({rtext})"
        return f"{ltext}{node.op}{rtext}", lvl
    raise TypeError(f"not an AST node: {node!r}")


def unparse(node: Node) -> str:
    return _unparse(node)[0]


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------
_FN_DERIVS = {
    "sin": lambda y: _sin_derivs(y),
    "cos": lambda y: _cos_derivs(y),
    "tan": lambda y: _tan_derivs(y),
    "exp": lambda y: _exp_derivs(y),
    "log": lambda y: _log_derivs(y),
    "sqrt": lambda y: _sqrt_derivs(y),
    "sinh": lambda y: _sinh_derivs(y),
    "cosh": lambda y: _cosh_derivs(y),
}


def _sin_derivs(y):
    import math

    s, c = math.sin(y), math.cos(y)
    return [s, c, -s, -c]


def _cos_derivs(y):
    import math

    s, c = math.sin(y), math.cos(y)
    return [c, -s, -c, s]


def _tan_derivs(y):
    import math

    t = math.tan(y)
    sec2 = 1.0 + t * t
    return [t, sec2, 2.0 * t * sec2, sec2 * (2.0 + 6.0 * t * t)]


def _exp_derivs(y):
    import math

    e = math.exp(y)
    return [e, e, e, e]


def _log_derivs(y):
    import math

    if y <= 0.0:
        raise DomainError(f"log of non-positive value {y!r}")
    return [math.log(y), 1.0 / y, -1.0 / y**2, 2.0 / y**3]


def _sqrt_derivs(y):
    import math

    if y < 0.0:
        raise DomainError(f"sqrt of negative value {y!r}")
    if y == 0.0:
        raise DomainError("sqrt derivative at zero")
    s = math.sqrt(y)
    return [s, 0.5 / s, -0.25 / (s * y), 0.375 / (s * y * y)]


def _sinh_derivs(y):
    import math

    s, c = math.sinh(y), math.cosh(y)
    return [s, c, s, c]


def _cosh_derivs(y):
    import math

    s, c = math.sinh(y), math.cosh(y)
    return [c, s, c, s]


def eval_jet(expr: Expression, space: JetSpace, env: dict[str, float]) -> Jet:
    """Evaluate ``expr`` into the given jet space.

    Variables in ``space.variables`` are seeded as jet coordinates; any
    other declared variable is bound as a constant from ``env``.
    """
    for v in expr.variables:
        if v not in env:
            raise KeyError(f"variable {v!r} not bound in env")
    bindings: dict[str, Jet] = {}
    active = set(space.variables)
    for v in expr.variables:
        if v in active:
            bindings[v] = Jet.variable(space, v, float(env[v]))
        else:
            bindings[v] = Jet.constant(space, float(env[v]))
    return _eval(expr.ast, bindings, space)


def _eval(node: Node, bindings: dict[str, Jet], space: JetSpace) -> Jet:
    if isinstance(node, Const):
        return Jet.constant(space, node.value)
    if isinstance(node, Var):
        return bindings[node.name]
    if isinstance(node, Neg):
        return -_eval(node.arg, bindings, space)
    if isinstance(node, Call):
        arg = _eval(node.arg, bindings, space)
        try:
            derivs = _FN_DERIVS[node.fn](arg.value)
        except DomainError as err:
            raise DomainError(str(err), node=node) from None
        return arg.apply(derivs)
    if isinstance(node, BinOp):
        left = _eval(node.left, bindings, space)
        if node.op == "^":
            return _eval_pow(node, left, bindings, space)
        right = _eval(node.right, bindings, space)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if right.value == 0.0:
            raise DomainError("division by zero", node=node)
        return left / right
    raise TypeError(f"not an AST node: {node!r}")


def _eval_pow(node: BinOp, base: Jet, bindings, space) -> Jet:
    exponent = node.right
    if isinstance(exponent, Const) and float(exponent.value).is_integer():
        return base ** int(exponent.value)
    if isinstance(exponent, Neg) and isinstance(exponent.arg, Const) and float(exponent.arg.value).is_integer():
        return base ** (-int(exponent.arg.value))
    # non-integer (or non-constant) exponent: b^e = exp(e*log b), b > 0 only
    if base.value <= 0.0:
        raise DomainError(
            f"power with non-integer exponent needs a positive base, got {base.value!r}",
            node=node,
        )
    exp_jet = _eval(exponent, bindings, space)
    prod = exp_jet * base.apply(_log_derivs(base.value))
    return prod.apply(_exp_derivs(prod.value))


def eval_derivatives(
    expr: Expression,
    env: dict[str, float],
    wrt,
    order: int,
) -> Jet:
    """Value and all exact mixed partials of ``expr`` w.r.t. ``wrt``.

    ``order`` may be 0..3.  The result is a :class:`Jet`; read ``.value``,
    ``.partials`` or ``.partial(*names)``.  No finite differencing is
    involved anywhere.
    """
    wrt = tuple(wrt)
    for v in wrt:
        if v not in expr.variables:
            raise UnknownIdentifier(v)
    space = jet_space(wrt, order)
    return eval_jet(expr, space, env)


def constant_expression(value: float, variables=()) -> Expression:
    return Expression(ast=Const(value=float(value)), variables=tuple(variables))
