import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fd_of_partial, random_polynomial
from polyham.errors import DomainError, ExprSyntaxError, UnknownIdentifier
from polyham.expr import (
    BinOp,
    Call,
    Const,
    Neg,
    Var,
    eval_derivatives,
    parse,
    unparse,
)


class TestParsing:
    def test_grammar_smoke(self):
        expr = parse("sin(x1)^2 + cos(x1)^2", ["x1"])
        calls = []

        def walk(node):
            if isinstance(node, Call):
                calls.append(node.fn)
            for attr in ("arg", "left", "right"):
                child = getattr(node, attr, None)
                if child is not None:
                    walk(child)

        walk(expr.ast)
        assert sorted(calls) == ["cos", "sin"]

    def test_truncated_input(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse("2*", ["x1"])
        assert err.value.offset == 2

    def test_undeclared_variable(self):
        with pytest.raises(UnknownIdentifier) as err:
            parse("x3", ["x1", "x2"])
        assert err.value.name == "x3"

    def test_empty_source(self):
        with pytest.raises(ExprSyntaxError):
            parse("   ", ["x1"])

    def test_power_right_associative(self):
        ast = parse("x1^x1^2", ["x1"]).ast
        assert isinstance(ast, BinOp) and ast.op == "^"
        assert isinstance(ast.left, Var)
        assert isinstance(ast.right, BinOp)

    def test_unary_minus_binds_below_power(self):
        # -x^2 parses as -(x^2)
        ast = parse("-x1^2", ["x1"]).ast
        assert isinstance(ast, Neg)
        assert isinstance(ast.arg, BinOp) and ast.arg.op == "^"

    def test_unknown_function(self):
        with pytest.raises(ExprSyntaxError):
            parse("foo(x1)", ["x1"])

    @pytest.mark.parametrize(
        "src,expected",
        [
            ("x1 - (x2 - 1)", "x1-(x2-1)"),
            ("(x1 + x2) * x1", "(x1+x2)*x1"),
            ("(x1^x2)^x1", "(x1^x2)^x1"),
            ("-(x1 + 2)", "-(x1+2)"),
            ("x1 / (x2 * x1)", "x1/(x2*x1)"),
        ],
    )
    def test_unparse_minimal_parens(self, src, expected):
        assert unparse(parse(src, ["x1", "x2"]).ast) == expected


# hypothesis strategy for random ASTs (offsets excluded from equality)
_leaf = st.one_of(
    st.floats(min_value=0.0, max_value=1e6, allow_nan=False).map(lambda v: Const(value=v)),
    st.sampled_from(["x1", "x2", "t1"]).map(lambda s: Var(name=s)),
)


def _compound(children):
    return st.one_of(
        children.map(lambda a: Neg(arg=a)),
        st.tuples(st.sampled_from("+-*/^"), children, children).map(
            lambda t: BinOp(op=t[0], left=t[1], right=t[2])
        ),
        st.tuples(st.sampled_from(["sin", "cos", "exp", "sqrt", "log"]), children).map(
            lambda t: Call(fn=t[0], arg=t[1])
        ),
    )


_ast = st.recursive(_leaf, _compound, max_leaves=20)


class TestRoundTrip:
    @given(_ast)
    @settings(max_examples=150, deadline=None)
    def test_unparse_reparse_identity(self, ast):
        text = unparse(ast)
        again = parse(text, ["x1", "x2", "t1"]).ast
        assert again == ast

    def test_source_roundtrip(self):
        expr = parse("sin(x1)^2 + cos(x1)^2/(1 + x2)", ["x1", "x2"])
        assert parse(unparse(expr.ast), ["x1", "x2"]).ast == expr.ast


class TestEvaluation:
    def test_bilinear(self):
        b = eval_derivatives(parse("x1*x2", ["x1", "x2"]), {"x1": 2, "x2": 3}, ["x1", "x2"], 2)
        assert b.value == 6.0
        assert b.partial("x1", "x2") == 1.0

    def test_pythagorean_identity(self):
        b = eval_derivatives(parse("sin(x1)^2+cos(x1)^2", ["x1"]), {"x1": 0.7}, ["x1"], 1)
        assert abs(b.value - 1.0) < 1e-15
        assert abs(b.partial("x1")) < 1e-15

    def test_third_derivative_sin(self):
        b = eval_derivatives(parse("sin(x1)", ["x1"]), {"x1": 0.5}, ["x1"], 3)
        assert abs(b.partial("x1", "x1", "x1") + math.cos(0.5)) < 1e-15

    def test_integer_power_negative_base(self):
        b = eval_derivatives(parse("x1^3", ["x1"]), {"x1": -2.0}, ["x1"], 1)
        assert b.value == -8.0
        assert b.partial("x1") == 12.0

    def test_fractional_power(self):
        b = eval_derivatives(parse("x1^2.5", ["x1"]), {"x1": 2.0}, ["x1"], 1)
        assert abs(b.value - 2**2.5) < 1e-12
        assert abs(b.partial("x1") - 2.5 * 2**1.5) < 1e-12

    @pytest.mark.parametrize(
        "src,env",
        [
            ("log(x1)", {"x1": -1.0}),
            ("sqrt(x1)", {"x1": -4.0}),
            ("1/(x1 - 1)", {"x1": 1.0}),
            ("(-x1)^0.5", {"x1": 2.0}),
        ],
    )
    def test_domain_errors(self, src, env):
        with pytest.raises(DomainError):
            eval_derivatives(parse(src, ["x1"]), env, ["x1"], 1)

    def test_unbound_variable_rejected(self):
        with pytest.raises(KeyError):
            eval_derivatives(parse("x1+x2", ["x1", "x2"]), {"x1": 1.0}, ["x1"], 1)


class TestDerivativeProperties:
    def test_matches_finite_differences_on_polynomials(self):
        rng = np.random.default_rng(4)
        names = ("x1", "x2")
        for _ in range(20):
            expr = parse(random_polynomial(rng, names), names)
            point = rng.uniform(0.4, 1.2, size=2)
            env = dict(zip(names, point))
            bundle = eval_derivatives(expr, env, names, 3)
            for multi in [("x1",), ("x2",), ("x1", "x2"), ("x1", "x1"),
                          ("x1", "x1", "x2"), ("x2", "x2", "x2")]:
                got = bundle.partial(*multi)
                want = fd_of_partial(expr, names, point, multi)
                assert got == pytest.approx(want, rel=1e-6, abs=1e-7)

    def test_linearity_exact(self):
        names = ("x1", "x2")
        f = "sin(x1)*x2"
        g = "x1^2 + cos(x2)"
        combined = parse(f"2*({f}) + 0.5*({g})", names)
        env = {"x1": 0.9, "x2": 1.7}
        bf = eval_derivatives(parse(f, names), env, names, 3)
        bg = eval_derivatives(parse(g, names), env, names, 3)
        bc = eval_derivatives(combined, env, names, 3)
        assert bc.value == 2.0 * bf.value + 0.5 * bg.value
        for key in bc.partials:
            assert bc.partials[key] == 2.0 * bf.partials[key] + 0.5 * bg.partials[key]

    def test_schwarz_symmetry_bit_exact(self):
        names = ("x1", "x2", "x3")
        expr = parse("exp(x1*x2)*sin(x3) + x1*x2^2*x3", names)
        b = eval_derivatives(expr, {"x1": 0.3, "x2": 0.8, "x3": 1.1}, names, 3)
        assert b.partial("x1", "x2") == b.partial("x2", "x1")
        assert b.partial("x3", "x1", "x2") == b.partial("x1", "x2", "x3")
        # canonical storage: every stored key is sorted
        for key in b.partials:
            assert tuple(sorted(key)) == key

    def test_order_zero_is_plain_value(self):
        b = eval_derivatives(parse("x1*x1", ["x1"]), {"x1": 3.0}, ["x1"], 0)
        assert b.value == 9.0
        assert b.partials == {}

    def test_order_above_three_rejected(self):
        with pytest.raises(ValueError):
            eval_derivatives(parse("x1", ["x1"]), {"x1": 1.0}, ["x1"], 4)

    @pytest.mark.parametrize("fn", ["sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh"])
    def test_every_function_matches_fd_to_third_order(self, fn):
        expr = parse(f"{fn}(x1)", ["x1"])
        x0 = 0.8
        bundle = eval_derivatives(expr, {"x1": x0}, ["x1"], 3)
        for k in range(1, 4):
            got = bundle.partial(*(["x1"] * k))
            want = fd_of_partial(expr, ("x1",), [x0], tuple(["x1"] * k))
            assert got == pytest.approx(want, rel=1e-6, abs=1e-8)
