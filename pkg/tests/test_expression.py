import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sturmkit.errors import DomainError, ParseError
from sturmkit.fncore import parse_expression
from sturmkit.fncore.expression import parse_to_sympy, tokenize


def test_examples():
    f = parse_expression("sin(x)")
    assert f(0.0) == 0.0
    assert f(np.pi / 2) == pytest.approx(1.0, abs=1e-15)
    assert parse_expression("cos(x)+2")(0.0) == pytest.approx(3.0)


def test_unclosed_call_reports_offset():
    with pytest.raises(ParseError) as info:
        parse_expression("sin(")
    assert info.value.position == 4


@pytest.mark.parametrize("text", ["", "x+", "sin x", "2**x", "foo(x)", "x^y",
                                  "(x", "x)", "3 $ 4"])
def test_malformed(text):
    with pytest.raises(ParseError):
        parse_to_sympy(text)


def test_precedence_and_power():
    f = parse_expression("1+2*x^2-x/4")
    x = 0.7
    assert f(x) == pytest.approx(1 + 2 * x * x - x / 4)
    g = parse_expression("-x^2")
    assert g(1.5) == pytest.approx(-2.25)
    assert parse_expression("(x+1)^-1", period=1.0)(0.5) == pytest.approx(1 / 1.5)


def test_all_functions():
    f = parse_expression("sin(x)+cos(x)+tan(x/4)+exp(x)+abs(x-1)")
    x = 0.3
    want = math.sin(x) + math.cos(x) + math.tan(x / 4) + math.exp(x) + abs(x - 1)
    assert f(x) == pytest.approx(want, rel=1e-14)


def test_tokens_carry_offsets():
    toks = tokenize("2.5e-1*x")
    assert [t[2] for t in toks[:3]] == [0, 6, 7]


def test_non_finite_is_domain_error():
    with pytest.raises(DomainError):
        parse_expression("1/sin(x)")


def test_symbolic_derivatives_match_finite_differences():
    rng = np.random.default_rng(1)
    f = parse_expression("exp(sin(x))*cos(3*x)+abs(cos(x))^3")
    x = rng.uniform(0, 2 * np.pi, 64)
    h = 1e-5
    for order in (1, 2):
        lower = f.derivative(order - 1) if order > 1 else f
        fd = (lower(x + h) - lower(x - h)) / (2 * h)
        exact = f.derivative(order)(x)
        assert np.all(np.abs(fd - exact) <= 1e-6 * np.maximum(1.0, np.abs(exact)))


@settings(max_examples=60, deadline=None)
@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(1, 5),
       st.floats(0, 6.28))
def test_linear_combinations_evaluate(a, b, m, x):
    f = parse_expression(f"{a}*sin({m}*x)+{b}")
    assert f(x) == pytest.approx(a * math.sin(m * x) + b, abs=1e-12)
