import json

import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from dulac import corpus
from dulac.poly import (
    ParseError, Poly, ProblemError, parse_expression, parse_problem, partial, poly_from_json,
    poly_to_json, to_expression,
)

ABEL = "y0*y1 - y0^2 + x^2*y0 + 1"


def test_parse_abel():
    F = parse_expression(ABEL, 1)
    assert F.terms == {(0, 0, 0, 0): 1, (0, 0, 1, 1): 1, (0, 0, 2, 0): -1, (2, 0, 1, 0): 1}


def test_parse_binomial_and_merge():
    assert parse_expression("(y0-1)^2", 0).terms == {(0, 0, 2): 1, (0, 0, 1): -2, (0, 0, 0): 1}
    assert parse_expression("x*(y1 + y1)", 1).terms == {(1, 0, 0, 1): 2}


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_expression("y0 +", 1)
    with pytest.raises(ParseError):
        parse_expression("y3", 1)
    with pytest.raises(ParseError):
        parse_expression("ln(x)", 1)


def test_partials_abel():
    F = parse_expression(ABEL, 1)
    assert partial(F, 0) == parse_expression("y1 - 2*y0 + x^2", 1)
    assert partial(F, 1) == parse_expression("y0", 1)
    assert not partial(Poly.const(1, 1), 0)


def test_painleve_top_partial():
    F = corpus.painleve6().F
    expected = parse_expression("2*(x-1)^2*y0*(y0-1)*(y0-x)", 2)
    assert partial(F, 2) == expected


def test_parse_problem_abel():
    p = parse_problem(corpus.text("abel_C0"))
    assert p.n == 1 and len(p.F) == 4


def test_parse_problem_rejects():
    doc = {"order": 2, "F": [{"c": "1", "y": [1, 0]}], "seed": {"trunc": 0, "terms": [{"k": 0, "p": ["1"]}]}}
    with pytest.raises(ProblemError, match="length 2"):
        parse_problem(doc)
    doc = {"order": 1, "F": [], "seed": {"trunc": 0, "terms": [{"k": 0, "p": ["1"]}]}}
    with pytest.raises(ProblemError, match="identically zero"):
        parse_problem(doc)
    doc = {"order": 1, "F": "y0 - y0", "seed": {"trunc": 0, "terms": []}}
    with pytest.raises(ProblemError, match="identically zero"):
        parse_problem(doc)


def test_expression_with_parameters():
    F = parse_expression("a*y0 + b", 1, {"a": "1/2", "b": "3"})
    assert F.terms == {(0, 0, 1, 0): mpq(1, 2), (0, 0, 0, 0): 3}


exponents = st.tuples(st.integers(0, 3), st.just(0), st.integers(0, 2), st.integers(0, 2))
polys = st.dictionaries(exponents, st.builds(mpq, st.integers(-9, 9).filter(bool), st.integers(1, 5)),
                        min_size=1, max_size=6).map(lambda d: Poly(1, d))


@given(polys)
def test_expression_round_trip(F):
    assert parse_expression(to_expression(F), 1) == F


@given(polys)
def test_json_round_trip(F):
    doc = json.loads(json.dumps(poly_to_json(F)))
    assert poly_from_json(doc, 1) == F


@given(polys)
def test_euler_identity(F):
    # sum_j y_j dF/dy_j multiplies each monomial by its y-degree
    y = [Poly.var(1, "y0"), Poly.var(1, "y1")]
    lhs = y[0] * partial(F, 0) + y[1] * partial(F, 1)
    rhs = Poly(1, {k: c * (k[2] + k[3]) for k, c in F.terms.items() if k[2] + k[3]})
    assert lhs == rhs


def test_canonical_order_is_lexicographic():
    F = parse_expression("y1 + x + 1 + y0^2 + x*y0", 1)
    keys = [k for k in F.terms]
    assert keys == sorted(keys)
