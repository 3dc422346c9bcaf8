import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from dulac.field import (
    LogPoly, QQi, derive, format_scalar, mpf_to_mpq, lognorm, lognorm_lower, parse_scalar, promote,
    shifted_apply, taylor_coeffs,
)

from conftest import logpolys, nonzero_logpolys, rationals

t = LogPoly([0, 1])


def test_lognorm_examples():
    assert lognorm(t - 1) == 2
    assert lognorm(LogPoly()) == 0
    sq = (t + 1) * (t + 1)
    assert sq == LogPoly([1, 2, 1])
    assert lognorm(sq) == 4 == lognorm(t + 1) ** 2


def test_derive_examples():
    assert derive(t * t) == 2 * t
    assert derive(LogPoly.const(5)) == LogPoly()
    assert derive(t * t * t - t) == LogPoly([-1, 0, 3])


def test_shifted_apply_examples():
    xi = LogPoly([0, 1])
    assert shifted_apply(xi, 1, 1, t - 1) == t
    assert shifted_apply(xi * xi + 3, 5, 2, LogPoly()) == LogPoly()
    eps = mpq(1, 7)
    assert shifted_apply(xi * xi, 2, -eps, t) == 4 * t - 4 * eps


def test_normalized_and_degree():
    assert LogPoly([1, 2, 0, 0]).degree == 1
    assert LogPoly([0, 0]) == LogPoly()
    assert not LogPoly([0])


def test_gaussian_rationals():
    z = QQi(mpq(1, 2), mpq(-3))
    w = z * z.conjugate()
    assert w == mpq(1, 4) + 9
    assert (z / z) == 1
    assert parse_scalar({"re": "1/2", "im": "-3"}) == z
    assert parse_scalar(format_scalar(z)) == z


def test_scalar_syntax():
    assert parse_scalar("3/6") == mpq(1, 2)
    x = parse_scalar("1.25e-3")
    assert isinstance(x, mpmath.mpf) and abs(x - mpmath.mpf("0.00125")) < mpmath.mpf(10) ** -70
    with pytest.raises(ValueError):
        parse_scalar("1/0")


@mpmath.workprec(256)
def test_mixed_mode_promotes():
    s = LogPoly([mpq(1, 3)]) + LogPoly([mpmath.mpf("0.5")])
    assert isinstance(s[0], (mpmath.mpf, mpmath.mpc))
    assert abs(s[0] - promote(mpq(5, 6))) < mpmath.mpf(2) ** -200


@mpmath.workprec(256)
def test_lognorm_brackets_true_sum():
    # 1 + 2^-300 is not representable at 256 bits
    tiny = mpmath.mpf(2) ** -300
    third = mpmath.mpf(1) / 3
    P = LogPoly([mpmath.mpf(1), tiny, mpmath.mpc(0, third)])
    true = 1 + mpf_to_mpq(tiny) + mpf_to_mpq(third)
    lo, hi = mpf_to_mpq(lognorm_lower(P, 256)), mpf_to_mpq(lognorm(P, 256))
    assert lo < true < hi


@given(logpolys(), logpolys())
def test_lognorm_triangle(P, Q):
    assert lognorm(P + Q) <= lognorm(P) + lognorm(Q)


@given(logpolys(), logpolys())
def test_lognorm_submultiplicative(P, Q):
    assert lognorm(P * Q) <= lognorm(P) * lognorm(Q)


@given(st.lists(rationals.map(abs), max_size=5), st.lists(rationals.map(abs), max_size=5))
def test_lognorm_exact_on_nonnegative(a, b):
    P, Q = LogPoly(a), LogPoly(b)
    assert lognorm(P + Q) == lognorm(P) + lognorm(Q)
    assert lognorm(P * Q) == lognorm(P) * lognorm(Q)


@given(nonzero_logpolys(3), nonzero_logpolys(3))
def test_degree_of_product(P, Q):
    assert (P * Q).degree == P.degree + Q.degree


@given(nonzero_logpolys(3), rationals, rationals, logpolys(), logpolys(), rationals)
def test_shifted_apply_linear(L, k, s, P, Q, c):
    lhs = shifted_apply(L, k, s, P + Q * c)
    assert lhs == shifted_apply(L, k, s, P) + shifted_apply(L, k, s, Q) * c


@given(nonzero_logpolys(2), nonzero_logpolys(2), rationals, rationals, logpolys())
def test_shifted_apply_composes(L1, L2, k, s, P):
    assert shifted_apply(L2, k, s, shifted_apply(L1, k, s, P)) == shifted_apply(L1 * L2, k, s, P)


@given(nonzero_logpolys(4), rationals)
def test_taylor_coeffs_reexpand(L, k):
    # L(xi) = sum tau_i (xi - k)^i
    back = LogPoly()
    shift = LogPoly([-k, 1])
    power = LogPoly.const(1)
    for c in taylor_coeffs(L, k):
        back = back + power * c
        power = power * shift
    assert back == L


@given(rationals, rationals, rationals, rationals)
def test_gaussian_division_both_sides(a, b, c, d):
    if a == 0 and b == 0:
        return
    z = QQi(a, b) if b else QQi(a, mpq(1))
    w = QQi(c, d) if d else c
    assert (w / z) * z == w
    assert (c / z) * z == c
