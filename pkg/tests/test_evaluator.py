import math

import mpmath
import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from dulac import corpus
from dulac.evaluator import Sector, branch_log, decay_exponent, eval_truncated, residual
from dulac.field import LogPoly
from dulac.majorant import run_majorant
from dulac.pipeline import solve
from dulac.poly import OdeProblem, parse_expression
from dulac.series import DulacSeries, delta

t = LogPoly([0, 1])
WIDE = Sector.centered(1.9 * math.pi, 0.05)


@mpmath.workprec(256)
def test_eval_examples():
    assert eval_truncated(DulacSeries({0: LogPoly.const(1)}), mpmath.mpf("0.3")) == 1
    v = eval_truncated(DulacSeries({1: t}), mpmath.mpf("0.1"))
    assert abs(v - mpmath.mpf("0.1") * mpmath.log(mpmath.mpf("0.1"))) < mpmath.mpf(10) ** -70
    assert abs(v + mpmath.mpf("0.23026")) < 1e-5


def test_sector_validation():
    with pytest.raises(ValueError):
        Sector(0, 7, 0.05)
    with pytest.raises(ValueError):
        Sector(0, 1, 0)
    s = Sector.parse("0.1:6.18", 0.05)
    assert s.contains(mpmath.mpc(-0.01, 0)) and not s.contains(mpmath.mpf("0.01"))


def test_branch_follows_sector():
    s = Sector.parse("0.1:6.18", 0.05)
    lo = branch_log(s.point(0.01, math.pi - 1e-9), s)
    hi = branch_log(s.point(0.01, math.pi + 1e-9), s)
    assert abs(lo - hi) < 1e-8
    assert abs(mpmath.im(hi) - math.pi) < 1e-8


@given(st.floats(0.15, 6.1))
def test_branch_continuity_along_arc(theta):
    s = Sector.parse("0.1:6.18", 0.05)
    series = DulacSeries({0: LogPoly.const(1), 1: t, 2: t * t})
    a = eval_truncated(series, s.point(0.02, theta), s)
    b = eval_truncated(series, s.point(0.02, theta + 1e-7), s)
    assert abs(a - b) < 1e-5


@given(st.floats(-0.9 * math.pi, 0.9 * math.pi), st.floats(0.001, 0.05))
@mpmath.workprec(256)
def test_delta_matches_log_derivative(theta, radius):
    series = DulacSeries({0: LogPoly.const(1), 1: t, 2: LogPoly([mpq(1, 3), -1, 2]), 3: t * t * t})
    x = WIDE.point(radius, theta)
    lnx = branch_log(x, WIDE)
    h = mpmath.mpf(2) ** -30
    up = eval_truncated(series, x * mpmath.exp(h), WIDE, lnx=lnx + h)
    down = eval_truncated(series, x * mpmath.exp(-h), WIDE, lnx=lnx - h)
    fd = (up - down) / (2 * h)
    assert abs(fd - eval_truncated(delta(series), x, WIDE)) < mpmath.mpf(2) ** -50


def test_residual_examples():
    exact = OdeProblem("exact", parse_expression("y1 - y0 + 1", 1), DulacSeries({0: LogPoly.const(1)}, 0))
    s = DulacSeries({0: LogPoly.const(1), 1: LogPoly.const(2)})
    assert residual(exact, s, mpmath.mpf("0.03")) == 0
    shift = OdeProblem("shift", parse_expression("y0 - 1", 1), DulacSeries({0: LogPoly.const(1)}, 0))
    for x in ("0.01", "-0.02", "0.001"):
        assert residual(shift, DulacSeries({}, 5), mpmath.mpc(x)) == -1


def test_abel_residual_scales_like_next_order():
    p = corpus.abel(0)
    phi = solve(p, 6)[2]
    N1 = phi.trunc + 1

    def ratio(x):
        x = mpmath.mpf(x)
        return abs(residual(p, phi, x)) / (x ** N1 * abs(mpmath.log(x)) ** N1)

    K = ratio("1e-2")
    assert all(ratio(x) <= 2 * K for x in ("5e-3", "2.5e-3", "1e-3"))


@mpmath.workprec(256)
def test_abel_value_within_majorant_tail_bound():
    p = corpus.abel(1)
    prep, tail, phi = solve(p, 20)
    ell = prep.ell
    _, long_tail, ref = solve(p, 60)
    rep = run_majorant(prep.reduced, long_tail)
    eps, C = rep.eps, prep.reduced.C
    x = mpmath.mpf("1e-3")
    s = max(1, eps * abs(mpmath.log(x)))
    bound = sum(promote_norm(rep.tail.P[k]) * s ** (k * C) * x ** (k + ell) for k in range(21, 61))
    # reference summed from the top order down
    lnx = mpmath.log(x)
    total = mpmath.mpf(0)
    for k in sorted(ref.terms, reverse=True):
        total += mpmath.polyval([mpmath.mpf(c.numerator) / c.denominator for c in reversed(ref[k].coeffs)], lnx) * x ** k
    assert abs(eval_truncated(phi, x) - total) <= bound
    assert bound < mpmath.mpf(10) ** -30


def promote_norm(P):
    return sum(mpmath.mpf(c.numerator) / c.denominator for c in P.coeffs)


@pytest.mark.parametrize("N", [6, 12])
def test_decay_passes_on_abel(N):
    p = corpus.abel(1)
    phi = solve(p, N)[2]
    rep = decay_exponent(p, phi, WIDE, order=N)
    assert rep.passed, rep.to_json()
    strict = decay_exponent(p, phi, WIDE)
    assert strict.order == phi.trunc and strict.passed


def test_decay_fault_injection():
    p = corpus.abel(1)
    phi = solve(p, 6)[2]
    top = phi.trunc
    terms = dict(phi.terms)
    terms[top] = terms[top] + LogPoly.const(1)
    bad = DulacSeries(terms, top)
    rep = decay_exponent(p, bad, WIDE)
    assert not rep.passed
    assert abs(rep.slope - top) < 0.6


def test_decay_exact_solution_sentinel():
    exact = OdeProblem("exact", parse_expression("y1 - y0 + 1", 1), DulacSeries({0: LogPoly.const(1)}, 0))
    s = DulacSeries({0: LogPoly.const(1), 1: LogPoly.const(2)}, 4)
    rep = decay_exponent(exact, s, WIDE)
    assert rep.slope == math.inf and rep.passed
    assert rep.to_json()["slope"] == "inf"
