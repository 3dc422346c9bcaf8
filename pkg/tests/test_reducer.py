import pytest
from gmpy2 import mpq

from dulac import corpus
from dulac.certifier import Certificate, certify
from dulac.field import LogPoly, QQi
from dulac.poly import OdeProblem, parse_expression
from dulac.reducer import SeedInconsistent, choose_ell, max_real_shift, reduce, roots_on_line
from dulac.series import DulacSeries, delta, mul, substitute
from dulac.solver import solve_tail


def _cert(a, m=0):
    return Certificate(m, [mpq(c) for c in a], "pass")


def test_choose_ell_examples():
    assert choose_ell(_cert([-2, 1])) == 2
    assert choose_ell(_cert([1, 1])) == 1
    assert choose_ell(_cert([2, -3, 1], m=3)) == 4


def test_choose_ell_root_on_integer_line():
    # roots 5/2 +- i: ell must exceed... K = ceil(5/2) = 3; Re(mu) = 3 never hit
    a = [mpq(29, 4), -5, 1]
    assert choose_ell(_cert(a)) == 3
    # real root exactly at 4
    assert choose_ell(_cert([-4, 1])) == 4
    assert roots_on_line([mpq(-4), mpq(1)], 4) == 1


def test_max_real_shift_complex_roots():
    # (mu - 1)^2 + 9: Re = 1
    assert max_real_shift([mpq(10), mpq(-2), mpq(1)]) == 1


def test_abel_reduction():
    p = corpus.abel(0)
    red = reduce(p, certify(p), 2)
    assert red.L == LogPoly([0, 1])
    assert red.C >= 1


def test_polynomial_solution_has_no_forcing():
    # y = 1 + 2x solves delta y - y + 1 = 0 exactly
    F = parse_expression("y1 - y0 + 1", 1)
    p = OdeProblem("exact", F, DulacSeries({0: LogPoly.const(1), 1: LogPoly.const(2)}, 1))
    cert = certify(p)
    red = reduce(p, cert, choose_ell(cert))
    assert all(any(q) for (mu, nu, *q) in red.M.terms)
    assert all(not P for P in solve_tail(red, 6).P.values())


def test_corrupted_seed():
    p = corpus.abel(0)
    cert = certify(p)
    bad = OdeProblem("bad", p.F, DulacSeries({0: LogPoly.const(1), 2: LogPoly.const(1)}, 2))
    with pytest.raises(SeedInconsistent):
        reduce(bad, cert, 2)


def _lhs_rhs(red, psi):
    # L(delta) psi versus x M(x, t, psi, delta psi, ...)
    ds = [psi]
    for _ in range(red.n):
        ds.append(delta(ds[-1]))
    power = psi
    acc = DulacSeries({}, psi.trunc)
    for c in red.L.coeffs:
        acc = acc + power * c
        power = delta(power)
    from dulac.series import evaluate_poly
    rhs = evaluate_poly(red.M, ds, psi.trunc - 1).shift(1)
    return acc, rhs


@pytest.mark.parametrize("name", ["abel_C1", "painleve6", "riccati_log"])
def test_reduced_equation_round_trip(name):
    p = corpus.load(name)
    from dulac.pipeline import prepare
    prep = prepare(p)
    tail = solve_tail(prep.reduced, 8)
    psi = tail.series()
    lhs, rhs = _lhs_rhs(prep.reduced, psi)
    for k in range(1, 9):
        assert lhs[k] == rhs[k]


def test_L_has_no_positive_integer_roots():
    for name in corpus.CONVERGENT:
        from dulac.pipeline import prepare
        L = prepare(corpus.load(name)).reduced.L
        assert all(L(k) != 0 for k in range(1, 60))


def test_repeated_roots():
    cube = LogPoly([1, 0, 1]) ** 3
    assert max_real_shift(cube.coeffs) == 0
    assert max_real_shift((LogPoly([-2, 1]) ** 4).coeffs) == 2
    z = QQi(mpq(1), mpq(2))
    p = LogPoly([-z, 1]) * LogPoly([-z, 1]) * LogPoly([mpq(-3, 2), 1])
    assert max_real_shift(p.coeffs) == 2
    assert roots_on_line((LogPoly([-4, 1]) ** 2).coeffs, 4) == 1
