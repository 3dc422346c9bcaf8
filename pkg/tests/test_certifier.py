import pytest
from gmpy2 import mpq

from dulac import corpus
from dulac.certifier import CertificateError, NotAFormalSolution, certify
from dulac.field import LogPoly
from dulac.oracle import seed_extend_oracle
from dulac.poly import OdeProblem, parse_expression
from dulac.reducer import choose_ell, halfplane_clean, reduce
from dulac.series import DulacSeries


def test_abel_certificate():
    p = corpus.abel(0)
    prefix = seed_extend_oracle(p, 3)
    cert = certify(p, prefix)
    assert (cert.m, cert.a, cert.verdict) == (0, [-2, 1], "pass")
    assert cert.tolerance == 0


def test_painleve_certificate():
    cert = certify(corpus.painleve6())
    assert cert.passed
    assert cert.a[2] == 2 * mpq(3, 2) ** 2 * mpq(1, 2) == mpq(9, 4)
    # the "-" branch gives 2(1 - 1/2)^2 (1/2) with the sign of the branch
    minus = certify(corpus.painleve6(branch=-1))
    assert minus.a[2] == mpq(-1, 4)


def test_constant_partials():
    p = OdeProblem("lin", parse_expression("y1 - y0", 1), DulacSeries({}, 0))
    cert = certify(p)
    assert (cert.m, cert.a, cert.verdict) == (0, [-1, 1], "pass")


def test_stable_under_longer_prefix():
    for C in (0, 1, mpq(-1, 2)):
        p = corpus.abel(C)
        certs = [certify(p, seed_extend_oracle(p, 2 + d)) for d in range(3)]
        assert {(c.m, tuple(c.a)) for c in certs} == {(0, (-2, 1))}


def test_a_n_zero_fails():
    q = OdeProblem("a_n_zero", parse_expression("y0^2 - y0 + x*y1", 1), DulacSeries({0: LogPoly.const(1)}, 0))
    cert = certify(q)
    assert cert.verdict == "fail" and cert.a == [1, 0]
    assert any("a_1 = 0" in r for r in cert.reasons)


def test_log_dependence_fails_with_witness():
    # y = ln x solves (y1 - 1)(y0 + 1) = 0; dF/dy1 = y0 + 1 = t + 1 at order 0
    F = parse_expression("(y1 - 1)*(y0 + 1)", 1)
    cert = certify(OdeProblem("log", F, DulacSeries({0: LogPoly([0, 1])}, 0)))
    assert cert.verdict == "fail"
    assert any("dF/dy1" in r and "ln x" in r for r in cert.reasons)
    assert cert.witness[1][0] == (0, LogPoly([1, 1]))


def test_euler_fails():
    cert = certify(corpus.euler())
    assert cert.verdict == "fail" and cert.a == [-1, 0]
    assert cert.witness[1][0][0] == 0


def test_not_a_formal_solution():
    bad = corpus.abel(0)
    bad.seed = DulacSeries({0: LogPoly.const(1), 2: LogPoly.const(1)}, 2)
    with pytest.raises(NotAFormalSolution):
        certify(bad)


def test_prefix_too_short():
    with pytest.raises(CertificateError):
        certify(corpus.abel(0), n_cert=5)


@pytest.mark.parametrize("name", corpus.CONVERGENT)
def test_pass_composes_with_reduce(name):
    p = corpus.load(name)
    cert = certify(p)
    assert cert.passed
    ell = choose_ell(cert)
    prefix = p.seed if p.seed.trunc >= ell else seed_extend_oracle(p, ell)
    q = OdeProblem(p.name, p.F, prefix, p.free_params)
    red = reduce(q, cert, ell)
    assert red.L.coeffs[-1] == cert.a[-1] and halfplane_clean(red.L)
