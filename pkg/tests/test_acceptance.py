"""One test per acceptance criterion, at the stated tolerance."""

import copy
import json
import math
import random
import time

import mpmath
from gmpy2 import mpq

from dulac import corpus
from dulac.certifier import certify
from dulac.evaluator import Sector, decay_exponent
from dulac.field import LogPoly
from dulac.majorant import norm_bounds, run_majorant
from dulac.oracle import ResonanceParameterRequired, seed_extend_oracle
from dulac.pipeline import Options, prepare, run_report, solve, validate_report
from dulac.poly import parse_problem, partial
from dulac.series import DulacSeries, substitute

WIDE = Sector.centered(1.9 * math.pi, 0.05)
ABEL_CS = (0, 1, mpq(-1, 2), mpq(7, 3))


def test_c1_abel_certificate():
    start = time.perf_counter()
    p = corpus.abel(0)
    cert = certify(p, seed_extend_oracle(p, 3))
    elapsed = time.perf_counter() - start
    assert cert.m == 0 and cert.a == [mpq(-2), mpq(1)] and cert.verdict == "pass"
    assert all(isinstance(c, type(mpq(0))) for c in cert.a)
    assert elapsed < 1.0


def test_c2_abel_series_shape():
    start = time.perf_counter()
    for C in ABEL_CS:
        p = corpus.abel(C)
        _, tail, phi = solve(p, 20)
        assert phi[0] == LogPoly.const(1) and phi[2] == LogPoly([C, -1])
        assert all(not phi[k] for k in range(1, phi.trunc + 1, 2))
        assert all(d is None or d <= k * tail.C for k, d in tail.degrees.items())
        assert seed_extend_oracle(p, 12, C_guess=tail.C) == phi.truncate(12)
    assert time.perf_counter() - start < 10.0


def test_c3_painleve_instance():
    start = time.perf_counter()
    p = corpus.painleve6()
    D2 = substitute(partial(p.F, 2), p.seed)
    assert D2[0] == LogPoly.const(mpq(9, 4))
    no_params = copy.copy(p)
    no_params.free_params = {}
    try:
        seed_extend_oracle(no_params, 4)
    except ResonanceParameterRequired as exc:
        assert exc.k == 3 == math.isqrt(2 * 2) + math.isqrt(2 * 1 // 2)
    else:
        raise AssertionError("no resonance detected")
    # orders 1 and 2 are forced, so the resonance is the first free order
    assert seed_extend_oracle(no_params, 2).trunc == 2
    rep = run_report(p, Options(N=12))
    assert rep.verdict == "certified-convergent"
    assert time.perf_counter() - start < 60.0


def test_c4_degree_bound():
    violations = []
    for name in corpus.CONVERGENT:
        _, tail, _ = solve(corpus.load(name), 30)
        violations += [(name, k, d) for k, d in tail.degrees.items() if d is not None and d > k * tail.C]
    assert violations == []


def test_c5_norm_bound_suite():
    rng = random.Random(20240601)
    violations = []
    for trial in range(500):
        L = LogPoly.const(mpq(rng.choice([1, -2, 3]), rng.choice([1, 2, 4])))
        for _ in range(rng.randint(1, 3)):
            alpha = mpq(rng.randint(0, 20), rng.randint(1, 4))
            if rng.random() < 0.5:
                L = L * LogPoly([alpha, 1])
            else:
                beta = mpq(rng.randint(1, 20), rng.randint(1, 4))
                L = L * LogPoly([alpha * alpha + beta * beta, 2 * alpha, 1])
        k = rng.randint(1, 100)
        C = rng.randint(1, 3)
        eps_bar = rng.choice([mpq(1, 4), mpq(1, 2), mpq(3, 4), mpq(9, 10)])
        nu = rng.randint(0, min(k * C, 40))
        nb = norm_bounds(L, k, nu, eps_bar / C)
        if not nb.holds:
            violations.append((trial, L, k, nu, eps_bar))
    assert violations == []


def test_c6_domination():
    violations = []
    for name in corpus.CONVERGENT:
        prep, tail, _ = solve(corpus.load(name), 30)
        rep = run_majorant(prep.reduced, tail)
        violations += [(name, d.k) for d in rep.domination if not d.ok]
        assert len(rep.domination) == 30
    assert violations == []


def _series_for(name, N):
    p = corpus.load(name)
    if certify(p).passed:
        return p, solve(p, N)[2]
    return p, seed_extend_oracle(p, N)


def test_c7_residual_decay():
    start = time.perf_counter()
    failures = []
    for name in corpus.NAMES:
        for N in (6, 12):
            p, phi = _series_for(name, N)
            rep = decay_exponent(p, phi, WIDE, order=N)
            if not rep.passed:
                failures.append(f"{name} N={N}: slope {float(rep.slope):.3f} < {rep.threshold}")
    assert time.perf_counter() - start < 60.0
    assert failures == [], "; ".join(failures)


def test_c8_ell_independence():
    for name in corpus.CONVERGENT:
        p = corpus.load(name)
        ell = prepare(p).ell
        a = solve(p, 11, ell)[2]
        b = solve(p, 10, ell + 1)[2]
        assert a.truncate(ell + 10) == b.truncate(ell + 10)


def _term(phi, k, x, lnx):
    acc = mpmath.mpc(0)
    for c in reversed(phi[k].coeffs):
        acc = acc * lnx + mpmath.mpf(c.numerator) / c.denominator
    return acc * x ** k


@mpmath.workprec(256)
def test_c9_radius_sanity():
    for name in ("abel_C0", "abel_C1", "abel_Cm1_2", "painleve6"):
        prep, tail, phi = solve(corpus.load(name), 30)
        rad = run_majorant(prep.reduced, tail).radius
        rho = rad.rho_emp
        assert rho != math.inf and 0 < rho < math.inf
        for theta in WIDE.rays():
            x = WIDE.point(rho / 4, theta)
            assert rad.admissible(x) and WIDE.contains(x)
            lnx = mpmath.mpc(mpmath.log(abs(x)), theta)
            diffs = {k: abs(_term(phi, k, x, lnx)) for k in phi.terms}
            checked = 0
            for k in range(10, phi.trunc - 3):
                if diffs.get(k) and diffs.get(k + 4):
                    assert diffs[k + 4] * 10 <= diffs[k], (name, theta, k)
                    checked += 1
            assert checked >= 4


def test_c10_round_trip_and_determinism():
    for name in corpus.NAMES:
        text = corpus.text(name)
        assert parse_problem(text).dumps() == text
    phi = solve(corpus.abel(1), 12)[2]
    s = phi.dumps()
    assert DulacSeries.from_json(json.loads(s)).dumps() == s
    for name in ("abel_C0", "painleve6", "euler_fail"):
        first = run_report(corpus.text(name), Options(N=12)).dumps()
        second = run_report(corpus.text(name), Options(N=12)).dumps()
        assert first == second
        doc = json.loads(first)
        validate_report(doc)
        assert json.dumps(doc, indent=2, ensure_ascii=False) + "\n" == first
