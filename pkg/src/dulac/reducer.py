"""
Reduction of ``F(x, Phi) = 0`` to ``L(delta) u = x M(x, ln x, u, ..., delta^n u)``.

The substitution ``y = phi_ell + x^ell u`` is carried out by direct polynomial
composition: every ``y_j`` becomes ``delta^j phi_ell + x^ell u_j`` with
``u_j = (delta + ell)^j u``; the result is divided by ``x^(m+ell)``, the linear
part ``sum a_j u_j`` is split off and the rest is rewritten in terms of
``delta^i u`` through the binomial expansion of ``(delta + ell)^j``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import mpmath
import sympy
from gmpy2 import mpq

from .certifier import Certificate
from .field import DEFAULT_PREC, I, LogPoly, QQi, format_scalar, gauss, is_exact, promote
from .poly import OdeProblem, Poly, poly_to_json
from .series import DulacSeries, derivative_tuple, mul


class ReductionError(ValueError):
    pass


class SeedInconsistent(ReductionError):
    def __init__(self, order):
        self.order = order
        super().__init__(f"seed inconsistent at order {order}")


class RootCertificationError(ReductionError):
    pass


@dataclass
class ReducedProblem:
    """``L(delta) u = x M`` with ``L(xi) = sum_j a_j (xi + ell)^j``; ``C = deg_t M``."""

    ell: int
    L: LogPoly
    M: Poly
    C: int
    m: int
    a: list

    @property
    def n(self):
        return self.M.n

    def to_json(self):
        return {
            "ell": self.ell,
            "L": [format_scalar(c) for c in self.L.coeffs],
            "M": poly_to_json(self.M, uvar="u"),
            "C": self.C,
            "m": self.m,
            "a": [format_scalar(c) for c in self.a],
        }


# -- roots -----------------------------------------------------------------


def polynomial_roots(coeffs, prec=DEFAULT_PREC):
    """Distinct roots of ``sum coeffs[j] mu^j`` with mpmath's error estimate.

    Exact inputs are reduced to their square-free part first; the iteration
    converges poorly on repeated roots.
    """
    cs = list(coeffs)
    while cs and cs[-1] == 0:
        cs.pop()
    if len(cs) <= 1:
        return [], mpmath.mpf(0)
    if all(is_exact(c) for c in cs):
        cs = squarefree(cs)
    with mpmath.workprec(prec):
        desc = [promote(c) for c in reversed(cs)]
        try:
            roots, err = mpmath.polyroots(desc, maxsteps=400, extraprec=prec, error=True)
        except mpmath.libmp.NoConvergence as exc:
            raise RootCertificationError(f"root finder did not converge: {exc}") from None
    return list(roots), err


def _re(z):
    return z.real if isinstance(z, mpmath.mpc) else z


def _poly_rem(a, b):
    a = list(a)
    while len(a) >= len(b) and a:
        f = a[-1] / b[-1]
        off = len(a) - len(b)
        for i, c in enumerate(b):
            a[off + i] -= f * c
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return a


def _poly_divexact(a, b):
    a = list(a)
    q = [mpq(0)] * (len(a) - len(b) + 1)
    for off in range(len(q) - 1, -1, -1):
        f = a[off + len(b) - 1] / b[-1]
        q[off] = f
        for i, c in enumerate(b):
            a[off + i] -= f * c
    return q


def squarefree(coeffs):
    """``p / gcd(p, p')`` for exact coefficients (ascending order)."""
    d = [i * c for i, c in enumerate(coeffs)][1:]
    g = _poly_gcd(coeffs, d)
    if len(g) <= 1:
        return list(coeffs)
    return _poly_divexact(coeffs, g)


def _poly_gcd(a, b):
    a = [c if isinstance(c, QQi) else mpq(c) for c in a]
    b = [c if isinstance(c, QQi) else mpq(c) for c in b]
    while a and a[-1] == 0:
        a.pop()
    while b and b[-1] == 0:
        b.pop()
    while b:
        a, b = b, _poly_rem(a, b)
    return a


def roots_on_line(coeffs, K) -> int:
    """Number of distinct roots of ``sum coeffs[j] mu^j`` on ``Re mu = K``.

    Exact: with ``mu = K + i y`` the polynomial splits as ``A(y) + i B(y)`` over
    the rationals, and the roots on the line are the real roots of ``gcd(A, B)``.
    """
    base = LogPoly([mpq(K), I])
    q = LogPoly()
    power = LogPoly.const(1)
    for c in coeffs:
        q = q + power * c
        power = power * base
    A = [gauss(c).real if not hasattr(c, "re") else c.re for c in q.coeffs]
    B = [mpq(0) if not hasattr(c, "im") else c.im for c in q.coeffs]
    g = _poly_gcd(A, B)
    if len(g) <= 1:
        return 0
    y = sympy.Symbol("y")
    poly = sympy.Poly([sympy.Rational(int(c.numerator), int(c.denominator)) for c in reversed(g)], y)
    return len(sympy.real_roots(poly.sqf_part()))


def max_real_shift(coeffs, prec=DEFAULT_PREC) -> int:
    """Smallest integer ``K`` with ``Re mu <= K`` for every root ``mu`` of ``sum coeffs[j] mu^j``.

    Numerical roots carry a guard ``g = 2 * error`` (at least a few ulps).  When an
    integer falls inside the guard band, exact coefficients are checked exactly for
    roots lying on that vertical line; otherwise the next integer is returned.
    """
    roots, err = polynomial_roots(coeffs, prec)
    if not roots:
        return -math.inf
    with mpmath.workprec(prec):
        g = max(2 * err, mpmath.mpf(2) ** (-(prec - 16)))
        R = max(_re(z) for z in roots)
        K0 = int(mpmath.ceil(R - g))
        if K0 >= R + g:
            return K0
        if g >= mpmath.mpf(1) / 4:
            raise RootCertificationError(f"root error bound {mpmath.nstr(err, 5)} too large; raise precision")
        if all(is_exact(c) for c in coeffs):
            near = sum(1 for z in roots if abs(_re(z) - K0) < g)
            if roots_on_line(coeffs, K0) == near:
                return K0
        return K0 + 1


def choose_ell(cert: Certificate, prec=DEFAULT_PREC) -> int:
    """``ell' = max(m + 1, smallest integer bounding Re of the roots of sum a_j mu^j)``."""
    if cert.m is None or not cert.a or cert.a[-1] == 0:
        raise ReductionError("certificate has a_n = 0; no reduction exists")
    return max(cert.m + 1, max_real_shift(cert.a, prec))


def shifted_L(a, ell) -> LogPoly:
    """``L(xi) = sum_j a_j (xi + ell)^j`` expanded in ``xi``."""
    base = LogPoly([mpq(ell), mpq(1)])
    out = LogPoly()
    power = LogPoly.const(1)
    for c in a:
        out = out + power * c
        power = power * base
    return out


def halfplane_clean(L: LogPoly, prec=DEFAULT_PREC) -> bool:
    """True when ``L`` has no root with positive real part."""
    return max_real_shift(L.coeffs, prec) <= 0


# -- reduction -------------------------------------------------------------


def _prefix(seed: DulacSeries, ell: int) -> DulacSeries:
    if seed.trunc is not None and seed.trunc < ell:
        raise ReductionError(f"seed known only through order {seed.trunc} < ell = {ell}")
    return DulacSeries({k: p for k, p in seed.terms.items() if k <= ell}, None)


def compose(F: Poly, phi: DulacSeries, ell: int) -> dict:
    """``F(x, Phi_ell + x^ell U)`` as ``{r: coefficient series}``, ``r`` the exponents of ``u_0..u_n``."""
    n = F.n
    ys = derivative_tuple(phi, n)
    cache = [{0: DulacSeries.const(1), 1: y} for y in ys]

    def power(j, q):
        if q not in cache[j]:
            cache[j][q] = mul(power(j, q - 1), ys[j])
        return cache[j][q]

    G = {}
    for (mu, nu, *qs), alpha in F.terms.items():
        choices = [range(q + 1) for q in qs]
        for r in itertools.product(*choices):
            coeff = alpha
            series = DulacSeries.const(1)
            for j, (q, rj) in enumerate(zip(qs, r)):
                coeff = coeff * math.comb(q, rj)
                if q - rj:
                    series = mul(series, power(j, q - rj))
            series = (series * coeff).tpow(nu).shift(mu + ell * sum(r))
            G[r] = G[r] + series if r in G else series
    return {r: s for r, s in G.items() if not s.is_zero()}


def reduce(problem: OdeProblem, cert: Certificate, ell: int, prec=DEFAULT_PREC, check_roots=True) -> ReducedProblem:
    """Reduce ``problem`` at shift ``ell`` (``ell >= choose_ell(cert)``)."""
    if not cert.passed:
        raise ReductionError("reduction needs a passing certificate")
    m, a, n = cert.m, list(cert.a), problem.n
    if ell <= m:
        raise ReductionError(f"ell = {ell} must exceed m = {m}")
    L = shifted_L(a, ell)
    if check_roots and not halfplane_clean(L, prec):
        raise ReductionError(f"L has roots in the open right half-plane for ell = {ell}")
    phi = _prefix(problem.seed, ell)
    G = compose(problem.F, phi, ell)
    zero = (0,) * (n + 1)
    shift = m + ell
    free = G.get(zero)
    if free is not None and free.terms:
        first = next(iter(free.terms))
        if first <= shift:
            raise SeedInconsistent(first)
    for r, s in G.items():
        if r == zero:
            continue
        first = next(iter(s.terms))
        if first < shift:
            raise ReductionError(f"u-term {r} has x-valuation {first} < m + ell = {shift}")
        if sum(r) == 1:
            j = r.index(1)
            if s[shift] != LogPoly.const(a[j]):
                raise ReductionError(f"linear coefficient of u_{j} disagrees with the certificate")
    # x M = -(G / x^(m+ell) - sum a_j u_j)
    lin = []
    for j in range(n + 1):
        lin_j = Poly.const(n, 0)
        for i in range(j + 1):
            lin_j = lin_j + Poly.var(n, f"y{i}").scale(mpq(math.comb(j, i) * ell ** (j - i)))
        lin.append(lin_j)
    lin_pows = [{0: Poly.const(n, 1)} for _ in range(n + 1)]

    def lin_pow(j, q):
        if q not in lin_pows[j]:
            lin_pows[j][q] = lin_pow(j, q - 1) * lin[j]
        return lin_pows[j][q]

    M = Poly.const(n, 0)
    for r, s in sorted(G.items()):
        coeff_terms = {}
        for k, p in s.terms.items():
            kk = k - shift
            if sum(r) == 1 and kk == 0:
                continue
            if kk < 1:
                raise ReductionError(f"term of order {k} below m + ell + 1 survived")
            for nu, c in enumerate(p.coeffs):
                if c != 0:
                    coeff_terms[(kk - 1, nu) + (0,) * (n + 1)] = -c
        if not coeff_terms:
            continue
        factor = Poly(n, coeff_terms)
        for j, q in enumerate(r):
            if q:
                factor = factor * lin_pow(j, q)
        M = M + factor
    return ReducedProblem(ell=ell, L=L, M=M, C=M.t_degree, m=m, a=a)
