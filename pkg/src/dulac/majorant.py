"""
Majorant equation for the reduced problem and the radius it certifies.

In the rescaled logarithm ``s = -eps ln x`` the operator ``k + d/dt`` acts on
coefficient columns as ``k I - N_k``, with ``N_k`` the nilpotent matrix of
``eps d/ds``.  The majorant equation ``sigma U = x M~(x, s, U)`` (``U`` standing
for ``delta^n u``) has nonnegative coefficients, and its solution dominates
the true tail in norm order by order.

Everything here is exact over the rationals once ``eps_bar`` is rational:
irrational quantities (``|alpha|`` for complex ``alpha``, ``|a_n|``) are
rounded *up* to dyadic rationals, which only enlarges the majorant.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from gmpy2 import mpq

from .field import (
    DEFAULT_PREC,
    LogPoly,
    abs_bound,
    div_bound,
    format_scalar,
    is_exact,
    is_real,
    lognorm,
    lognorm_lower,
    mul_bound,
    promote,
    rat_ceil,
    sum_bound,
)
from .online import Leaf, OnlinePoly
from .poly import Poly, poly_to_json
from .reducer import max_real_shift, polynomial_roots


class MajorantError(ValueError):
    pass


def exact_fraction(value) -> mpq:
    """``"1/2"``, ``"0.25"``, ``0.5`` or an ``mpq`` as an exact rational."""
    if isinstance(value, str):
        return mpq(Fraction(value.strip()))
    if isinstance(value, float):
        return mpq(Fraction(value))
    return mpq(value)


@dataclass(frozen=True)
class MajorantConfig:
    """``eps_bar`` bounds ``||N_k|| / k``; ``eps = eps_bar / C`` rescales ``ln x``."""

    eps_bar: mpq = mpq(1, 2)
    r: int | None = None
    prec: int = DEFAULT_PREC

    def __post_init__(self):
        object.__setattr__(self, "eps_bar", exact_fraction(self.eps_bar))
        if not 0 < self.eps_bar < 1:
            raise MajorantError("eps_bar must lie in (0, 1)")

    def eps_scale(self, C: int) -> mpq:
        # C = 0 means log-free coefficients: N_k = 0 and any eps works
        return self.eps_bar / C if C else self.eps_bar

    def r_for(self, C: int) -> int:
        r = C + 1 if self.r is None else int(self.r)
        if r <= C:
            raise MajorantError(f"r = {r} must exceed C = {C}")
        return r


# -- norm calculus ----------------------------------------------------------


def nilpotent(nu: int, eps) -> list:
    """Matrix of ``eps d/ds`` on coefficient columns of degree ``<= nu``."""
    size = nu + 1
    N = [[mpq(0)] * size for _ in range(size)]
    for i in range(1, size):
        N[i - 1][i] = eps * i
    return N


def _matmul(A, B):
    n = len(A)
    return [[sum((A[i][l] * B[l][j] for l in range(n) if A[i][l] != 0 and B[l][j] != 0), mpq(0))
             for j in range(n)] for i in range(n)]


def _identity(n, scale=1):
    return [[mpq(scale) if i == j else mpq(0) for j in range(n)] for i in range(n)]


def matrix_poly(L: LogPoly, A) -> list:
    """``L(A)`` by Horner's rule."""
    n = len(A)
    out = _identity(n, 0)
    for c in reversed(L.coeffs):
        out = _matmul(out, A)
        for i in range(n):
            out[i][i] = out[i][i] + c
    return out


def upper_inverse(A) -> list:
    """Inverse of an upper-triangular matrix with nonzero diagonal."""
    n = len(A)
    X = _identity(n, 0)
    for j in range(n):
        X[j][j] = 1 / A[j][j]
        for i in range(j - 1, -1, -1):
            acc = sum((A[i][l] * X[l][j] for l in range(i + 1, j + 1)), mpq(0))
            X[i][j] = -acc / A[i][i]
    return X


def matrix_norm1(A, prec=DEFAULT_PREC, rnd="c"):
    """Maximum absolute column sum (exact for real rationals, else directed)."""
    cols = [[row[j] for row in A] for j in range(len(A))]
    if all(is_exact(v) and is_real(v) for col in cols for v in col):
        return max(sum((abs(mpq(v)) for v in col), mpq(0)) for col in cols)
    return max(sum_bound([abs_bound(v, prec, rnd) for v in col], prec, rnd) for col in cols)


@dataclass
class NormBounds:
    """Explicit ``L(kI - N_k)`` and its inverse, their 1-norms and the a-priori bounds."""

    k: int
    nu: int
    eps_eff: mpq
    forward_norm: object
    inverse_norm: object
    forward_bound: object
    inverse_bound: object
    N: list = field(repr=False)
    A: list = field(repr=False)
    A_inv: list = field(repr=False)

    @property
    def holds(self):
        return self.forward_norm <= self.forward_bound and self.inverse_norm <= self.inverse_bound


def norm_bounds(L: LogPoly, k: int, nu: int, eps, prec=DEFAULT_PREC) -> NormBounds:
    """Bounds ``||L(kI-N_k)|| <= (1+e)^n |L(k)|`` and ``||L(kI-N_k)^-1|| <= 1/((1-e)^n |L(k)|)``
    with ``e = nu * eps / k``, together with the true norms of the explicit matrices.

    Requires ``e < 1`` and the roots of ``L`` in the closed left half-plane.
    """
    eps = exact_fraction(eps)
    if k < 1:
        raise MajorantError("k must be a positive integer")
    e = nu * eps / k
    if e >= 1:
        raise MajorantError(f"nu * eps / k = {e} must be < 1")
    n = L.degree
    Lk = L(mpq(k))
    if Lk == 0:
        raise MajorantError(f"L({k}) = 0")
    N = nilpotent(nu, eps)
    shifted = [[(mpq(k) if i == j else mpq(0)) - N[i][j] for j in range(nu + 1)] for i in range(nu + 1)]
    A = matrix_poly(L, shifted)
    A_inv = upper_inverse(A)
    if is_exact(Lk) and is_real(Lk):
        mag = abs(mpq(Lk))
        fwd = (1 + e) ** n * mag
        inv = 1 / ((1 - e) ** n * mag)
    else:
        fwd = mul_bound((1 + e) ** n, abs_bound(Lk, prec, "c"), prec, "c")
        inv = div_bound(mpq(1), mul_bound((1 - e) ** n, abs_bound(Lk, prec, "f"), prec, "f"), prec, "c")
    return NormBounds(k, nu, e, matrix_norm1(A, prec, "c"), matrix_norm1(A_inv, prec, "c"),
                      fwd, inv, N, A, A_inv)


# -- constants ----------------------------------------------------------------


@dataclass
class MajorantConstants:
    sigma: mpq
    inv_sigma: mpq
    c: mpq
    eps_bar: mpq
    n: int
    sup_argmax: int | None
    lambdas: list

    def to_json(self):
        return {
            "sigma": format_scalar(self.sigma),
            "inv_sigma": format_scalar(self.inv_sigma),
            "c": format_scalar(self.c),
            "eps_bar": format_scalar(self.eps_bar),
            "n": self.n,
            "sup_argmax": self.sup_argmax,
            "lambdas": [format_scalar(mpmath.mpc(z)) if isinstance(z, mpmath.mpc) else format_scalar(z)
                        for z in self.lambdas],
        }


def compute_sigma(L: LogPoly, n: int, eps_bar, prec=DEFAULT_PREC) -> MajorantConstants:
    """``1/sigma = sup_k c k^n / |L(k)|`` with ``c = ((1+eps_bar)/(1-eps_bar))^n``.

    Writing ``L(xi) = a_n prod (xi + lambda_j)`` with ``Re lambda_j >= 0`` gives
    ``|k + lambda_j| >= k``, so every ratio is at most ``c / |a_n|`` and the ratios
    tend to it: the sup equals ``c / |a_n|``, rounded up when irrational.
    """
    eps_bar = exact_fraction(eps_bar)
    if not 0 < eps_bar < 1:
        raise MajorantError("eps_bar must lie in (0, 1)")
    if L.degree != n:
        raise MajorantError(f"deg L = {L.degree} differs from n = {n}")
    if max_real_shift(L.coeffs, prec) > 0:
        raise MajorantError("L has roots in the open right half-plane")
    c = ((1 + eps_bar) / (1 - eps_bar)) ** n
    an = L.coeffs[-1]
    if is_exact(an) and is_real(an):
        inv_sigma = c / abs(mpq(an))
    else:
        inv_sigma = rat_ceil(div_bound(c, abs_bound(an, prec, "f"), prec, "c"), prec)
    roots, _ = polynomial_roots(L.coeffs, prec)
    lambdas = [-z for z in roots]
    # the sup is attained (at every k) only when L = a_n xi^n
    sup_argmax = 1 if all(v == 0 for v in L.coeffs[:-1]) else None
    return MajorantConstants(1 / inv_sigma, inv_sigma, c, eps_bar, n, sup_argmax, lambdas)


# -- majorant polynomial and its tail ----------------------------------------------


def build_majorant_poly(M: Poly, eps, c, prec=DEFAULT_PREC) -> Poly:
    """``alpha x^mu t^nu u_0^q0 ... u_n^qn  ->  |alpha| eps^-nu c^(q0+...+qn) x^mu s^nu U^(q0+...+qn)``.

    The result is a :class:`Poly` of order 0 whose single variable stands for
    ``U = delta^n u``.
    """
    eps = exact_fraction(eps)
    c = exact_fraction(c)
    terms = {}
    for (mu, nu, *qs), alpha in M.terms.items():
        mag = abs(mpq(alpha)) if is_exact(alpha) and is_real(alpha) else rat_ceil(abs_bound(alpha, prec, "c"), prec)
        q = sum(qs)
        key = (mu, nu, q)
        coeff = mag * (1 / eps) ** nu * c ** q
        terms[key] = terms.get(key, mpq(0)) + coeff
    return Poly(0, terms)


def resolvent(k: int, eps, Q: LogPoly) -> LogPoly:
    """``(k - eps d/ds)^-1 Q = (1/k) sum_i (eps/k)^i Q^(i)`` (finite for polynomials)."""
    out = LogPoly()
    term = Q
    factor = mpq(1, k)
    step = eps / k
    while term:
        out = out + term * factor
        term = term.derive()
        factor = factor * step
    return out


@dataclass
class MajorantTail:
    Q: dict
    P: dict

    @property
    def norms(self):
        return {k: lognorm(p) for k, p in self.P.items()}


def majorant_tail(Mt: Poly, inv_sigma, N: int, eps, n: int) -> MajorantTail:
    """``Q~_k = [x^k] x M~(x, s, sum_{j<k} Q~_j x^j / sigma)`` and
    ``P~_k = (1/sigma) (k - eps d/ds)^-n Q~_k`` for ``k = 1..N``."""
    eps = exact_fraction(eps)
    U = {}
    leaf = Leaf(lambda k: U[k])
    online = OnlinePoly(Mt, [leaf])
    Q, P = {}, {}
    for k in range(1, N + 1):
        q = online.coeff(k - 1)
        if any(v < 0 for v in q.coeffs):
            raise AssertionError(f"negative coefficient in majorant Q~_{k}")
        U[k] = q * inv_sigma
        p = q * inv_sigma
        for _ in range(n):
            p = resolvent(k, eps, p)
        Q[k] = q
        P[k] = p
    return MajorantTail(Q, P)


# -- domination ------------------------------------------------------------------


@dataclass
class Domination:
    k: int
    lhs: object
    rhs: object

    @property
    def ok(self):
        return self.lhs <= self.rhs

    def to_json(self):
        return {"k": self.k, "norm_P": _dec(self.lhs), "norm_tilde_P": _dec(self.rhs), "ok": self.ok}


def rescaled_norm(P: LogPoly, eps, prec=DEFAULT_PREC):
    """Norm of ``P`` written in ``s = -eps t``: coefficient ``i`` times ``(-1/eps)^i``."""
    return lognorm(P.rescale(-1 / exact_fraction(eps)), prec)


def check_domination(P: dict, tilde_P: dict, eps, prec=DEFAULT_PREC) -> list:
    """``||P_k rescaled|| <= ||P~_k||`` per order (left rounded up, right down)."""
    if sorted(P) != sorted(tilde_P):
        raise MajorantError("solver and majorant tails cover different orders")
    return [Domination(k, rescaled_norm(P[k], eps, prec), lognorm_lower(tilde_P[k], prec)) for k in sorted(P)]


# -- radius -------------------------------------------------------------------


@dataclass
class RadiusEstimate:
    """Radii in ``w = |x|^(1 - C/r)``; ``x_radius`` converts back to ``|x|``."""

    rho_emp: object
    rho_cert: object
    r: int
    C: int
    eps: mpq
    witness: dict = field(default_factory=dict)
    fit: dict = field(default_factory=dict)

    @property
    def sector_rule(self):
        return f"|{self.eps} * ln x| < |x|^(-1/{self.r})"

    def x_radius(self, rho):
        if rho is None:
            return None
        if rho == math.inf:
            return math.inf
        return promote(rho) ** (mpmath.mpf(self.r) / (self.r - self.C))

    def admissible(self, x) -> bool:
        x = mpmath.mpc(x)
        return abs(self.eps * mpmath.log(x)) < abs(x) ** (-mpmath.mpf(1) / self.r)

    def to_json(self):
        return {
            "rho_emp": _dec(self.rho_emp),
            "rho_cert": _dec(self.rho_cert),
            "x_radius_emp": _dec(self.x_radius(self.rho_emp)),
            "x_radius_cert": _dec(self.x_radius(self.rho_cert)),
            "r": self.r,
            "C": self.C,
            "eps": format_scalar(self.eps),
            "sector_rule": self.sector_rule,
            "witness": {k: (_dec(v) if not isinstance(v, (int, str, bool)) else v) for k, v in self.witness.items()},
            "fit": {k: (_dec(v) if not isinstance(v, (int, str, list)) else v) for k, v in self.fit.items()},
        }


def _dec(v, digits=20):
    if v is None:
        return None
    if v == math.inf or (isinstance(v, mpmath.mpf) and mpmath.isinf(v)):
        return "inf"
    return mpmath.nstr(promote(v) if not isinstance(v, mpmath.mpf) else v, digits, strip_zeros=False)


def fit_radius(norms: dict):
    """Least-squares slope of ``log ||P~_k||`` against ``k`` over the last half of
    the nonzero norms; returns ``(rho, diagnostics)``."""
    if len(norms) < 8:
        raise MajorantError(f"need at least 8 orders for a radius fit, got {len(norms)}")
    nz = [(k, v) for k, v in sorted(norms.items()) if v > 0]
    if not nz:
        return math.inf, {"orders": [], "slope": None}
    tail = nz[len(nz) // 2:]
    if len(tail) < 2:
        tail = nz[-2:]
    if len(tail) < 2:
        return math.inf, {"orders": [k for k, _ in tail], "slope": None}
    ks = [k for k, _ in tail]
    logs = [float(mpmath.log(promote(v))) for _, v in tail]
    slope, intercept = statistics.linear_regression(ks, logs)
    rho = mpmath.exp(-mpmath.mpf(slope))
    return rho, {"orders": ks, "slope": mpmath.mpf(slope), "intercept": mpmath.mpf(intercept)}


def contraction_map(Mt: Poly, inv_sigma, r: int, s, B):
    """``g(B) = (1/sigma) sum |coeff| rho^(1 + mu - nu/r) B^q`` and ``g'(B)`` at ``rho = s^r``."""
    g = mpq(0)
    dg = mpq(0)
    for (mu, nu, q), coeff in Mt.terms.items():
        w = coeff * s ** (r * (1 + mu) - nu)
        g += w * B ** q
        if q:
            dg += w * q * B ** (q - 1)
    return g * inv_sigma, dg * inv_sigma


def certify_radius(Mt: Poly, inv_sigma, r: int, bits=24, B_range=range(-64, 33)):
    """Largest ``rho = s^r`` (``s = j / 2^bits < 1``) admitting ``B`` with ``g(B) <= B``
    and ``g'(B) < 1``.  Exact rational arithmetic; returns ``(rho, witness)``."""

    def witness(s):
        for e in B_range:
            B = mpq(2) ** e
            g, dg = contraction_map(Mt, inv_sigma, r, s, B)
            if g <= B and dg < 1:
                return {"s": s, "B": B, "g_B": g, "dg_B": dg}
        return None

    lo, hi = 0, 2 ** bits
    best = None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        w = witness(mpq(mid, 2 ** bits))
        if w is not None:
            lo, best = mid, w
        else:
            hi = mid
    if best is None:
        return None, {}
    s = best["s"]
    return s ** r, best


def estimate_radius(norms: dict, C: int, eps, r: int, Mt: Poly = None, inv_sigma=None) -> RadiusEstimate:
    rho, fit = fit_radius(norms)
    rho_cert, wit = (None, {})
    if rho == math.inf:
        rho_cert = math.inf
    elif Mt is not None:
        rho_cert, wit = certify_radius(Mt, inv_sigma, r)
    if wit:
        wit = {"s": wit["s"], "B": wit["B"], "g_B": wit["g_B"], "dg_B": wit["dg_B"]}
    return RadiusEstimate(rho, rho_cert, r, C, exact_fraction(eps), wit, fit)


# -- orchestration ----------------------------------------------------------------


@dataclass
class MajorantReport:
    config: MajorantConfig
    constants: MajorantConstants
    eps: mpq
    Mt: Poly
    tail: MajorantTail
    domination: list
    radius: RadiusEstimate

    @property
    def dominated(self):
        return all(d.ok for d in self.domination)

    def to_json(self):
        return {
            "eps_bar": format_scalar(self.config.eps_bar),
            "eps": format_scalar(self.eps),
            "constants": self.constants.to_json(),
            "M_tilde": poly_to_json(self.Mt, uvar="U"),
            "norms": [{"k": k, "tilde_P": _dec(v)} for k, v in self.tail.norms.items()],
            "degrees": {str(k): p.degree if p else None for k, p in self.tail.P.items()},
            "domination": [d.to_json() for d in self.domination],
            "dominated": self.dominated,
            "radius": self.radius.to_json(),
        }


def run_majorant(red, tail, cfg: MajorantConfig = MajorantConfig(), N=None) -> MajorantReport:
    """Majorant tail, domination check and radius estimate for a solved reduced problem."""
    N = tail.N if N is None else N
    eps = cfg.eps_scale(red.C)
    r = cfg.r_for(red.C)
    consts = compute_sigma(red.L, red.n, cfg.eps_bar, cfg.prec)
    Mt = build_majorant_poly(red.M, eps, consts.c, cfg.prec)
    mt = majorant_tail(Mt, consts.inv_sigma, N, eps, red.n)
    P = {k: tail.P[k] for k in range(1, N + 1)}
    dom = check_domination(P, mt.P, eps, cfg.prec)
    radius = estimate_radius(mt.norms, red.C, eps, r, Mt, consts.inv_sigma)
    return MajorantReport(cfg, consts, eps, Mt, mt, dom, radius)
