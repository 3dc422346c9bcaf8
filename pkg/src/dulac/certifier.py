"""
Convergence certificate for a formal Dulac series solution.

Along the series ``Phi = (phi, delta phi, ..., delta^n phi)`` every partial
derivative ``dF/dy_j(x, Phi)`` must start as ``a_j x^m + b_j(ln x) x^(m+1) + ...``
with constant ``a_j`` and a common ``m``; the criterion holds when
``a_n != 0``.  Partials whose valuation exceeds ``m`` contribute ``a_j = 0``.

A failed check never means divergence: the criterion is sufficient only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
from gmpy2 import mpq

from .field import LogPoly, format_scalar, is_exact, lognorm
from .poly import OdeProblem, partial
from .series import DulacSeries, substitute, val_bound

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


class CertificateError(ValueError):
    pass


class NotAFormalSolution(CertificateError):
    def __init__(self, order, coefficient):
        self.order = order
        self.coefficient = coefficient
        super().__init__(f"not a formal solution at order {order}")


@dataclass
class Certificate:
    m: int | None
    a: list
    verdict: str
    witness: dict = field(default_factory=dict)
    prefix_order: int | None = None
    tolerance: object = 0
    reasons: list = field(default_factory=list)

    @property
    def n(self):
        return len(self.a) - 1

    @property
    def passed(self):
        return self.verdict == PASS

    def to_json(self):
        return {
            "m": self.m,
            "a": [format_scalar(c) for c in self.a],
            "verdict": self.verdict,
            "criterion": "satisfied" if self.passed else
                         "inconclusive" if self.verdict == INCONCLUSIVE else "criterion not satisfied",
            "prefix_order": self.prefix_order,
            "tolerance": format_scalar(self.tolerance),
            "reasons": list(self.reasons),
            "witness": {
                str(j): [{"k": k, "p": p.to_json()} for k, p in terms]
                for j, terms in sorted(self.witness.items())
            },
        }


def _negligible(c, scale, tol):
    if is_exact(c):
        return c == 0
    return abs(c) <= tol * scale


def _is_constant(P: LogPoly, tol):
    if P.exact:
        return len(P) <= 1
    scale = lognorm(P)
    return all(_negligible(c, scale, tol) for c in P.coeffs[1:])


def residual_check(problem: OdeProblem, prefix: DulacSeries, upto=None):
    """Return the order through which ``F(x, Phi)`` is known to vanish; raise at the
    first nonzero coefficient."""
    res = substitute(problem.F, prefix, upto)
    for k, p in res.terms.items():
        if upto is not None and k > upto:
            break
        if p.exact or not all(abs(c) <= mpmath.mpf(2) ** (-(mpmath.mp.prec - 16)) for c in p.coeffs):
            raise NotAFormalSolution(k, p)
    return res.trunc


def certify(problem: OdeProblem, prefix: DulacSeries = None, n_cert=None, tol=None) -> Certificate:
    """Check the convergence criterion along ``prefix`` (default: the problem seed).

    ``n_cert`` is the order through which the residual must vanish; it defaults
    to the prefix truncation.
    """
    prefix = problem.seed if prefix is None else prefix
    if prefix.trunc is not None and n_cert is not None and n_cert > prefix.trunc:
        raise CertificateError(f"prefix known only through order {prefix.trunc} < N_cert = {n_cert}")
    upto = prefix.trunc if n_cert is None else n_cert
    known = residual_check(problem, prefix, upto)
    exact = prefix.exact and all(is_exact(c) for c in problem.F.terms.values())
    if tol is None:
        tol = mpq(0) if exact else mpmath.mpf(2) ** (-(mpmath.mp.prec - 16))
    n = problem.n

    partials = [substitute(partial(problem.F, j), prefix, upto) for j in range(n + 1)]
    vals = []
    for D in partials:
        if exact:
            vals.append(val_bound(D))
        else:
            scale = max((lognorm(p) for p in D.terms.values()), default=mpq(0))
            nz = [k for k, p in D.terms.items() if not all(_negligible(c, max(scale, 1), tol) for c in p.coeffs)]
            vals.append(nz[0] if nz else (math.inf if D.trunc is None else D.trunc + 1))
    determined = [v for v, D in zip(vals, partials)
                  if v != math.inf and (D.trunc is None or v <= D.trunc)]
    witness = {}

    def leading(D, m):
        return [(k, D[k]) for k in (m, m + 1) if D.trunc is None or k <= D.trunc]

    if not determined:
        return Certificate(None, [mpq(0)] * (n + 1), INCONCLUSIVE, {}, known, tol,
                           ["all partial derivatives vanish through the prefix; raise N_cert"])
    m = min(determined)
    reasons = []
    for j, D in enumerate(partials):
        witness[j] = leading(D, m)
        if D.trunc is not None and D.trunc < m:
            return Certificate(m, [mpq(0)] * (n + 1), INCONCLUSIVE, witness, known, tol,
                               [f"dF/dy{j} unknown at order {m}; raise N_cert"])
    a = []
    verdict = PASS
    for j, D in enumerate(partials):
        P = D[m]
        if not _is_constant(P, tol):
            verdict = FAIL
            reasons.append(f"dF/dy{j}: coefficient of x^{m} depends on ln x")
        a.append(P[0])
    if _negligible(a[n], 1, tol) if not exact else a[n] == 0:
        verdict = FAIL
        reasons.append(f"a_{n} = 0: dF/dy{n} has valuation > m = {m}")
    return Certificate(m, a, verdict, witness, known, tol, reasons)
