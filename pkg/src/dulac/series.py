"""
Truncated Dulac series ``sum_k P_k(ln x) x^k``.

A :class:`DulacSeries` stores the nonzero coefficients ``P_k`` (as
:class:`~dulac.field.LogPoly`) in a dict keyed by the integer order ``k`` and a
truncation order ``trunc``: every order ``<= trunc`` is known, higher orders
are unknown.  ``trunc=None`` marks an exact finite sum (a Dulac polynomial),
whose higher orders are known to vanish.

Every operation reports the largest truncation it can honestly assert.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from gmpy2 import mpq

from .field import LogPoly, format_scalar, parse_scalar, scalar_latex

EXACT = None


@dataclass(frozen=True)
class AtLeast:
    """Valuation of a series that vanishes through its truncation order."""

    bound: int

    def __str__(self):
        return f"≥ {self.bound}"


def _tmin(*truncs):
    vals = [t for t in truncs if t is not None]
    return min(vals) if vals else None


def _tadd(trunc, shift):
    return None if trunc is None else trunc + shift


class DulacSeries:
    __slots__ = ("terms", "trunc")

    def __init__(self, terms=None, trunc=EXACT):
        clean = {}
        for k, p in (terms or {}).items():
            if not isinstance(p, LogPoly):
                p = LogPoly(p) if isinstance(p, (list, tuple)) else LogPoly.const(p)
            k = int(k)
            if k < 0:
                raise ValueError("Dulac series orders must be nonnegative")
            if trunc is not None and k > trunc:
                continue
            if p:
                clean[k] = p
        self.terms = dict(sorted(clean.items()))
        self.trunc = trunc

    @classmethod
    def const(cls, c, trunc=EXACT):
        return cls({0: LogPoly.const(c)}, trunc)

    @classmethod
    def monomial(cls, k, p, trunc=EXACT):
        return cls({k: p}, trunc)

    def __getitem__(self, k) -> LogPoly:
        return self.terms.get(k, LogPoly())

    def __iter__(self):
        return iter(self.terms.items())

    def __eq__(self, other):
        if not isinstance(other, DulacSeries):
            return NotImplemented
        return self.trunc == other.trunc and self.terms == other.terms

    def __hash__(self):
        return hash((self.trunc, tuple(self.terms.items())))

    def __repr__(self):
        body = ", ".join(f"{k}: {p}" for k, p in self.terms.items())
        return f"DulacSeries({{{body}}}, trunc={self.trunc})"

    @property
    def exact(self) -> bool:
        return all(p.exact for p in self.terms.values())

    @property
    def max_order(self):
        return max(self.terms) if self.terms else -1

    def is_zero(self) -> bool:
        return not self.terms

    def truncate(self, N) -> "DulacSeries":
        """Forget every order above ``N`` (``N`` may exceed ``trunc`` only for exact sums)."""
        if N is None:
            return self
        if self.trunc is not None and N > self.trunc:
            raise ValueError(f"cannot extend truncation {self.trunc} to {N}")
        return DulacSeries({k: p for k, p in self.terms.items() if k <= N}, N)

    def with_trunc(self, N) -> "DulacSeries":
        return DulacSeries(self.terms, N)

    # arithmetic

    def __add__(self, other):
        if not isinstance(other, DulacSeries):
            other = DulacSeries.const(other)
        trunc = _tmin(self.trunc, other.trunc)
        out = dict(self.terms)
        for k, p in other.terms.items():
            out[k] = out[k] + p if k in out else p
        return DulacSeries(out, trunc)

    __radd__ = __add__

    def __neg__(self):
        return DulacSeries({k: -p for k, p in self.terms.items()}, self.trunc)

    def __sub__(self, other):
        if not isinstance(other, DulacSeries):
            other = DulacSeries.const(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, DulacSeries):
            return mul(self, other)
        if isinstance(other, LogPoly):
            return DulacSeries({k: p * other for k, p in self.terms.items()}, self.trunc)
        return DulacSeries({k: p * other for k, p in self.terms.items()}, self.trunc)

    __rmul__ = __mul__

    def shift(self, mu: int) -> "DulacSeries":
        """Multiply by ``x**mu``."""
        return DulacSeries({k + mu: p for k, p in self.terms.items()}, _tadd(self.trunc, mu))

    def tpow(self, nu: int) -> "DulacSeries":
        """Multiply by ``t**nu`` (that is, ``(ln x)**nu``)."""
        if nu == 0:
            return self
        return DulacSeries({k: p.shift(nu) for k, p in self.terms.items()}, self.trunc)

    def __pow__(self, e):
        if not isinstance(e, int) or e < 0:
            raise ValueError("power must be a nonnegative integer")
        out = DulacSeries.const(1)
        for _ in range(e):
            out = mul(out, self)
        return out

    # serialization

    def to_json(self):
        return {
            "trunc": self.trunc,
            "terms": [{"k": k, "p": p.to_json()} for k, p in self.terms.items()],
        }

    @classmethod
    def from_json(cls, doc, prec=None):
        if not isinstance(doc, dict) or "terms" not in doc:
            raise ValueError("series document needs 'terms' (and 'trunc')")
        trunc = doc.get("trunc")
        if trunc is not None and (not isinstance(trunc, int) or isinstance(trunc, bool) or trunc < 0):
            raise ValueError(f"bad truncation order {trunc!r}")
        terms = {}
        for item in doc["terms"]:
            k = item.get("k")
            if not isinstance(k, int) or isinstance(k, bool) or k < 0:
                raise ValueError(f"bad series order {k!r}")
            if k in terms:
                raise ValueError(f"duplicate series order {k}")
            terms[k] = LogPoly(parse_scalar(c, prec) for c in item.get("p", []))
        if trunc is not None and terms and max(terms) > trunc:
            raise ValueError("series term beyond its truncation order")
        return cls(terms, trunc)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    def to_latex(self, var="x", log=r"\ln x") -> str:
        parts = []
        for k, p in self.terms.items():
            terms = []
            for i, c in enumerate(p.coeffs):
                if c == 0:
                    continue
                cs = scalar_latex(c)
                if i == 0:
                    terms.append(cs)
                else:
                    lp = log if i == 1 else f"({log})^{{{i}}}"
                    terms.append(lp if c == 1 else f"-{lp}" if c == -1 else f"{cs}{lp}")
            poly = " + ".join(terms).replace("+ -", "- ")
            xs = "" if k == 0 else f"{var}" if k == 1 else f"{var}^{{{k}}}"
            if not xs:
                parts.append(poly)
            elif len(terms) == 1 and terms[0] in ("1",):
                parts.append(xs)
            else:
                parts.append(f"\\left({poly}\\right){xs}" if len(terms) > 1 else f"{poly}\\,{xs}")
        body = " + ".join(parts) if parts else "0"
        body = body.replace("+ -", "- ")
        if self.trunc is not None:
            body += f" + O({var}^{{{self.trunc + 1}}})"
        return body


def delta(s: DulacSeries) -> DulacSeries:
    """The derivation ``x d/dx``: ``P_k x^k -> x^k (k + d/dt) P_k``."""
    return DulacSeries({k: p * k + p.derive() for k, p in s.terms.items()}, s.trunc)


def delta_shift(s: DulacSeries, ell: int) -> DulacSeries:
    """``(delta + ell) s``."""
    return DulacSeries({k: p * (k + ell) + p.derive() for k, p in s.terms.items()}, s.trunc)


def val_bound(s: DulacSeries):
    """Valuation, or the lower bound implied by truncation for a vanishing series."""
    if s.terms:
        return next(iter(s.terms))
    return math.inf if s.trunc is None else s.trunc + 1


def val(s: DulacSeries):
    """``min{k : P_k != 0}``; ``inf`` for the exact zero series, :class:`AtLeast`
    for a series that vanishes through its truncation."""
    if s.terms:
        return next(iter(s.terms))
    return math.inf if s.trunc is None else AtLeast(s.trunc + 1)


def _cap(s: DulacSeries, order) -> DulacSeries:
    """Restrict ``s`` to orders ``<= order`` (marking it truncated there)."""
    if order is None or (s.trunc is not None and s.trunc <= order):
        return s
    return DulacSeries({k: p for k, p in s.terms.items() if k <= order}, order)


def mul(a: DulacSeries, b: DulacSeries, order=None) -> DulacSeries:
    """Truncated Cauchy product; ``order`` caps the computed orders."""
    va, vb = val_bound(a), val_bound(b)
    cands = []
    if a.trunc is not None and vb != math.inf:
        cands.append(a.trunc + vb)
    if b.trunc is not None and va != math.inf:
        cands.append(b.trunc + va)
    if order is not None:
        cands.append(order)
    trunc = min(cands) if cands else None
    out = {}
    for i, p in a.terms.items():
        if trunc is not None and i + vb > trunc:
            break
        for j, q in b.terms.items():
            k = i + j
            if trunc is not None and k > trunc:
                break
            prod = p * q
            out[k] = out[k] + prod if k in out else prod
    return DulacSeries(out, trunc)


def derivative_tuple(s: DulacSeries, n: int) -> list:
    """``[s, delta s, ..., delta^n s]``."""
    out = [s]
    for _ in range(n):
        out.append(delta(out[-1]))
    return out


def substitute(F, s, order=None) -> DulacSeries:
    """Evaluate ``F(x, s, delta s, ..., delta^n s)`` with truncated products.

    ``F`` is a :class:`~dulac.poly.Poly`; its ``t`` exponents (if any) multiply
    by powers of ``ln x``.  ``s`` may also be a list of ``n+1`` series, taken
    as the tuple itself.  ``order`` caps the computed orders.
    """
    if isinstance(s, DulacSeries):
        ys = derivative_tuple(_cap(s, order), F.n)
    else:
        ys = list(s)
        if len(ys) != F.n + 1:
            raise ValueError(f"F expects {F.n + 1} series, got {len(ys)}")
    return evaluate_poly(F, [_cap(y, order) for y in ys], order)


def evaluate_poly(F, ys, order=None) -> DulacSeries:
    """Evaluate a :class:`~dulac.poly.Poly` at a tuple of series.

    Powers of each entry are cached and built by repeated squaring.
    Summation runs over monomials in canonical order.
    """
    powers = [{1: y} for y in ys]

    def power(j, q):
        cache = powers[j]
        if q not in cache:
            half = power(j, q // 2)
            sq = mul(half, half, order)
            cache[q] = mul(sq, ys[j], order) if q % 2 else sq
        return cache[q]

    total = DulacSeries({}, order)
    for (mu, nu, *qs), coeff in F.terms.items():
        if order is not None and mu > order:
            continue
        term = None
        cap = None if order is None else order - mu
        for j, q in enumerate(qs):
            if q:
                pj = power(j, q)
                term = _cap(pj, cap) if term is None else mul(term, pj, cap)
        if term is None:
            term = DulacSeries.const(1)
        total = total + (term * coeff).tpow(nu).shift(mu)
    return total
