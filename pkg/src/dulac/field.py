"""
Coefficient arithmetic and log-polynomials.

Two scalar backends share one set of operators:

* exact: ``gmpy2.mpq`` for rationals and :class:`QQi` for Gaussian rationals
  with a nonzero imaginary part;
* big-float: ``mpmath.mpf`` / ``mpmath.mpc`` at the working precision of
  ``mpmath.mp``.

A :class:`LogPoly` is a dense polynomial in the symbol ``t`` (standing for
``ln x``, or for ``-eps*ln x`` after rescaling).  The same class doubles as
the univariate polynomial ``L(xi)`` of a reduced equation.

Norms are 1-norms of the coefficient column.  When a norm cannot be
represented exactly it is returned as an ``mpf`` rounded toward +inf.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational

import mpmath
from gmpy2 import mpq, mpz
from mpmath import libmp

DEFAULT_PREC = 256

_RAT_RE = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")
_DEC_RE = re.compile(r"^\s*[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*$")
_MPTYPES = (mpmath.mpf, mpmath.mpc)


class QQi:
    """Gaussian rational ``re + im*i`` with ``mpq`` parts.

    Use :func:`gauss` to build values; it collapses to ``mpq`` when the
    imaginary part vanishes, so a ``QQi`` always has ``im != 0``.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = mpq(re)
        self.im = mpq(im)

    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im

    def conjugate(self):
        return gauss(self.re, -self.im)

    def _parts(self, other):
        if isinstance(other, QQi):
            return other.re, other.im
        if isinstance(other, (int, Rational)) or type(other) is type(mpq()):
            return mpq(other), mpq(0)
        if isinstance(other, complex):
            return mpq(Fraction(other.real)), mpq(Fraction(other.imag))
        return None

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return gauss(self.re + p[0], self.im + p[1])

    __radd__ = __add__

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return gauss(self.re - p[0], self.im - p[1])

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return gauss(p[0] - self.re, p[1] - self.im)

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = self.re, self.im
        c, d = p
        return gauss(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        c, d = p
        den = c * c + d * d
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        a, b = self.re, self.im
        return gauss((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        c, d = p
        a, b = self.re, self.im
        den = a * a + b * b
        return gauss((c * a + d * b) / den, (d * a - c * b) / den)

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out, base = mpq(1), self
        while n:
            if n & 1:
                out = base * out
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return self.re == p[0] and self.im == p[1]

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return True

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    @property
    def _mpc_(self):
        prec = mpmath.mp.prec
        return (
            libmp.from_rational(int(self.re.numerator), int(self.re.denominator), prec, "n"),
            libmp.from_rational(int(self.im.numerator), int(self.im.denominator), prec, "n"),
        )

    def __repr__(self):
        return f"QQi({self.re}, {self.im})"

    def __str__(self):
        sign = "+" if self.im >= 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}*I)"


def gauss(re, im=0):
    """Exact scalar ``re + im*i``; plain ``mpq`` when ``im == 0``."""
    im = mpq(im)
    if im == 0:
        return mpq(re)
    return QQi(re, im)


I = QQi(0, 1)


def is_exact(c) -> bool:
    return not isinstance(c, _MPTYPES)


def is_real(c) -> bool:
    return not isinstance(c, (QQi, mpmath.mpc))


def to_exact(c):
    """Coerce ints, Fractions and numeric strings to an exact scalar."""
    if isinstance(c, QQi):
        return c
    if isinstance(c, str):
        return parse_scalar(c)
    if isinstance(c, _MPTYPES):
        raise TypeError(f"cannot convert big-float {c} to an exact scalar")
    return mpq(c)


def promote(c, prec=None):
    """Convert any scalar to ``mpmath.mpc`` / ``mpf`` at the working precision."""
    if isinstance(c, mpmath.mpc) or isinstance(c, mpmath.mpf):
        return c
    prec = prec or mpmath.mp.prec
    if isinstance(c, QQi):
        return mpmath.mpc(mpmath.mpf(_rat_to_raw(c.re, prec, "n")), mpmath.mpf(_rat_to_raw(c.im, prec, "n")))
    if isinstance(c, complex):
        return mpmath.mpc(c)
    return mpmath.mpf(_rat_to_raw(c, prec, "n"))


def conj(c):
    if isinstance(c, (QQi, mpmath.mpc)):
        return c.conjugate()
    return c


# -- directed rounding ------------------------------------------------------
# Values are raw mpf tuples or mpq; results are mpf rounded in the given
# direction ('c' toward +inf, 'f' toward -inf).


def _rat_to_raw(q, prec, rnd):
    q = mpq(q)
    return libmp.from_rational(int(q.numerator), int(q.denominator), prec, rnd)


def abs_bound(c, prec=DEFAULT_PREC, rnd="c"):
    """``|c|`` as an ``mpf`` rounded toward +inf (``rnd='c'``) or -inf (``'f'``)."""
    if isinstance(c, QQi):
        sq = _rat_to_raw(c.re * c.re + c.im * c.im, prec + 8, rnd)
        return mpmath.mpf(libmp.mpf_sqrt(sq, prec, rnd))
    if isinstance(c, mpmath.mpc):
        re, im = c._mpc_
        return mpmath.mpf(libmp.mpf_hypot(re, im, prec, rnd))
    if isinstance(c, mpmath.mpf):
        return mpmath.mpf(libmp.mpf_abs(c._mpf_, prec, rnd))
    return mpmath.mpf(_rat_to_raw(abs(mpq(c)), prec, rnd))


def sum_bound(values, prec=DEFAULT_PREC, rnd="c"):
    """Sum of ``mpf``/``mpq`` values with every addition rounded toward ``rnd``."""
    acc = libmp.fzero
    for v in values:
        raw = v._mpf_ if isinstance(v, mpmath.mpf) else _rat_to_raw(v, prec, rnd)
        acc = libmp.mpf_add(acc, raw, prec, rnd)
    return mpmath.mpf(acc)


def mul_bound(a, b, prec=DEFAULT_PREC, rnd="c"):
    ra = a._mpf_ if isinstance(a, mpmath.mpf) else _rat_to_raw(a, prec, rnd)
    rb = b._mpf_ if isinstance(b, mpmath.mpf) else _rat_to_raw(b, prec, rnd)
    return mpmath.mpf(libmp.mpf_mul(ra, rb, prec, rnd))


def div_bound(a, b, prec=DEFAULT_PREC, rnd="c"):
    ra = a._mpf_ if isinstance(a, mpmath.mpf) else _rat_to_raw(a, prec, rnd)
    rb = b._mpf_ if isinstance(b, mpmath.mpf) else _rat_to_raw(b, prec, rnd)
    return mpmath.mpf(libmp.mpf_div(ra, rb, prec, rnd))


def mpf_to_mpq(value) -> mpq:
    """Exact rational value of a finite ``mpf``."""
    sign, man, exp, _ = value._mpf_
    if not man:
        return mpq(0)
    q = mpq(int(man) << exp) if exp >= 0 else mpq(int(man), mpz(1) << (-exp))
    return -q if sign else q


def rat_ceil(value, prec=DEFAULT_PREC) -> mpq:
    """Smallest dyadic rational with ``prec`` significant bits that is >= ``value``."""
    if isinstance(value, mpmath.mpf):
        return mpf_to_mpq(mpmath.mpf(libmp.normalize(*value._mpf_, prec, "c")))
    q = mpq(value)
    if q == 0:
        return q
    raw = libmp.from_rational(int(q.numerator), int(q.denominator), prec, "c")
    return mpf_to_mpq(mpmath.mpf(raw))


# -- scalar text syntax -----------------------------------------------------


def parse_scalar(obj, prec=None):
    """Parse the JSON/CLI scalar syntax.

    ``"p/q"`` and integers are exact; decimal strings (``"0.25"``, ``"1e-3"``)
    are big-float; ``{"re": ..., "im": ...}`` builds a complex scalar of the
    corresponding kind.
    """
    if isinstance(obj, bool):
        raise ValueError(f"malformed scalar {obj!r}")
    if isinstance(obj, int):
        return mpq(obj)
    if isinstance(obj, dict):
        if set(obj) - {"re", "im"} or "re" not in obj:
            raise ValueError(f"malformed scalar {obj!r}")
        re_ = parse_scalar(obj["re"], prec)
        im_ = parse_scalar(obj.get("im", "0"), prec)
        if not is_real(re_) or not is_real(im_):
            raise ValueError(f"malformed scalar {obj!r}")
        if is_exact(re_) and is_exact(im_):
            return gauss(re_, im_)
        with mpmath.workprec(prec or mpmath.mp.prec):
            return mpmath.mpc(promote(re_), promote(im_))
    if not isinstance(obj, str):
        raise ValueError(f"malformed scalar {obj!r}")
    text = obj.strip()
    if _RAT_RE.match(text):
        num, _, den = text.replace(" ", "").partition("/")
        if den and int(den) == 0:
            raise ValueError(f"zero denominator in scalar {obj!r}")
        return mpq(int(num), int(den or 1))
    if _DEC_RE.match(text):
        with mpmath.workprec(prec or mpmath.mp.prec):
            return mpmath.mpf(text)
    raise ValueError(f"malformed scalar {obj!r}")


def _format_real(c):
    if isinstance(c, mpmath.mpf):
        digits = int(mpmath.mp.prec * 0.30103) + 3
        return mpmath.nstr(c, digits)
    q = mpq(c)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(c):
    """Inverse of :func:`parse_scalar` (canonical form)."""
    if isinstance(c, QQi):
        return {"re": _format_real(c.re), "im": _format_real(c.im)}
    if isinstance(c, mpmath.mpc):
        return {"re": _format_real(c.real), "im": _format_real(c.imag)}
    return _format_real(c)


def scalar_latex(c) -> str:
    if isinstance(c, (QQi, mpmath.mpc)):
        return f"({scalar_latex(c.real)}{'+' if c.imag >= 0 else '-'}{scalar_latex(abs(c.imag))}i)"
    if isinstance(c, mpmath.mpf):
        return mpmath.nstr(c, 15)
    q = mpq(c)
    if q.denominator == 1:
        return str(q.numerator)
    sign = "-" if q < 0 else ""
    return f"{sign}\\frac{{{abs(q.numerator)}}}{{{q.denominator}}}"


# -- log-polynomials --------------------------------------------------------


def _mixed(a, b):
    """Promote exact coefficient lists when mixed with big-float ones."""
    ea = all(is_exact(c) for c in a)
    eb = all(is_exact(c) for c in b)
    if ea == eb:
        return a, b
    if ea:
        return [promote(c) for c in a], b
    return a, [promote(c) for c in b]


def _coerce_scalar(coeffs, s):
    if isinstance(s, QQi) and any(isinstance(c, _MPTYPES) for c in coeffs):
        return promote(s)
    if isinstance(s, _MPTYPES):
        return s
    return s if isinstance(s, QQi) else mpq(s)


class LogPoly:
    """Dense polynomial ``c0 + c1 t + ... + c_nu t^nu`` with nonzero leading coefficient."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = list(coeffs)
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def const(cls, c):
        return cls((c if isinstance(c, (QQi,) + _MPTYPES) else mpq(c),))

    @classmethod
    def monomial(cls, degree, c=1):
        c = c if isinstance(c, (QQi,) + _MPTYPES) else mpq(c)
        return cls([mpq(0)] * degree + [c])

    @classmethod
    def from_strings(cls, items):
        return cls(parse_scalar(s) for s in items)

    @property
    def degree(self):
        """Degree in ``t``; ``-inf`` for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else -math.inf

    @property
    def exact(self) -> bool:
        return all(is_exact(c) for c in self.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else mpq(0)

    def __iter__(self):
        return iter(self.coeffs)

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, LogPoly):
            return self.coeffs == other.coeffs
        if not isinstance(other, (LogPoly, list, tuple)) and not isinstance(other, str):
            try:
                return self.coeffs == LogPoly.const(other).coeffs
            except (TypeError, ValueError):
                return NotImplemented
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"LogPoly({[format_scalar(c) for c in self.coeffs]})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            cs = str(c) if is_exact(c) else mpmath.nstr(c, 12)
            parts.append(cs if i == 0 else f"{cs}*t" if i == 1 else f"{cs}*t^{i}")
        return " + ".join(parts)

    # arithmetic

    def __add__(self, other):
        if not isinstance(other, LogPoly):
            other = LogPoly.const(other)
        a, b = _mixed(self.coeffs, other.coeffs)
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return LogPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LogPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        if not isinstance(other, LogPoly):
            other = LogPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return LogPoly.const(other) - self

    def __mul__(self, other):
        if not isinstance(other, LogPoly):
            if not self.coeffs:
                return self
            s = _coerce_scalar(self.coeffs, other)
            if s == 0:
                return LogPoly()
            cs = self.coeffs
            if isinstance(s, _MPTYPES) and self.exact:
                cs = [promote(c) for c in cs]
            return LogPoly([c * s for c in cs])
        if not self.coeffs or not other.coeffs:
            return LogPoly()
        a, b = _mixed(self.coeffs, other.coeffs)
        if len(b) == 1:
            s = b[0]
            return LogPoly([c * s for c in a])
        if len(a) == 1:
            s = a[0]
            return LogPoly([s * c for c in b])
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return LogPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, s):
        if isinstance(s, LogPoly):
            raise TypeError("LogPoly division is only defined by scalars")
        return LogPoly([c / s for c in self.coeffs])

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("LogPoly power must be a nonnegative integer")
        out = LogPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def shift(self, nu: int) -> "LogPoly":
        """Multiply by ``t**nu``."""
        if not self.coeffs or nu == 0:
            return self
        return LogPoly([mpq(0)] * nu + list(self.coeffs))

    def derive(self) -> "LogPoly":
        return derive(self)

    def __call__(self, value):
        """Horner evaluation at ``value``."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * value + c
        return acc

    def map(self, f) -> "LogPoly":
        return LogPoly([f(c) for c in self.coeffs])

    def rescale(self, factor) -> "LogPoly":
        """Coefficient of ``t^i`` multiplied by ``factor**i``."""
        out, p = [], mpq(1)
        for c in self.coeffs:
            out.append(c * p)
            p = p * factor
        return LogPoly(out)

    def to_json(self):
        return [format_scalar(c) for c in self.coeffs]


def lognorm(P: LogPoly, prec: int = DEFAULT_PREC):
    """1-norm of the coefficient column.

    Exact (``mpq``) for exact real coefficients, otherwise an ``mpf`` upper
    bound obtained with upward rounding.
    """
    if all(is_exact(c) and is_real(c) for c in P.coeffs):
        return sum((abs(mpq(c)) for c in P.coeffs), mpq(0))
    return sum_bound([abs_bound(c, prec, "c") for c in P.coeffs], prec, "c")


def lognorm_lower(P: LogPoly, prec: int = DEFAULT_PREC):
    """Lower bound counterpart of :func:`lognorm` (downward rounding)."""
    if all(is_exact(c) and is_real(c) for c in P.coeffs):
        return sum((abs(mpq(c)) for c in P.coeffs), mpq(0))
    return sum_bound([abs_bound(c, prec, "f") for c in P.coeffs], prec, "f")


def derive(P: LogPoly) -> LogPoly:
    return LogPoly([i * c for i, c in enumerate(P.coeffs)][1:])


def taylor_coeffs(L: LogPoly, k) -> list:
    """Coefficients ``tau_i = L^(i)(k)/i!`` of ``L(k + z)`` in powers of ``z``."""
    cs = list(L.coeffs)
    n = len(cs)
    if isinstance(k, int):
        k = mpq(k)
    # repeated synthetic division by (xi - k)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            cs[j] = cs[j] + k * cs[j + 1]
    return cs


def shifted_apply(L: LogPoly, k, s, P: LogPoly) -> LogPoly:
    """Apply the operator ``L(k + s*d/dt)`` to ``P``."""
    if not L:
        raise ValueError("L must be nonzero")
    if not P:
        return LogPoly()
    tau = taylor_coeffs(L, k)
    out = LogPoly()
    dp = P
    spow = mpq(1)
    for i, ti in enumerate(tau):
        if not dp:
            break
        if ti != 0:
            out = out + dp * (ti * spow)
        dp = derive(dp)
        spow = spow * s
    return out


def binomial(n: int, k: int) -> int:
    return math.comb(n, k)
