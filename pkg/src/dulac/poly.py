"""
Polynomials ``F(x, t, y0, ..., yn)`` and their text/JSON forms.

``y_j`` stands for ``delta^j y`` with ``delta = x d/dx``.  Raw problems never
use ``t``; reduced right-hand sides ``M`` carry powers of ``t = ln x``.

Terms live in a dict keyed by the exponent tuple ``(mu, nu, q0, ..., qn)``
and are kept in lexicographic order of that tuple.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import mpmath
from gmpy2 import mpq

from .field import QQi, format_scalar, is_exact, parse_scalar, scalar_latex
from .series import DulacSeries


class ParseError(ValueError):
    """Malformed expression; ``pos`` is the 0-based character offset."""

    def __init__(self, message, pos=None):
        self.pos = pos
        super().__init__(message if pos is None else f"{message} at position {pos}")


class ProblemError(ValueError):
    """A problem document violates the schema."""


@dataclass(frozen=True)
class Monomial:
    coeff: object
    x_pow: int
    t_pow: int
    y_pows: tuple


class Poly:
    """Polynomial in ``x``, ``t`` and ``y0..yn`` with exact or big-float coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        if n < 0:
            raise ValueError("order n must be nonnegative")
        self.n = n
        clean = {}
        for key, c in (terms or {}).items():
            key = tuple(int(e) for e in key)
            if len(key) != n + 3:
                raise ValueError(f"exponent tuple {key} does not match order {n}")
            if any(e < 0 for e in key):
                raise ValueError(f"negative exponent in {key}")
            if c != 0:
                clean[key] = clean[key] + c if key in clean else c
        self.terms = {k: v for k, v in sorted(clean.items()) if v != 0}

    @classmethod
    def const(cls, n, c):
        return cls(n, {(0,) * (n + 3): c if isinstance(c, QQi) or not is_exact(c) else mpq(c)})

    @classmethod
    def var(cls, n, name):
        key = [0] * (n + 3)
        if name == "x":
            key[0] = 1
        elif name == "t":
            key[1] = 1
        else:
            key[2 + int(name[1:])] = 1
        return cls(n, {tuple(key): mpq(1)})

    @classmethod
    def from_monomials(cls, n, monomials):
        terms = {}
        for m in monomials:
            key = (m.x_pow, m.t_pow) + tuple(m.y_pows)
            terms[key] = terms[key] + m.coeff if key in terms else m.coeff
        return cls(n, terms)

    def monomials(self):
        return [Monomial(c, k[0], k[1], tuple(k[2:])) for k, c in self.terms.items()]

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(self.terms.items())))

    def __repr__(self):
        return f"Poly(n={self.n}, {to_expression(self)!r})"

    @property
    def is_constant(self):
        return all(k == (0,) * (self.n + 3) for k in self.terms)

    def constant_value(self):
        return self.terms.get((0,) * (self.n + 3), mpq(0))

    @property
    def t_degree(self) -> int:
        return max((k[1] for k in self.terms), default=0)

    @property
    def x_degree(self) -> int:
        return max((k[0] for k in self.terms), default=0)

    def y_degree(self) -> int:
        return max((sum(k[2:]) for k in self.terms), default=0)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return Poly(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.n, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                c = c1 * c2
                out[k] = out[k] + c if k in out else c
        return Poly(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, e):
        if not isinstance(e, int) or e < 0:
            raise ValueError("exponent must be a nonnegative integer")
        out = Poly.const(self.n, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.n != self.n:
                raise ValueError("order mismatch between polynomials")
            return other
        return Poly.const(self.n, other)

    def scale(self, c):
        return Poly(self.n, {k: v * c for k, v in self.terms.items()})


def partial(F: Poly, j: int) -> Poly:
    """Formal partial derivative with respect to ``y_j``."""
    if not 0 <= j <= F.n:
        raise IndexError(f"y index {j} out of range 0..{F.n}")
    out = {}
    pos = 2 + j
    for k, c in F.terms.items():
        q = k[pos]
        if q:
            nk = k[:pos] + (q - 1,) + k[pos + 1:]
            out[nk] = c * q
    return Poly(F.n, out)


# -- expression grammar ----------------------------------------------------
#
#   expr   := term (('+'|'-') term)*
#   term   := unary (('*'|'/') unary)*
#   unary  := ('+'|'-') unary | power
#   power  := atom (('^'|'**') INT)?
#   atom   := NUMBER | NAME | '(' expr ')'

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^()]))"
)
_DERIV_RE = re.compile(r"^d(\d*)y$")
_Y_RE = re.compile(r"^y(\d+)$")


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}",
                             pos + len(text[pos:]) - len(text[pos:].lstrip()))
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, n, params, allow_t):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.n = n
        self.params = params
        self.allow_t = allow_t

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def parse(self):
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos)
        return e

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.term()
            left = left + right if op == "+" else left - right
        return left

    def term(self):
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            op, pos = self.take()[1], self.peek()[2]
            right = self.unary()
            if op == "*":
                left = left * right
            else:
                if not right.is_constant or not right:
                    raise ParseError("division is only allowed by a nonzero constant", pos)
                left = left.scale(1 / right.constant_value())
        return left

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("+", "-"):
            self.take()
            inner = self.unary()
            return inner if val == "+" else -inner
        return self.power()

    def power(self):
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val in ("^", "**"):
            self.take()
            ekind, eval_, epos = self.take()
            if ekind == "op" and eval_ == "(":
                ekind, eval_, epos = self.take()
                closing = self.take()
                if closing[1] != ")":
                    raise ParseError("exponent must be a nonnegative integer literal", epos)
            if ekind != "num" or not eval_.isdigit():
                raise ParseError("exponent must be a nonnegative integer literal", epos)
            return base ** int(eval_)
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Poly.const(self.n, mpq(val) if not re.search(r"[eE]", val) else _exact_sci(val))
        if kind == "name":
            return self.name(val, pos)
        if kind == "op" and val == "(":
            e = self.expr()
            k2, v2, p2 = self.take()
            if v2 != ")":
                raise ParseError("expected ')'", p2)
            return e
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)

    def name(self, val, pos):
        n = self.n
        if val in self.params:
            return Poly.const(n, self.params[val])
        if val == "x":
            return Poly.var(n, "x")
        if val == "t":
            if not self.allow_t:
                raise ParseError("unknown variable 't' (log variable not allowed here)", pos)
            return Poly.var(n, "t")
        if val == "I":
            return Poly.const(n, QQi(0, 1))
        j = None
        if val == "y":
            j = 0
        elif _Y_RE.match(val):
            j = int(val[1:])
        elif _DERIV_RE.match(val):
            d = _DERIV_RE.match(val).group(1)
            j = int(d) if d else 1
        if j is None:
            raise ParseError(f"unknown variable {val!r}", pos)
        if j > n:
            raise ParseError(f"variable {val!r} exceeds the ODE order {n}", pos)
        return Poly.var(n, f"y{j}")


def _exact_sci(text):
    mant, _, exp = text.lower().partition("e")
    e = int(exp)
    base = mpq(mant)
    return base * mpq(10) ** e if e >= 0 else base / mpq(10) ** (-e)


def parse_expression(text: str, n: int, params=None, allow_t=False) -> Poly:
    """Parse and fully expand an expression in ``x``, ``y0..yn`` (aliases ``y``,
    ``dy``, ``d2y``, ...) and named rational ``params``.  Literals are exact."""
    if n < 0:
        raise ValueError("order must be nonnegative")
    params = {k: parse_scalar(v) if isinstance(v, str) else v for k, v in (params or {}).items()}
    return _Parser(text, n, params, allow_t).parse()


def _scalar_expr(c) -> str:
    if isinstance(c, QQi):
        return f"({c.re}+({c.im})*I)"
    if not is_exact(c):
        if isinstance(c, mpmath.mpc):
            return f"({format_scalar(c.real)}+({format_scalar(c.imag)})*I)"
        return format_scalar(c)
    return str(c)


def to_expression(F: Poly) -> str:
    """Emit ``F`` in the expression grammar (re-parses to an identical ``Poly``)."""
    if not F.terms:
        return "0"
    parts = []
    for (mu, nu, *qs), c in F.terms.items():
        factors = []
        for name, e in [("x", mu), ("t", nu)] + [(f"y{j}", q) for j, q in enumerate(qs)]:
            if e:
                factors.append(name if e == 1 else f"{name}^{e}")
        if isinstance(c, QQi) or isinstance(c, mpmath.mpc):
            coeff = _scalar_expr(c)
            parts.append("+ " + "*".join([coeff] + factors))
            continue
        neg = c < 0
        mag = -c if neg else c
        cs = _scalar_expr(mag)
        body = "*".join(([] if (mag == 1 and factors) else [cs if "/" not in cs else f"({cs})"]) + factors)
        parts.append(("- " if neg else "+ ") + body)
    out = " ".join(parts)
    return out[2:] if out.startswith("+ ") else "-" + out[2:]


def to_latex(F: Poly) -> str:
    parts = []
    for (mu, nu, *qs), c in F.terms.items():
        factors = []
        for name, e in [("x", mu), ("t", nu)] + [(f"y_{{{j}}}", q) for j, q in enumerate(qs)]:
            if e:
                factors.append(name if e == 1 else f"{name}^{{{e}}}")
        cs = scalar_latex(c)
        if factors and c == 1:
            cs = ""
        elif factors and c == -1:
            cs = "-"
        parts.append(cs + " ".join(factors))
    return " + ".join(parts).replace("+ -", "- ") if parts else "0"


# -- JSON ------------------------------------------------------------------


def poly_to_json(F: Poly, uvar="y"):
    out = []
    for (mu, nu, *qs), c in F.terms.items():
        item = {"c": format_scalar(c), "x": mu}
        if nu:
            item["t"] = nu
        item[uvar] = list(qs)
        out.append(item)
    return out


def poly_from_json(items, n, uvar="y", allow_t=False, prec=None) -> Poly:
    if not isinstance(items, list):
        raise ProblemError("F must be a list of monomials")
    terms = {}
    for item in items:
        if not isinstance(item, dict):
            raise ProblemError(f"monomial must be an object, got {item!r}")
        extra = set(item) - {"c", "x", "t", uvar}
        if extra:
            raise ProblemError(f"unknown monomial keys {sorted(extra)}")
        ys = item.get(uvar)
        if not isinstance(ys, list):
            raise ProblemError(f"monomial needs a '{uvar}' exponent list")
        if len(ys) != n + 1:
            raise ProblemError(f"{uvar}_pows length {len(ys)} != n+1 = {n + 1}")
        exps = [item.get("x", 0), item.get("t", 0)] + ys
        for e in exps:
            if not isinstance(e, int) or isinstance(e, bool) or e < 0:
                raise ProblemError(f"exponents must be nonnegative integers, got {e!r}")
        if exps[1] and not allow_t:
            raise ProblemError("raw problems cannot contain powers of ln x ('t')")
        try:
            c = parse_scalar(item.get("c", "1"), prec)
        except ValueError as exc:
            raise ProblemError(str(exc)) from None
        key = tuple(exps)
        terms[key] = terms[key] + c if key in terms else c
    return Poly(n, terms)


@dataclass
class OdeProblem:
    """``F(x, y, delta y, ..., delta^n y) = 0`` with a seed prefix of the solution.

    ``free_params`` maps an order ``k`` to the value(s) of the free
    coordinates of ``p_k`` at a resonance.
    """

    name: str
    F: Poly
    seed: DulacSeries
    free_params: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.F.n

    def to_json(self):
        doc = {"name": self.name, "order": self.n, "F": poly_to_json(self.F),
               "seed": self.seed.to_json()}
        if self.free_params:
            doc["free_params"] = {str(k): _fp_json(v) for k, v in sorted(self.free_params.items())}
        if self.options:
            doc["options"] = self.options
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"


def _fp_json(v):
    if isinstance(v, (list, tuple)):
        return [format_scalar(c) for c in v]
    return format_scalar(v)


def parse_free_params(doc, prec=None) -> dict:
    out = {}
    for k, v in (doc or {}).items():
        try:
            order = int(k)
        except (TypeError, ValueError):
            raise ProblemError(f"free parameter key must be an order, got {k!r}") from None
        try:
            out[order] = [parse_scalar(c, prec) for c in v] if isinstance(v, list) else parse_scalar(v, prec)
        except ValueError as exc:
            raise ProblemError(str(exc)) from None
    return out


def parse_problem(doc) -> OdeProblem:
    """Validate a problem document (dict or JSON text) into an :class:`OdeProblem`.

    ``F`` is either the canonical monomial list or an expression string;
    ``parameters`` binds names used in the expression.
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ProblemError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ProblemError("problem document must be a JSON object")
    allowed = {"name", "order", "F", "seed", "parameters", "free_params", "options"}
    extra = set(doc) - allowed
    if extra:
        raise ProblemError(f"unknown problem keys {sorted(extra)}")
    n = doc.get("order")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ProblemError("'order' must be an integer >= 1")
    options = doc.get("options", {}) or {}
    prec = options.get("prec")
    raw = doc.get("F")
    if isinstance(raw, str):
        try:
            F = parse_expression(raw, n, doc.get("parameters"))
        except ParseError as exc:
            raise ProblemError(f"F: {exc}") from None
    else:
        F = poly_from_json(raw, n, prec=prec)
    if not F:
        raise ProblemError("F is identically zero")
    try:
        seed = DulacSeries.from_json(doc.get("seed", {"trunc": 0, "terms": []}), prec)
    except ValueError as exc:
        raise ProblemError(f"seed: {exc}") from None
    if seed.trunc is None:
        raise ProblemError("seed needs a finite truncation order")
    return OdeProblem(
        name=str(doc.get("name", "problem")),
        F=F,
        seed=seed,
        free_params=parse_free_params(doc.get("free_params"), prec),
        options=dict(options),
    )
