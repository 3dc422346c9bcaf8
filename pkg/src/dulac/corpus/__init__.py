"""
Shipped problem corpus.

The JSON files in this directory are emitter output of :func:`build`; the
test suite checks that they re-serialize byte for byte.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from gmpy2 import isqrt, mpq

from ..field import LogPoly
from ..poly import OdeProblem, parse_expression, parse_problem
from ..series import DulacSeries

ABEL_F = "y0*y1 - y0^2 + x^2*y0 + 1"

PAINLEVE6_F = (
    "2*y2*(x-1)^2*y0*(y0-1)*(y0-x)"
    " - y1^2*(x-1)^2*((y0-1)*(y0-x) + y0*(y0-x) + y0*(y0-1))"
    " + 2*y1*x*(x-1)*y0*(y0-1)^2"
    " - (2*a*y0^2*(y0-1)^2*(y0-x)^2 + 2*b*x*(y0-1)^2*(y0-x)^2"
    " + 2*c*(x-1)*y0^2*(y0-x)^2 + 2*d*x*(x-1)*y0^2*(y0-1)^2)"
)

# both have the closed form 1/(1 - x ln x) = sum (x ln x)^k
RICCATI_F = "y1 - y0^2 + y0 - x*y0^2"
SECOND_ORDER_F = "y2 - (2*y0 - 1 + 2*x*y0)*y1 - x*y0^2"

# x^2 w' = w - x - x^2 in delta form; its power series solution has (k-1)! coefficients
EULER_F = "x*y1 - y0 + 1 + x"


def abel(C=0) -> OdeProblem:
    """Abel equation of the second kind after ``w = y/x``; seed ``1 + (C - ln x) x^2``."""
    C = mpq(C)
    seed = DulacSeries({0: LogPoly.const(1), 2: LogPoly([C, -1])}, 2)
    label = str(C).replace("/", "_").replace("-", "m")
    return OdeProblem(f"abel_C{label}", parse_expression(ABEL_F, 1), seed)


def painleve6(a="2", b="0", c="1/2", d="0", branch=1, free=1) -> OdeProblem:
    """Painleve VI with rational ``sqrt(c/a)``; seed ``1 + branch * sqrt(c/a)``."""
    params = {"a": a, "b": b, "c": c, "d": d}
    F = parse_expression(PAINLEVE6_F, 2, params)
    ratio = mpq(c) / mpq(a)
    root = mpq(isqrt(ratio.numerator), isqrt(ratio.denominator))
    if root * root != ratio:
        raise ValueError("c/a must be the square of a rational")
    seed = DulacSeries({0: LogPoly.const(1 + branch * root)}, 0)
    return OdeProblem("painleve6", F, seed, {3: mpq(free)})


def riccati() -> OdeProblem:
    seed = DulacSeries({0: LogPoly.const(1), 1: LogPoly([0, 1])}, 1)
    return OdeProblem("riccati_log", parse_expression(RICCATI_F, 1), seed)


def second_order() -> OdeProblem:
    seed = DulacSeries({0: LogPoly.const(1), 1: LogPoly([0, 1])}, 1)
    return OdeProblem("second_order_log", parse_expression(SECOND_ORDER_F, 2), seed)


def euler() -> OdeProblem:
    """``a_n = 0``: the certificate does not apply (and the series diverges)."""
    seed = DulacSeries({0: LogPoly.const(1), 1: LogPoly.const(1)}, 1)
    return OdeProblem("euler_fail", parse_expression(EULER_F, 1), seed)


def build() -> dict:
    problems = [abel(0), abel(1), abel(mpq(-1, 2)), painleve6(), riccati(), second_order(), euler()]
    return {p.name: p for p in problems}


NAMES = ("abel_C0", "abel_C1", "abel_Cm1_2", "painleve6", "riccati_log", "second_order_log", "euler_fail")
CONVERGENT = NAMES[:-1]


def path(name) -> Path:
    return Path(str(resources.files(__name__).joinpath(f"{name}.json")))


def text(name) -> str:
    return path(name).read_text()


def load(name) -> OdeProblem:
    return parse_problem(text(name))


def write(directory=None) -> list:
    """Regenerate the JSON files (maintenance helper)."""
    directory = Path(directory) if directory else Path(__file__).parent
    out = []
    for name, problem in build().items():
        target = directory / f"{name}.json"
        target.write_text(problem.dumps())
        out.append(target)
    return out
