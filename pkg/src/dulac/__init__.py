"""Log-power series solutions of polynomial ODEs in delta = x d/dx, with a convergence check."""

__version__ = "0.1.0"

from .field import LogPoly, QQi, lognorm, shifted_apply  # noqa: E402
from .series import DulacSeries, delta, substitute, val  # noqa: E402
from .poly import OdeProblem, Poly, parse_expression, parse_problem  # noqa: E402
from .certifier import Certificate, certify  # noqa: E402
from .reducer import ReducedProblem, choose_ell, reduce  # noqa: E402
from .solver import TailSolution, recompose, solve_poly_linear_ode, solve_tail  # noqa: E402
from .oracle import seed_extend_oracle  # noqa: E402

__all__ = [
    "Certificate",
    "DulacSeries",
    "LogPoly",
    "OdeProblem",
    "Poly",
    "QQi",
    "ReducedProblem",
    "TailSolution",
    "certify",
    "choose_ell",
    "delta",
    "lognorm",
    "parse_expression",
    "parse_problem",
    "recompose",
    "reduce",
    "seed_extend_oracle",
    "shifted_apply",
    "solve_poly_linear_ode",
    "solve_tail",
    "substitute",
    "val",
]
