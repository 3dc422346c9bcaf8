"""
Order-by-order solution of the reduced equation ``L(delta) u = x M``.

At order ``k`` the coefficient ``P_k`` solves ``L(k + d/dt) P_k = R_k`` where
``R_k`` is the ``x^k`` coefficient of ``x M(x, t, psi, ..., delta^n psi)`` and
only involves ``P_1 .. P_{k-1}``.  ``R_k`` is produced by an online evaluation
of ``M`` (see :mod:`dulac.online`), so each new order costs one convolution
step per product node instead of a full re-substitution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpq

from .field import LogPoly, derive, taylor_coeffs
from .online import Leaf, OnlinePoly
from .reducer import ReducedProblem
from .series import DulacSeries


class ResonanceError(ArithmeticError):
    def __init__(self, k):
        self.k = k
        super().__init__(f"resonant order {k}: L({k}) = 0")


class RecomposeError(ValueError):
    pass


def solve_poly_linear_ode(L: LogPoly, k, R: LogPoly) -> LogPoly:
    """Unique polynomial ``P`` with ``L(k + d/dt) P = R`` (requires ``L(k) != 0``).

    Back-substitution on the upper-triangular coefficient system whose diagonal
    is ``L(k)``.
    """
    tau = taylor_coeffs(L, k)
    if tau[0] == 0:
        raise ResonanceError(k)
    d = len(R) - 1
    if d < 0:
        return LogPoly()
    p = [mpq(0)] * (d + 1)
    inv = 1 / tau[0]
    for deg in range(d, -1, -1):
        acc = R[deg]
        # D^i t^(deg+i) contributes (deg+i)!/deg! t^deg
        fall = 1
        for i in range(1, len(tau)):
            if deg + i > d:
                break
            fall *= deg + i
            if tau[i] != 0:
                acc = acc - tau[i] * fall * p[deg + i]
        p[deg] = acc * inv
    return LogPoly(p)


def _delta_coeff(P, k, i):
    """``(k + d/dt)^i P``."""
    for _ in range(i):
        P = P * k + derive(P)
    return P


@dataclass
class TailSolution:
    """``psi = sum_{k>=1} P_k x^k`` together with the right-hand sides ``R_k``."""

    L: LogPoly
    C: int
    P: dict = field(default_factory=dict)
    R: dict = field(default_factory=dict)

    @property
    def N(self):
        return max(self.P, default=0)

    @property
    def degrees(self):
        return {k: (len(p) - 1 if p else None) for k, p in self.P.items()}

    def series(self) -> DulacSeries:
        return DulacSeries(dict(self.P), self.N)

    def to_json(self):
        return {
            "N": self.N,
            "C": self.C,
            "degrees": {str(k): d for k, d in self.degrees.items()},
            "P": [{"k": k, "p": p.to_json()} for k, p in self.P.items()],
            "R": [{"k": k, "p": p.to_json()} for k, p in self.R.items()],
        }


class _TailState:
    def __init__(self):
        self.solved = {}

    def P(self, k):
        try:
            return self.solved[k]
        except KeyError:
            raise RuntimeError(f"P_{k} requested before it was solved") from None


def solve_tail(red: ReducedProblem, N: int) -> TailSolution:
    """Compute ``P_1 .. P_N`` of the unique formal solution of the reduced equation."""
    if N < 1:
        raise ValueError("N must be >= 1")
    state = _TailState()
    leaves = [Leaf(lambda k, i=i: _delta_coeff(state.P(k), k, i)) for i in range(red.n + 1)]
    online = OnlinePoly(red.M, leaves)
    sol = TailSolution(L=red.L, C=red.C)
    for k in range(1, N + 1):
        R = online.coeff(k - 1)
        P = solve_poly_linear_ode(red.L, k, R)
        state.solved[k] = P
        sol.R[k] = R
        sol.P[k] = P
    return sol


def recompose(seed: DulacSeries, ell: int, tail) -> DulacSeries:
    """``phi = phi_ell + x^ell psi`` truncated at ``ell + N``."""
    if seed.trunc is not None and seed.trunc < ell:
        raise RecomposeError(f"seed known only through order {seed.trunc} < ell = {ell}")
    psi = tail.series() if isinstance(tail, TailSolution) else tail
    N = psi.trunc if psi.trunc is not None else psi.max_order
    terms = {k: p for k, p in seed.terms.items() if k <= ell}
    for k, p in psi.terms.items():
        terms[k + ell] = p
    out = DulacSeries(terms, ell + N)
    upto = min(seed.trunc, ell + N) if seed.trunc is not None else ell + N
    for k in range(ell + 1, upto + 1):
        if seed[k] != out[k]:
            raise RecomposeError(f"seed disagrees with the computed tail at order {k}")
    return out


def tail_from_series(phi: DulacSeries, ell: int) -> DulacSeries:
    """``psi`` with ``phi = phi_ell + x^ell psi``."""
    N = phi.trunc - ell
    return DulacSeries({k - ell: p for k, p in phi.terms.items() if k > ell}, N)
