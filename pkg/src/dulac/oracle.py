"""
Brute-force extension of a seed by undetermined coefficients.

Kept deliberately independent of the reducer and solver: every order is
found by substituting a candidate series straight into ``F`` and solving the
linear system for the unknown coefficients of ``p_k`` by exact row reduction.
Used to cross-check the recursion and to extend short seeds up to ``ell``.
"""

from __future__ import annotations

from gmpy2 import mpq

from .field import LogPoly, is_exact
from .poly import OdeProblem
from .series import DulacSeries, substitute


class OracleError(ValueError):
    pass


class NoExtension(OracleError):
    def __init__(self, k, budget):
        self.k = k
        super().__init__(f"no Dulac solution extending seed at order {k} (degree budget {budget})")


class ResonanceParameterRequired(OracleError):
    def __init__(self, k, free):
        self.k = k
        self.free = free
        super().__init__(f"resonance at order {k}, parameter required ({free} free coordinate(s))")


def _residual(problem, terms, upto):
    return substitute(problem.F, DulacSeries(terms, upto), upto)


def rref(rows, ncols):
    """Reduced row echelon form over an exact field; returns ``(rows, pivots)``."""
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for col in range(ncols):
        pr = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def _param_values(params, k, nfree):
    if k not in params:
        raise ResonanceParameterRequired(k, nfree)
    v = params[k]
    vals = list(v) if isinstance(v, (list, tuple)) else [v]
    if len(vals) != nfree:
        raise OracleError(f"order {k} has {nfree} free coordinate(s), {len(vals)} value(s) given")
    return vals


def seed_extend_oracle(problem: OdeProblem, K: int, params=None, C_guess=None) -> DulacSeries:
    """Extend ``problem.seed`` to a formal solution truncated at order ``K``.

    At order ``k`` the unknown is ``p_k = sum_{i<=D} c_i t^i`` with
    ``D = k * C_guess + deg_t(seed)``.  The residual is affine in ``c``; its first
    order that depends on ``c`` gives the linear system.  Free coordinates (in
    increasing ``t``-degree) are taken from ``params[k]``.
    """
    params = dict(params or problem.free_params or {})
    seed = problem.seed
    if not seed[0]:
        raise OracleError("seed must have a nonzero order-0 term")
    seed_deg = max((len(p) - 1 for p in seed.terms.values()), default=0)
    if C_guess is None:
        C_guess = max(1, seed_deg)
    start = seed.trunc + 1
    terms = dict(seed.truncate(min(seed.trunc, K)).terms)
    if K < start:
        return DulacSeries(terms, K)
    shift = None
    for k in range(start, K + 1):
        D = k * C_guess + seed_deg
        width = D + 1
        if shift is None:
            shift = _find_shift(problem, terms, k, width)
            if shift is None:
                raise OracleError(f"order-{k} coefficient never enters the residual; cannot determine it")
            if shift >= k:
                raise OracleError(f"residual is nonlinear in p_{k} (offset {shift} >= {k})")
        order = k + shift
        base = _residual(problem, terms, order)
        for j in range(order):
            if base[j]:
                raise NoExtension(j, D)
        # linear system: columns are the unit vectors t^i at order k
        b = base[order]
        cols = []
        for i in range(width):
            trial = dict(terms)
            trial[k] = LogPoly.monomial(i, mpq(1))
            cols.append(_residual(problem, trial, order)[order] - b)
        height = max([len(b)] + [len(c) for c in cols] + [1])
        rows = []
        for row in range(height):
            rows.append([c[row] for c in cols] + [-b[row]])
        if not all(is_exact(v) for r in rows for v in r):
            raise OracleError("the oracle needs exact coefficients")
        red, pivots = rref(rows, width)
        for r in red[len(pivots):]:
            if r[-1] != 0:
                raise NoExtension(k, D)
        free = [c for c in range(width) if c not in pivots]
        nullity = len(free)
        sol = [mpq(0)] * width
        if free:
            vals = _param_values(params, k, nullity)
            for c, v in zip(free, vals):
                sol[c] = v
        elif k in params and not free:
            raise OracleError(f"order {k} is not resonant; parameter not allowed")
        for r, pc in zip(red, pivots):
            sol[pc] = r[-1] - sum(r[c] * sol[c] for c in free)
        p = LogPoly(sol)
        if p:
            terms[k] = p
    return DulacSeries(terms, K)


def _find_shift(problem, terms, k, width):
    """Smallest ``s`` such that the order ``k + s`` residual depends on ``p_k``."""
    top = k + 2 * k + 4
    base = _residual(problem, terms, top)
    for s in range(0, top - k + 1):
        for i in range(width):
            trial = dict(terms)
            trial[k] = LogPoly.monomial(i, mpq(1))
            if _residual(problem, trial, k + s)[k + s] != base[k + s]:
                return s
    return None
