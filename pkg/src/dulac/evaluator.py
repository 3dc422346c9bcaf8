"""
Numerical evaluation of truncated Dulac series in a sector and residual decay.

``ln x`` is taken on the branch whose argument lies in the sector's frame
``[theta_min, theta_min + 2 pi)`` and is computed at twice the working
precision, since high-degree ``P_k(ln x)`` cancel heavily.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

import mpmath

from .field import DEFAULT_PREC, promote
from .poly import OdeProblem, Poly
from .series import DulacSeries, derivative_tuple

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class Sector:
    """``{x : 0 < |x| < rho0, theta_min < arg x < theta_max}``, opening below ``2 pi``."""

    theta_min: float
    theta_max: float
    rho0: float = 0.05

    def __post_init__(self):
        opening = self.theta_max - self.theta_min
        if not 0 < opening < TWO_PI:
            raise ValueError(f"sector opening {opening} must lie in (0, 2*pi)")
        if not self.rho0 > 0:
            raise ValueError("sector radius must be positive")

    @classmethod
    def parse(cls, text: str, rho0=0.05) -> "Sector":
        """``"a:b"`` in radians."""
        try:
            a, b = (float(v) for v in text.split(":"))
        except ValueError:
            raise ValueError(f"sector must look like 'theta_min:theta_max', got {text!r}") from None
        return cls(a, b, float(rho0))

    @classmethod
    def centered(cls, opening, rho0=0.05, center=0.0) -> "Sector":
        return cls(center - opening / 2, center + opening / 2, rho0)

    @property
    def opening(self):
        return self.theta_max - self.theta_min

    @property
    def bisector(self):
        return (self.theta_min + self.theta_max) / 2

    def rays(self, inset=0.05):
        d = inset * self.opening
        return [self.bisector, self.theta_min + d, self.theta_max - d]

    def arg(self, x):
        """Argument of ``x`` in ``[theta_min, theta_min + 2 pi)``."""
        a = mpmath.arg(x)
        lo = mpmath.mpf(self.theta_min)
        two_pi = 2 * mpmath.pi
        return a + two_pi * mpmath.ceil((lo - a) / two_pi) if a < lo else a - two_pi * mpmath.floor((a - lo) / two_pi)

    def contains(self, x) -> bool:
        x = mpmath.mpc(x)
        if x == 0 or abs(x) >= self.rho0:
            return False
        return self.arg(x) < self.theta_max and self.arg(x) > self.theta_min

    def point(self, radius, theta):
        """Point with the given modulus and (sector-frame) argument."""
        return mpmath.mpc(radius) * mpmath.expj(theta)

    def to_json(self):
        return {"theta_min": self.theta_min, "theta_max": self.theta_max, "rho0": self.rho0}


def branch_log(x, sector: Sector | None = None, prec=DEFAULT_PREC):
    """``ln x`` at ``2 * prec`` bits on the sector's branch (principal if none)."""
    with mpmath.workprec(2 * prec):
        x = mpmath.mpc(x)
        if x == 0:
            raise ValueError("x = 0 is outside every sector")
        if sector is None:
            return mpmath.log(x)
        return mpmath.mpc(mpmath.log(abs(x)), sector.arg(x))


def eval_truncated(s: DulacSeries, x, sector: Sector | None = None, prec=DEFAULT_PREC, lnx=None):
    """``sum_k P_k(ln x) x^k`` over the known terms of ``s``."""
    if mpmath.mpc(x) == 0:
        raise ValueError("cannot evaluate a Dulac series at x = 0")
    if lnx is None:
        lnx = branch_log(x, sector, prec)
    with mpmath.workprec(2 * prec):
        x = mpmath.mpc(x)
        total = mpmath.mpc(0)
        for k, p in s.terms.items():
            acc = mpmath.mpc(0)
            for c in reversed(p.coeffs):
                acc = acc * lnx + promote(c)
            total += acc * x ** k
    with mpmath.workprec(prec):
        return +total


def evaluate_F(F: Poly, x, lnx, ys, prec=DEFAULT_PREC):
    """``F(x, ln x, y_0, ..., y_n)`` and the sum of term magnitudes (for underflow tests)."""
    with mpmath.workprec(2 * prec):
        x = mpmath.mpc(x)
        total = mpmath.mpc(0)
        scale = mpmath.mpf(0)
        for (mu, nu, *qs), c in F.terms.items():
            term = promote(c) * x ** mu * lnx ** nu
            for y, q in zip(ys, qs):
                if q:
                    term *= y ** q
            total += term
            scale += abs(term)
    with mpmath.workprec(prec):
        return +total, +scale


def residual(problem: OdeProblem, s: DulacSeries, x, sector: Sector | None = None, prec=DEFAULT_PREC,
             with_scale=False):
    """``F(x, Phi_N(x))`` with ``Phi_N`` the delta-images of the truncation."""
    lnx = branch_log(x, sector, prec)
    ys = [eval_truncated(d, x, sector, prec, lnx) for d in derivative_tuple(s, problem.n)]
    value, scale = evaluate_F(problem.F, x, lnx, ys, prec)
    return (value, scale) if with_scale else value


@dataclass
class DecayReport:
    slope: object
    order: int
    threshold: float
    passed: bool
    per_ray: list
    points: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_json(self):
        def dec(v):
            if v is None:
                return None
            if v == math.inf:
                return "inf"
            return mpmath.nstr(v, 12)

        return {
            "slope": dec(self.slope),
            "order": self.order,
            "threshold": self.threshold,
            "verdict": "pass" if self.passed else "fail",
            "per_ray": [{"theta": r["theta"], "slope": dec(r["slope"])} for r in self.per_ray],
            "spread": dec(self.spread),
            "points": [{"theta": p["theta"], "radius": p["radius"], "abs_residual": mpmath.nstr(p["abs"], 10),
                        "underflow": p["underflow"]} for p in self.points],
            "notes": list(self.notes),
        }

    @property
    def spread(self):
        slopes = [r["slope"] for r in self.per_ray if r["slope"] not in (None, math.inf)]
        return max(slopes) - min(slopes) if slopes else None


def decay_exponent(problem: OdeProblem, s: DulacSeries, sector: Sector, samples=24, eta=0.5,
                   order=None, prec=None) -> DecayReport:
    """Fit the slope of ``log |F(x, Phi_N(x))|`` against ``log |x|``.

    ``samples // 3`` radii from ``sector.rho0`` down by factors of 2 on three rays
    (bisector and both edges inset by 5% of the opening).  The verdict compares
    the smallest per-ray slope against ``order + 1 - eta``; ``order`` defaults
    to the truncation order of ``s`` (the pipeline passes its tail length).  Residuals below
    ``2^-(prec-16)`` times the term scale count as underflow and are skipped.
    """
    if samples < 6:
        raise ValueError("need at least 6 samples")
    N = s.trunc if order is None else order
    if N is None:
        raise ValueError("exact series need an explicit order for the decay test")
    nrad = samples // 3
    if prec is None:
        # digits lost to the smallest radius: roughly N * log2(1/radius)
        depth = math.log2(1 / sector.rho0) + nrad
        prec = max(DEFAULT_PREC, int(64 + (N + 2) * depth))
    threshold = N + 1 - eta
    tiny = mpmath.mpf(2) ** (-(prec - 16))
    points, per_ray, notes = [], [], []
    for theta in sector.rays():
        xs, logs = [], []
        for i in range(nrad):
            radius = sector.rho0 * 2.0 ** (-i)
            x = sector.point(radius, theta)
            with mpmath.workprec(prec):
                val, scale = residual(problem, s, x, sector, prec, with_scale=True)
                mag = abs(val)
                under = mag <= tiny * scale
            points.append({"theta": theta, "radius": radius, "abs": mag, "underflow": bool(under)})
            if not under:
                xs.append(math.log(radius))
                logs.append(float(mpmath.log(mag)))
        if len(xs) >= 2:
            slope, _ = statistics.linear_regression(xs, logs)
        else:
            slope = math.inf
        per_ray.append({"theta": theta, "slope": slope})
    slopes = [r["slope"] for r in per_ray]
    slope = min(slopes)
    if slope == math.inf:
        notes.append("residual below working precision at every sample (underflow)")
    elif any(p["underflow"] for p in points):
        notes.append("some samples underflowed and were skipped")
    return DecayReport(slope, N, threshold, slope >= threshold, per_ray, points, notes)
