"""Abel equation of the second kind, w = y/x form: a log series with a free constant C."""

import math

import mpmath

from dulac import corpus
from dulac.certifier import certify
from dulac.evaluator import Sector, decay_exponent, eval_truncated, residual
from dulac.field import promote
from dulac.majorant import run_majorant
from dulac.pipeline import solve

p = corpus.abel(1)
print(p.name, ":", p.seed.to_latex())

cert = certify(p)  # m = 0, a = (-2, 1)
print("certificate:", cert.m, [str(c) for c in cert.a], cert.verdict)

prep, tail, phi = solve(p, 20)
print("ell =", prep.ell, " L coefficients:", [str(c) for c in prep.reduced.L.coeffs], " C =", prep.reduced.C)
for k in range(0, 9, 2):
    print(f"  p_{k}(t) = {phi[k]}")

rep = run_majorant(prep.reduced, tail)
print("dominated through order", tail.N, ":", rep.dominated)
rad = rep.radius
print("rho_emp ~", mpmath.nstr(rad.rho_emp, 6), " rho_cert ~", mpmath.nstr(promote(rad.rho_cert), 6))
print("sector rule:", rad.sector_rule)

# evaluate near the negative real axis on the sector's branch
sector = Sector.centered(1.9 * math.pi, 0.05)
x = sector.point(0.02, 0.9 * math.pi)
print("phi(x) =", mpmath.nstr(eval_truncated(phi, x, sector), 15))
print("|F(x, phi)| =", mpmath.nstr(abs(residual(p, phi, x, sector)), 5))

dec = decay_exponent(p, phi, sector, order=20)
print("decay slope", round(float(dec.slope), 2), "vs", dec.threshold)
