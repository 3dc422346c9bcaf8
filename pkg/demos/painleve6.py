"""Painleve VI at a = 2, c = 1/2, b = d = 0: a power series with a resonance at order 3."""

import copy

from dulac import corpus
from dulac.certifier import certify
from dulac.oracle import ResonanceParameterRequired, seed_extend_oracle
from dulac.pipeline import Options, run_report

p = corpus.painleve6()
cert = certify(p)
print("a =", [str(c) for c in cert.a])  # a_2 = 2 (3/2)^2 (1/2) = 9/4

bare = copy.copy(p)
bare.free_params = {}
try:
    seed_extend_oracle(bare, 5)
except ResonanceParameterRequired as exc:
    print("free coefficient at order", exc.k)

for value in (0, 1, -2):
    ext = seed_extend_oracle(bare, 5, {3: value})
    print(f"p_3 = {value}:", [str(ext[k]) for k in range(6)])

rep = run_report(p, Options(N=12))
print(rep.verdict)
print("sigma =", rep.doc["majorant"]["constants"]["sigma"],
      " rho_emp =", rep.doc["majorant"]["radius"]["rho_emp"])
