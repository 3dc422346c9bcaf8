"""Two ways to miss a certified verdict."""

from dulac import corpus
from dulac.pipeline import Options, run_report

# x^2 w' = w - x - x^2: dF/dy1 = x vanishes at order 0, so a_1 = 0
rep = run_report(corpus.euler())
print(rep.verdict, rep.exit_code)
print(rep.doc["certificate"]["reasons"])

# y = 1/(1 - x ln x): the criterion holds, but p_k has degree k, and the
# residual carries |ln x|^N next to |x|^(N+1) at every radius we can sample
rep = run_report(corpus.riccati(), Options(N=12))
print(rep.verdict, rep.doc["checks"])
print("slope", rep.doc["residual"]["slope"], "threshold", rep.doc["residual"]["threshold"])
