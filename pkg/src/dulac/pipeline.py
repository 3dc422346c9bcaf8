"""
End-to-end run: parse, certify, reduce, solve, majorant, residual decay.

Every stage failure is caught and reported with the stage name; the overall
verdict is ``certified-convergent`` only when the certificate passes, the
majorant dominates the tail at every computed order and the residual decays
at the expected rate.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import mpmath

from . import __version__
from .certifier import Certificate, certify
from .evaluator import Sector, decay_exponent
from .field import DEFAULT_PREC, format_scalar
from .majorant import MajorantConfig, run_majorant
from .oracle import seed_extend_oracle
from .poly import OdeProblem, parse_problem
from .reducer import ReducedProblem, choose_ell, reduce
from .solver import recompose, solve_tail

CONVERGENT = "certified-convergent"
CRITERION_FAILED = "criterion-failed"
INCONCLUSIVE = "inconclusive"
ERROR = "error"

EXIT_CODES = {CONVERGENT: 0, ERROR: 1, CRITERION_FAILED: 2, INCONCLUSIVE: 3}


@dataclass
class Options:
    N: int = 20
    ell: int | None = None
    params: dict = field(default_factory=dict)
    eps_bar: str = "1/2"
    r: int | None = None
    prec: int = DEFAULT_PREC
    sector: Sector = field(default_factory=lambda: Sector.centered(1.9 * math.pi, 0.05))
    samples: int = 24
    eta: float = 0.5

    def to_json(self):
        return {
            "N": self.N,
            "ell": self.ell,
            "params": {str(k): _param_json(v) for k, v in sorted(self.params.items())},
            "eps_bar": str(self.eps_bar),
            "r": self.r,
            "prec": self.prec,
            "sector": self.sector.to_json(),
            "samples": self.samples,
            "eta": self.eta,
        }


def _param_json(v):
    return [format_scalar(c) for c in v] if isinstance(v, (list, tuple)) else format_scalar(v)


class StageError(RuntimeError):
    def __init__(self, stage, exc):
        self.stage = stage
        self.exc = exc
        super().__init__(f"{stage}: {exc}")


@dataclass
class Prepared:
    problem: OdeProblem
    certificate: Certificate
    ell: int
    prefix: object
    reduced: ReducedProblem


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:  # noqa: BLE001 - every failure is attributed to its stage
        raise StageError(name, exc) from exc


def with_params(problem: OdeProblem, params) -> OdeProblem:
    if not params:
        return problem
    out = copy.copy(problem)
    out.free_params = {**problem.free_params, **params}
    return out


def prepare(problem: OdeProblem, ell=None, prec=DEFAULT_PREC, cert=None) -> Prepared:
    """Certificate, shift ``ell``, seed extended to ``ell`` and the reduced problem."""
    if cert is None:
        cert = _stage("certify", certify, problem)
    if not cert.passed:
        return Prepared(problem, cert, None, None, None)
    ell_min = _stage("reduce", choose_ell, cert, prec)
    if ell is None:
        ell = ell_min
    elif ell < ell_min:
        raise StageError("reduce", ValueError(f"ell = {ell} is below the admissible minimum {ell_min}"))
    prefix = problem.seed
    if prefix.trunc < ell:
        prefix = _stage("extend", seed_extend_oracle, problem, ell)
    ext = copy.copy(problem)
    ext.seed = prefix
    red = _stage("reduce", reduce, ext, cert, ell, prec)
    return Prepared(problem, cert, ell, prefix, red)


def solve(problem: OdeProblem, N: int, ell=None, prec=DEFAULT_PREC):
    """``(Prepared, tail, phi)`` for a problem whose certificate passes."""
    prep = prepare(problem, ell, prec)
    if not prep.certificate.passed:
        raise StageError("certify", ValueError("certificate does not pass; no reduction available"))
    tail = _stage("solve", solve_tail, prep.reduced, N)
    phi = _stage("solve", recompose, prep.prefix, prep.ell, tail)
    return prep, tail, phi


def problem_digest(problem: OdeProblem) -> str:
    return hashlib.sha256(problem.dumps().encode()).hexdigest()


@dataclass
class PipelineReport:
    doc: dict
    verdict: str

    @property
    def exit_code(self):
        return EXIT_CODES[self.verdict]

    def to_json(self):
        return self.doc

    def dumps(self):
        return json.dumps(self.doc, indent=2, ensure_ascii=False) + "\n"


def run_report(problem_doc, options: Options | None = None) -> PipelineReport:
    """Run the whole pipeline; never raises for problem-level failures."""
    opts = options or Options()
    doc = {
        "tool": {"name": "dulac", "version": __version__},
        "problem": None,
        "options": opts.to_json(),
        "certificate": None,
        "reduced": None,
        "tail": None,
        "series": None,
        "majorant": None,
        "residual": None,
        "checks": {},
        "tolerances": {"eta": opts.eta, "underflow": "2^-(prec-16)", "certificate": None},
        "verdict": None,
        "exit_code": None,
        "error": None,
    }

    def finish(verdict):
        doc["verdict"] = verdict
        doc["exit_code"] = EXIT_CODES[verdict]
        return PipelineReport(doc, verdict)

    try:
        with mpmath.workprec(opts.prec):
            problem = _stage("parse", lambda d: d if isinstance(d, OdeProblem) else parse_problem(d), problem_doc)
            problem = with_params(problem, opts.params)
            doc["problem"] = {"name": problem.name, "order": problem.n, "digest": problem_digest(problem)}
            prep = prepare(problem, opts.ell, opts.prec)
            cert = prep.certificate
            doc["certificate"] = cert.to_json()
            doc["tolerances"]["certificate"] = format_scalar(cert.tolerance)
            if cert.verdict == "fail":
                return finish(CRITERION_FAILED)
            if not cert.passed:
                return finish(INCONCLUSIVE)
            red = prep.reduced
            doc["reduced"] = {"ell": red.ell, "L": [format_scalar(c) for c in red.L.coeffs], "C": red.C,
                              "m": red.m, "a": [format_scalar(c) for c in red.a]}
            tail = _stage("solve", solve_tail, red, opts.N)
            phi = _stage("solve", recompose, prep.prefix, prep.ell, tail)
            degrees = tail.degrees
            budget_ok = all(d is None or d <= k * red.C for k, d in degrees.items())
            doc["tail"] = {"N": tail.N, "degrees": {str(k): d for k, d in degrees.items()},
                           "degree_budget_ok": budget_ok}
            doc["series"] = phi.to_json()
            cfg = MajorantConfig(eps_bar=opts.eps_bar, r=opts.r, prec=opts.prec)
            maj = _stage("majorant", run_majorant, red, tail, cfg)
            doc["majorant"] = maj.to_json()
            decay = _stage("residual", decay_exponent, problem, phi, opts.sector, opts.samples, opts.eta, order=opts.N)
            doc["residual"] = decay.to_json()
            doc["checks"] = {"certificate": True, "degree_budget": budget_ok,
                             "domination": maj.dominated, "residual_decay": decay.passed}
            ok = budget_ok and maj.dominated and decay.passed
            return finish(CONVERGENT if ok else INCONCLUSIVE)
    except StageError as exc:
        doc["error"] = {"stage": exc.stage, "message": str(exc.exc)}
        return finish(ERROR)


def report_schema() -> dict:
    """The published JSON schema for pipeline reports."""
    text = resources.files("dulac").joinpath("schema/report.schema.json").read_text()
    return json.loads(text)


def validate_report(doc) -> None:
    jsonschema.validate(doc, report_schema())
