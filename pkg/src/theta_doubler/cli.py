"""Command-line entry point: theta-doubler {basis,hecke,doubling,weightone,nonlift,primes}."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from math import lcm
from pathlib import Path

from sympy import primefactors

from . import __version__, cache, hecke, kernels, primesearch, weightone
from .characters import DirichletChar, kronecker_character
from .dihedral import class_number, weight_one_newform
from .eisbasis import ModFormSpace, weight_k_basis
from .errors import (
    CandidateInconclusive,
    FieldTooSmall,
    NotPrime,
    ThetaDoublerError,
    UnsupportedCharacteristic,
    UsageError,
)
from .ff import MAX_DEGREE, FieldCtx, FieldElement, make_field

log = logging.getLogger("theta_doubler")

SCHEMA_VERSION = 1

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_NEGATIVE = 0, 2, 3, 4

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "command", "config", "results", "verdicts", "provenance", "timings"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "command": {"enum": ["basis", "hecke", "doubling", "weightone", "nonlift", "primes"]},
        "config": {"type": "object", "required": ["command", "p"]},
        "results": {"type": "object"},
        "verdicts": {"type": "object"},
        "provenance": {
            "type": "object",
            "required": ["code_version", "backend", "cache_hits"],
            "properties": {"cache_hits": {"type": "array", "items": {"type": "string"}}},
        },
        "timings": {"type": "object"},
        "error": {"type": "object", "required": ["code", "message"]},
    },
}


@dataclass
class RunConfig:
    command: str
    p: int
    r: int = 1
    N: int | None = None
    k: int | None = None
    chi: str | None = None
    D: int | None = None
    form: int = 0
    ell: int | None = None
    prec: int | None = None
    max_factors: int = 3
    patience: int = 8
    ops: list = field(default_factory=list)
    budget: int = 3
    limit: int = 10**4
    count: int = 3
    cache_dir: str | None = None
    use_cache: bool = True
    output: str | None = None
    threads: int = 1

    def validate(self):
        if self.p in (2, 3):
            raise UnsupportedCharacteristic(f"characteristic {self.p} is out of scope (need p >= 5)")
        make_field(self.p)  # NotPrime
        if self.N is not None:
            if self.N < 1:
                raise UsageError("level must be positive")
            if self.N % self.p == 0:
                raise UsageError(f"p = {self.p} divides the level {self.N}")
        if self.D is not None and self.D >= 0:
            raise UsageError("D must be a negative discriminant")
        if self.budget < 0 or self.count < 0:
            raise UsageError("budget and count must be non-negative")


class Session:
    """Per-run state: field retries, cache lookups and the report under construction."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.cache_hits: list[str] = []
        self.cache_writes: list[str] = []
        self.timings: dict = {}
        self.notes: list[str] = []

    def with_field(self, fn):
        """Run fn(ctx), raising the extension degree on FieldTooSmall."""
        r = self.cfg.r
        while True:
            ctx = make_field(self.cfg.p, r)
            try:
                return ctx, fn(ctx)
            except FieldTooSmall as exc:
                need = lcm(r, exc.min_r or r + 1)
                if need == r or need > MAX_DEGREE:
                    raise
                self.notes.append(f"field raised from F{self.cfg.p}^{r} to F{self.cfg.p}^{need}: {exc}")
                r = need

    def space(self, N: int, k: int, chi: DirichletChar, ctx: FieldCtx) -> ModFormSpace:
        cfg = self.cfg
        chi = chi.with_ctx(None)
        if chi.N != N:
            chi = chi.extend(N)
        d = cache.cache_dir(cfg.cache_dir)
        name = cache.key(N, k, chi, ctx, cfg.prec or 0, cfg.max_factors)
        if cfg.use_cache:
            hit = cache.load(d, name, ctx, chi)
            if hit is not None:
                self.cache_hits.append(name)
                return hit
        t = time.time()
        S = weight_k_basis(N, k, chi, ctx, prec=cfg.prec, max_factors=cfg.max_factors)
        self.timings[f"basis_{N}_{k}_s"] = round(time.time() - t, 3)
        if cfg.use_cache:
            cache.save(S, d, name, cfg.max_factors)
            self.cache_writes.append(name)
        return S

    def report(self, results: dict, verdicts: dict) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.cfg.command,
            "config": _config_echo(self.cfg),
            "results": results,
            "verdicts": verdicts,
            "provenance": {
                "code_version": __version__,
                "backend": kernels.BACKEND,
                "cache_hits": self.cache_hits,
                "cache_writes": self.cache_writes,
                "notes": self.notes,
            },
            "timings": self.timings,
        }


def _config_echo(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    for k in ("output", "cache_dir", "threads"):
        d.pop(k)
    return d


def _character(cfg: RunConfig, N: int) -> DirichletChar:
    if cfg.chi is not None:
        chi = DirichletChar.from_label(cfg.chi)
    elif cfg.D is not None:
        chi = kronecker_character(cfg.D)
    else:
        chi = DirichletChar.trivial(N)
    if N % chi.N:
        raise UsageError(f"character modulus {chi.N} does not divide the level {N}")
    return chi.extend(N) if chi.N != N else chi


def _level(cfg: RunConfig) -> int:
    if cfg.N is not None:
        return cfg.N
    if cfg.D is not None:
        return abs(cfg.D)
    if cfg.chi is not None:
        return DirichletChar.from_label(cfg.chi).N
    raise UsageError("give --N, --D or --chi")


def _dihedral(cfg: RunConfig, ctx: FieldCtx, prec: int):
    forms = weight_one_newform(cfg.D, prec)
    if not 0 <= cfg.form < len(forms):
        raise UsageError(f"D = {cfg.D} has {len(forms)} dihedral newforms; --form {cfg.form} is out of range")
    return forms[cfg.form].reduce(ctx)


def _component(sess: Session, ctx: FieldCtx):
    """The local component at the dihedral eigensystem of D, with U_q for q | N attached."""
    cfg = sess.cfg
    N = _level(cfg)
    k = cfg.k or cfg.p
    if cfg.D is None:
        raise UsageError("this command needs --D to fix the eigensystem")
    chi = _character(cfg, N)
    S = sess.space(N, k, chi, ctx)
    f = _dihedral(cfg, ctx, S.sturm + 1)
    target = hecke.eigensystem_from_qexp(f, N, S.sturm)
    t = time.time()
    comp = hecke.localize(S, target)
    comp = hecke.with_ops(comp, [f"U{q}" for q in primefactors(N)])
    sess.timings["localize_s"] = round(time.time() - t, 3)
    return comp, f


# --------------------------------------------------------------------------
# commands


def cmd_basis(sess: Session) -> tuple[dict, dict, int]:
    cfg = sess.cfg
    N = _level(cfg)
    k = cfg.k or cfg.p
    chi = _character(cfg, N)
    ctx, S = sess.with_field(lambda ctx: sess.space(N, k, chi, ctx))
    res = {
        "N": N,
        "k": k,
        "chi": S.chi.label,
        "field": ctx.label,
        "dim": S.dim,
        "formula_dim": S.formula_dim,
        "sturm": S.sturm,
        "prec": S.prec,
        "stats": {k: v for k, v in S.stats.items() if isinstance(v, (int, str, bool))},
    }
    return res, {"dim_matches_formula": S.dim == S.formula_dim}, EXIT_OK


def cmd_hecke(sess: Session) -> tuple[dict, dict, int]:
    cfg = sess.cfg
    N = _level(cfg)
    k = cfg.k or cfg.p
    chi = _character(cfg, N)

    def run(ctx):
        S = sess.space(N, k, chi, ctx)
        parts = hecke.anemic_decompose(S, ell_bound=cfg.ell, strict=False)
        comps = []
        for es, c in parts:
            c = hecke.with_ops(c, cfg.ops)
            entry = {"dim": c.dim, "eigensystem": es.to_json()}
            entry["eigenvalues"] = {name: [str(v) for v in hecke.eigenvalues(c, name)] for name in cfg.ops}
            comps.append(entry)
        return S, comps

    ctx, (S, comps) = sess.with_field(run)
    covered = sum(c["dim"] for c in comps)
    res = {"N": N, "k": k, "chi": S.chi.label, "field": ctx.label, "dim": S.dim, "components": comps, "dim_in_field": covered}
    return res, {"all_eigenvalues_in_field": covered == S.dim}, EXIT_OK


def cmd_doubling(sess: Session) -> tuple[dict, dict, int]:
    ctx, rep = sess.with_field(lambda ctx: weightone.doubling_analysis(_component(sess, ctx)[0]))
    res = rep.to_json()
    sess.timings.update(res.pop("timings"))
    verdicts = {"count_identity": rep.count_verdict, "doubled": rep.doubled, "J_is_ideal": rep.J_is_ideal, "pairing_perfect": rep.perfect}
    return res, verdicts, EXIT_OK


def cmd_weightone(sess: Session) -> tuple[dict, dict, int]:
    def run(ctx):
        comp, f = _component(sess, ctx)
        return comp, f, weightone.weight_one_space(comp)

    ctx, (comp, f, w1) = sess.with_field(run)
    show = 40
    res = {
        "N": comp.space.N,
        "field": ctx.label,
        "component_dim": comp.dim,
        "weight_one_dim": len(w1),
        "forms": [[str(FieldElement(ctx, int(c))) for c in g.coeffs[:show]] for g in w1],
        "dihedral_reduction": [str(FieldElement(ctx, int(c))) for c in f.coeffs[:show]],
    }
    return res, {"has_weight_one": bool(w1)}, EXIT_OK


def _nonlift_one(args):
    """One candidate l; returns (l, report dict, inconclusive?)."""
    cfg, ell, ctx_r = args
    sess = Session(cfg)
    ctx = make_field(cfg.p, ctx_r)
    N = abs(cfg.D)
    chi = kronecker_character(cfg.D)
    S = sess.space(N * ell, cfg.p, chi, ctx)
    P = ell * (S.sturm - 1) + 1
    f = _dihedral(cfg, ctx, P)
    n_forms = len(weight_one_newform(cfg.D, 8))
    try:
        rep = weightone.nonlift_report(N, ell, cfg.p, f, chi, charzero_newforms=1, patience=cfg.patience, max_factors=cfg.max_factors, space=S)
        inconclusive = False
    except CandidateInconclusive as exc:
        rep = exc.report
        inconclusive = True
    out = rep.to_json()
    out["galois_conjugates"] = n_forms
    out["timings"].update(sess.timings)
    return ell, out, inconclusive, sess.cache_hits


def cmd_nonlift(sess: Session) -> tuple[dict, dict, int]:
    cfg = sess.cfg
    if cfg.D is None:
        raise UsageError("nonlift needs --D")
    N = cfg.N or abs(cfg.D)
    sv = primesearch.sieve(cfg.p, cfg.D, N, cfg.limit, max(cfg.count, cfg.budget))
    res = {"sieve": sv.to_json(), "class_number": class_number(cfg.D), "candidates": []}
    if cfg.budget == 0:
        return res, {"sieve_only": True}, EXIT_OK
    # the field must hold the character values and the form's coefficients
    ctx, _ = sess.with_field(lambda ctx: (kronecker_character(cfg.D, ctx), _dihedral(cfg, ctx, 2)))
    ells = [c.ell for c in sv.candidates[: cfg.budget]]
    jobs = [(cfg, ell, ctx.r) for ell in ells]
    found = None
    if cfg.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.threads, len(jobs))) as ex:
            results = list(ex.map(_nonlift_one, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_nonlift_one(job))
            if not results[-1][2]:
                break
    for ell, rep, inconclusive, hits in results:
        sess.cache_hits.extend(hits)
        sess.timings[f"ell_{ell}"] = rep.pop("timings")
        res["candidates"].append({"ell": ell, "inconclusive": inconclusive, "report": rep})
        if found is None and not inconclusive and rep["lift_surjective"] is False:
            found = ell
    verdicts = {"nonliftable_found": found is not None, "ell": found}
    return res, verdicts, EXIT_OK if found is not None else EXIT_NEGATIVE


def cmd_primes(sess: Session) -> tuple[dict, dict, int]:
    cfg = sess.cfg
    if cfg.D is None:
        raise UsageError("primes needs --D")
    sv = primesearch.sieve(cfg.p, cfg.D, cfg.N or abs(cfg.D), cfg.limit, cfg.count)
    return sv.to_json(), {"found": len(sv.candidates)}, EXIT_OK


COMMANDS = {
    "basis": cmd_basis,
    "hecke": cmd_hecke,
    "doubling": cmd_doubling,
    "weightone": cmd_weightone,
    "nonlift": cmd_nonlift,
    "primes": cmd_primes,
}


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--p", type=int, required=True, help="characteristic (>= 5)")
    common.add_argument("--r", type=int, default=1, help="starting extension degree; raised automatically")
    common.add_argument("--N", type=int, help="level")
    common.add_argument("--k", type=int, help="weight (default p)")
    common.add_argument("--chi", help="character label N:e1,e2,... (suffix after '-' ignored)")
    common.add_argument("--D", type=int, help="negative fundamental discriminant for the dihedral eigensystem")
    common.add_argument("--form", type=int, default=0, help="which dihedral newform of D")
    common.add_argument("--prec", type=int, help="basis precision (default Sturm bound)")
    common.add_argument("--max-factors", type=int, default=3)
    common.add_argument("--cache-dir", help="overrides THETA_DOUBLER_CACHE")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--output", "-o", help="write the JSON report here")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="theta-doubler", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("basis", parents=[common], help="M_k(N, chi) mod p and its dimension")
    h = sub.add_parser("hecke", parents=[common], help="anaemic decomposition and operator eigenvalues")
    h.add_argument("--ops", nargs="*", default=[], help="operators such as T2 U23 T5 <3>")
    h.add_argument("--ell", type=int, help="largest T_l used for the decomposition")
    sub.add_parser("doubling", parents=[common], help="count identity, doubled submodule and pairing")
    sub.add_parser("weightone", parents=[common], help="weight-one forms through the theta kernel")
    n = sub.add_parser("nonlift", parents=[common], help="sieve auxiliary primes and look for non-liftable forms")
    n.add_argument("--budget", type=int, default=3, help="candidates to try (0: sieve only)")
    n.add_argument("--limit", type=int, default=10**4)
    n.add_argument("--patience", type=int, default=8)
    n.add_argument("--count", type=int, default=3)
    pr = sub.add_parser("primes", parents=[common], help="sieve l = 1 mod p split completely in the class field")
    pr.add_argument("--limit", type=int, default=10**4)
    pr.add_argument("--count", type=int, default=3)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        p=ns.p,
        r=ns.r,
        N=ns.N,
        k=ns.k,
        chi=ns.chi,
        D=ns.D,
        form=ns.form,
        ell=getattr(ns, "ell", None),
        prec=ns.prec,
        max_factors=ns.max_factors,
        patience=getattr(ns, "patience", 8),
        ops=getattr(ns, "ops", []),
        budget=getattr(ns, "budget", 3),
        limit=getattr(ns, "limit", 10**4),
        count=getattr(ns, "count", 3),
        cache_dir=ns.cache_dir,
        use_cache=not ns.no_cache,
        output=ns.output,
        threads=max(1, ns.threads),
    )


def _exit_code(exc: ThetaDoublerError) -> int:
    return EXIT_USAGE if isinstance(exc, (UsageError, UnsupportedCharacteristic, NotPrime)) else EXIT_COMPUTE


def _emit(report: dict, output: str | None):
    text = json.dumps(report, indent=2, sort_keys=True)
    if output:
        Path(output).write_text(text + "\n")
    print(text)


def main(argv=None) -> int:
    cfg = None
    try:
        ns = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(name)s: %(message)s")
        cfg = config_from_args(ns)
        cfg.validate()
        sess = Session(cfg)
        t = time.time()
        results, verdicts, code = COMMANDS[cfg.command](sess)
        sess.timings["total_s"] = round(time.time() - t, 3)
        _emit(sess.report(results, verdicts), cfg.output)
        return code
    except ThetaDoublerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if cfg is not None:
            rep = Session(cfg).report({}, {})
            rep["error"] = {"code": exc.code, "message": str(exc)}
            _emit(rep, cfg.output)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
