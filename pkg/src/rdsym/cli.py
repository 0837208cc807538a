"""Command-line interface: ``rdsym <command> ...``.

Exit codes: 0 when every requested check passes, 1 on a verification
failure, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np
import sympy as sp

from . import algebra as alg
from . import catalog as cat
from . import equivalence as eqv
from .expr import is_zero, render
from .model import RDSystem
from .symmetry import dump_jsonl, invariance_residual, parse_generator

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------

def _emit(obj, fmt: str, markdown: str | None = None, out=None):
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n")
    else:
        out.write((markdown if markdown is not None else str(obj)) + "\n")


def _ms(text: str) -> tuple[int, ...]:
    try:
        ms = tuple(sorted({int(x) for x in text.split(",") if x.strip()}))
    except ValueError:
        raise UsageError(f"--m expects a comma separated list of integers, got {text!r}")
    if not ms or any(m < 1 for m in ms):
        raise UsageError("--m values must be positive")
    return ms


def _values(text: str | None) -> dict:
    """``"a=1,mu=-1/2"`` to a parameter mapping."""
    out = {}
    for part in filter(None, (text or "").split(",")):
        if "=" not in part:
            raise UsageError(f"bad parameter assignment {part!r} (expected name=value)")
        k, v = part.split("=", 1)
        out[k.strip()] = sp.nsimplify(v.strip(), rational=True)
    return out


def _entries(args) -> list[cat.CatalogEntry]:
    try:
        if getattr(args, "all", False):
            return cat.load()
        if getattr(args, "id", None):
            return [cat.get(args.id)]
        if args.table is not None and args.item is not None:
            return [cat.get(args.table, args.item)]
    except (KeyError, cat.CatalogError) as exc:
        raise UsageError(str(exc))
    raise UsageError("select entries with --table T --item I, --id ID or --all")


def _entry_values(e: cat.CatalogEntry, text: str | None, m: int, seed: int) -> dict:
    given = _values(text)
    if given:
        return given
    return {str(k): v for k, v in e.space.sample(np.random.default_rng([seed, e.table, e.item]), m).items()}


def _system(args) -> RDSystem:
    if args.system:
        try:
            return RDSystem.from_json(Path(args.system).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {args.system}: {exc}")
    if args.f1 is None or args.f2 is None:
        raise UsageError("give --system FILE or --f1/--f2 (with --a and --dim)")
    return RDSystem.from_strings(args.dim, args.a, args.f1, args.f2)


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}")


# --------------------------------------------------------------------------
# catalog
# --------------------------------------------------------------------------

def cmd_catalog(args) -> int:
    if args.action == "list":
        entries = cat.load()
        views = cat.views()
        obj = {"entries": [e.id for e in entries],
               "views": [{"id": v.id, "entry": v.entry} for v in views]}
        md = cat.table(entries) + "\n\n| view | entry |\n|---|---|\n" + \
            "\n".join(f"| {v.id} | {v.entry} |" for v in views)
        _emit(obj, args.format, md)
        return EXIT_OK
    if args.view:
        try:
            v = cat.get_view(args.view)
        except KeyError as exc:
            raise UsageError(str(exc))
        e = cat.get(v.entry)
        obj = {"view": v.id, "entry": e.id, "assign": v.assign, "equation": v.equation}
        md = f"# {v.id}: {v.equation}\n\nentry {e.id}, assignment {v.assign}\n\n" + cat.show(e)
        _emit(obj, args.format, md)
        return EXIT_OK
    for e in _entries(args):
        if args.format == "json":
            sys.stdout.write(cat.show(e, "json") + "\n")
        else:
            sys.stdout.write(cat.show(e) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------

def _verify_one(job):
    eid, kw = job
    rep = cat.verify_entry(cat.get(eid), **kw)
    return rep.records


def cmd_verify(args) -> int:
    entries = _entries(args)
    kw = dict(samples=args.samples, ms=_ms(args.m), seed=args.seed, listed=args.listed,
              guards=not args.no_guards)
    jobs = [(e.id, kw) for e in entries]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            parts = list(pool.map(_verify_one, jobs))
    else:
        parts = [_verify_one(j) for j in jobs]
    rep = cat.Report()
    for recs in parts:
        rep.records.extend(recs)
    text = rep.jsonl()
    ok = rep.ok
    if args.aet:
        aet_recs = []
        for e in entries:
            r = eqv.verify_aet_claims(e, samples=max(1, min(args.samples, 3)), m=1, seed=args.seed,
                                      include_refuted=args.listed)
            aet_recs += r.records
        ok &= all(r["ok"] for r in aet_recs)
        text += dump_jsonl(sorted(aet_recs, key=lambda r: json.dumps(r, sort_keys=True)))
    _write(args.report, text)
    fails = len(rep.failures()) + (0 if not args.aet else sum(not r["ok"] for r in aet_recs))
    where = args.report or "stdout"
    sys.stderr.write(f"{len(entries)} entries, {len(rep.records)} records, {fails} failures; report: {where}\n")
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------
# algebra
# --------------------------------------------------------------------------

def _fr(x) -> str:
    return str(Fraction(x)) if x is not None else None


def cmd_algebra(args) -> int:
    if args.action == "canonicalize":
        try:
            vals = [Fraction(x) for x in args.entries]
        except (ValueError, ZeroDivisionError):
            raise UsageError("canonicalize expects four rationals B1 B2 c1 c2")
        g = alg.TailMatrix.from_entries(*vals)
        res = alg.canonicalize_tail(g)
        ok = alg.verify_canonical(g, res)
        obj = {"input": [str(v) for v in vals], "form": res.form, "alpha": _fr(res.alpha),
               "scale": _fr(res.scale), "U": res.U.to_json(), "verified": ok}
        md = (f"form {res.form}" + (f" (alpha = {res.alpha})" if res.alpha is not None else "") +
              f", scale {res.scale}, U = {res.U.to_json()}, verified: {ok}")
        _emit(obj, args.format, md)
        return EXIT_OK if ok else EXIT_FAIL
    if args.action == "enumerate":
        if args.dim is None:
            raise UsageError("enumerate needs --dim")
        try:
            classes = alg.enumerate_algebras(args.dim, budget=args.budget)
        except alg.SearchBudgetExceeded as exc:
            sys.stderr.write(f"search budget exceeded: {exc}\n")
            return EXIT_FAIL
        except ValueError as exc:
            raise UsageError(str(exc))
        obj = [c.to_json() for c in classes]
        md = "\n".join([f"{len(classes)} classes"] + [
            f"- {c.name}" + (f" (alpha = {c.alpha})" if c.alpha is not None else "") +
            f": basis {[[str(x) for x in b.vector()] for b in c.basis]}" for c in classes])
        _emit(obj, args.format, md)
        return EXIT_OK
    # closure
    if args.realization:
        if args.realization not in alg.NAMED_CLASSES:
            raise UsageError(f"unknown class {args.realization!r}")
        out, ok = [], True
        for label, basis in alg.realizations(args.realization, args.dim, literal=args.literal):
            r = alg.closure_check(basis, args.dim, adjoin_basic=not args.bare, rng=args.seed)
            ok &= r.closed
            out.append({"realization": label, "closed": r.closed})
        _emit(out, args.format, "\n".join(f"- {o['realization']}: {'closed' if o['closed'] else 'NOT closed'}"
                                          for o in out))
        return EXIT_OK if ok else EXIT_FAIL
    out, ok = [], True
    for e in _entries(args):
        for m in _ms(args.m):
            vals = _entry_values(e, args.values, m, args.seed)
            try:
                r = cat.closure_for_entry(e, m, vals, listed=args.listed, rng=args.seed)
            except cat.CatalogError as exc:
                raise UsageError(str(exc))
            ok &= r.closed
            out.append({"entry": e.id, "m": m, "sample": {k: str(v) for k, v in sorted(vals.items())},
                        "closed": r.closed, "witness": None if r.witness is None else [str(w) for w in r.witness]})
    _emit(out, args.format, "\n".join(
        f"- {o['entry']} m={o['m']}: {'closed' if o['closed'] else 'NOT closed ' + str(o['witness'])}"
        for o in out))
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------
# equivalence
# --------------------------------------------------------------------------

def cmd_equiv(args) -> int:
    if args.action == "verify":
        recs = []
        for e in _entries(args):
            recs += eqv.verify_aet_claims(e, samples=args.samples, m=args.dim, seed=args.seed,
                                          include_refuted=args.listed).records
        recs.sort(key=lambda r: json.dumps(r, sort_keys=True))
        _write(args.report, dump_jsonl(recs))
        fails = sum(not r["ok"] for r in recs)
        sys.stderr.write(f"{len(recs)} records, {fails} failures; report: {args.report or 'stdout'}\n")
        return EXIT_OK if fails == 0 else EXIT_FAIL
    if args.aet is None:
        raise UsageError("equiv apply needs --aet ID")
    sys_ = _system(args)
    opt = lambda x: None if x is None else sp.nsimplify(x, rational=True)
    T = eqv.AET(args.aet, sp.nsimplify(args.omega, rational=True), opt(args.nu), opt(args.sigma), opt(args.lam))
    try:
        new = eqv.apply(T, sys_, rng=args.seed)
    except eqv.FormNotPreserved as exc:
        _emit({"preserved": False, "reason": str(exc)}, args.format, f"form not preserved: {exc}")
        return EXIT_FAIL
    except ValueError as exc:
        raise UsageError(str(exc))
    _emit({"preserved": True, "system": new.to_json()}, args.format,
          f"f1 = {render(new.f[0])}\nf2 = {render(new.f[1])}")
    return EXIT_OK


# --------------------------------------------------------------------------
# simulate / oracle
# --------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    from .numeric import DivergenceError, FlowDomainError, StabilityError, run_descriptor
    try:
        desc = json.loads(Path(args.descriptor).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read descriptor {args.descriptor}: {exc}")
    try:
        summary, csv = run_descriptor(desc)
    except (KeyError, StabilityError) as exc:
        raise UsageError(f"bad descriptor: {exc}")
    except (DivergenceError, FlowDomainError) as exc:
        _emit({"error": str(exc)}, "json")
        return EXIT_FAIL
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    (out / "residuals.csv").write_text(csv)
    ok = all(f["residual"] <= args.max_ratio * f["baseline"] for f in summary["flows"])
    _emit(summary, args.format, "\n".join(
        [f"max amplitude {summary['max_amplitude']:.6g}"] +
        [f"- {f['generator']} theta={f['theta']}: residual {f['residual']:.3e}, "
         f"baseline {f['baseline']:.3e}" for f in summary["flows"]]))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_oracle(args) -> int:
    sys_ = _system(args)
    try:
        X = parse_generator(args.generator, sys_.A, sys_.m)
    except (ValueError, SyntaxError, sp.SympifyError) as exc:
        raise UsageError(f"cannot read generator: {exc}")
    res = invariance_residual(sys_, X)
    verdicts = [is_zero(r, rng=args.seed) for r in res]
    ok = all(bool(v) for v in verdicts)
    obj = {"residual": [render(r) for r in res], "verdict": [v.kind.value for v in verdicts],
           "symmetry": ok}
    _emit(obj, args.format, "\n".join(
        f"R{b}: {render(r)}  [{v.kind.value}]" for b, (r, v) in enumerate(zip(res, verdicts), 1)))
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _select(p, all_flag=True):
    p.add_argument("--table", type=int)
    p.add_argument("--item", type=int)
    p.add_argument("--id", help="entry id such as T1.2")
    if all_flag:
        p.add_argument("--all", action="store_true")


def _system_flags(p):
    p.add_argument("--system", help="JSON file {m, a, f1, f2}")
    p.add_argument("--a", default="a")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--f1")
    p.add_argument("--f2")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="rdsym", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "markdown"), default="markdown")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("catalog", parents=[common], help="list or show catalog entries")
    p.add_argument("action", choices=("list", "show"))
    _select(p, all_flag=True)
    p.add_argument("--view")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("verify", parents=[common], help="verify catalog entries")
    _select(p)
    p.add_argument("--m", default="1,2,3")
    p.add_argument("--samples", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.add_argument("--listed", action="store_true", help="use the listed guards, not the corrected ones")
    p.add_argument("--no-guards", action="store_true", help="main symmetries only")
    p.add_argument("--aet", action="store_true", help="also check the AET claims")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("algebra", parents=[common], help="matrix algebra tools")
    p.add_argument("action", choices=("canonicalize", "enumerate", "closure"))
    p.add_argument("entries", nargs="*", help="B1 B2 c1 c2 for canonicalize")
    p.add_argument("--dim", type=int)
    p.add_argument("--budget", type=int, default=200_000)
    _select(p)
    p.add_argument("--m", default="2")
    p.add_argument("--values")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--listed", action="store_true")
    p.add_argument("--realization", help="class name, e.g. A31")
    p.add_argument("--literal", action="store_true")
    p.add_argument("--bare", action="store_true", help="do not adjoin the basic symmetries")
    p.set_defaults(func=cmd_algebra)

    p = sub.add_parser("equiv", parents=[common], help="additional equivalence transformations")
    p.add_argument("action", choices=("apply", "verify"))
    _select(p)
    _system_flags(p)
    p.add_argument("--aet", type=int)
    p.add_argument("--omega", default="1")
    p.add_argument("--nu")
    p.add_argument("--sigma")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--samples", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--listed", action="store_true", help="include claims marked as refuted")
    p.add_argument("--report")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("simulate", parents=[common], help="run a numeric descriptor")
    p.add_argument("descriptor")
    p.add_argument("--out", default="simulate-out")
    p.add_argument("--max-ratio", type=float, default=10.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", parents=[common], help="raw invariance residual")
    _system_flags(p)
    p.add_argument("--generator", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "algebra" and args.action == "closure" and args.realization and args.dim is None:
            args.dim = 1
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"rdsym: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
