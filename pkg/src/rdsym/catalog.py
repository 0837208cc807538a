"""Machine-readable classification tables: loading, instantiation and
end-to-end verification of every entry against the symmetry oracle."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np
import sympy as sp

from .expr import (
    OPAQUE_NAMES, Evaluator, Psi, ZeroKind, param, parse, render, substitute,
)
from .guards import Atom, ParamSpace, SamplingError, parse_guard
from .model import DiffusionMatrix, RDSystem
from .symmetry import (
    G, Generator, GeneratorTemplate, Ghat, K, basic_symmetries, classifying_residual,
    combine, exp_galilei_tail, extension_conditions, galilei_tail, invariance_residual,
    parse_template, report_record, structure_equations,
)

AET_IDS = tuple(range(1, 9))
ADDITIONAL_KINDS = ("G", "Ghat", "K")


class CatalogError(ValueError):
    def __init__(self, entry_id: str, message: str):
        super().__init__(f"{entry_id}: {message}")
        self.entry_id = entry_id


@dataclass(frozen=True)
class MainSym:
    id: str
    generator: str
    family: dict | None = None


@dataclass(frozen=True)
class Additional:
    kind: str
    guard: str
    gamma: str | None = None
    corrected_guard: str | None = None

    def effective_guard(self, listed: bool = False) -> str:
        if listed or self.corrected_guard is None:
            return self.guard
        return self.corrected_guard


@dataclass(frozen=True)
class AETClaim:
    id: int
    guard: str = "true"
    bindings: dict = field(default_factory=dict)
    erratum: str | None = None


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    id: str
    table: int
    item: int
    f1: str
    f2: str
    params: dict
    main_syms: tuple
    additional: tuple = ()
    aets: tuple = ()
    arguments: dict = field(default_factory=dict)
    derived: dict = field(default_factory=dict)
    constraints: str = "true"
    notes: str = ""
    perturbation: str = "u^2"

    @property
    def space(self) -> ParamSpace:
        return ParamSpace(dict(self.params), dict(self.derived), parse_guard(self.constraints))

    @property
    def opaque(self) -> tuple[str, ...]:
        return tuple(sorted(self.arguments))

    def f_exprs(self, m: int) -> tuple[sp.Expr, sp.Expr]:
        return _f_exprs(self, m)

    def system(self, m: int, values: Mapping | None = None, fchoice=None,
               perturbed: bool = False) -> RDSystem:
        """The system with symbolic parameters (or ``values`` substituted)."""
        f1, f2 = self.f_exprs(m)
        if perturbed:
            f1 = f1 + parse(self.perturbation, m)
        der = self.space.derived_exprs(m)
        f1, f2 = f1.xreplace(der), f2.xreplace(der)
        a = param("a")
        if values is not None:
            vals = _symbol_keys(values)
            f1, f2, a = f1.xreplace(vals), f2.xreplace(vals), vals.get(a, a)
        if fchoice is not None:
            hooks = self.hooks(fchoice)
            f1, f2 = (substitute(e, hooks, max_order=None) for e in (f1, f2))
        return RDSystem(m, DiffusionMatrix(a), (f1, f2))

    def hooks(self, fchoice) -> dict:
        """Resolve an opaque-function choice into ``{name: expression in w}``.

        ``fchoice`` is a preset name (``power``, ``exponential``,
        ``rational``) or a mapping ``{name: expr}``; a value may also be a
        pair ``(argument, expr)`` whose argument must match the declared one.
        """
        if isinstance(fchoice, str):
            if fchoice not in fchoice_presets():
                raise CatalogError(self.id, f"unknown opaque choice {fchoice!r}")
            choice = {k: v for k, v in fchoice_presets()[fchoice].items() if k in self.arguments}
        else:
            choice = dict(fchoice)
        out = {}
        for name, form in choice.items():
            if name not in self.arguments:
                raise CatalogError(self.id, f"{name} is not an opaque function of this entry")
            if isinstance(form, (tuple, list)):
                arg, form = form
                if sp.simplify(parse(arg) - parse(self.arguments[name])) != 0:
                    raise CatalogError(self.id, f"{name} takes {self.arguments[name]}, not {arg}")
            out[name] = form
        return out

    def templates(self, m: int) -> list[tuple[str, GeneratorTemplate]]:
        return _templates(self, m)

    def additional_generators(self, add: Additional, m: int) -> list[Generator]:
        A = DiffusionMatrix(param("a"))
        if add.kind == "G":
            return [G(i, A, m) for i in range(1, m + 1)] + [galilei_tail(A, m)]
        if add.kind == "K":
            return [K(A, m)]
        gamma = parse(add.gamma, m).xreplace(self.space.derived_exprs(m))
        gens = [Ghat(i, gamma, A, m) for i in range(1, m + 1)]
        return gens + [exp_galilei_tail(gamma, A, m)]

    def guard_holds(self, guard: str, values: Mapping, m: int) -> bool:
        return parse_guard(guard, m).holds(_symbol_keys(values))

    def to_json(self) -> dict:
        return _entry_json(self)


def _symbol_keys(values: Mapping) -> dict:
    return {param(k) if isinstance(k, str) else k: sp.nsimplify(v) for k, v in values.items()}


@lru_cache(maxsize=None)
def _f_exprs(entry: CatalogEntry, m: int):
    return parse(entry.f1, m), parse(entry.f2, m)


@lru_cache(maxsize=None)
def _templates(entry: CatalogEntry, m: int):
    A = DiffusionMatrix(param("a"))
    der = entry.space.derived_exprs(m)
    out = []
    for ms in entry.main_syms:
        T = parse_template(ms.generator, A, m).subs(der)
        out.append((ms.id, T))
    return out


def _entry_json(e: CatalogEntry) -> dict:
    d = {"id": e.id, "table": e.table, "item": e.item, "f1": e.f1, "f2": e.f2,
         "params": dict(e.params), "derived": dict(e.derived), "constraints": e.constraints,
         "arguments": dict(e.arguments),
         "main_syms": [{"id": s.id, "generator": s.generator} for s in e.main_syms],
         "additional": [{"generator": a.kind, "guard": a.guard, "gamma": a.gamma,
                         "corrected_guard": a.corrected_guard} for a in e.additional],
         "aets": [{"id": c.id, "guard": c.guard, "bindings": dict(c.bindings),
                   "erratum": c.erratum} for c in e.aets],
         "notes": e.notes}
    return d


# --------------------------------------------------------------------------
# loading
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class View:
    """A named equation family expressed through one entry."""

    id: str
    entry: str
    params: dict
    assign: dict
    equation: str
    galilei: bool
    constraints: str = "true"
    aet: dict | None = None
    functions: dict | None = None

    @property
    def space(self) -> ParamSpace:
        return ParamSpace(dict(self.params), {}, parse_guard(self.constraints))

    def system(self, values: Mapping, m: int) -> RDSystem:
        """The concrete system of the view at view parameters ``values``."""
        e = get(self.entry)
        fchoice = None
        if self.functions:
            vals = _symbol_keys(values)
            w = sp.Dummy("w")
            fchoice = {k: sp.Lambda(w, parse(text, m, symbols={"w": w}).xreplace(vals))
                       for k, text in self.functions.items()}
        return e.system(m, self.resolve(values, m), fchoice)

    def resolve(self, values: Mapping, m: int) -> dict:
        """Entry parameter values for view parameter ``values``."""
        vals = _symbol_keys(values)
        out = {}
        for k, text in self.assign.items():
            e = parse(text, m).xreplace({param("m"): m})
            out[param(k)] = sp.nsimplify(sp.simplify(e.xreplace(vals)))
        return out


def _read(path=None) -> dict:
    if path is None:
        text = resources.files("rdsym").joinpath("data/catalog.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def _entry_from_json(d: dict) -> CatalogEntry:
    eid = d.get("id", "?")
    for key in ("id", "table", "item", "f1", "f2", "params", "main_syms"):
        if key not in d:
            raise CatalogError(eid, f"missing field {key!r}")
    try:
        main = tuple(MainSym(s["id"], s["generator"], s.get("family")) for s in d["main_syms"])
        add = tuple(Additional(a["generator"], a["guard"], a.get("gamma"), a.get("corrected_guard"))
                    for a in d.get("additional", ()))
        aets = tuple(AETClaim(int(c["id"]), c.get("guard", "true"), dict(c.get("bindings", {})),
                              c.get("erratum")) for c in d.get("aets", ()))
    except (KeyError, TypeError) as exc:
        raise CatalogError(eid, f"malformed symmetry or AET record: {exc}") from exc
    e = CatalogEntry(
        id=d["id"], table=int(d["table"]), item=int(d["item"]), f1=d["f1"], f2=d["f2"],
        params=dict(d["params"]), main_syms=main, additional=add, aets=aets,
        arguments=dict(d.get("arguments", {})), derived=dict(d.get("derived", {})),
        constraints=d.get("constraints", "true"), notes=d.get("notes", ""),
        perturbation=d.get("perturbation", "u^2"))
    _validate(e)
    return e


def _validate(e: CatalogEntry) -> None:
    from .guards import DOMAINS
    for name, dom in e.params.items():
        if dom not in DOMAINS:
            raise CatalogError(e.id, f"unknown domain {dom!r} for {name}")
    for a in e.additional:
        if a.kind not in ADDITIONAL_KINDS:
            raise CatalogError(e.id, f"unknown additional symmetry {a.kind!r}")
        if a.kind == "Ghat" and not a.gamma:
            raise CatalogError(e.id, "Ghat needs a gamma expression")
    for c in e.aets:
        if c.id not in AET_IDS:
            raise CatalogError(e.id, f"AET {c.id} is not in the registry")
    for name in e.arguments:
        if name not in OPAQUE_NAMES:
            raise CatalogError(e.id, f"{name} is not an opaque function name")
    try:
        for m in (1, 2):
            e.f_exprs(m)
            e.templates(m)
            for g in [e.constraints] + [a.guard for a in e.additional] + \
                     [a.corrected_guard for a in e.additional if a.corrected_guard] + \
                     [c.guard for c in e.aets]:
                parse_guard(g, m)
    except (ValueError, SyntaxError) as exc:
        raise CatalogError(e.id, str(exc)) from exc
    known = set(e.params) | set(e.derived) | {"m"}
    f_syms = {s.name for s in (parse(e.f1, 1) + parse(e.f2, 1)).free_symbols}
    extra = {n for n in f_syms if n not in known and n not in ("u", "v", "t")}
    if extra:
        raise CatalogError(e.id, f"undeclared parameters {sorted(extra)}")


@lru_cache(maxsize=None)
def _load_cached():
    d = _read()
    entries = tuple(_entry_from_json(x) for x in d["entries"])
    views = tuple(View(x["id"], x["entry"], dict(x["params"]), dict(x["assign"]), x["equation"],
                       bool(x["galilei"]), x.get("constraints", "true"), x.get("aet"),
                       x.get("functions"))
                  for x in d["views"])
    by_id = {e.id: e for e in entries}
    for w in views:
        if w.entry not in by_id:
            raise CatalogError(w.entry, f"view {w.id} names an unknown entry")
        if set(w.assign) != set(by_id[w.entry].params):
            raise CatalogError(w.entry, f"view {w.id} must assign exactly {sorted(by_id[w.entry].params)}")
    return entries, views, d["fchoices"]


def load(path=None) -> list[CatalogEntry]:
    """All table entries, sorted by table and item."""
    if path is not None:
        d = _read(path)
        return sorted((_entry_from_json(x) for x in d["entries"]), key=lambda e: (e.table, e.item))
    return sorted(_load_cached()[0], key=lambda e: (e.table, e.item))


def views() -> list[View]:
    return list(_load_cached()[1])


def fchoice_presets() -> dict:
    return _load_cached()[2]


def get(table_or_id, item: int | None = None) -> CatalogEntry:
    for e in load():
        if (item is None and e.id == table_or_id) or (e.table == table_or_id and e.item == item):
            return e
    raise KeyError(f"no catalog entry {table_or_id} {item or ''}".strip())


def get_view(vid: str) -> View:
    for w in views():
        if w.id == vid:
            return w
    raise KeyError(vid)


# --------------------------------------------------------------------------
# instantiation
# --------------------------------------------------------------------------

def instantiate(e: CatalogEntry, params: Mapping, fchoices=None, m: int = 2,
                listed: bool = False) -> tuple[RDSystem, list[Generator]]:
    """Concrete system and symmetry generators for one parameter assignment.

    Guarded symmetries are included iff their guard holds (the corrected
    guard when the entry carries one, unless ``listed``)."""
    vals = _complete(e, params, m)
    sys_ = e.system(m, vals, fchoices)
    gens = [T.expand().subs(vals) for _, T in e.templates(m)]
    gens = [Generator(g.eta, g.xi, g.phi, sid) for g, (sid, _) in zip(gens, e.templates(m))]
    for add in e.additional:
        if parse_guard(add.effective_guard(listed), m).holds(vals):
            for g in e.additional_generators(add, m):
                gens.append(g.subs(vals))
    return sys_, gens


def _complete(e: CatalogEntry, params: Mapping, m: int) -> dict:
    vals = _symbol_keys(params)
    missing = [n for n in e.params if param(n) not in vals]
    if missing:
        raise CatalogError(e.id, f"missing parameters {missing}")
    space = e.space
    from .guards import _in_domain
    for n, dom in e.params.items():
        if not _in_domain(dom, vals[param(n)]):
            raise CatalogError(e.id, f"{n} = {vals[param(n)]} is outside the domain {dom}")
    full = space.complete({param(n): vals[param(n)] for n in e.params}, m)
    for k, val in vals.items():
        if k in full and sp.simplify(full[k] - val) != 0:
            raise CatalogError(e.id, f"{k} = {val} contradicts the derived value {full[k]}")
    if not parse_guard(e.constraints, m).holds(full):
        raise CatalogError(e.id, f"parameters violate the constraints {e.constraints!r}")
    return full


def families(e: CatalogEntry, m: int, values: Mapping | None = None):
    """Infinite families (``Psi`` generators) of an entry."""
    from .algebra import Family
    out = []
    der = e.space.derived_exprs(m)
    vals = _symbol_keys(values or {})
    for s in e.main_syms:
        if s.family:
            g = parse(s.family["g"], m).xreplace(der).xreplace(vals)
            kap = parse(s.family["kappa"], m).xreplace(der).xreplace(vals)
            out.append((s.id, Family(tuple(sp.Integer(c) for c in s.family["vec"]), g, kap, s.id)))
    return out


# --------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------

def _to_float(vals: Mapping) -> dict:
    return {k: float(v) for k, v in vals.items()}


class _Compiled:
    """Oracle and reduced-equation evaluators with symbolic parameters."""

    def __init__(self, e: CatalogEntry, m: int):
        self.e, self.m = e, m
        self.sys = e.system(m)
        self.sys_pert = e.system(m, perturbed=True)
        self.main = {}
        for sid, T in e.templates(m):
            X = T.expand()
            oracle = Evaluator(invariance_residual(self.sys, X))
            reduced = list(classifying_residual(self.sys, T))
            reduced += [x for eqs in structure_equations(X, T.A).values() for x in eqs]
            reduced += list(T.Psi + T.Psi.T)
            pert = Evaluator(invariance_residual(self.sys_pert, X))
            self.main[sid] = (oracle, Evaluator(reduced), pert)
        self.additional = []
        for add in e.additional:
            gens = e.additional_generators(add, m)
            evs = [Evaluator(invariance_residual(self.sys, g)) for g in gens]
            self.additional.append((add, gens, evs))


@lru_cache(maxsize=None)
def compiled(e: CatalogEntry, m: int) -> _Compiled:
    return _Compiled(e, m)


def _verdict(ev: Evaluator, rng, vals, hooks, seeds):
    return combine(ev.verdicts(rng, seeds, fixed=_to_float(vals), hooks=hooks))


@dataclass
class Report:
    records: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.get("ok", True) for r in self.records)

    def failures(self) -> list:
        return [r for r in self.records if not r.get("ok", True)]

    def extend(self, other: "Report"):
        self.records.extend(other.records)

    def jsonl(self) -> str:
        from .symmetry import dump_jsonl
        return dump_jsonl(sorted(self.records, key=_record_key))


def _record_key(r):
    return (r["entry"], r["m"], r["check"], r["generator"], r.get("clause", ""),
            json.dumps(r.get("sample", {}), sort_keys=True))


def _record(e, gid, vd, m, vals, check, ok, **extra):
    rec = report_record(e.id, gid, vd, m, vals, check)
    rec["ok"] = bool(ok)
    rec.update(extra)
    return rec


def verify_entry(e: CatalogEntry, samples: int = 5, ms: Sequence[int] = (1, 2, 3),
                 seed: int = 0, fchoices: Sequence[str] = ("power", "exponential", "rational"),
                 seeds: int = 20, listed: bool = False, guards: bool = True,
                 main: bool = True) -> Report:
    """Check an entry end to end.

    Main symmetries: ``samples`` random parameter draws times every opaque
    choice, through both the full oracle and the reduced equations.
    Guarded symmetries: pass on guard-satisfying draws, NonZero on draws
    violating each clause, and the extension flags agree with the guards.
    A perturbed nonlinearity must break at least one main symmetry.
    """
    rep = Report()
    rng = np.random.default_rng([seed, e.table, e.item])
    choices = list(fchoices) if e.arguments else [None]
    for m in ms:
        c = compiled(e, m)
        if main:
            for _ in range(samples):
                vals = e.space.sample(rng, m)
                for fc in choices:
                    hooks = e.hooks(fc) if fc else None
                    broken = False
                    for sid, (oracle, reduced, pert) in c.main.items():
                        for name, ev in (("oracle", oracle), ("classifying", reduced)):
                            vd = _verdict(ev, rng, vals, hooks, seeds)
                            rep.records.append(_record(e, sid, vd, m, vals, name, bool(vd),
                                                       fchoice=fc))
                        broken |= not _verdict(pert, rng, vals, hooks, seeds)
                    rep.records.append({"entry": e.id, "generator": "main", "check": "perturbation",
                                        "m": m, "verdict": "broken" if broken else "survived",
                                        "fchoice": fc, "ok": broken,
                                        "sample": {str(k): float(v) for k, v in vals.items()}})
        if guards:
            rep.extend(_verify_guards(e, c, m, rng, seeds, listed))
    return rep


def _guard_samples(e: CatalogEntry, guard: str, m: int, rng, positive: bool, per: int = 1):
    g = parse_guard(guard, m)
    conjs = g.dnf if positive else g.violations()
    out = []
    for conj in conjs:
        for _ in range(per):
            try:
                out.append((conj, e.space.sample(rng, m, require=conj)))
            except SamplingError:
                out.append((conj, None))
        # guards tend to differ on parameter boundaries, which random draws miss
        for p in sorted(g.symbols(), key=str):
            if e.params.get(str(p)) != "real" or any(a.lhs == p for a in conj):
                continue
            probe = tuple(conj) + (Atom(p, "=="),)
            try:
                out.append((probe, e.space.sample(rng, m, require=probe, tries=40)))
            except SamplingError:
                pass
    return out


def _verify_guards(e, c: _Compiled, m, rng, seeds, listed) -> Report:
    rep = Report()
    fc = "power" if e.arguments else None
    hooks = e.hooks(fc) if fc else None
    for add, gens, evs in c.additional:
        guard = add.effective_guard(listed)
        gid = f"{add.kind}[{guard}]"
        for positive in (True, False):
            for conj, vals in _guard_samples(e, guard, m, rng, positive):
                label = " and ".join(str(a) for a in conj)
                if vals is None:
                    rep.records.append({"entry": e.id, "generator": gid, "m": m,
                                        "check": "guard+" if positive else "guard-",
                                        "verdict": "unsatisfiable", "clause": label,
                                        "ok": not positive})
                    continue
                vds = [_verdict(ev, rng, vals, hooks, seeds) for ev in evs]
                vd = combine(vds)
                flags = extension_conditions(e.system(m, vals, fc), seeds, rng=rng)
                degenerate = False
                if add.kind == "Ghat":
                    gamma = sp.nsimplify(parse(add.gamma, m).xreplace(
                        e.space.derived_exprs(m)).xreplace(vals))
                    # gamma = 0 turns Ghat into translations plus the Galilei tail
                    degenerate = gamma == 0 and not flags.exp_galilei
                ok = bool(vd) if positive else (vd.kind is ZeroKind.NONZERO or degenerate)
                rep.records.append(_record(e, gid, vd, m, vals,
                                           "guard+" if positive else "guard-", ok, clause=label,
                                           degenerate=degenerate))
                flag = {"G": flags.galilei, "Ghat": flags.exp_galilei,
                        "K": flags.conformal}[add.kind]
                flag_ok = flag == positive
                if add.kind == "Ghat" and positive and flag:
                    flag_ok = sp.simplify(gamma - flags.gamma) == 0
                rep.records.append({"entry": e.id, "generator": gid, "m": m,
                                    "check": "extension+" if positive else "extension-",
                                    "verdict": str(flag), "clause": label, "ok": flag_ok,
                                    "sample": {str(k): float(v) for k, v in vals.items()}})
    return rep


def verify_catalog(entries: Iterable[CatalogEntry] | None = None, **kw) -> Report:
    rep = Report()
    for e in sorted(entries or load(), key=lambda x: (x.table, x.item)):
        rep.extend(verify_entry(e, **kw))
    return rep


# --------------------------------------------------------------------------
# closure of the listed symmetry sets
# --------------------------------------------------------------------------

def closure_for_entry(e: CatalogEntry, m: int, values: Mapping, listed: bool = False,
                      rng=0):
    """Run the Lie-closure check on basic + main + granted additional
    symmetries of one instantiated entry."""
    from .algebra import closure_check
    vals = _complete(e, values, m)
    fams = families(e, m, vals)
    fam_ids = {sid for sid, _ in fams}
    _, gens = instantiate(e, vals, None, m, listed)
    basis = [g for g in gens if g.name not in fam_ids]
    return closure_check(basis, m, [f for _, f in fams], adjoin_basic=True, rng=rng)


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

def show(e: CatalogEntry, fmt: str = "markdown") -> str:
    if fmt == "json":
        return json.dumps(e.to_json(), indent=2)
    lines = [f"## Table {e.table}, item {e.item} ({e.id})", "",
             f"- f1 = {render(parse(e.f1, 1))}", f"- f2 = {render(parse(e.f2, 1))}"]
    if e.arguments:
        lines.append("- opaque arguments: " + ", ".join(f"{k}({v})" for k, v in sorted(e.arguments.items())))
    lines.append("- parameters: " + ", ".join(f"{k} in {v}" for k, v in e.params.items()))
    if e.derived:
        lines.append("- derived: " + ", ".join(f"{k} = {v}" for k, v in e.derived.items()))
    if e.constraints != "true":
        lines.append(f"- constraints: {e.constraints}")
    lines.append("- main symmetries:")
    lines += [f"  - {s.id}: {s.generator}" for s in e.main_syms]
    if e.additional:
        lines.append("- additional symmetries:")
        for a in e.additional:
            extra = f" (gamma = {a.gamma})" if a.gamma else ""
            corr = f"; corrected: {a.corrected_guard}" if a.corrected_guard else ""
            lines.append(f"  - {a.kind} if {a.guard}{extra}{corr}")
    if e.aets:
        lines.append("- AETs: " + ", ".join(
            f"{c.id}" + ("" if c.guard == "true" else f" if {c.guard}") +
            (" (refuted)" if c.erratum else "") for c in e.aets))
    if e.notes:
        lines.append(f"- notes: {e.notes}")
    return "\n".join(lines)


def table(entries: Iterable[CatalogEntry] | None = None) -> str:
    rows = ["| id | f1 | main symmetries |", "|---|---|---|"]
    for e in entries or load():
        rows.append(f"| {e.id} | {e.f1} | {'; '.join(s.generator for s in e.main_syms)} |")
    return "\n".join(rows)
