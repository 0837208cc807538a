"""Guard predicates over catalog parameters and a constraint-aware sampler.

A guard is a boolean combination of ``==`` / ``!=`` comparisons between
expressions, joined by ``and`` / ``or`` with parentheses, e.g.
``"nu == a*sigma and sigma == 4/m"``.  Comparisons are decided exactly.
"""
from __future__ import annotations

import ast
import itertools
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import sympy as sp

from .expr import param, parse


@dataclass(frozen=True)
class Atom:
    lhs: sp.Expr
    op: str  # "==" or "!="

    def negate(self) -> "Atom":
        return Atom(self.lhs, "!=" if self.op == "==" else "==")

    def holds(self, values: Mapping) -> bool:
        e = sp.nsimplify(sp.simplify(self.lhs.xreplace(values)))
        if e.free_symbols:
            raise ValueError(f"guard atom {self} is not decided by {values}")
        zero = e == 0 or sp.simplify(e) == 0
        return zero if self.op == "==" else not zero

    def __str__(self):
        return f"{self.lhs} {self.op} 0"


@dataclass(frozen=True)
class Guard:
    """Guard in disjunctive normal form (tuple of conjunctions of atoms)."""

    text: str
    dnf: tuple

    @property
    def trivial(self) -> bool:
        return self.dnf == ((),)

    def holds(self, values: Mapping) -> bool:
        return any(all(a.holds(values) for a in conj) for conj in self.dnf)

    def symbols(self) -> set:
        out = set()
        for conj in self.dnf:
            for a in conj:
                out |= a.lhs.free_symbols
        return out

    def violations(self) -> list[tuple]:
        """Conjunctions whose solutions violate the guard.

        For a single conjunction each atom is flipped in turn while the others
        are kept, so every clause is tested separately; otherwise the DNF of the
        negation is returned."""
        if self.trivial:
            return []
        if len(self.dnf) == 1:
            conj = self.dnf[0]
            return [tuple(a.negate() if j == i else a for j, a in enumerate(conj))
                    for i in range(len(conj))]
        neg = [[a.negate() for a in conj] for conj in self.dnf]
        out = []
        for choice in itertools.product(*neg):
            uniq = tuple(dict.fromkeys(choice))
            out.append(uniq)
        return out


_KEYWORD = re.compile(r"\b(lambda)__kw\b")

TRUE = Guard("true", ((),))


def _expr(node: ast.AST, text: str, m: int | None) -> sp.Expr:
    seg = ast.get_source_segment(text, node)
    e = parse(_KEYWORD.sub(lambda mt: mt.group(1), seg).replace("**", "^"), m)
    if m is not None:
        e = e.xreplace({param("m"): m})
    return e


def _to_dnf(node: ast.AST, text: str, m: int | None) -> list[tuple]:
    if isinstance(node, ast.BoolOp):
        parts = [_to_dnf(v, text, m) for v in node.values]
        if isinstance(node.op, ast.Or):
            return [c for p in parts for c in p]
        out = [()]
        for p in parts:
            out = [a + b for a in out for b in p]
        return out
    if isinstance(node, ast.Compare) and len(node.ops) == 1:
        op = {ast.Eq: "==", ast.NotEq: "!="}.get(type(node.ops[0]))
        if op is None:
            raise ValueError(f"unsupported comparison in guard {text!r}")
        lhs = _expr(node.left, text, m) - _expr(node.comparators[0], text, m)
        return [(Atom(sp.expand(lhs), op),)]
    if isinstance(node, ast.Constant) and node.value is True:
        return [()]
    raise ValueError(f"cannot read guard {text!r}")


def parse_guard(text: str | None, m: int | None = None) -> Guard:
    if text is None or text.strip() in ("", "true"):
        return TRUE
    # python keywords used as parameter names get a suffix for the ast pass
    src = re.sub(r"\blambda\b", "lambda__kw", text).replace("^", "**")
    tree = ast.parse(src, mode="eval")
    return Guard(text, tuple(_to_dnf(tree.body, src, m)))


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

DOMAINS = ("real", "nonzero", "pm1", "kappa3", "positive")


def _draw(domain: str, rng: np.random.Generator) -> sp.Rational:
    if domain == "pm1":
        return sp.Integer(int(rng.choice([-1, 1])))
    if domain == "kappa3":
        return sp.Integer(int(rng.choice([-1, 0, 1])))
    q = int(rng.integers(1, 5))
    p = 0
    while p == 0:
        p = int(rng.integers(-3 * q, 3 * q + 1))
    r = sp.Rational(p, q)
    return abs(r) if domain == "positive" else r


def _in_domain(domain: str, value: sp.Expr) -> bool:
    if not value.is_real:
        return False
    if domain == "pm1":
        return value in (1, -1)
    if domain == "kappa3":
        return value in (-1, 0, 1)
    if domain == "nonzero":
        return value != 0
    if domain == "positive":
        return bool(value > 0)
    return True


class SamplingError(RuntimeError):
    pass


@dataclass
class ParamSpace:
    """Free parameters with domains, derived parameters and constraints."""

    domains: dict  # name -> domain
    derived: dict  # name -> expression text
    constraints: Guard = TRUE

    def derived_exprs(self, m: int | None) -> dict:
        out = {}
        for name, text in self.derived.items():
            e = parse(text, m)
            if m is not None:
                e = e.xreplace({param("m"): m})
            out[param(name)] = e
        # derived values may refer to earlier derived ones
        for _ in range(len(out)):
            out = {k: v.xreplace(out) for k, v in out.items()}
        return out

    def complete(self, free: Mapping, m: int | None) -> dict:
        vals = dict(free)
        for k, e in self.derived_exprs(m).items():
            vals[k] = sp.nsimplify(sp.simplify(e.xreplace(vals)))
        return vals

    def sample(self, rng: np.random.Generator, m: int | None = None,
               require: Sequence = (), fixed: Mapping | None = None,
               tries: int = 200) -> dict:
        """Random exact values satisfying the constraints and the atoms in
        ``require`` (one conjunction)."""
        fixed = {param(k) if isinstance(k, str) else k: sp.nsimplify(v)
                 for k, v in (fixed or {}).items()}
        der = self.derived_exprs(m)
        cons = self.constraints if m is None else parse_guard(self.constraints.text, m) \
            if self.constraints is not TRUE else TRUE
        free_names = [param(n) for n in self.domains]
        dom = {param(n): d for n, d in self.domains.items()}
        for _ in range(tries):
            vals = dict(fixed)
            eqs = [a for a in require if a.op == "=="]
            rng.shuffle(eqs)
            ok = True
            for a in eqs:
                e = sp.simplify(a.lhs.xreplace(der).xreplace(vals))
                if e == 0:
                    continue
                cands = [s for s in free_names if s in e.free_symbols and s not in vals]
                rng.shuffle(cands)
                solved = False
                for s in cands:
                    # give the other unknowns in e values first
                    trial = dict(vals)
                    for o in sorted(e.free_symbols, key=str):
                        if o != s and o not in trial and o in dom:
                            trial[o] = _draw(dom[o], rng)
                    eq = e.xreplace({k: v for k, v in trial.items() if k != s})
                    try:
                        sols = [r for r in sp.solve(eq, s) if r.is_real]
                    except NotImplementedError:
                        sols = []
                    sols = [sp.nsimplify(r) for r in sols if _in_domain(dom[s], sp.nsimplify(r))]
                    if sols:
                        trial[s] = sols[int(rng.integers(len(sols)))]
                        vals = trial
                        solved = True
                        break
                if not solved:
                    ok = False
                    break
            if not ok:
                continue
            for s in free_names:
                if s not in vals:
                    vals[s] = _draw(dom[s], rng)
            full = self.complete(vals, m)
            if any(not v.is_real for v in full.values()):
                continue
            try:
                if not all(a.holds(full) for a in require):
                    continue
                if not cons.holds(full):
                    continue
            except (ValueError, ZeroDivisionError, TypeError):
                continue
            if any(v.has(sp.zoo, sp.nan, sp.oo) for v in full.values()):
                continue
            return full
        raise SamplingError(f"could not satisfy {[str(a) for a in require]}")
