"""Reaction-diffusion systems U_t - A Laplace(U) = f(U) with a rotation-type A."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import sympy as sp

from .expr import (
    jet, jet_info, jets_in, laplacian, parse, render, t, total_derivative, u, v,
    xs, R, z,
)


@dataclass(frozen=True)
class DiffusionMatrix:
    """Type-I matrix ((a, -1), (1, a)); invertible for every real ``a``."""

    a: sp.Expr = sp.Integer(1)
    kind: str = "I"

    def __post_init__(self):
        if self.kind != "I":
            raise ValueError("only type-I diffusion matrices are supported")
        object.__setattr__(self, "a", sp.sympify(self.a))

    @property
    def matrix(self) -> sp.Matrix:
        return sp.Matrix([[self.a, -1], [1, self.a]])

    def inverse(self) -> sp.Matrix:
        d = self.a ** 2 + 1
        return sp.Matrix([[self.a / d, 1 / d], [-1 / d, self.a / d]])

    def commutes(self, C: sp.Matrix) -> bool:
        return all(sp.simplify(e) == 0 for e in (C * self.matrix - self.matrix * C))


def _check_source(e: sp.Expr) -> None:
    bad = [s for s in e.free_symbols if s == t or s.name.startswith("x") and s.name[1:].isdigit()]
    bad += [s for s in jets_in(e) if s not in (u, v)]
    if bad:
        raise ValueError(f"source term depends on {sorted(map(str, bad))}")


@dataclass(frozen=True)
class RDSystem:
    m: int
    A: DiffusionMatrix
    f: tuple[sp.Expr, sp.Expr]

    def __post_init__(self):
        xs(self.m)
        f = tuple(sp.sympify(e) for e in self.f)
        if len(f) != 2:
            raise ValueError("f must have two components")
        for e in f:
            _check_source(e)
        object.__setattr__(self, "f", f)

    @classmethod
    def from_strings(cls, m: int, a, f1: str, f2: str) -> "RDSystem":
        a = parse(a) if isinstance(a, str) else sp.sympify(a)
        return cls(m, DiffusionMatrix(a), (parse(f1, m), parse(f2, m)))

    @classmethod
    def from_json(cls, text_or_dict) -> "RDSystem":
        d = json.loads(text_or_dict) if isinstance(text_or_dict, str) else text_or_dict
        return cls.from_strings(int(d["m"]), str(d["a"]), d["f1"], d["f2"])

    def to_json(self) -> dict:
        return {"m": self.m, "a": render(self.A.a), "f1": render(self.f[0]),
                "f2": render(self.f[1])}

    def subs(self, values: Mapping) -> "RDSystem":
        values = {sp.Symbol(k, real=True) if isinstance(k, str) else k: val
                  for k, val in values.items()}
        return RDSystem(self.m, DiffusionMatrix(self.A.a.xreplace(values)),
                        tuple(e.xreplace(values) for e in self.f))

    @property
    def parameters(self) -> set[sp.Symbol]:
        syms = set(self.A.a.free_symbols)
        for e in self.f:
            syms |= e.free_symbols
        return {s for s in syms if s not in (u, v)}

    # -- equations ---------------------------------------------------------

    def rhs(self) -> tuple[sp.Expr, sp.Expr]:
        """Components of A Laplace(U) + f(U)."""
        lap = sp.Matrix([laplacian(1, self.m), laplacian(2, self.m)])
        ad = self.A.matrix * lap
        return ad[0] + self.f[0], ad[1] + self.f[1]

    def residual(self) -> tuple[sp.Expr, sp.Expr]:
        e1, e2 = self.rhs()
        return jet(1, ("t",)) - e1, jet(2, ("t",)) - e2

    def jacobian(self) -> sp.Matrix:
        return sp.Matrix([[sp.diff(fa, w) for w in (u, v)] for fa in self.f])

    def manifold(self) -> "SolutionManifold":
        return SolutionManifold(self)

    def solution_manifold_rules(self) -> dict[sp.Symbol, sp.Expr]:
        """u_{b,t} and its first spatial derivatives, eliminated on solutions."""
        M = self.manifold()
        rules = {}
        for b in (1, 2):
            rules[jet(b, ("t",))] = M.value(b, ("t",))
            for x in xs(self.m):
                rules[jet(b, ("t", x.name))] = M.value(b, ("t", x.name))
        return rules


class SolutionManifold:
    """Eliminates every jet containing a t-derivative using the PDE.

    Jets of arbitrary spatial order are produced here (third and fourth
    order appear in the prolongation of ∂_t components); callers decide
    whether they must cancel.
    """

    def __init__(self, sys: RDSystem):
        self.sys = sys
        self._rhs = sys.rhs()
        self._cache: dict[tuple[int, tuple[str, ...]], sp.Expr] = {}

    def value(self, b: int, idx: tuple[str, ...]) -> sp.Expr:
        idx = tuple(idx)
        key = (b, tuple(sorted(idx)))
        if key in self._cache:
            return self._cache[key]
        n_t = idx.count("t")
        space = [i for i in idx if i != "t"]
        if n_t == 0:
            out = jet(b, idx)
        elif n_t == 1 and not space:
            out = self._rhs[b - 1]
        elif not space:
            # u_{b,t...t}: differentiate the (k-1)-level value in t
            out = self.reduce(total_derivative(self.value(b, idx[1:]), t, None))
        else:
            # peel one spatial index
            x = space[-1]
            rest = list(idx)
            rest.remove(x)
            out = total_derivative(self.value(b, tuple(rest)), sp.Symbol(x, real=True), None)
        self._cache[key] = out
        return out

    def reduce(self, e: sp.Expr) -> sp.Expr:
        rules = {}
        for s in jets_in(e):
            b, idx = jet_info(s)
            if "t" in idx:
                rules[s] = self.value(b, idx)
        return e.xreplace(rules) if rules else e


def from_complex(expr: sp.Expr) -> tuple[sp.Expr, sp.Expr]:
    """Split a complex nonlinearity written in W = u + i v into (f1, f2).

    ``expr`` may use ``u, v, R, z`` and ``sympy.I``; real parameters stay real.
    """
    re_part, im_part = sp.expand_complex(sp.expand(expr)).as_real_imag()
    return sp.simplify(re_part), sp.simplify(im_part)


def W() -> sp.Expr:
    return u + sp.I * v


def polar_W() -> sp.Expr:
    """W written through the polar atoms, R*exp(i z)."""
    return R(u, v) * sp.exp(sp.I * z(u, v))
