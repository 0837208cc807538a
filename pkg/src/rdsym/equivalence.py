"""Equivalence transformations: the kernel group, the linear equivalence
group and the additional transformations valid for special nonlinearities.

AETs act as ``U' = T(t) U + b(t)`` with ``t, x`` untouched.  They are
applied by a change of variables in the residual ``U_t - A Laplace U - f``;
the result must again be ``U'_t - A Laplace U' - f'(U')`` with ``f'`` free of
``t``, otherwise :class:`FormNotPreserved` is raised.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import sympy as sp

from .expr import ZeroKind, is_zero, jet, jets_in, param, parse, render, t, u, v, xs
from .guards import SamplingError, parse_guard
from .model import DiffusionMatrix, RDSystem
from .symmetry import Generator

U = (u, v)
omega = sp.Symbol("omega", real=True)


class FormNotPreserved(ValueError):
    """The transformed equation is not of the reaction-diffusion form."""

    def __init__(self, message: str, term: sp.Expr | None = None, witness=None):
        super().__init__(message + (f": {render(term)}" if term is not None else ""))
        self.term = term
        self.witness = witness


# --------------------------------------------------------------------------
# transforms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Kernel:
    """``t -> t + a``, ``x -> R x + b`` with orthogonal ``R``."""

    shift: sp.Expr = 0
    rotation: tuple | None = None
    b: tuple | None = None

    def matrices(self, m: int):
        Rm = sp.eye(m) if self.rotation is None else sp.Matrix(self.rotation)
        if Rm.shape != (m, m):
            raise ValueError(f"rotation must be {m}x{m}")
        if any(sp.simplify(e) != 0 for e in Rm.T * Rm - sp.eye(m)):
            raise ValueError("rotation block is not orthogonal")
        b = sp.zeros(m, 1) if self.b is None else sp.Matrix(self.b)
        return Rm, b

    def point_map(self, m: int):
        Rm, b = self.matrices(m)
        x = sp.Matrix(xs(m))
        new = (t + self.shift, list(Rm * x + b), list(U))
        x_old = Rm.T * (x - b)
        inv = {t: t - self.shift, **{xi: x_old[i] for i, xi in enumerate(xs(m))}}
        return new, inv


@dataclass(frozen=True)
class Linear:
    """``U -> K U + b``, ``t -> t / lam^2``, ``x -> x / lam`` with ``K``
    commuting with the diffusion matrix: ``K = ((K1, -K2), (K2, K1))``."""

    K1: sp.Expr = 1
    K2: sp.Expr = 0
    lam: sp.Expr = 1
    b: tuple = (0, 0)

    def __post_init__(self):
        if sp.sympify(self.K1) ** 2 + sp.sympify(self.K2) ** 2 == 0:
            raise ValueError("K must be invertible (K1^2 + K2^2 != 0)")
        if sp.sympify(self.lam) == 0:
            raise ValueError("lam must be nonzero")

    @property
    def K(self) -> sp.Matrix:
        return sp.Matrix([[self.K1, -self.K2], [self.K2, self.K1]])

    def point_map(self, m: int):
        lam = sp.sympify(self.lam)
        b = sp.Matrix(self.b)
        Unew = self.K * sp.Matrix(U) + b
        new = (t / lam ** 2, [xi / lam for xi in xs(m)], list(Unew))
        Uold = self.K.inv() * (sp.Matrix(U) - b)
        inv = {t: lam ** 2 * t, **{xi: lam * xi for xi in xs(m)}, u: Uold[0], v: Uold[1]}
        return new, inv


def _rot(theta) -> sp.Matrix:
    return sp.Matrix([[sp.cos(theta), -sp.sin(theta)], [sp.sin(theta), sp.cos(theta)]])


def aet_map(aid: int, w=omega, nu=None, sigma=None, lam=None):
    """``(T(t), b(t))`` of the AET with id ``aid`` (``U' = T U + b``)."""
    z2 = sp.zeros(2, 1)
    if aid == 1:
        return sp.exp(w * t) * sp.eye(2), z2
    if aid == 2:
        return _rot(w * t), z2
    if aid == 3:
        return sp.diag(sp.exp(w * t), 1), sp.Matrix([0, w * t ** 2 / 2])
    if aid == 4:
        return sp.eye(2), sp.Matrix([w * t, 0])
    if aid == 5:
        return sp.eye(2), sp.Matrix([0, w * t])
    if aid == 6:
        _need(aid, nu=nu, sigma=sigma)
        return sp.exp(nu * w * t) * _rot(-sigma * w * t), z2
    if aid == 7:
        _need(aid, sigma=sigma)
        return sp.exp(2 * w * t) * _rot(sigma * w * t ** 2), z2
    if aid == 8:
        _need(aid, lam=lam)
        return sp.exp(lam * w * t ** 2) * _rot(-2 * w * t), z2
    raise ValueError(f"AET {aid} is not in the registry (1-8)")


def _need(aid, **kw):
    missing = [k for k, val in kw.items() if val is None]
    if missing:
        raise ValueError(f"AET {aid} needs parameters {missing}")


@dataclass(frozen=True)
class AET:
    id: int
    omega: sp.Expr = 1
    nu: sp.Expr | None = None
    sigma: sp.Expr | None = None
    lam: sp.Expr | None = None

    def matrices(self):
        return aet_map(self.id, sp.sympify(self.omega), self.nu, self.sigma, self.lam)

    def point_map(self, m: int):
        T, b = self.matrices()
        Unew = T * sp.Matrix(U) + b
        Uold = T.inv() * (sp.Matrix(U) - b)
        return (t, list(xs(m)), list(Unew)), {u: Uold[0], v: Uold[1]}


EquivTransform = Kernel | Linear | AET


# --------------------------------------------------------------------------
# application
# --------------------------------------------------------------------------

def apply(T: EquivTransform, sys: RDSystem, seeds: int = 20, rng=0) -> RDSystem:
    """Transform a system; raise :class:`FormNotPreserved` when the result
    leaves the reaction-diffusion class."""
    if isinstance(T, Kernel):
        T.matrices(sys.m)
        return sys
    if isinstance(T, Linear):
        K = T.K
        if any(sp.simplify(e) != 0 for e in K * sys.A.matrix - sys.A.matrix * K):
            raise FormNotPreserved("K does not commute with the diffusion matrix")
        Uold = K.inv() * (sp.Matrix(U) - sp.Matrix(T.b))
        rep = {u: Uold[0], v: Uold[1]}
        f = sp.Matrix([fa.xreplace(rep) for fa in sys.f])
        fn = sp.sympify(T.lam) ** 2 * K * f
        return RDSystem(sys.m, sys.A, (sp.expand(fn[0]), sp.expand(fn[1])))
    return _apply_aet(T, sys, seeds, rng)


def pushforward_residual(T: AET, sys: RDSystem) -> tuple[sp.Expr, sp.Expr]:
    """Residual of ``sys`` in the new variables, multiplied by ``T(t)``."""
    Tm, b = T.matrices()
    M = Tm.inv().applyfunc(lambda e: sp.simplify(sp.trigsimp(e)))
    c = -M * b
    m = sys.m
    res = sys.residual()
    base = sp.Matrix(U)
    old = M * base + c
    rep = {u: old[0], v: old[1]}
    for k in (1, 2):
        rep[jet(k, ("t",))] = sum(sp.diff(M[k - 1, j], t) * base[j] + M[k - 1, j] * jet(j + 1, ("t",))
                                  for j in range(2)) + sp.diff(c[k - 1], t)
        for x in xs(m):
            for idx in ((x.name,), (x.name, x.name)):
                rep[jet(k, idx)] = sum(M[k - 1, j] * jet(j + 1, idx) for j in range(2))
    pushed = [e.xreplace(rep) for e in res]
    new = Tm * sp.Matrix(pushed)
    # no global trigsimp: it stalls on logarithmic sources; coefficients are simplified where checked
    return tuple(sp.expand(e) for e in new)


def _apply_aet(T: AET, sys: RDSystem, seeds: int, rng) -> RDSystem:
    m = sys.m
    res = pushforward_residual(T, sys)
    derivs = [s for e in res for s in jets_in(e) if s not in U]
    expected = {}
    for k in range(2):
        for j in range(2):
            expected[(k, jet(j + 1, ("t",)))] = sp.Integer(int(k == j))
            for x in xs(m):
                expected[(k, jet(j + 1, (x.name, x.name)))] = -sys.A.matrix[k, j]
    # the derivative part must stay  U_t - A Laplace(U)
    for k in range(2):
        for s in set(derivs) | {key[1] for key in expected}:
            coef = sp.diff(res[k], s)
            if jets_in(coef) - set(U):
                raise FormNotPreserved("residual is not linear in derivatives", coef)
            want = expected.get((k, s), sp.Integer(0))
            if sp.simplify(coef - want) != 0:
                what = "time-derivative part" if "_t" in s.name else "diffusion part"
                raise FormNotPreserved(f"{what} changed", sp.simplify(coef))
    zero = {s: 0 for s in derivs}
    ft = [-e.xreplace(zero) for e in res]
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    for k in range(2):
        dt = sp.diff(ft[k], t)
        vd = is_zero(dt, seeds, rng=rng)
        if vd.kind is ZeroKind.NONZERO:
            raise FormNotPreserved(f"source f{k + 1} depends on t", dt, vd.witness)
    f_new = tuple(sp.expand(sp.simplify(e.xreplace({t: 0}))) for e in ft)
    return RDSystem(m, sys.A, f_new)


def compose(*Ts: EquivTransform):
    """Sequential application helper: returns a callable on systems."""
    def run(sys: RDSystem, **kw) -> RDSystem:
        for T in Ts:
            sys = apply(T, sys, **kw)
        return sys
    return run


def aet_group_law(aid: int) -> bool:
    """``AET(w1)`` followed by ``AET(w2)`` equals ``AET(w1 + w2)``."""
    w1, w2 = sp.symbols("w1 w2", real=True)
    T1, b1 = aet_map(aid, w1)
    T2, b2 = aet_map(aid, w2)
    T3, b3 = aet_map(aid, w1 + w2)
    lhs = T2 * (T1 * sp.Matrix(U) + b1) + b2
    rhs = T3 * sp.Matrix(U) + b3
    return all(sp.simplify(sp.expand_trig(e)) == 0 for e in (lhs - rhs))


# --------------------------------------------------------------------------
# generator pushforward
# --------------------------------------------------------------------------

def push_generator(T: EquivTransform, X: Generator) -> Generator:
    """The field ``X`` written in the transformed coordinates."""
    m = X.m
    (t_new, x_new, U_new), inv = T.point_map(m)
    comps = [X.apply(t_new)] + [X.apply(e) for e in x_new] + [X.apply(e) for e in U_new]
    comps = [sp.simplify(c.xreplace(inv)) for c in comps]
    return Generator(comps[0], tuple(comps[1:1 + m]), tuple(comps[1 + m:]), f"{X.name}'")


# --------------------------------------------------------------------------
# verification of the tables' AET claims
# --------------------------------------------------------------------------

def bind(claim, entry, values: Mapping, m: int, w) -> AET:
    """The AET of a catalog claim with its parameters bound from the entry."""
    from .catalog import _symbol_keys
    vals = _symbol_keys(values)
    der = entry.space.derived_exprs(m)
    kw = {}
    for name, text in claim.bindings.items():
        e = parse(text, m).xreplace(der).xreplace(vals)
        kw[{"lambda": "lam"}.get(name, name)] = sp.nsimplify(sp.simplify(e))
    return AET(claim.id, w, **kw)


def _try(T, sys, rng):
    try:
        return apply(T, sys, rng=rng), None
    except FormNotPreserved as exc:
        return None, exc


@dataclass
class AETReport:
    records: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.records)

    def failures(self):
        return [r for r in self.records if not r["ok"]]


def _omega(rng) -> sp.Rational:
    q = int(rng.integers(1, 4))
    p = 0
    while p == 0:
        p = int(rng.integers(-2 * q, 2 * q + 1))
    return sp.Rational(p, q)


def verify_aet_claims(entry, samples: int = 2, m: int = 1, seed: int = 0,
                      include_refuted: bool = True) -> AETReport:
    """Every AET claim of an entry: form preserved on guard-satisfying
    draws, broken on at least one draw violating the guard; claims whose
    guards can hold together are also applied in sequence."""
    rep = AETReport()
    rng = np.random.default_rng([seed, entry.table, entry.item])
    sys_sym = entry.system(m)
    claims = [c for c in entry.aets if include_refuted or not c.erratum]
    for c in claims:
        g = parse_guard(c.guard, m)
        for conj in g.dnf:
            for _ in range(samples):
                rec = {"entry": entry.id, "aet": c.id, "guard": c.guard, "check": "under-guard"}
                try:
                    vals = entry.space.sample(rng, m, require=conj)
                except SamplingError:
                    rec.update(ok=False, outcome="guard unsatisfiable")
                    rep.records.append(rec)
                    continue
                T = bind(c, entry, vals, m, _omega(rng))
                new, exc = _try(T, entry.system(m, vals), rng)
                rec.update(sample={str(k): str(val) for k, val in vals.items()}, omega=str(T.omega),
                           ok=exc is None,
                           outcome="preserved" if exc is None else f"form not preserved: {exc}")
                if new is not None:
                    rec["f_new"] = [render(e) for e in new.f]
                rep.records.append(rec)
        viol = g.violations()
        if viol:
            broke, tried = False, []
            for conj in viol:
                try:
                    vals = entry.space.sample(rng, m, require=conj)
                except SamplingError:
                    continue
                T = bind(c, entry, vals, m, _omega(rng))
                _, exc = _try(T, entry.system(m, vals), rng)
                tried.append({"clause": " and ".join(map(str, conj)),
                              "outcome": "preserved" if exc is None else "form not preserved"})
                broke |= exc is not None
            rep.records.append({"entry": entry.id, "aet": c.id, "guard": c.guard,
                                "check": "off-guard", "ok": broke, "tried": tried})
    # joint application of claims whose guards are compatible
    for c1, c2 in itertools.combinations(claims, 2):
        both = [a + b for a in parse_guard(c1.guard, m).dnf for b in parse_guard(c2.guard, m).dnf]
        for conj in both:
            try:
                vals = entry.space.sample(rng, m, require=conj)
            except SamplingError:
                continue
            T1 = bind(c1, entry, vals, m, _omega(rng))
            T2 = bind(c2, entry, vals, m, _omega(rng))
            sys1, exc = _try(T1, entry.system(m, vals), rng)
            if exc is None:
                _, exc = _try(T2, sys1, rng)
            rep.records.append({"entry": entry.id, "aet": f"{c1.id}&{c2.id}",
                                "guard": f"({c1.guard}) and ({c2.guard})", "check": "joint",
                                "ok": exc is None,
                                "outcome": "preserved" if exc is None else str(exc),
                                "sample": {str(k): str(val) for k, val in vals.items()}})
            break
    del sys_sym
    return rep
