"""Point symmetries: generators, prolongation, the invariance oracle and the
reduced determining / classifying equations.

Sign convention: a generator is ``X = eta d_t + xi^nu d_{x_nu} - pi^b d_{u_b}``.
Internally the *component* ``phi = -pi`` is used, so that ``X(u_b) = phi_b``.
The structural equations below are the ones obtained from the full
prolongation; they are cross-checked against it in the test-suite.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import sympy as sp

from .expr import (
    Evaluator, JetOrderError, explicit_polar, Psi, R, Verdict, ZeroKind, is_jet, is_zero, jet,
    jet_info, jet_order, jets_in, param, parse, t, total_derivative, u, v, xs,
    z,
)
from .model import DiffusionMatrix, RDSystem

U = (u, v)


class StructureError(ValueError):
    """The generator violates the affinity invariants."""


def _depends_on_jets(e: sp.Expr) -> bool:
    return bool(jets_in(sp.sympify(e)))


@dataclass(frozen=True)
class Generator:
    """``eta d_t + xi.d_x + phi.d_u`` with ``phi`` affine in ``(u, v)``."""

    eta: sp.Expr
    xi: tuple
    phi: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "eta", sp.sympify(self.eta))
        object.__setattr__(self, "xi", tuple(sp.sympify(e) for e in self.xi))
        object.__setattr__(self, "phi", tuple(sp.sympify(e) for e in self.phi))
        if len(self.phi) != 2 or not 1 <= len(self.xi) <= 3:
            raise StructureError("generator needs 1..3 xi components and 2 u-components")
        if _depends_on_jets(self.eta) or any(_depends_on_jets(e) for e in self.xi):
            raise StructureError("eta and xi must not depend on u, v")
        for p in self.phi:
            bad = [s for s in jets_in(p) if s not in U]
            if bad:
                raise StructureError(f"u-component depends on derivatives {bad}")
            for a in U:
                for b in U:
                    if sp.expand(sp.diff(p, a, b)) != 0:
                        raise StructureError("u-component must be affine in (u, v)")

    @property
    def m(self) -> int:
        return len(self.xi)

    @property
    def pi(self) -> tuple:
        return tuple(-p for p in self.phi)

    @classmethod
    def from_pi(cls, eta, xi, pi, name=""):
        return cls(eta, xi, tuple(-sp.sympify(p) for p in pi), name)

    @property
    def N(self) -> sp.Matrix:
        """Linear part of ``pi`` (``pi = N u + B``)."""
        return sp.Matrix(2, 2, lambda a, b: sp.diff(self.pi[a], U[b]))

    @property
    def B(self) -> sp.Matrix:
        return sp.Matrix([p.xreplace({u: 0, v: 0}) for p in self.pi])

    # arithmetic -----------------------------------------------------------

    def __add__(self, other: "Generator") -> "Generator":
        _same_m(self, other)
        return Generator(self.eta + other.eta,
                         tuple(a + b for a, b in zip(self.xi, other.xi)),
                         tuple(a + b for a, b in zip(self.phi, other.phi)))

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Generator":
        c = sp.sympify(c)
        return Generator(c * self.eta, tuple(c * e for e in self.xi),
                         tuple(c * e for e in self.phi), self.name)

    def __rmul__(self, c):
        return self.scale(c)

    def apply(self, e: sp.Expr) -> sp.Expr:
        """Action as a derivation on functions of ``(t, x, u, v)``."""
        e = sp.sympify(e)
        out = self.eta * sp.diff(e, t)
        for x, c in zip(xs(self.m), self.xi):
            out += c * sp.diff(e, x)
        for w, c in zip(U, self.phi):
            out += c * sp.diff(e, w)
        return out

    def components(self) -> list[sp.Expr]:
        return [self.eta, *self.xi, *self.phi]

    def subs(self, values: Mapping) -> "Generator":
        vals = {param(k) if isinstance(k, str) else k: sp.sympify(val) for k, val in values.items()}
        return Generator(self.eta.xreplace(vals), tuple(e.xreplace(vals) for e in self.xi),
                         tuple(e.xreplace(vals) for e in self.phi), self.name)

    def is_zero_field(self) -> bool:
        return all(sp.expand(c) == 0 for c in self.components())

    def to_json(self) -> dict:
        from .expr import render
        return {"eta": render(self.eta), "xi": [render(e) for e in self.xi],
                "phi": [render(e) for e in self.phi], "name": self.name}


def _same_m(a: Generator, b: Generator):
    if a.m != b.m:
        raise ValueError("generators live in different dimensions")


def zero(m: int) -> Generator:
    return Generator(0, (0,) * m, (0, 0))


# --------------------------------------------------------------------------
# named generators
# --------------------------------------------------------------------------

def _Ainv_u(A: DiffusionMatrix) -> sp.Matrix:
    return A.inverse() * sp.Matrix(U)


def P0(m: int) -> Generator:
    return Generator(1, (0,) * m, (0, 0), "P0")


def P(nu: int, m: int) -> Generator:
    return Generator(0, tuple(int(i == nu - 1) for i in range(m)), (0, 0), f"P{nu}")


def J(mu: int, nu: int, m: int) -> Generator:
    x = xs(m)
    xi = [sp.Integer(0)] * m
    xi[nu - 1] += x[mu - 1]
    xi[mu - 1] -= x[nu - 1]
    return Generator(0, tuple(xi), (0, 0), f"J{mu}{nu}")


def D(m: int) -> Generator:
    return Generator(t, tuple(x / 2 for x in xs(m)), (0, 0), "D")


def K(A: DiffusionMatrix, m: int) -> Generator:
    x = xs(m)
    r2 = sum(xx ** 2 for xx in x)
    w = _Ainv_u(A)
    phi = tuple(-r2 / 2 * w[i] - t * m * U[i] for i in range(2))
    return Generator(2 * t ** 2, tuple(2 * t * xx for xx in x), phi, "K")


def G(mu: int, A: DiffusionMatrix, m: int) -> Generator:
    """Galilei boost; the multiplier is ``-x_mu/2 A^{-1}u``."""
    x = xs(m)
    w = _Ainv_u(A)
    xi = tuple(t if i == mu - 1 else 0 for i in range(m))
    return Generator(0, xi, tuple(-x[mu - 1] / 2 * w[i] for i in range(2)), f"G{mu}")


def Ghat(mu: int, gamma, A: DiffusionMatrix, m: int) -> Generator:
    gamma = sp.sympify(gamma)
    x = xs(m)
    w = _Ainv_u(A)
    e = sp.exp(gamma * t)
    xi = tuple(e if i == mu - 1 else 0 for i in range(m))
    return Generator(0, xi, tuple(-gamma * x[mu - 1] / 2 * e * w[i] for i in range(2)),
                     f"Ghat{mu}")


def tail(C, B, m: int, mu_D=0, name="") -> Generator:
    """Main symmetry ``mu_D D + (C u + B) . d_u``."""
    C = sp.Matrix(C)
    B = sp.Matrix(B)
    comp = C * sp.Matrix(U) + B
    base = D(m).scale(mu_D) if mu_D != 0 else zero(m)
    return Generator(base.eta, base.xi, tuple(base.phi[i] + comp[i] for i in range(2)), name)


def galilei_tail(A: DiffusionMatrix, m: int) -> Generator:
    """``(A^{-1}u) . d_u``, admitted together with the Galilei boosts."""
    return tail(A.inverse(), (0, 0), m, name="AinvU")


def exp_galilei_tail(gamma, A: DiffusionMatrix, m: int) -> Generator:
    return tail(sp.exp(sp.sympify(gamma) * t) * A.inverse(), (0, 0), m, name="expAinvU")


def basic_symmetries(m: int) -> list[Generator]:
    out = [P0(m)] + [P(i, m) for i in range(1, m + 1)]
    out += [J(i, j, m) for i in range(1, m + 1) for j in range(i + 1, m + 1)]
    return out


# --------------------------------------------------------------------------
# generator mini-language
# --------------------------------------------------------------------------

_OPS_FIXED = ("D", "K", "P0", "d_t", "d_u", "d_v", "d_R", "d_z", "Ainv_u", "expAinv_u")


def _op_symbols(m: int) -> dict[str, sp.Symbol]:
    names = list(_OPS_FIXED)
    for i in range(1, m + 1):
        names += [f"P{i}", f"d_x{i}", f"G{i}", f"Ghat{i}"]
        names += [f"J{i}{j}" for j in range(i + 1, m + 1)]
    return {n: sp.Symbol("__op_" + n) for n in names}


def operator(name: str, A: DiffusionMatrix, m: int, gamma=None) -> Generator:
    """The generator behind an operator atom of the mini-language."""
    x = xs(m)
    if name == "D":
        return D(m)
    if name == "K":
        return K(A, m)
    if name == "P0" or name == "d_t":
        return P0(m)
    if name.startswith("d_x"):
        return P(int(name[3:]), m)
    if name.startswith("P"):
        return P(int(name[1:]), m)
    if name.startswith("Ghat"):
        if gamma is None:
            raise ValueError("Ghat needs gamma")
        return Ghat(int(name[4:]), gamma, A, m)
    if name.startswith("G"):
        return G(int(name[1:]), A, m)
    if name.startswith("J"):
        return J(int(name[1]), int(name[2]), m)
    if name == "d_u":
        return Generator(0, (0,) * m, (1, 0))
    if name == "d_v":
        return Generator(0, (0,) * m, (0, 1))
    if name == "d_R":
        raise ValueError("d_R is only available through parse_generator")
    if name == "d_z":
        return Generator(0, (0,) * m, (-v, u))
    if name == "Ainv_u":
        return galilei_tail(A, m)
    if name == "expAinv_u":
        if gamma is None:
            raise ValueError("expAinv_u needs gamma")
        return exp_galilei_tail(gamma, A, m)
    raise ValueError(f"unknown operator {name}")


def parse_template(text: str, A: DiffusionMatrix, m: int, gamma=None) -> "GeneratorTemplate":
    """Parse a linear combination of operator atoms into template slots, e.g.
    ``"sigma*D - u*d_u - v*d_v"`` or ``"exp(kappa*t)*(mu*R*d_R - d_z)"``.

    Geometric atoms (``D, K, P*, J*, G*, Ghat*``) need constant
    coefficients.  Tail atoms (``d_u, d_v, d_R, d_z, Ainv_u, expAinv_u``)
    may carry coefficients in ``t, x, u, v``; their sum must be affine in
    ``(u, v)`` with a ``t``-only linear part.  ``R*d_R`` is the radial field
    ``u d_u + v d_v`` and ``d_z`` the rotation ``-v d_u + u d_v``.  ``r2``
    stands for ``x1^2 + ... + xm^2`` and the parameter ``m`` for the dimension.
    """
    ops = _op_symbols(m)
    extra = {"r2": sum(xi**2 for xi in xs(m))}
    e = sp.expand(parse(text, m, symbols={**ops, **extra}).xreplace({param("m"): m}))
    syms = set(ops.values())
    geo = {t, u, v, *xs(m)}
    lam, mu_D, nu_t = sp.Integer(0), sp.Integer(0), sp.Integer(0)
    sigma, omega, rho = [sp.Integer(0)] * m, [sp.Integer(0)] * m, [sp.Integer(0)] * m
    Psi_ = sp.zeros(m, m)
    phi = sp.zeros(2, 1)
    Ai = A.inverse()
    for key, s in ops.items():
        c = sp.diff(e, s)
        if c == 0:
            continue
        if c.free_symbols & syms:
            raise ValueError(f"generator {text!r} is not linear in operators")
        tail_atom = key in ("d_u", "d_v", "d_R", "d_z", "Ainv_u", "expAinv_u")
        if not tail_atom and (c.free_symbols & geo or c.has(R, z)):
            raise ValueError(f"coefficient of {key} must be constant in {text!r}")
        if key == "D":
            mu_D += c
        elif key == "K":
            lam += c
        elif key in ("P0", "d_t"):
            nu_t += c
        elif key.startswith("d_x"):
            rho[int(key[3:]) - 1] += c
        elif key.startswith("Ghat"):
            if gamma is None:
                raise ValueError("Ghat needs gamma")
            omega[int(key[4:]) - 1] += c
        elif key.startswith("G"):
            sigma[int(key[1:]) - 1] += c
        elif key.startswith("J"):
            i, j = int(key[1]) - 1, int(key[2]) - 1
            Psi_[i, j] += c
            Psi_[j, i] -= c
        elif key.startswith("P"):
            rho[int(key[1:]) - 1] += c
        elif key == "d_u":
            phi += c * sp.Matrix([1, 0])
        elif key == "d_v":
            phi += c * sp.Matrix([0, 1])
        elif key == "d_R":
            r = R(u, v)
            phi += c * sp.Matrix([u / r, v / r])
        elif key == "d_z":
            phi += c * sp.Matrix([-v, u])
        elif key == "Ainv_u":
            phi += c * Ai * sp.Matrix(U)
        elif key == "expAinv_u":
            if gamma is None:
                raise ValueError("expAinv_u needs gamma")
            phi += c * sp.exp(sp.sympify(gamma) * t) * Ai * sp.Matrix(U)
    rest = e.xreplace({s: 0 for s in syms})
    if sp.simplify(rest) != 0:
        raise ValueError(f"generator {text!r} has a term without an operator: {rest}")
    phi = phi.applyfunc(lambda p: sp.expand(sp.simplify(p)))
    C = sp.Matrix(2, 2, lambda i, j: sp.diff(phi[i], U[j]))
    B = [sp.expand(phi[i] - C[i, 0] * u - C[i, 1] * v) for i in range(2)]
    if any(c.free_symbols & ({u, v} | set(xs(m))) or c.has(R, z) for c in C) or \
            any(b.free_symbols & {u, v} or b.has(R, z) for b in B):
        raise ValueError(f"tail of {text!r} is not of the form C(t) u + B(t, x)")
    return GeneratorTemplate(m, A, lam=lam, sigma=tuple(sigma), omega=tuple(omega),
                             gamma=gamma if gamma is not None else 0, mu_D=mu_D, C=C,
                             B=tuple(B), Psi=Psi_, nu_t=nu_t, rho=tuple(rho), name=text)


def parse_generator(text: str, A: DiffusionMatrix, m: int, gamma=None,
                    name: str = "") -> Generator:
    """Parse the mini-language (see :func:`parse_template`) into a field."""
    g = parse_template(text, A, m, gamma).expand()
    return Generator(g.eta, g.xi, g.phi, name or text)


# --------------------------------------------------------------------------
# template of the general generator
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorTemplate:
    """Coefficients of the general symmetry generator.

    ``lam K + sigma.G + omega.Ghat(gamma) + mu_D D + (C u + B).d_u
    + Psi^{mu nu} x_mu d_{x_nu} + nu_t d_t + rho.d_x``.
    """

    m: int
    A: DiffusionMatrix
    lam: sp.Expr = sp.Integer(0)
    sigma: tuple = ()
    omega: tuple = ()
    gamma: sp.Expr = sp.Integer(0)
    mu_D: sp.Expr = sp.Integer(0)
    C: sp.Matrix = field(default_factory=lambda: sp.zeros(2, 2))
    B: tuple = (0, 0)
    Psi: sp.Matrix | None = None
    nu_t: sp.Expr = sp.Integer(0)
    rho: tuple = ()
    name: str = ""

    def __post_init__(self):
        m = self.m
        fix = lambda seq: tuple(sp.sympify(e) for e in seq) if seq else (sp.Integer(0),) * m
        object.__setattr__(self, "sigma", fix(self.sigma))
        object.__setattr__(self, "omega", fix(self.omega))
        object.__setattr__(self, "rho", fix(self.rho))
        for k in ("lam", "gamma", "mu_D", "nu_t"):
            object.__setattr__(self, k, sp.sympify(getattr(self, k)))
        object.__setattr__(self, "C", sp.Matrix(self.C))
        object.__setattr__(self, "B", tuple(sp.sympify(e) for e in self.B))
        Psi_ = sp.zeros(m, m) if self.Psi is None else sp.Matrix(self.Psi)
        object.__setattr__(self, "Psi", Psi_)
        comm = self.C * self.A.matrix - self.A.matrix * self.C
        if any(sp.simplify(e) != 0 for e in comm):
            raise ValueError("C must commute with the diffusion matrix")
        if any(sp.diff(c, x) != 0 for c in self.C for x in xs(m)):
            raise ValueError("C may depend on t only")

    def expand(self) -> Generator:
        m = self.m
        x = xs(m)
        w = _Ainv_u(self.A)
        r2 = sum(xx ** 2 for xx in x)
        eg = sp.exp(self.gamma * t)
        sx = sum(s * xx for s, xx in zip(self.sigma, x))
        ox = sum(o * xx for o, xx in zip(self.omega, x))
        eta = 2 * self.lam * t ** 2 + self.mu_D * t + self.nu_t
        xi = []
        for n in range(m):
            c = (2 * self.lam * t * x[n] + self.sigma[n] * t + self.omega[n] * eg
                 + self.mu_D * x[n] / 2 + self.rho[n])
            c += sum(self.Psi[k, n] * x[k] for k in range(m))
            xi.append(c)
        S = self.lam * r2 / 2 + sx / 2 + self.gamma * eg * ox / 2
        Cu = self.C * sp.Matrix(U)
        phi = tuple(-S * w[i] - self.lam * t * m * U[i] + Cu[i] + self.B[i] for i in range(2))
        return Generator(eta, tuple(xi), phi, self.name or "template")

    def combine(self, other: "GeneratorTemplate", c=1) -> "GeneratorTemplate":
        """``self + c * other``; exponential-Galilei parts must share gamma."""
        c = sp.sympify(c)
        if self.m != other.m or self.A != other.A:
            raise ValueError("templates belong to different systems")
        zero_ = lambda seq: all(sp.sympify(e) == 0 for e in seq)
        if not zero_(self.omega) and not zero_(other.omega) and \
                sp.simplify(self.gamma - other.gamma) != 0:
            raise ValueError("cannot combine exponential boosts with different gamma")
        gamma = self.gamma if not zero_(self.omega) else other.gamma
        add = lambda p, q: tuple(a + c * b for a, b in zip(p, q))
        return GeneratorTemplate(
            self.m, self.A, lam=self.lam + c * other.lam, sigma=add(self.sigma, other.sigma),
            omega=add(self.omega, other.omega), gamma=gamma,
            mu_D=self.mu_D + c * other.mu_D, C=self.C + c * other.C,
            B=add(self.B, other.B), Psi=self.Psi + c * other.Psi,
            nu_t=self.nu_t + c * other.nu_t, rho=add(self.rho, other.rho))

    def scale(self, c) -> "GeneratorTemplate":
        return GeneratorTemplate(self.m, self.A).combine(self, c)

    def subs(self, values: Mapping) -> "GeneratorTemplate":
        vals = {param(k) if isinstance(k, str) else k: sp.sympify(val) for k, val in values.items()}
        r = lambda e: sp.sympify(e).xreplace(vals)
        return GeneratorTemplate(
            self.m, DiffusionMatrix(r(self.A.a)), lam=r(self.lam),
            sigma=tuple(map(r, self.sigma)), omega=tuple(map(r, self.omega)),
            gamma=r(self.gamma), mu_D=r(self.mu_D), C=self.C.xreplace(vals),
            B=tuple(map(r, self.B)), Psi=self.Psi.xreplace(vals), nu_t=r(self.nu_t),
            rho=tuple(map(r, self.rho)), name=self.name)

    def main_only(self) -> bool:
        zero_ = lambda e: sp.sympify(e) == 0
        return zero_(self.lam) and all(map(zero_, self.sigma)) and all(map(zero_, self.omega))


# --------------------------------------------------------------------------
# prolongation and the invariance oracle
# --------------------------------------------------------------------------

def characteristic(X: Generator) -> tuple[sp.Expr, sp.Expr]:
    """Evolutionary characteristic ``Q_b = phi_b - eta u_{b,t} - xi.u_{b,x}``."""
    x = xs(X.m)
    out = []
    for b in (1, 2):
        q = X.phi[b - 1] - X.eta * jet(b, ("t",))
        q -= sum(c * jet(b, (xx.name,)) for c, xx in zip(X.xi, x))
        out.append(q)
    return tuple(out)


def prolong2(X: Generator, sys: RDSystem | None = None) -> dict[sp.Symbol, sp.Expr]:
    """Coefficients of the second prolongation, keyed by jet coordinate.

    ``phi^J = D_J Q + eta u_{J,t} + xi.u_{J,x}`` for every first- and
    second-order multi-index ``J`` that involves at most one ``t``.
    """
    m = X.m
    if sys is not None and sys.m != m:
        raise ValueError("generator and system dimensions differ")
    x = xs(m)
    Q = characteristic(X)
    names = ["t"] + [xx.name for xx in x]
    idxs = [(n,) for n in names]
    idxs += [(names[i], names[j]) for i in range(len(names)) for j in range(i, len(names))
             if not (i == 0 and j == 0)]
    var = {"t": t, **{xx.name: xx for xx in x}}
    out = {}
    for b in (1, 2):
        cache = {(): Q[b - 1]}
        for idx in idxs:
            prev = cache.get(idx[:-1])
            d = total_derivative(prev, var[idx[-1]], None)
            cache[idx] = d
            coeff = d + X.eta * jet(b, idx + ("t",))
            coeff += sum(c * jet(b, idx + (xx.name,)) for c, xx in zip(X.xi, x))
            out[jet(b, idx)] = coeff
    return out


def _leftover_check(res: sp.Expr, eta_free_of_x: bool) -> None:
    """Jets of order >= 3 must cancel for generators with eta = eta(t)."""
    if not eta_free_of_x:
        return
    for s in jets_in(res):
        if jet_order(s) >= 3:
            c = sp.expand(sp.diff(res, s))
            if c != 0 and not is_zero(c, 8, rng=0):
                raise JetOrderError(f"third-order jet {s} failed to cancel")


def invariance_residual(sys: RDSystem, X: Generator, check: bool = True) -> tuple[sp.Expr, sp.Expr]:
    """``pr X`` applied to the residual, restricted to the solution manifold."""
    if X.m != sys.m:
        raise ValueError("generator and system dimensions differ")
    pr = prolong2(X, sys)
    A = sys.A.matrix
    M = sys.manifold()
    out = []
    for b in (1, 2):
        e = pr[jet(b, ("t",))]
        for c in (1, 2):
            if A[b - 1, c - 1] != 0:
                e -= A[b - 1, c - 1] * sum(pr[jet(c, (xx.name, xx.name))] for xx in xs(sys.m))
            df = sp.diff(sys.f[b - 1], U[c - 1])
            if df != 0:
                e -= df * X.phi[c - 1]
        out.append(M.reduce(e))
    if check:
        free = all(sp.diff(X.eta, xx) == 0 for xx in xs(sys.m))
        for e in out:
            _leftover_check(e, free)
    return tuple(out)


def is_symmetry(sys: RDSystem, X: Generator, seeds: int = 20, rng=None,
                fixed: Mapping | None = None, hooks: Mapping | None = None,
                prove_limit: int = 400) -> Verdict:
    res = invariance_residual(sys, X)
    return combine([is_zero(e, seeds, rng=rng, fixed=fixed, hooks=hooks, prove_limit=prove_limit)
                    for e in res])


def combine(verdicts: Sequence[Verdict]) -> Verdict:
    """Worst-case merge of component verdicts."""
    for vd in verdicts:
        if vd.kind is ZeroKind.NONZERO:
            return vd
    if all(vd.kind is ZeroKind.PROVEN for vd in verdicts):
        return Verdict(ZeroKind.PROVEN)
    return Verdict(ZeroKind.NUMERIC, max_abs=max(vd.max_abs for vd in verdicts))


# --------------------------------------------------------------------------
# reduced equations
# --------------------------------------------------------------------------

def structure_equations(X: Generator, A: DiffusionMatrix) -> dict[str, list[sp.Expr]]:
    """The f-independent determining equations, as lists of expressions
    that vanish for an admissible generator (``N`` is the linear part of
    ``pi``)."""
    m = X.m
    x = xs(m)
    Am = A.matrix
    N = X.N
    eta_t = sp.diff(X.eta, t)
    comm = Am * N - N * Am
    second = []
    for nu in range(m):
        for mu in range(nu, m):
            lhs = Am * (sp.diff(X.xi[nu], x[mu]) + sp.diff(X.xi[mu], x[nu]))
            rhs = (eta_t * Am - comm) if mu == nu else sp.zeros(2, 2)
            second += list(lhs - rhs)
    eta_xt = [sp.diff(X.eta, xx, t) for xx in x] + [sp.diff(X.eta, xx) for xx in x]
    first = []
    for nu in range(m):
        lap = sum(sp.diff(X.xi[nu], xx, 2) for xx in x)
        vec = sp.diff(X.xi[nu], t) * sp.eye(2) - 2 * Am * sp.diff(N, x[nu]) - Am * lap
        first += list(vec)
    return {"second_order": second, "eta_xt": eta_xt, "first_order": first}


def check_structure(X: Generator, A: DiffusionMatrix, seeds: int = 20, rng=None,
                    fixed: Mapping | None = None) -> dict[str, Verdict]:
    out = {}
    for key, eqs in structure_equations(X, A).items():
        out[key] = combine([is_zero(e, seeds, rng=rng, fixed=fixed) for e in eqs] or
                           [Verdict(ZeroKind.PROVEN)])
    return out


def classifying_residual(sys: RDSystem, T: GeneratorTemplate) -> tuple[sp.Expr, sp.Expr]:
    """Left minus right side of the classifying equations for a template.

    With ``S = lam x^2/2 + sigma.x/2 + gamma e^{gamma t} omega.x/2``:
    ``-(lam t (m+4) + mu_D) f - S A^{-1} f + C f + C_t u
    - gamma^2 e^{gamma t} (omega.x)/2 A^{-1} u + B_t - A Laplace(B)
    = f_U (C u + B - lam m t u - S A^{-1} u)``.
    """
    m = sys.m
    if T.m != m:
        raise ValueError("template and system dimensions differ")
    x = xs(m)
    Ai = sys.A.inverse()
    Am = sys.A.matrix
    f = sp.Matrix(sys.f)
    Uv = sp.Matrix(U)
    eg = sp.exp(T.gamma * t)
    ox = sum(o * xx for o, xx in zip(T.omega, x))
    sx = sum(s * xx for s, xx in zip(T.sigma, x))
    r2 = sum(xx ** 2 for xx in x)
    S = T.lam * r2 / 2 + sx / 2 + T.gamma * eg * ox / 2
    Bm = sp.Matrix(T.B)
    lapB = Bm.applyfunc(lambda e: sum(sp.diff(e, xx, 2) for xx in x))
    lhs = (-(T.lam * t * (m + 4) + T.mu_D) * f - S * (Ai * f) + T.C * f
           + T.C.diff(t) * Uv - T.gamma ** 2 * eg * ox / 2 * (Ai * Uv)
           + Bm.diff(t) - Am * lapB)
    flow = T.C * Uv + Bm - T.lam * m * t * Uv - S * (Ai * Uv)
    J = sys.jacobian()
    rhs = J * flow
    return tuple(lhs[i] - rhs[i] for i in range(2))


def main_classifying_residual(sys: RDSystem, mu_D, C, B) -> tuple[sp.Expr, sp.Expr]:
    """``(C - mu_D) f + C_t u + B_t - A Laplace(B) - f_U (C u + B)``."""
    T = GeneratorTemplate(sys.m, sys.A, mu_D=mu_D, C=C, B=B)
    return classifying_residual(sys, T)


def check_classifying(sys: RDSystem, T: GeneratorTemplate, seeds: int = 20, rng=None,
                      fixed: Mapping | None = None, hooks: Mapping | None = None,
                      prove_limit: int = 400) -> Verdict:
    """Classifying equations plus the structural part (rotation block
    antisymmetry) of the template."""
    res = classifying_residual(sys, T)
    parts = [is_zero(e, seeds, rng=rng, fixed=fixed, hooks=hooks, prove_limit=prove_limit)
             for e in res]
    rot = T.Psi + T.Psi.T
    parts += [is_zero(e, seeds, rng=rng, fixed=fixed, prove_limit=prove_limit) for e in rot]
    return combine(parts)


# --------------------------------------------------------------------------
# extension conditions
# --------------------------------------------------------------------------

def galilei_residual(sys: RDSystem) -> tuple[sp.Expr, sp.Expr]:
    Ai = sys.A.inverse()
    f = sp.Matrix(sys.f)
    w = Ai * sp.Matrix(U)
    r = Ai * f - sys.jacobian() * w
    return r[0], r[1]


def conformal_residual(sys: RDSystem) -> tuple[sp.Expr, sp.Expr]:
    m = sys.m
    return tuple((m + 4) * fa - m * (u * sp.diff(fa, u) + v * sp.diff(fa, v)) for fa in sys.f)


def exp_galilei_gamma(sys: RDSystem) -> sp.Expr | None:
    """The candidate ``gamma`` solving the exponential-Galilei condition, or
    ``None`` when no constant works."""
    g0 = galilei_residual(sys)
    w = sys.A.inverse() * sp.Matrix(U)
    # residual(gamma) = g0 + gamma * w
    return -g0[0] / w[0]


@dataclass
class ExtensionFlags:
    galilei: bool
    exp_galilei: bool
    gamma: sp.Expr | None
    conformal: bool

    def to_json(self) -> dict:
        from .expr import render
        return {"galilei": self.galilei, "exp_galilei": self.exp_galilei,
                "gamma": None if self.gamma is None else render(self.gamma),
                "conformal": self.conformal}


def extension_conditions(sys: RDSystem, seeds: int = 20, rng=None,
                         fixed: Mapping | None = None, hooks: Mapping | None = None) -> ExtensionFlags:
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    kw = dict(rng=rng, fixed=fixed, hooks=hooks)
    gal = combine([is_zero(e, seeds, **kw) for e in galilei_residual(sys)])
    gamma = sp.simplify(exp_galilei_gamma(sys))
    exp_ok = False
    if not gal:
        const = combine([is_zero(sp.diff(gamma, w_), seeds, **kw) for w_ in U])
        if const:
            w = sys.A.inverse() * sp.Matrix(U)
            g0 = galilei_residual(sys)
            res = combine([is_zero(g0[i] + gamma * w[i], seeds, **kw) for i in range(2)])
            exp_ok = bool(res)
        if exp_ok:
            gamma = _constant_value(gamma, fixed)
        else:
            gamma = None
    else:
        gamma = None
    conf = bool(gal) and bool(combine([is_zero(e, seeds, **kw) for e in conformal_residual(sys)]))
    return ExtensionFlags(bool(gal), exp_ok, gamma, conf)


def _constant_value(e: sp.Expr, fixed: Mapping | None) -> sp.Expr:
    """Evaluate a u,v-independent expression at u = v = 1."""
    e = explicit_polar(e.xreplace({u: 1, v: 1}))
    if fixed:
        e = e.xreplace({k: sp.nsimplify(val) for k, val in fixed.items() if not is_jet(k)})
    return sp.nsimplify(sp.simplify(e))


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

def report_record(entry_id: str, generator_id: str, verdict: Verdict, m: int,
                  sample: Mapping | None = None, check: str = "oracle") -> dict:
    rec = {"entry": entry_id, "generator": generator_id, "check": check, "m": m,
           "verdict": verdict.kind.value}
    if verdict.witness is not None:
        rec["witness"] = verdict.witness
        rec["value"] = verdict.value
    if sample:
        rec["sample"] = {str(k): _num(val) for k, val in sorted(sample.items(), key=lambda kv: str(kv[0]))}
    return rec


def _num(val):
    try:
        f = float(val)
    except TypeError:
        return str(val)
    return f


def dump_jsonl(records: Iterable[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
