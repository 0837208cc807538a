"""Symbolic expressions on the jet space of a two-component field (u, v).

Expressions are plain :mod:`sympy` trees built from a fixed vocabulary:

* independent variables ``t, x1, x2, x3``;
* jet variables ``u, v, u_t, u_x1, u_x1x2, ...`` (see :func:`jet`);
* named parameters (``a, lambda, mu, ...``);
* polar atoms ``R(u, v)`` and ``z(u, v)`` with built-in derivatives;
* opaque functions ``F1, F2`` with formal derivative nodes ``F1_d1, ...``;
* the constrained opaque ``Psi(k, x1..xm)`` obeying ``Laplace(Psi) = k*Psi``.

The textual grammar understood by :func:`parse` and produced by
:func:`render` is the one used by the catalog and the CLI.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping

import mpmath
import numpy as np
import sympy as sp
from sympy.core.function import ArgumentIndexError
from sympy.printing.str import StrPrinter

Expr = sp.Expr

__all__ = [
    "Expr", "t", "X", "u", "v", "jet", "jet_info", "is_jet", "jets_in",
    "jet_order", "laplacian", "opaque", "Opaque", "Psi", "R", "z", "PARAMETERS",
    "param", "ParseError", "UnknownSymbolError", "JetOrderError", "parse",
    "render", "total_derivative", "simplify", "substitute", "is_zero",
    "Verdict", "ZeroKind", "Evaluator", "xs", "psi", "explicit_polar",
]

t = sp.Symbol("t", real=True)
X = tuple(sp.Symbol(f"x{i}", real=True) for i in (1, 2, 3))


def xs(m: int) -> tuple[sp.Symbol, ...]:
    if not 1 <= m <= 3:
        raise ValueError(f"spatial dimension must be 1..3, got {m}")
    return X[:m]


# --------------------------------------------------------------------------
# jet variables
# --------------------------------------------------------------------------

class JetOrderError(ValueError):
    """Raised when a derivative beyond the allowed jet order is requested."""


_BASE = {1: "u", 2: "v"}
_VAR_ORDER = {"t": 0, "x1": 1, "x2": 2, "x3": 3}
_JET_BY_KEY: dict[tuple[int, tuple[str, ...]], sp.Symbol] = {}
_JET_INFO: dict[sp.Symbol, tuple[int, tuple[str, ...]]] = {}
_JET_NAME = re.compile(r"^([uv])(?:_((?:t|x[1-3])+))?$")


def jet(b: int, idx: Iterable[str | sp.Symbol] = ()) -> sp.Symbol:
    """Jet coordinate ``u_{b, idx}``; the multi-index is order-insensitive."""
    names = tuple(sorted((str(i) for i in idx), key=_VAR_ORDER.__getitem__))
    key = (b, names)
    sym = _JET_BY_KEY.get(key)
    if sym is None:
        name = _BASE[b] + ("_" + "".join(names) if names else "")
        sym = sp.Symbol(name, real=True)
        _JET_BY_KEY[key] = sym
        _JET_INFO[sym] = key
    return sym


def jet_info(s: sp.Symbol) -> tuple[int, tuple[str, ...]]:
    return _JET_INFO[s]


def is_jet(s) -> bool:
    return s in _JET_INFO


def jet_order(s: sp.Symbol) -> int:
    return len(_JET_INFO[s][1])


def jets_in(e: sp.Basic) -> set[sp.Symbol]:
    return {s for s in e.free_symbols if s in _JET_INFO}


def _jet_from_name(name: str) -> sp.Symbol | None:
    match = _JET_NAME.match(name)
    if not match:
        return None
    idx = re.findall(r"t|x[1-3]", match.group(2) or "")
    return jet(1 if match.group(1) == "u" else 2, idx)


u = jet(1)
v = jet(2)


def explicit_polar(e: sp.Expr) -> sp.Expr:
    """Replace the polar atoms by their closed forms."""
    return sp.sympify(e).replace(R, lambda a, b: sp.sqrt(a ** 2 + b ** 2)).replace(
        z, lambda a, b: sp.atan2(b, a))


def laplacian(b: int, m: int) -> sp.Expr:
    return sp.Add(*[jet(b, (x, x)) for x in xs(m)])


# --------------------------------------------------------------------------
# atoms with built-in calculus
# --------------------------------------------------------------------------

class _Polar(sp.Function):
    nargs = 2

    def _eval_is_real(self):
        return True


class R(_Polar):
    """Modulus (u^2 + v^2)^(1/2)."""

    def _eval_is_positive(self):
        return True

    def fdiff(self, argindex=1):
        if argindex not in (1, 2):
            raise ArgumentIndexError(self, argindex)
        return self.args[argindex - 1] / self


class z(_Polar):
    """Phase arctan(v/u)."""

    def fdiff(self, argindex=1):
        a, b = self.args
        if argindex == 1:
            return -b / R(a, b) ** 2
        if argindex == 2:
            return a / R(a, b) ** 2
        raise ArgumentIndexError(self, argindex)


class Opaque(sp.Function):
    """An arbitrary function of one argument; derivatives are new nodes."""

    nargs = 1
    base: str = ""
    order: int = 0

    def _eval_is_real(self):
        return True

    def fdiff(self, argindex=1):
        if argindex != 1:
            raise ArgumentIndexError(self, argindex)
        return opaque(self.base, self.order + 1)(self.args[0])


_OPAQUE: dict[tuple[str, int], type] = {}
OPAQUE_NAMES = ("F1", "F2")
_OPAQUE_NAME = re.compile(r"^(F[12])(?:_d(\d+))?$")


def opaque(name: str, order: int = 0) -> type:
    key = (name, order)
    cls = _OPAQUE.get(key)
    if cls is None:
        cls_name = name if order == 0 else f"{name}_d{order}"
        cls = type(cls_name, (Opaque,), {"base": name, "order": order})
        _OPAQUE[key] = cls
    return cls


class Psi(sp.Function):
    """Solution of Laplace(Psi) = k*Psi; args are (k, x1, ..., xm)."""

    def _eval_is_real(self):
        return True

    def fdiff(self, argindex=1):
        if argindex == 1:
            raise ArgumentIndexError(self, argindex)
        return sp.Derivative(self, self.args[argindex - 1])


def psi(eig, m: int) -> sp.Expr:
    return Psi(sp.sympify(eig), *xs(m))


def _psi_rule(e: sp.Expr) -> sp.Expr:
    """Eliminate the last spatial variable's second derivative of Psi."""

    def rewrite(d):
        fn = d.expr
        if not isinstance(fn, Psi):
            return d
        eig, *space = fn.args
        last = space[-1]
        counts = dict(d.variable_count)
        if counts.get(last, 0) < 2:
            return d
        counts[last] -= 2
        rest = [(var, c) for var, c in counts.items() if c]
        base = eig * fn - sp.Add(*[sp.Derivative(fn, (x, 2)) for x in space[:-1]])
        return sp.diff(base, *rest) if rest else base

    prev = None
    while prev != e:
        prev = e
        e = e.replace(lambda n: isinstance(n, sp.Derivative), rewrite)
    return e


# --------------------------------------------------------------------------
# symbols
# --------------------------------------------------------------------------

PARAMETERS = (
    "a", "lambda", "mu", "nu", "sigma", "kappa", "beta", "epsilon", "gamma",
    "omega", "alpha", "m", "omega0", "delta", "rho", "c", "theta", "p", "q",
    "k", "s",
)


@lru_cache(maxsize=None)
def param(name: str) -> sp.Symbol:
    return sp.Symbol(name, real=True)


class ParseError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int = 0):
        super().__init__(f"{message} at position {pos}: {text!r}")
        self.pos = pos
        self.text = text


class UnknownSymbolError(ParseError):
    def __init__(self, name: str, text: str = "", pos: int = 0):
        super().__init__(f"unknown symbol {name!r}", text, pos)
        self.name = name


_FUNCS: dict[str, Callable] = {
    "exp": sp.exp, "ln": sp.log, "sin": sp.sin, "cos": sp.cos,
    "arctan": sp.atan,
}
_TOKEN = re.compile(r"\s*(?:(\d+)|([a-zA-Z][a-zA-Z0-9_]*)|(.))")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match.end() == pos or (match.group(0).strip() == "" and match.end() >= len(text)):
            break
        start = match.start(match.lastindex) if match.lastindex else match.end()
        if match.group(1):
            tokens.append(("num", match.group(1), start))
        elif match.group(2):
            tokens.append(("id", match.group(2), start))
        elif match.group(3):
            ch = match.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", text, start)
            tokens.append(("op", ch, start))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, m, symbols):
        self.text = text
        self.m = m
        self.symbols = symbols
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None, value=None):
        tok = self.tokens[self.i]
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind
            raise ParseError(f"expected {want!r}, found {tok[1] or 'end of input'!r}",
                             self.text, tok[2])
        self.i += 1
        return tok

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", self.text, tok[2])
        return e

    def expr(self):
        e = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def unary(self):
        tok = self.peek()
        if tok[:2] == ("op", "-"):
            self.take()
            return -self.unary()
        if tok[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return base ** self.unary()
        return base

    def atom(self):
        kind, value, pos = self.peek()
        if kind == "num":
            self.take()
            return sp.Integer(int(value))
        if kind == "op" and value == "(":
            self.take()
            e = self.expr()
            self.take("op", ")")
            return e
        if kind == "id":
            self.take()
            if self.peek()[:2] == ("op", "("):
                self.take()
                arg = self.expr()
                self.take("op", ")")
                return self.apply(value, arg, pos)
            return self.name(value, pos)
        raise ParseError(f"unexpected {value or 'end of input'!r}", self.text, pos)

    def apply(self, name, arg, pos):
        if name in _FUNCS:
            return _FUNCS[name](arg)
        match = _OPAQUE_NAME.match(name)
        if match:
            return opaque(match.group(1), int(match.group(2) or 0))(arg)
        if name == "Psi":
            if self.m is None:
                raise ParseError("Psi needs a spatial dimension", self.text, pos)
            return psi(arg, self.m)
        raise UnknownSymbolError(name, self.text, pos)

    def name(self, name, pos):
        if name in self.symbols:
            return self.symbols[name]
        if name == "t":
            return t
        if re.fullmatch(r"x[1-3]", name):
            return X[int(name[1]) - 1]
        if name == "R":
            return R(u, v)
        if name == "z":
            return z(u, v)
        j = _jet_from_name(name)
        if j is not None:
            return j
        if name in PARAMETERS:
            return param(name)
        raise UnknownSymbolError(name, self.text, pos)


def parse(text: str, m: int | None = None,
          symbols: Mapping[str, sp.Expr] | None = None) -> sp.Expr:
    """Parse an expression string.

    ``m`` is only needed for ``Psi(k)``, which expands to a function of
    ``x1..xm``. ``symbols`` adds extra names (checked before the reserved
    vocabulary).
    """
    return _Parser(text, m, dict(symbols or {})).parse()


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

class _Printer(StrPrinter):
    def _print_Pow(self, expr, rational=False):
        base, exp = expr.args
        if exp == -1:
            return "1/" + self.parenthesize(base, 1000)
        b = self._wrap(base)
        if exp.is_Integer and exp > 0:
            e = self._print(exp)
        else:
            e = "(" + self._print(exp) + ")"
        return f"{b}^{e}"

    def _wrap(self, e):
        if e.is_Symbol or (e.is_Integer and e >= 0) or isinstance(e, (sp.Function, sp.Derivative)):
            return self._print(e)
        return "(" + self._print(e) + ")"

    def _print_Rational(self, expr):
        return f"{expr.p}/{expr.q}"

    def _print_Exp1(self, expr):
        return "exp(1)"

    def _print_exp(self, expr):
        return f"exp({self._print(expr.args[0])})"

    def _print_log(self, expr):
        return f"ln({self._print(expr.args[0])})"

    def _print_atan(self, expr):
        return f"arctan({self._print(expr.args[0])})"

    def _print_R(self, expr):
        a, b = expr.args
        if (a, b) == (u, v):
            return "R"
        return f"(({self._print(a)})^2 + ({self._print(b)})^2)^(1/2)"

    def _print_z(self, expr):
        a, b = expr.args
        if (a, b) == (u, v):
            return "z"
        return f"arctan(({self._print(b)})/({self._print(a)}))"

    def _print_Psi(self, expr):
        return f"Psi({self._print(expr.args[0])})"

    def _print_Derivative(self, expr):
        raise ValueError("derivative nodes of Psi have no textual form")


def render(e: sp.Expr) -> str:
    """Print ``e`` in the parser's grammar."""
    return _Printer({"order": None}).doprint(e)


# --------------------------------------------------------------------------
# calculus and rewriting
# --------------------------------------------------------------------------

def total_derivative(e: sp.Expr, var: sp.Symbol, max_order: int | None = 2) -> sp.Expr:
    """Total derivative of ``e`` along ``t`` or ``x_nu``.

    ``max_order`` bounds the jet order of the result; ``None`` disables the
    bound (used internally by the prolongation pipeline).
    """
    e = sp.sympify(e)
    if var != t and var not in X:
        raise ValueError(f"{var} is not an independent variable")
    out = sp.diff(e, var)
    for s in jets_in(e):
        b, idx = _JET_INFO[s]
        if max_order is not None and len(idx) + 1 > max_order:
            raise JetOrderError(f"D_{var} {s.name} exceeds jet order {max_order}")
        out += jet(b, idx + (var.name,)) * sp.diff(e, s)
    return out


def _pythagorean(e):
    if not e.has(sp.sin):
        return e
    e = sp.expand(e)
    return e.replace(
        lambda n: n.is_Pow and isinstance(n.base, sp.sin) and n.exp.is_Integer and n.exp >= 2,
        lambda n: (1 - sp.cos(n.base.args[0]) ** 2) * sp.sin(n.base.args[0]) ** (n.exp - 2),
    )


def simplify(e: sp.Expr) -> sp.Expr:
    """Rewrite to a fixed point, then put in canonical rational form."""
    e = sp.sympify(e)
    for _ in range(10):
        prev = e
        e = _psi_rule(e)
        e = _pythagorean(e)
        e = sp.powsimp(e, combine="exp")
        e = sp.cancel(sp.expand(e))
        if e == prev:
            break
    return e


def substitute(e: sp.Expr, bindings: Mapping, max_order: int | None = 2) -> sp.Expr:
    """Simultaneous substitution.

    Keys are symbols (variables, jets, parameters) or opaque names such as
    ``"F1"``; an opaque binding is a one-argument callable or
    :class:`sympy.Lambda` and instantiates every formal derivative.
    """
    e = sp.sympify(e)
    plain = {}
    funcs = {}
    for key, value in bindings.items():
        if isinstance(key, str):
            if key in OPAQUE_NAMES:
                funcs[key] = _as_lambda(value)
                continue
            key = _jet_from_name(key) or parse(key)
        value = sp.sympify(value)
        if max_order is not None:
            for s in jets_in(value):
                if jet_order(s) > max_order:
                    raise JetOrderError(f"binding introduces {s.name}")
        plain[key] = value
    if funcs:
        def inst(node):
            lam = funcs.get(node.base)
            if lam is None:
                return node
            w = lam.variables[0]
            return sp.diff(lam.expr, w, node.order).subs(w, node.args[0])

        e = e.replace(lambda n: isinstance(n, Opaque), inst)
    if plain:
        e = e.xreplace(plain) if all(k.is_Symbol for k in plain) else e.subs(plain, simultaneous=True)
    return e


def _as_lambda(value) -> sp.Lambda:
    if isinstance(value, sp.Lambda):
        return value
    w = sp.Dummy("w")
    if isinstance(value, str):
        return sp.Lambda(w, parse(value, symbols={"w": w}))
    return sp.Lambda(w, sp.sympify(value(w)))


# --------------------------------------------------------------------------
# numeric evaluation
# --------------------------------------------------------------------------

_NUMPY_IMPL = {
    "R": lambda a, b: np.sqrt(a * a + b * b),
    "z": lambda a, b: np.arctan2(b, a),
}
_MP_IMPL = {
    "R": lambda a, b: mpmath.sqrt(a * a + b * b),
    "z": lambda a, b: mpmath.atan2(b, a),
}


def _sample_param(rng: np.random.Generator, size: int) -> np.ndarray:
    q = rng.integers(1, 7, size=size)
    p = rng.integers(-3 * q, 3 * q + 1)
    out = p / q
    out[out == 0] = 1.0 / 7.0
    return out


def sample_values(sym: sp.Symbol, rng: np.random.Generator, size: int) -> np.ndarray:
    """Random admissible values for one symbol (see module docs)."""
    if sym in (u, v):
        return rng.uniform(0.1, 2.0, size)
    if sym in _JET_INFO:
        return rng.uniform(-1.0, 1.0, size)
    if sym == t:
        return rng.uniform(0.05, 1.0, size)
    if sym in X:
        return rng.uniform(-1.0, 1.0, size)
    return _sample_param(rng, size)


class ZeroKind(Enum):
    PROVEN = "ProvenZero"
    NUMERIC = "NumericallyZero"
    NONZERO = "NonZero"


@dataclass
class Verdict:
    kind: ZeroKind
    witness: dict[str, float] | None = None
    value: float | None = None
    max_abs: float = 0.0

    def __bool__(self) -> bool:
        return self.kind is not ZeroKind.NONZERO

    def to_json(self) -> dict:
        out = {"verdict": self.kind.value, "max_abs": self.max_abs}
        if self.witness is not None:
            out["witness"] = self.witness
            out["value"] = self.value
        return out


def _collect_atoms(exprs):
    atoms = set()
    for e in exprs:
        atoms |= e.atoms(Opaque)
        atoms |= {d for d in e.atoms(sp.Derivative) if isinstance(d.expr, Psi)}
        atoms |= e.atoms(Psi)
    return atoms


@dataclass
class _Atom:
    dummy: sp.Dummy
    node: sp.Expr
    base: str
    order: int


class Evaluator:
    """Compile a list of expressions for repeated vectorised evaluation.

    Opaque atoms (``F1(...)``, ``Psi`` and its derivatives) become extra
    inputs: either produced by an instantiation hook (a ``sympy.Lambda`` per
    opaque name, bound at evaluation time) or drawn at random, which is sound
    because values and derivatives of an arbitrary function at a point are
    independent.
    """

    def __init__(self, exprs, hooks: Mapping | None = None):
        exprs = [_psi_rule(sp.sympify(e)) for e in exprs]
        self.hooks = {k: _as_lambda(h) for k, h in (hooks or {}).items()}
        self.atoms: list[_Atom] = []
        repl = {}
        for node in sorted(_collect_atoms(exprs), key=sp.default_sort_key):
            if isinstance(node, Opaque):
                base, order = node.base, node.order
            else:
                base, order = "Psi", 0
            d = sp.Dummy(f"atom{len(self.atoms)}")
            self.atoms.append(_Atom(d, node, base, order))
            repl[node] = d
        # simultaneous and top-down, so derivative nodes go before their Psi heads
        body = [e.xreplace(repl) for e in exprs]
        self.exprs = body
        syms = set()
        for e in body:
            syms |= e.free_symbols
        for a in self.atoms:
            if isinstance(a.node, Opaque):
                syms |= a.node.args[0].free_symbols
        syms -= {a.dummy for a in self.atoms}
        self.symbols = sorted(syms, key=lambda s: s.name)
        args = self.symbols + [a.dummy for a in self.atoms]
        self._f = sp.lambdify(args, body, modules=[_NUMPY_IMPL, "numpy"])
        self._args = args
        self._mp = None
        self._argf = {}
        self._hook_cache = {}

    def _hook(self, a: _Atom, lam: sp.Lambda, mp: bool = False):
        key = (a.dummy, lam, mp)
        if key not in self._hook_cache:
            w = lam.variables[0]
            deriv = sp.diff(lam.expr, w, a.order)
            mods = [_MP_IMPL, "mpmath"] if mp else [_NUMPY_IMPL, "numpy"]
            self._hook_cache[key] = (
                sp.lambdify(self.symbols, a.node.args[0], modules=mods),
                sp.lambdify(w, deriv, modules=mods[1]),
            )
        return self._hook_cache[key]

    def _hooks(self, hooks):
        if hooks is None:
            return self.hooks
        return {**self.hooks, **{k: _as_lambda(h) for k, h in hooks.items()}}

    def sample(self, rng: np.random.Generator, size: int,
               fixed: Mapping | None = None, hooks: Mapping | None = None) -> dict:
        fixed = fixed or {}
        hooks = self._hooks(hooks)
        vals = {}
        for s in self.symbols:
            if s in fixed:
                vals[s] = np.broadcast_to(np.asarray(fixed[s], dtype=float), (size,)).copy()
            else:
                vals[s] = sample_values(s, rng, size)
        for a in self.atoms:
            lam = hooks.get(a.base)
            if lam is not None:
                argf, hf = self._hook(a, lam)
                with np.errstate(all="ignore"):
                    w = np.broadcast_to(argf(*[vals[s] for s in self.symbols]), (size,))
                    vals[a.dummy] = np.broadcast_to(hf(w), (size,)).astype(float)
            else:
                vals[a.dummy] = rng.uniform(-1.0, 1.0, size)
        return vals

    def __call__(self, vals: Mapping, size: int | None = None) -> list[np.ndarray]:
        with np.errstate(all="ignore"):
            out = self._f(*[vals[s] for s in self._args])
        n = size if size is not None else (len(next(iter(vals.values()))) if vals else 1)
        return [np.broadcast_to(np.asarray(o, dtype=float), (n,)) for o in out]

    def mp_eval(self, point: Mapping, dps: int = 50, hooks: Mapping | None = None) -> list:
        """High-precision re-evaluation of a single sample point."""
        hooks = self._hooks(hooks)
        if self._mp is None:
            self._mp = sp.lambdify(self._args, self.exprs, modules=[_MP_IMPL, "mpmath"])
        with mpmath.workdps(dps):
            base = [mpmath.mpf(repr(float(point[s]))) for s in self.symbols]
            args = list(base)
            for a in self.atoms:
                lam = hooks.get(a.base)
                if lam is not None:
                    argf, hf = self._hook(a, lam, mp=True)
                    args.append(mpmath.mpf(hf(argf(*base))))
                else:
                    args.append(mpmath.mpf(repr(float(point[a.dummy]))))
            return [mpmath.mpf(o) for o in self._mp(*args)]

    def verdicts(self, rng: np.random.Generator, seeds: int = 20,
                 fixed: Mapping | None = None, tol: float = 1e-10,
                 retries: int = 8, hooks: Mapping | None = None) -> list[Verdict]:
        """Numeric zero test of every compiled expression on shared points."""
        vals = None
        outs = None
        have = 0
        for _ in range(retries):
            batch = self.sample(rng, 2 * seeds, fixed, hooks)
            res = self(batch, 2 * seeds)
            ok = np.all([np.isfinite(r) for r in res], axis=0)
            for a in self.atoms:
                ok &= np.isfinite(batch[a.dummy])
            if vals is None:
                vals = {k: v[ok] for k, v in batch.items()}
                outs = [r[ok] for r in res]
            else:
                vals = {k: np.concatenate([vals[k], batch[k][ok]]) for k in batch}
                outs = [np.concatenate([o, r[ok]]) for o, r in zip(outs, res)]
            have = len(outs[0]) if outs else 0
            if have >= seeds:
                break
        if have < seeds:
            raise FloatingPointError(
                f"only {have} of {seeds} sample points were inside the evaluation domain")
        vals = {k: v[:seeds] for k, v in vals.items()}
        outs = [o[:seeds] for o in outs]
        verdicts = []
        for j, o in enumerate(outs):
            absval = np.abs(o)
            bad = np.nonzero(absval >= tol)[0]
            confirmed = None
            # float64 cancellation can leave large garbage, so every suspect
            # point is re-evaluated at high precision before it counts
            for i in bad:
                point = {k: vals[k][i] for k in vals}
                exact = abs(self.mp_eval(point, dps=60, hooks=hooks)[j])
                if exact < tol:
                    continue
                confirmed = i
                o = o.copy()
                o[i] = float(exact) if o[i] >= 0 else -float(exact)
                break
            if confirmed is None:
                verdicts.append(Verdict(ZeroKind.NUMERIC, max_abs=float(absval.max(initial=0.0))))
            else:
                i = confirmed
                witness = {_label(k): float(vals[k][i]) for k in self.symbols}
                verdicts.append(Verdict(ZeroKind.NONZERO, witness, float(o[i]),
                                        float(absval.max())))
        return verdicts


def _label(s) -> str:
    return s.name


def is_zero(e: sp.Expr, seeds: int = 20, *, rng: np.random.Generator | int | None = None,
            fixed: Mapping | None = None, hooks: Mapping | None = None,
            tol: float = 1e-10, prove_limit: int = 400) -> Verdict:
    """Decide whether ``e`` vanishes identically.

    ``ProvenZero`` when :func:`simplify` reduces it to 0 (attempted only for
    expressions below ``prove_limit`` operations), otherwise a numeric test
    at ``seeds`` random points.
    """
    e = sp.sympify(e)
    if hooks:
        e = substitute(e, {k: h for k, h in hooks.items() if k in OPAQUE_NAMES}, max_order=None)
        hooks = {k: h for k, h in hooks.items() if k not in OPAQUE_NAMES}
    if e == 0:
        return Verdict(ZeroKind.PROVEN)
    if sp.count_ops(e) <= prove_limit and simplify(e) == 0:
        return Verdict(ZeroKind.PROVEN)
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return Evaluator([e], hooks).verdicts(rng, seeds, fixed, tol)[0]


def as_fraction(value) -> Fraction:
    """Exact rational from a number-like (int, Fraction, sympy Rational, str)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    value = sp.nsimplify(value)
    if not value.is_Rational:
        raise ValueError(f"{value} is not rational")
    return Fraction(int(value.p), int(value.q))


def is_finite_number(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)
