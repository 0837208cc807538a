"""Lie-algebra tools: vector-field brackets, closure checks, and the
classification of symmetry tails ``(C u + B) . d_u`` as 3x3 matrices.

A type-I compatible tail is stored as ``(B, c)`` with ``B`` and ``c`` complex
numbers: ``B = B1 + i B2`` is the inhomogeneous part and ``c = c1 + i c2``
encodes ``C = ((c1, -c2), (c2, c1))``.  The matrix bracket is then
``[(B, c), (B', c')] = (c B' - c' B, 0)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
import sympy as sp

from .expr import Evaluator, Psi, is_zero, t, u, v, xs
from .model import DiffusionMatrix
from .symmetry import Generator, basic_symmetries, combine, tail

U = (u, v)


# --------------------------------------------------------------------------
# exact complex rationals
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QC:
    """Complex number with Fraction parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @classmethod
    def of(cls, x) -> "QC":
        if isinstance(x, QC):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(Fraction(x), Fraction(0))

    def __add__(self, o):
        o = QC.of(o)
        return QC(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QC(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-QC.of(o))

    def __rsub__(self, o):
        return QC.of(o) - self

    def __mul__(self, o):
        o = QC.of(o)
        return QC(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def inverse(self) -> "QC":
        d = self.re ** 2 + self.im ** 2
        if d == 0:
            raise ZeroDivisionError("complex zero")
        return QC(self.re / d, -self.im / d)

    def __truediv__(self, o):
        return self * QC.of(o).inverse()

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    @property
    def is_real(self) -> bool:
        return self.im == 0


# --------------------------------------------------------------------------
# tail matrices
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TailMatrix:
    """Matrix ``((0, 0, 0), (B1, C11, C12), (B2, C21, C22))`` acting on ``(1, u, v)``."""

    B: QC = QC()
    c: QC = QC()

    @classmethod
    def from_entries(cls, B1=0, B2=0, c1=0, c2=0) -> "TailMatrix":
        f = Fraction
        return cls(QC(f(B1), f(B2)), QC(f(c1), f(c2)))

    @classmethod
    def from_matrix(cls, M) -> "TailMatrix":
        M = sp.Matrix(M)
        if M.shape != (3, 3) or any(M[0, j] != 0 for j in range(3)):
            raise ValueError("first row of a tail matrix must vanish")
        if M[1, 1] != M[2, 2] or M[1, 2] != -M[2, 1]:
            raise ValueError("linear block does not commute with a type-I matrix")
        fr = lambda e: Fraction(int(sp.Rational(e).p), int(sp.Rational(e).q))
        return cls(QC(fr(M[1, 0]), fr(M[2, 0])), QC(fr(M[1, 1]), fr(M[2, 1])))

    def matrix(self) -> sp.Matrix:
        r = lambda q: sp.Rational(q.numerator, q.denominator)
        B, c = self.B, self.c
        return sp.Matrix([[0, 0, 0],
                          [r(B.re), r(c.re), -r(c.im)],
                          [r(B.im), r(c.im), r(c.re)]])

    def vector(self) -> tuple[Fraction, ...]:
        return (self.B.re, self.B.im, self.c.re, self.c.im)

    @classmethod
    def from_vector(cls, vec) -> "TailMatrix":
        return cls(QC(vec[0], vec[1]), QC(vec[2], vec[3]))

    def __add__(self, o):
        return TailMatrix(self.B + o.B, self.c + o.c)

    def __sub__(self, o):
        return TailMatrix(self.B - o.B, self.c - o.c)

    def scale(self, k) -> "TailMatrix":
        k = Fraction(k)
        return TailMatrix(self.B * k, self.c * k)

    def is_zero(self) -> bool:
        return not self.B and not self.c

    def bracket(self, o: "TailMatrix") -> "TailMatrix":
        """Matrix commutator ``self o - o self``."""
        return TailMatrix(self.c * o.B - o.c * self.B, QC())

    def operator(self, m: int, coeff=1) -> Generator:
        """The field ``coeff * (C u + B) . d_u``.

        ``g -> operator(g)`` reverses brackets; use :meth:`realization` for a
        homomorphism."""
        M = self.matrix()
        return tail(M[1:, 1:] * coeff, M[1:, 0] * coeff, m)

    def realization(self, m: int) -> Generator:
        """The field ``-(C u + B) . d_u``, i.e. ``pi = C u + B``; brackets of
        realizations follow the matrix brackets."""
        return self.operator(m, -1)


def g1() -> TailMatrix:
    return TailMatrix.from_entries(c1=1)


def g2() -> TailMatrix:
    return TailMatrix.from_entries(B1=1)


def g3(alpha=0) -> TailMatrix:
    return TailMatrix.from_entries(c1=alpha, c2=1)


def g4() -> TailMatrix:
    return TailMatrix.from_entries(B2=1)


@dataclass(frozen=True)
class ConjugatorU:
    """``((1, 0, 0), (b1, K1, K2), (b2, -K2, K1))``: ``B -> k B - c b`` with ``k = K1 - i K2``."""

    b: QC = QC()
    k: QC = QC(Fraction(1))

    def __post_init__(self):
        if not self.k:
            raise ValueError("K1^2 + K2^2 must be nonzero")

    def matrix(self) -> sp.Matrix:
        r = lambda q: sp.Rational(q.numerator, q.denominator)
        K1, K2 = r(self.k.re), -r(self.k.im)
        return sp.Matrix([[1, 0, 0], [r(self.b.re), K1, K2], [r(self.b.im), -K2, K1]])

    def conjugate(self, g: TailMatrix) -> TailMatrix:
        return TailMatrix(self.k * g.B - g.c * self.b, g.c)

    def to_json(self) -> dict:
        return {"b": [str(self.b.re), str(self.b.im)],
                "K": [str(self.k.re), str(-self.k.im)]}


def conjugate(U_: ConjugatorU, g: TailMatrix) -> TailMatrix:
    """``U g U^{-1}`` computed through explicit 3x3 matrices."""
    M = U_.matrix() * g.matrix() * U_.matrix().inv()
    return TailMatrix.from_matrix(M)


@dataclass(frozen=True)
class CanonicalTail:
    form: str
    alpha: Fraction | None
    U: ConjugatorU
    scale: Fraction

    def matrix(self) -> TailMatrix:
        return {"zero": TailMatrix(), "g1": g1(), "g2": g2()}.get(self.form) or g3(self.alpha)


def canonicalize_tail(g: TailMatrix) -> CanonicalTail:
    """Reduce ``g`` to ``zero``, ``g2``, ``g1`` or ``g3(alpha)`` (tested in
    that order) with ``U g U^{-1} = scale * form``."""
    if g.is_zero():
        return CanonicalTail("zero", None, ConjugatorU(), Fraction(1))
    if not g.c:
        return CanonicalTail("g2", None, ConjugatorU(QC(), g.B.inverse()), Fraction(1))
    b = g.B / g.c
    if g.c.is_real:
        return CanonicalTail("g1", None, ConjugatorU(b), g.c.re)
    return CanonicalTail("g3", g.c.re / g.c.im, ConjugatorU(b), g.c.im)


def verify_canonical(g: TailMatrix, res: CanonicalTail) -> bool:
    """Exact check of ``U g U^{-1} = scale * form`` with 3x3 matrices."""
    lhs = res.U.matrix() * g.matrix() * res.U.matrix().inv()
    r = sp.Rational(res.scale.numerator, res.scale.denominator)
    return sp.simplify(lhs - r * res.matrix().matrix()) == sp.zeros(3, 3)


# --------------------------------------------------------------------------
# subalgebras of tail matrices
# --------------------------------------------------------------------------

def _rref(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    rows = [list(r) for r in rows]
    out, col = [], 0
    ncol = len(rows[0]) if rows else 0
    while rows and col < ncol:
        piv = next((r for r in rows if r[col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows.remove(piv)
        piv = [x / piv[col] for x in piv]
        rows = [[x - r[col] * p for x, p in zip(r, piv)] for r in rows]
        out = [[x - r[col] * p for x, p in zip(r, piv)] for r in out]
        out.append(piv)
        rows = [r for r in rows if any(r)]
        col += 1
    return sorted(out, key=lambda r: next(i for i, x in enumerate(r) if x != 0))


def span(elements: Iterable[TailMatrix]) -> tuple[tuple[Fraction, ...], ...]:
    rows = [list(e.vector()) for e in elements if not e.is_zero()]
    return tuple(tuple(r) for r in _rref(rows)) if rows else ()


def in_span(basis_rref, g: TailMatrix) -> bool:
    return len(span([TailMatrix.from_vector(r) for r in basis_rref] + [g])) == len(basis_rref)


def is_closed(basis_rref) -> bool:
    els = [TailMatrix.from_vector(r) for r in basis_rref]
    return all(in_span(basis_rref, a.bracket(b)) for a, b in itertools.combinations(els, 2))


@dataclass(frozen=True)
class AlgebraClass:
    name: str
    dim: int
    basis: tuple
    alpha: Fraction | None = None
    abelian: bool = False

    def to_json(self) -> dict:
        out = {"name": self.name, "dim": self.dim,
               "basis": [[str(x) for x in b.vector()] for b in self.basis],
               "abelian": self.abelian}
        if self.alpha is not None:
            out["alpha"] = str(self.alpha)
        return out


NAMED_CLASSES = {
    "A21": ("g1", "g3"), "A22": ("g2", "g4"), "A23": ("g1", "g2"),
    "A31": ("g1", "g2", "g4"), "A32": ("g2", "g3", "g4"),
    "A41": ("g1", "g3", "g4", "g2"),
}


def named_basis(name: str, alpha=Fraction(0)) -> tuple[TailMatrix, ...]:
    table = {"g1": g1(), "g2": g2(), "g3": g3(alpha), "g4": g4()}
    return tuple(table[k] for k in NAMED_CLASSES[name])


def invariants(basis_rref) -> tuple[int, int, int, Fraction | None]:
    """``(dim, dim of translation part, dim of C-projection, alpha)``;
    ``alpha`` is set when the C-projection is a single non-real line."""
    els = [TailMatrix.from_vector(r) for r in basis_rref]
    trans = sum(1 for r in basis_rref if r[2] == 0 and r[3] == 0)
    cproj = span([TailMatrix(QC(), e.c) for e in els])
    alpha = None
    if len(cproj) == 1:
        c = TailMatrix.from_vector(cproj[0]).c
        alpha = None if c.is_real else c.re / c.im
    return len(basis_rref), trans, len(cproj), alpha


def classify_subalgebra(basis: Sequence[TailMatrix]) -> AlgebraClass:
    """Name of a closed subspace up to conjugation, from its invariants."""
    sp_ = span(basis)
    if not is_closed(sp_):
        raise ValueError("subspace is not closed under the bracket")
    d, tr, p, alpha = invariants(sp_)
    if d == 1:
        c = canonicalize_tail(TailMatrix.from_vector(sp_[0]))
        return AlgebraClass(c.form if c.form != "g3" else "g3", 1, (c.matrix(),), c.alpha)
    key = {(2, 0, 2): "A21", (2, 2, 0): "A22", (2, 1, 1): "A23",
           (3, 2, 1): "A31" if alpha is None else "A32", (4, 2, 2): "A41"}.get((d, tr, p))
    if key is None or (key == "A23" and alpha is not None):
        raise ValueError(f"unexpected subalgebra with invariants {(d, tr, p, alpha)}")
    a = alpha if key == "A32" else None
    basis_ = named_basis(key, a or Fraction(0))
    els = [TailMatrix.from_vector(r) for r in sp_]
    abelian = all(x.bracket(y).is_zero() for x, y in itertools.combinations(els, 2))
    return AlgebraClass(key, d, basis_, a, abelian)


def conjugator_to_named(basis: Sequence[TailMatrix]) -> tuple[AlgebraClass, ConjugatorU]:
    """Find ``U`` with ``U span(basis) U^{-1} = span(named basis)``."""
    cls = classify_subalgebra(basis)
    sp_ = span(basis)
    els = [TailMatrix.from_vector(r) for r in sp_]
    if cls.name in ("A22", "A41"):
        U_ = ConjugatorU()
    elif cls.name == "A21":
        e = next(x for x in els if x.c)
        U_ = ConjugatorU(e.B / e.c)
    elif cls.name == "A23":
        T = next(x for x in els if not x.c)
        e = next(x for x in els if x.c)
        k = T.B.inverse()
        U_ = ConjugatorU(k * e.B / e.c, k)
    else:
        e = next(x for x in els if x.c)
        U_ = ConjugatorU(e.B / e.c)
    image = span(U_.conjugate(x) for x in els)
    if image != span(cls.basis):
        raise AssertionError("conjugator failed to reach the representative")
    return cls, U_


class SearchBudgetExceeded(RuntimeError):
    pass


def default_grid() -> list[TailMatrix]:
    vals = (-1, 0, 1, 2)
    return [TailMatrix.from_entries(*e) for e in itertools.product(vals, repeat=4)
            if any(e)]


def enumerate_algebras(dim: int, grid: Sequence[TailMatrix] | None = None,
                       alphas: Sequence = (0, 1, -2, Fraction(1, 2)),
                       budget: int = 200_000) -> list[AlgebraClass]:
    """Closed subspaces of dimension ``dim`` up to conjugation.

    Grows dimension one step at a time: every found class representative is
    extended by each grid element and the closed results are classified.
    The algebra is solvable, so every subalgebra arises this way from a
    codimension-one subalgebra; completeness is relative to the grid.
    """
    if dim not in (1, 2, 3, 4):
        raise ValueError("dim must be 1..4")
    grid = list(grid) if grid is not None else default_grid()
    reps = {("g2", None): span([g2()]), ("g1", None): span([g1()])}
    for a in alphas:
        reps[("g3", Fraction(a))] = span([g3(a)])
    checks = 0
    for k in range(1, dim):
        found: dict = {}
        for rep in reps.values():
            for g in grid:
                checks += 1
                if checks > budget:
                    raise SearchBudgetExceeded(f"more than {budget} candidate checks")
                cand = span([TailMatrix.from_vector(r) for r in rep] + [g])
                if len(cand) != k + 1 or not is_closed(cand):
                    continue
                cls, _ = conjugator_to_named([TailMatrix.from_vector(r) for r in cand])
                found.setdefault((cls.name, cls.alpha), cand)
        reps = found
    out = {}
    for (name, alpha), rep in reps.items():
        cls = classify_subalgebra([TailMatrix.from_vector(r) for r in rep])
        out.setdefault(name, cls)
    return [out[k] for k in sorted(out)]


def random_conjugator(rng: np.random.Generator) -> ConjugatorU:
    q = lambda: Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 6)))
    while True:
        k = QC(q(), q())
        if k:
            return ConjugatorU(QC(q(), q()), k)


# --------------------------------------------------------------------------
# fundamental solutions
# --------------------------------------------------------------------------

def fundamental_pair(lam, nu, sigma, gamma, branch: str | None = None):
    """Fundamental solutions ``(F1, G1), (F2, G2)`` of
    ``F_t = lam F + nu G, G_t = sigma F + gamma G`` (columns of ``exp(M t)``).

    ``branch`` ("real", "repeated", "complex") is needed only when the sign
    of the discriminant cannot be decided from the inputs.
    """
    lam, nu, sigma, gamma = map(sp.sympify, (lam, nu, sigma, gamma))
    M = sp.Matrix([[lam, nu], [sigma, gamma]])
    s = (lam + gamma) / 2
    disc = (lam - gamma) ** 2 + 4 * nu * sigma
    if branch is None:
        if disc.is_positive:
            branch = "real"
        elif disc.is_zero:
            branch = "repeated"
        elif disc.is_negative:
            branch = "complex"
        else:
            raise ValueError("cannot decide the eigenvalue branch; pass branch=")
    N = M - s * sp.eye(2)
    if branch == "repeated":
        E = sp.exp(s * t) * (sp.eye(2) + t * N)
    elif branch == "real":
        q = sp.sqrt(disc) / 2
        Pp = (sp.eye(2) + N / q) / 2
        Pm = (sp.eye(2) - N / q) / 2
        E = sp.exp((s + q) * t) * Pp + sp.exp((s - q) * t) * Pm
    elif branch == "complex":
        q = sp.sqrt(-disc) / 2
        E = sp.exp(s * t) * (sp.cos(q * t) * sp.eye(2) + sp.sin(q * t) / q * N)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    E = E.applyfunc(lambda e: sp.simplify(sp.expand(e)))
    return (E[0, 0], E[1, 0]), (E[0, 1], E[1, 1])


# --------------------------------------------------------------------------
# vector-field brackets and closure
# --------------------------------------------------------------------------

def commutator(X: Generator, Y: Generator) -> Generator:
    """Vector-field bracket ``[X, Y] = X(Y^i) - Y(X^i)`` componentwise."""
    if X.m != Y.m:
        raise ValueError("generators live in different dimensions")
    comps = [sp.expand(X.apply(a) - Y.apply(b)) for a, b in zip(Y.components(), X.components())]
    m = X.m
    return Generator(comps[0], tuple(comps[1:1 + m]), tuple(comps[1 + m:]))


@dataclass(frozen=True)
class Family:
    """Infinite family ``g(t) h(x) vec . d_u`` with ``Laplace(h) = kappa h``."""

    vec: tuple
    g: sp.Expr
    kappa: sp.Expr
    name: str = ""

    @classmethod
    def from_generator(cls, X: Generator, name: str = "") -> "Family":
        atoms = set()
        for p in X.phi:
            atoms |= p.atoms(Psi)
        if len(atoms) != 1:
            raise ValueError("family generator must contain exactly one Psi atom")
        P = atoms.pop()
        coeffs = [sp.simplify(sp.diff(p, P)) for p in X.phi]
        b = next(i for i, c in enumerate(coeffs) if c != 0)
        g = coeffs[b]
        vec = tuple(sp.simplify(c / g) for c in coeffs)
        if any(c.free_symbols & ({t, u, v} | set(xs(X.m))) for c in vec):
            raise ValueError("family direction must be constant")
        return cls(vec, g, P.args[0], name or str(X.name))

    def conditions(self, Y: Generator) -> list[sp.Expr]:
        """Linear conditions vanishing exactly when ``Y`` is a family member."""
        m = Y.m
        out = [Y.eta, *Y.xi]
        out += [sp.diff(p, w) for p in Y.phi for w in U]
        B = [p.xreplace({u: 0, v: 0}) for p in Y.phi]
        v1, v2 = self.vec
        out.append(v2 * B[0] - v1 * B[1])
        n2 = v1 ** 2 + v2 ** 2
        beta = (v1 * B[0] + v2 * B[1]) / n2
        out.append(sp.diff(beta / self.g, t))
        out.append(sum(sp.diff(beta, x, 2) for x in xs(m)) - self.kappa * beta)
        return out


@dataclass
class ClosureResult:
    closed: bool
    constants: dict = field(default_factory=dict)
    witness: tuple | None = None

    def __bool__(self):
        return self.closed


def _components(Y: Generator) -> list[sp.Expr]:
    return Y.components()


def decompose(Z: Generator, basis: Sequence[Generator], family: Family | None = None,
              rng=0, points: int = 24) -> dict | None:
    """Coefficients ``c`` with ``Z - sum c_i basis_i`` zero (or a family
    member); ``None`` when no such constants exist."""
    cond = family.conditions if family is not None else _components
    rows_Z = cond(Z)
    rows_B = [cond(b) for b in basis]
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    exprs = list(rows_Z) + [e for r in rows_B for e in r]
    ev = Evaluator(exprs)
    vals = ev.sample(rng, points)
    with np.errstate(all="ignore"):
        out = ev(vals, points)
    n = len(rows_Z)
    z = np.concatenate([out[i] for i in range(n)])
    if basis:
        Amat = np.stack([np.concatenate([out[n + j * n + i] for i in range(n)])
                         for j in range(len(basis))], axis=1)
        ok = np.isfinite(z) & np.all(np.isfinite(Amat), axis=1)
        c, *_ = np.linalg.lstsq(Amat[ok], z[ok], rcond=None)
    else:
        c = np.zeros(0)
    coeffs = [sp.Rational(Fraction(float(x)).limit_denominator(10 ** 6)) for x in c]
    rest = [rz - sum((cj * rb[i] for cj, rb in zip(coeffs, rows_B)), sp.Integer(0))
            for i, rz in enumerate(rows_Z)]
    if combine([is_zero(e, 12, rng=rng) for e in rest]):
        return {i: cj for i, cj in enumerate(coeffs) if cj != 0}
    return None


def closure_check(basis: Sequence[Generator], m: int | None = None,
                  families: Sequence[Family] = (), adjoin_basic: bool = True,
                  rng=0) -> ClosureResult:
    """Check that every bracket of ``basis`` (plus the translations and
    rotations unless ``adjoin_basic`` is false) lies in the span, modulo at
    most one infinite family."""
    if len(families) > 1:
        raise ValueError("at most one infinite family is supported")
    family = families[0] if families else None
    m = m if m is not None else (basis[0].m if basis else None)
    full = list(basis)
    if adjoin_basic:
        full = basic_symmetries(m) + full
    names = [g.name or f"X{i}" for i, g in enumerate(full)]
    consts = {}
    for i, j in itertools.combinations(range(len(full)), 2):
        Z = commutator(full[i], full[j])
        if Z.is_zero_field():
            continue
        c = decompose(Z, full, family, rng)
        if c is None:
            return ClosureResult(False, consts, (names[i], names[j], Z))
        consts[(names[i], names[j])] = {names[k]: val for k, val in c.items()}
    if family is not None:
        rep = _family_representative(family, m)
        for i, X in enumerate(full):
            Z = commutator(X, rep)
            if decompose(Z, full, family, rng) is None:
                return ClosureResult(False, consts, (names[i], family.name, Z))
    return ClosureResult(True, consts)


def _family_representative(fam: Family, m: int) -> Generator:
    from .expr import psi
    h = psi(fam.kappa, m)
    return Generator(0, (0,) * m, tuple(fam.g * h * c for c in fam.vec), fam.name)


def operator_of(name: str, m: int, alpha=0, realization: bool = False) -> Generator:
    """``e_hat`` for one of ``g1..g4``: ``(g)_{ab} (1, u, v)_b d_{u_a}``
    (negated when ``realization`` is set)."""
    g = {"g1": g1(), "g2": g2(), "g3": g3(alpha), "g4": g4()}[name]
    return g.realization(m) if realization else g.operator(m)


# --------------------------------------------------------------------------
# operator realizations of the matrix algebras
# --------------------------------------------------------------------------

def _hat(name: str, m: int, alpha=0) -> Generator:
    return operator_of(name, m, alpha)


def realizations(cls: str, m: int, mu=1, nu=1, alpha=0,
                 pair=(1, 0, 0, 1), literal: bool = False) -> list[tuple[str, list[Generator]]]:
    """Operator algebras ``<mu D + ..., e_hat, ...>`` built on the matrix
    class ``cls`` (a key of ``NAMED_CLASSES``).

    ``e_hat = (e)_{ab} (1, u, v)_b d_{u_a}``; ``pair`` gives the coefficients
    ``(lam, nu, sigma, gamma)`` of the linear system whose fundamental
    solutions weight the purely time-dependent realizations.  ``literal``
    keeps the listed element order in the three-dimensional ``A32`` case,
    which does not close for ``mu != 0``."""
    from .symmetry import D as dilatation

    e = [_hat(k, m, alpha) for k in NAMED_CLASSES[cls]]
    Dm = dilatation(m)
    mu, nu = sp.sympify(mu), sp.sympify(nu)

    def lc(*terms) -> Generator:
        out = terms[0][1].scale(terms[0][0])
        for c, X in terms[1:]:
            out = out + X.scale(c)
        return out

    (F1, G1), (F2, G2) = fundamental_pair(*pair)
    if cls in ("A21", "A22"):
        return [
            ("shift", [lc((mu, Dm), (1, e[0]), (nu * t, e[1])), e[1]]),
            ("shift-swapped", [lc((mu, Dm), (1, e[1]), (nu * t, e[0])), e[0]]),
            ("two-dilatations", [lc((mu, Dm), (-1, e[0])), lc((nu, Dm), (-1, e[1]))]),
            ("fundamental", [lc((F1, e[0]), (G1, e[1])), lc((F2, e[0]), (G2, e[1]))]),
        ]
    if cls == "A23":
        return [
            ("dilatation", [lc((mu, Dm), (-1, e[0])), e[1]]),
            ("shift", [lc((mu, Dm), (1, e[0]), (nu * t, e[1])), e[1]]),
        ]
    if cls == "A31":
        return [
            ("dilatation", [lc((mu, Dm), (-2, e[0])), e[1], e[2]]),
            ("shift-2", [lc((1, Dm), (2, e[0]), (2 * nu * t, e[1])), e[1], e[2]]),
            ("shift-3", [lc((1, Dm), (2, e[0]), (2 * nu * t, e[2])), e[2], e[1]]),
            ("fundamental", [e[0], lc((F1, e[1]), (G1, e[2])), lc((F2, e[1]), (G2, e[2]))]),
        ]
    if cls == "A32":
        # with e_1 = g2 carrying the dilatation, [e_2, e_3] ~ e_1 leaves the
        # span unless mu = 0; the rotation g3 has to be the partner of D
        lead, rest = (e[0], e[1]) if literal else (e[1], e[0])
        return [
            ("dilatation", [lc((mu, Dm), (-2, lead)), rest, e[2]]),
            ("shift", [e[0], lc((1, Dm), (2, e[1]), (2 * mu * t, e[2])), e[2]]),
        ]
    if cls == "A41":
        w = sp.Matrix(xs(m))
        ex = sp.exp(mu * t + sum(nu * xi for xi in w))
        return [
            ("dilatations", [lc((mu, Dm), (-2, e[0])), lc((nu, Dm), (-2, e[1])), e[2], e[3]]),
            ("exponential", [e[0], e[1], e[2].scale(ex), e[3].scale(ex)]),
        ]
    raise KeyError(cls)
