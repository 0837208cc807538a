"""Finite-difference integration of the systems and numeric symmetry transport.

The systems are integrated in complex form ``W = u + i v``:
``W_t = (a + i) Laplace_h W + F(W)`` with ``F = f1 + i f2`` on a periodic grid.
``Laplace_h`` is the second-order central difference Laplacian, diagonalised by
the FFT; the linear part is stepped with Crank-Nicolson and the source with
second-order Adams-Bashforth (forward Euler on the first step).

Symmetry transport maps a computed trajectory through the finite flow of a
generator and measures the residual of the transformed field with an
independent, sixth-order stencil.  The residual of the untransformed
trajectory under the same stencil (the baseline) is the spatial error of the
scheme; a symmetry keeps the transported residual at the baseline level, a
non-symmetry leaves an O(1) remainder.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
import sympy as sp
from scipy.integrate import quad_vec, solve_ivp
from scipy.ndimage import map_coordinates

from .expr import _NUMPY_IMPL, parse, t, u, v, xs
from .model import DiffusionMatrix, RDSystem
from .symmetry import D as _D, Generator, G as _G, Ghat as _Ghat, J as _J, K as _K, P as _P, P0 as _P0

__all__ = [
    "Grid", "FieldState", "Trajectory", "DivergenceError", "StabilityError",
    "FlowDomainError", "FlowTransform", "TransportResult", "initial_condition",
    "integrate", "flow", "symmetry_transport_residual", "discrete_residual",
    "fourier_mode_error", "run_descriptor",
]


class DivergenceError(RuntimeError):
    pass


class StabilityError(ValueError):
    pass


class FlowDomainError(ValueError):
    def __init__(self, message: str, critical_theta: float | None = None):
        super().__init__(message + ("" if critical_theta is None else f" (critical theta = {critical_theta:.6g})"))
        self.critical_theta = critical_theta


# --------------------------------------------------------------------------
# grid and states
# --------------------------------------------------------------------------

def stability_constant(a: float, m: int) -> float:
    """``c`` in ``tau <= c h^2``.

    Crank-Nicolson is unconditionally stable, but for ``|tau L| > 2`` on the
    stiffest mode (``|L| = 4 m |a + i| / h^2``) its amplification factor
    changes sign and the highest modes flip every step.  Keeping
    ``|tau L_max| <= 2`` rules that out and keeps the time error
    ``O(tau^2) = O(h^4)`` below the spatial ``O(h^2)``.
    """
    return 1.0 / (2 * m * math.hypot(a, 1.0))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[0, L)^m`` with ``n`` points per axis."""

    m: int
    n: int
    L: float
    tau: float
    a: float = 0.0
    boundary: str = "periodic"

    def __post_init__(self):
        if self.m not in (1, 2):
            raise ValueError("numerics support m = 1 or 2")
        if self.boundary != "periodic":
            raise ValueError("only periodic boundaries are supported")
        c = stability_constant(self.a, self.m)
        if self.tau > c * self.h ** 2 * (1 + 1e-12):
            raise StabilityError(f"tau = {self.tau:.3g} exceeds c*h^2 = {c * self.h ** 2:.3g}")

    @classmethod
    def stable(cls, m: int, n: int, L: float, a: float = 0.0, fraction: float = 1.0) -> "Grid":
        h = L / n
        return cls(m, n, L, fraction * stability_constant(a, m) * h * h, a)

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.m

    def axis(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    def coords(self) -> list[np.ndarray]:
        return np.meshgrid(*[self.axis()] * self.m, indexing="ij")

    def wavenumbers(self) -> list[np.ndarray]:
        k = 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)
        return np.meshgrid(*[k] * self.m, indexing="ij")

    def laplacian_symbol(self) -> np.ndarray:
        """Eigenvalues of the second-order difference Laplacian."""
        return sum(-4 / self.h ** 2 * np.sin(k * self.h / 2) ** 2 for k in self.wavenumbers())

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "L": self.L, "tau": self.tau, "a": self.a}


@dataclass(frozen=True)
class FieldState:
    t: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))):
            raise DivergenceError(f"non-finite field at t = {self.t}")

    @property
    def W(self) -> np.ndarray:
        return self.u + 1j * self.v

    @classmethod
    def from_complex(cls, t_: float, W: np.ndarray) -> "FieldState":
        return cls(t_, W.real.copy(), W.imag.copy())


def initial_condition(grid: Grid, kind: str = "gaussian", **kw) -> FieldState:
    """Named presets: ``constant``, ``gaussian``, ``fourier-mode``, ``modulated``."""
    X = grid.coords()
    L = grid.L
    if kind == "constant":
        W = np.full(grid.shape, complex(kw.get("value", 1.0)))
    elif kind == "gaussian":
        amp, width = kw.get("amplitude", 0.1), kw.get("width", L / 10)
        r2 = sum((x - L / 2) ** 2 for x in X)
        W = amp * np.exp(-r2 / (2 * width ** 2)) + 0j
    elif kind == "fourier-mode":
        k = kw.get("k", (1,) * grid.m)
        k = (k,) * grid.m if np.isscalar(k) else tuple(k)
        phase = sum(2 * np.pi * kk / L * x for kk, x in zip(k, X))
        W = kw.get("amplitude", 1.0) * np.exp(1j * phase)
    elif kind == "modulated":
        # nowhere-vanishing field, needed by logarithmic sources
        depth, k = kw.get("depth", 0.2), kw.get("k", 1)
        base = sum(np.cos(2 * np.pi * x / L) for x in X) / grid.m
        phase = sum(2 * np.pi * k / L * x for x in X)
        W = kw.get("amplitude", 1.0) * (1 + depth * base) * np.exp(1j * phase)
    else:
        raise ValueError(f"unknown initial condition {kind!r}")
    return FieldState.from_complex(0.0, W)


# --------------------------------------------------------------------------
# integration
# --------------------------------------------------------------------------

def _source(sys: RDSystem) -> Callable[[np.ndarray], np.ndarray]:
    free = set().union(*(e.free_symbols for e in sys.f)) - {u, v}
    if free:
        raise ValueError(f"source has unassigned symbols {sorted(map(str, free))}")
    fn = sp.lambdify([u, v], list(sys.f), modules=[_NUMPY_IMPL, "numpy"])

    def F(W):
        f1, f2 = fn(W.real, W.imag)
        return np.broadcast_to(f1, W.shape) + 1j * np.broadcast_to(f2, W.shape)

    return F


def _a_value(sys: RDSystem) -> float:
    if sys.A.a.free_symbols:
        raise ValueError("diffusion parameter a must be numeric")
    return float(sys.A.a)


@dataclass
class Trajectory:
    """Sampled states; each sample keeps its neighbouring steps so that time
    derivatives can be formed by central differences."""

    grid: Grid
    times: list = field(default_factory=list)
    frames: list = field(default_factory=list)  # (W_prev, W, W_next)

    @property
    def states(self) -> list[FieldState]:
        return [FieldState.from_complex(tt, fr[1]) for tt, fr in zip(self.times, self.frames)]

    def max_amplitude(self) -> float:
        return max(float(np.max(np.abs(fr[1]))) for fr in self.frames)


def integrate(sys: RDSystem, grid: Grid, ic: FieldState, T: float,
              samples: Sequence[float] | int = 5, blowup: float = 1e8) -> Trajectory:
    """IMEX integration up to ``T``; ``samples`` are times in ``(0, T)`` (or a
    count of equally spaced ones) at which states are stored."""
    if sys.m != grid.m:
        raise ValueError("system and grid dimensions differ")
    a = _a_value(sys)
    if abs(a - grid.a) > 1e-12:
        grid = Grid(grid.m, grid.n, grid.L, grid.tau, a)
    if ic.u.shape != grid.shape:
        raise ValueError("initial condition does not live on the grid")
    tau = grid.tau
    steps = int(round(T / tau))
    if abs(steps * tau - T) > 1e-9 * max(T, 1):
        steps = int(math.ceil(T / tau))
    if isinstance(samples, int):
        samples = [T * (i + 1) / (samples + 1) for i in range(samples)]
    want = sorted({min(max(int(round(s / tau)), 1), steps - 1) for s in samples})
    F = _source(sys)
    L = (a + 1j) * grid.laplacian_symbol()
    lhs = 1 - tau / 2 * L
    rhs = 1 + tau / 2 * L
    W = ic.W.astype(complex)
    Wh = np.fft.fftn(W)
    Fh_old = None
    traj = Trajectory(grid)
    prev = None
    pending = {}
    for k in range(steps):
        Fh = np.fft.fftn(F(W))
        src = Fh if Fh_old is None else 1.5 * Fh - 0.5 * Fh_old
        Wh = (rhs * Wh + tau * src) / lhs
        Fh_old = Fh
        prev, W = W, np.fft.ifftn(Wh)
        n = k + 1
        if not np.all(np.isfinite(W)) or np.max(np.abs(W)) > blowup:
            raise DivergenceError(f"solution diverged at t = {n * tau:.4g}")
        if n in want:
            pending[n] = (prev, W)
        if n - 1 in pending:
            p, c = pending.pop(n - 1)
            traj.times.append((n - 1) * tau)
            traj.frames.append((p, c, W))
    return traj


def fourier_mode_error(a: float, k: int = 1, n: int = 256, L: float = 2 * np.pi,
                       t_end: float = 0.1, m: int = 1) -> float:
    """Relative error of a single mode against ``exp(-(a + i) k^2 t)``."""
    grid = Grid.stable(m, n, L, a)
    steps = int(math.ceil(t_end / grid.tau))
    grid = Grid(m, n, L, t_end / steps, a)
    sys = RDSystem(m, DiffusionMatrix(sp.nsimplify(a)), (sp.Integer(0), sp.Integer(0)))
    ic = initial_condition(grid, "fourier-mode", k=k)
    traj = integrate(sys, grid, ic, t_end + 2 * grid.tau, samples=[t_end])
    W = traj.frames[0][1]
    kk = 2 * np.pi * k / L
    exact = ic.W * np.exp(-(a + 1j) * m * kk ** 2 * traj.times[0])
    return float(np.max(np.abs(W - exact)) / np.max(np.abs(exact)))


# --------------------------------------------------------------------------
# flows
# --------------------------------------------------------------------------

def _paths(m: int, gamma=None):
    """Closed-form base flows ``(t, x)(theta)`` of the named operators."""
    th = sp.Symbol("theta", real=True)
    x = xs(m)
    out = [(_P0(m), (t + th, x))]
    for i in range(m):
        out.append((_P(i + 1, m), (t, tuple(xx + th if j == i else xx for j, xx in enumerate(x)))))
        out.append((_G(i + 1, DiffusionMatrix(), m),
                    (t, tuple(xx + th * t if j == i else xx for j, xx in enumerate(x)))))
    for i in range(m):
        for j in range(i + 1, m):
            y = list(x)
            y[i] = x[i] * sp.cos(th) - x[j] * sp.sin(th)
            y[j] = x[j] * sp.cos(th) + x[i] * sp.sin(th)
            out.append((_J(i + 1, j + 1, m), (t, tuple(y))))
    out.append((_D(m), (t * sp.exp(th), tuple(xx * sp.exp(th / 2) for xx in x))))
    out.append((_K(DiffusionMatrix(), m), (t / (1 - 2 * th * t), tuple(xx / (1 - 2 * th * t) for xx in x))))
    return th, out


def _match_path(X: Generator):
    """``(theta symbol, path)`` if the base part of ``X`` is a constant
    multiple of a named operator with a known flow."""
    m = X.m
    base = [X.eta, *X.xi]
    th, cands = _paths(m)
    if all(sp.simplify(b) == 0 for b in base):
        return th, (t, xs(m)), "identity"
    # exponential Galilei needs its own gamma
    for i in range(m):
        xi = X.xi[i]
        if X.eta == 0 and all(X.xi[j] == 0 for j in range(m) if j != i) and xi.has(sp.exp):
            c_e = sp.simplify(xi)
            ex = [a for a in sp.Mul.make_args(c_e) if isinstance(a, sp.exp)]
            if len(ex) == 1 and sp.simplify(c_e / ex[0]).free_symbols == set():
                c = sp.simplify(c_e / ex[0])
                y = tuple(xx + c * th * ex[0] if j == i else xx for j, xx in enumerate(xs(m)))
                if not (ex[0].args[0].free_symbols - {t}):
                    return th, (t, y), f"Ghat{i + 1}"
    for Y, path in cands:
        yb = [Y.eta, *Y.xi]
        ratio = None
        ok = True
        for b, c in zip(base, yb):
            if c == 0:
                if sp.simplify(b) != 0:
                    ok = False
                    break
                continue
            r = sp.simplify(b / c)
            if r.free_symbols & ({t} | set(xs(m))):
                ok = False
                break
            if ratio is None:
                ratio = r
            elif sp.simplify(r - ratio) != 0:
                ok = False
                break
        if ok and ratio is not None:
            scaled = (path[0].xreplace({th: ratio * th}), tuple(p.xreplace({th: ratio * th}) for p in path[1]))
            return th, scaled, Y.name
    return None


def _type_one(Nm: sp.Matrix) -> tuple[sp.Expr, sp.Expr] | None:
    """``(n1, n2)`` with ``N = n1 I + n2 J``, or None."""
    if sp.simplify(Nm[0, 0] - Nm[1, 1]) != 0 or sp.simplify(Nm[0, 1] + Nm[1, 0]) != 0:
        return None
    return Nm[0, 0], Nm[1, 0]


@dataclass
class FlowTransform:
    """Finite transformation ``exp(theta X)``.

    ``(t, x) -> (t', x')`` and ``U' = Phi(t, x) U + psi(t, x)``; closed forms are
    used for the named operators, adaptive Runge-Kutta otherwise."""

    generator: Generator
    theta: float
    closed_form: bool
    _point: Callable | None = None
    _mult: Callable | None = None
    _shift: Callable | None = None
    _critical: Callable | None = None

    @property
    def m(self) -> int:
        return self.generator.m

    def point(self, tt, x):
        """Image of base points; ``x`` has shape ``(m, ...)``."""
        tt = np.asarray(tt, dtype=float)
        x = np.asarray(x, dtype=float)
        self._check(tt)
        if self.closed_form:
            res = self._point(tt, *x)
            t1 = np.broadcast_to(np.asarray(res[0], dtype=float), np.broadcast(tt, x[0]).shape)
            x1 = np.stack([np.broadcast_to(np.asarray(r, dtype=float), t1.shape) for r in res[1:]])
            return t1, x1
        t1, x1, _, _ = self._rk(tt, x)
        return t1, x1

    def action(self, tt, x):
        """``(Phi, psi)`` with ``Phi`` of shape ``(2, 2, ...)``."""
        tt = np.asarray(tt, dtype=float)
        x = np.asarray(x, dtype=float)
        self._check(tt)
        if self.closed_form:
            shape = np.broadcast(tt, x[0]).shape
            p, q = (np.broadcast_to(np.asarray(e, dtype=float), shape) for e in self._mult(tt, *x))
            Phi = np.exp(p) * np.array([[np.cos(q), -np.sin(q)], [np.sin(q), np.cos(q)]])
            psi = self._shift(tt, x, shape)
            if not (np.all(np.isfinite(Phi)) and np.all(np.isfinite(psi))):
                raise FlowDomainError("flow multiplier is not finite on these points")
            return Phi, psi
        _, _, Phi, psi = self._rk(tt, x)
        return Phi, psi

    def __call__(self, tt, x, uu, vv):
        t1, x1 = self.point(tt, x)
        Phi, psi = self.action(tt, x)
        u1 = Phi[0, 0] * uu + Phi[0, 1] * vv + psi[0]
        v1 = Phi[1, 0] * uu + Phi[1, 1] * vv + psi[1]
        return t1, x1, u1, v1

    def _check(self, tt):
        if self._critical is not None:
            crit = self._critical(tt)
            if crit is not None:
                raise FlowDomainError("flow crosses a coordinate singularity", crit)

    def _rk(self, tt, x):
        X = self.generator
        m = X.m
        shape = np.broadcast(tt, x[0]).shape
        npts = int(np.prod(shape)) if shape else 1
        base = sp.lambdify([t, *xs(m)], [X.eta, *X.xi], modules="numpy")
        Nm, B = -X.N, -X.B  # the flow moves U along phi = -pi
        nfun = sp.lambdify([t, *xs(m)], list(Nm) + list(B), modules="numpy")

        def rhs(_, y):
            Y = y.reshape(1 + m + 6, npts)
            tc, xc = Y[0], Y[1:1 + m]
            d = [np.broadcast_to(np.asarray(e, dtype=float), (npts,)) for e in base(tc, *xc)]
            nb = [np.broadcast_to(np.asarray(e, dtype=float), (npts,)) for e in nfun(tc, *xc)]
            Nv = np.array(nb[:4]).reshape(2, 2, npts)
            Bv = np.array(nb[4:])
            Phi = Y[1 + m:5 + m].reshape(2, 2, npts)
            psi = Y[5 + m:7 + m]
            dPhi = np.einsum("abn,bcn->acn", Nv, Phi)
            dpsi = np.einsum("abn,bn->an", Nv, psi) + Bv
            return np.concatenate([d[0][None], np.array(d[1:]), dPhi.reshape(4, npts), dpsi]).ravel()

        y0 = np.concatenate([
            np.broadcast_to(tt, shape).reshape(1, npts),
            np.stack([np.broadcast_to(xi, shape).reshape(npts) for xi in x]),
            np.tile(np.eye(2).reshape(4, 1), (1, npts)),
            np.zeros((2, npts)),
        ]).ravel()
        sol = solve_ivp(rhs, (0.0, self.theta), y0, method="DOP853", rtol=1e-10, atol=1e-12)
        if not sol.success or not np.all(np.isfinite(sol.y[:, -1])):
            raise FlowDomainError(f"flow integration failed: {sol.message}")
        Y = sol.y[:, -1].reshape(1 + m + 6, npts)
        return (Y[0].reshape(shape), Y[1:1 + m].reshape((m,) + shape),
                Y[1 + m:5 + m].reshape((2, 2) + shape), Y[5 + m:7 + m].reshape((2,) + shape))


def flow(X: Generator, theta: float, force_numeric: bool = False) -> FlowTransform:
    """Finite flow of ``X`` at group parameter ``theta``."""
    theta = float(theta)
    m = X.m
    matched = None if force_numeric else _match_path(X)
    Nm, B = -X.N, -X.B
    tn = _type_one(Nm)
    if matched is None or tn is None:
        return FlowTransform(X, theta, False)
    th, (tp, xp), _ = matched
    s = sp.Symbol("s", real=True)
    along = {t: tp.xreplace({th: s}), **{xi: e.xreplace({th: s}) for xi, e in zip(xs(m), xp)}}
    n1, n2 = (sp.sympify(e).xreplace(along) for e in tn)
    P = sp.integrate(n1, (s, 0, th))
    Q = sp.integrate(n2, (s, 0, th))
    if P.has(sp.Integral) or Q.has(sp.Integral):
        return FlowTransform(X, theta, False)
    # real definite integrals: take log|.| and drop the branch constants
    P, Q = (sp.expand(e.replace(sp.log, lambda z_: sp.log(sp.Abs(z_)))).xreplace({sp.I: 0})
            for e in (P, Q))
    args = [t, *xs(m)]
    pt = sp.lambdify(args, [tp.xreplace({th: theta}), *[e.xreplace({th: theta}) for e in xp]], modules="numpy")
    mult = sp.lambdify(args, [P.xreplace({th: theta}), Q.xreplace({th: theta})], modules="numpy")
    b = [sp.simplify(e) for e in B]
    if all(e == 0 for e in b):
        def shift(tt, x, shape):
            return np.zeros((2,) + shape)
    else:
        # psi = int_0^theta exp((P + iQ)(theta) - (P + iQ)(s)) (B1 + i B2)(s) ds
        Ps, Qs = P.xreplace({th: s}), Q.xreplace({th: s})
        bc = (b[0] + sp.I * b[1]).xreplace(along)
        integrand = sp.lambdify([s, *args], sp.exp(-(Ps + sp.I * Qs)) * bc, modules="numpy")
        total = sp.lambdify(args, sp.exp(P + sp.I * Q).xreplace({th: theta}), modules="numpy")

        def shift(tt, x, shape):
            tt_b = np.broadcast_to(tt, shape).astype(float)
            xb = [np.broadcast_to(xi, shape).astype(float) for xi in x]
            val, _ = quad_vec(lambda ss: np.asarray(integrand(ss, tt_b, *xb), dtype=complex)
                              * np.ones(shape), 0.0, theta, epsabs=1e-13, epsrel=1e-12)
            out = np.asarray(total(tt_b, *xb), dtype=complex) * val
            return np.array([out.real, out.imag])

    crit = None
    den = sp.denom(sp.together(tp))
    if den.has(th):
        roots = sp.solve(den, th)
        root = roots[0] if len(roots) == 1 else None
        if root is not None:
            rf = sp.lambdify([t], root, modules="numpy")

            def crit(tt):
                with np.errstate(divide="ignore", invalid="ignore"):
                    r = np.asarray(rf(np.asarray(tt, dtype=float)), dtype=float)
                hit = np.isfinite(r) & (r > 0) & (r <= theta) if theta > 0 else \
                    np.isfinite(r) & (r < 0) & (r >= theta)
                if np.any(hit):
                    return float(np.min(np.abs(r[hit])) * np.sign(theta))
                return None

    return FlowTransform(X, theta, True, pt, mult, shift, crit)


# --------------------------------------------------------------------------
# residual of transported trajectories
# --------------------------------------------------------------------------

_LAP6 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])
_PAD = 3


def _laplacian6(W: np.ndarray, h: float, m: int) -> np.ndarray:
    """Sixth-order Laplacian of an array padded by ``_PAD`` on every side."""
    core = tuple(slice(_PAD, -_PAD) for _ in range(m))
    out = np.zeros(W[core].shape, dtype=W.dtype)
    for ax in range(m):
        for j, c in enumerate(_LAP6):
            sl = list(core)
            sl[ax] = slice(j, W.shape[ax] - 2 * _PAD + j)
            out += c * W[tuple(sl)]
    return out / h ** 2


def _fourier_eval(W: np.ndarray, grid: Grid, pts: np.ndarray) -> np.ndarray:
    """Trigonometric interpolant of the periodic grid function ``W`` at
    arbitrary points ``pts`` (shape ``(m, ...)``)."""
    n, m = grid.n, grid.m
    c = np.fft.fftn(W) / n ** m
    k = np.fft.fftfreq(n, d=1.0 / n)
    wgt = np.ones(n)
    if n % 2 == 0:
        # split the Nyquist mode evenly between +n/2 and -n/2
        wgt[n // 2] = 0.5
        k = np.concatenate([k, [n / 2]])
        wgt = np.concatenate([wgt, [0.5]])
        c = np.concatenate([c, c[(slice(n // 2, n // 2 + 1),) + (slice(None),) * (m - 1)]], axis=0) \
            if m == 1 else _nyquist_pad(c, n)
    kk = 2 * np.pi * k / grid.L
    shape = pts.shape[1:]
    flat = pts.reshape(m, -1)
    if m == 1:
        E = np.exp(1j * np.outer(flat[0], kk)) * wgt
        return (E @ c).reshape(shape)
    E1 = np.exp(1j * np.outer(flat[0], kk)) * wgt
    E2 = np.exp(1j * np.outer(flat[1], kk)) * wgt
    return np.einsum("pi,ij,pj->p", E1, c, E2).reshape(shape)


def _nyquist_pad(c: np.ndarray, n: int) -> np.ndarray:
    c = np.concatenate([c, c[n // 2:n // 2 + 1, :]], axis=0)
    return np.concatenate([c, c[:, n // 2:n // 2 + 1]], axis=1)


def _cubic_eval(W: np.ndarray, grid: Grid, pts: np.ndarray) -> np.ndarray:
    idx = np.asarray(pts) / grid.h
    re = map_coordinates(W.real, idx, order=3, mode="grid-wrap")
    im = map_coordinates(W.imag, idx, order=3, mode="grid-wrap")
    return re + 1j * im


def _padded_points(grid: Grid) -> np.ndarray:
    ax = (np.arange(-_PAD, grid.n + _PAD)) * grid.h
    return np.stack(np.meshgrid(*[ax] * grid.m, indexing="ij"))


def discrete_residual(sys: RDSystem, frames: Sequence, tau: float, h: float, m: int) -> np.ndarray:
    """Residual ``D_t W - (a + i) Laplace_6 W - F(W)`` of padded frames
    ``(W_prev, W, W_next)`` on the interior points."""
    a = _a_value(sys)
    F = _source(sys)
    Wp, W, Wn = frames
    core = tuple(slice(_PAD, -_PAD) for _ in range(m))
    Wt = (Wn[core] - Wp[core]) / (2 * tau)
    return Wt - (a + 1j) * _laplacian6(W, h, m) - F(W[core])


def _pad_periodic(W: np.ndarray) -> np.ndarray:
    return np.pad(W, _PAD, mode="wrap")


@dataclass
class TransportResult:
    residual: float
    baseline: float
    interpolation_error: float
    per_time: list

    @property
    def ratio(self) -> float:
        return self.residual / self.baseline if self.baseline > 0 else math.inf

    def to_json(self) -> dict:
        return {"residual": self.residual, "baseline": self.baseline, "ratio": self.ratio,
                "interpolation_error": self.interpolation_error, "per_time": self.per_time}


def _transport_frame(fl: FlowTransform, W: np.ndarray, tt: float, grid: Grid, interp: str):
    """Transported field on the padded grid at time ``tt`` (flows that keep
    ``t`` fixed)."""
    pts = _padded_points(grid)
    inv = flow(fl.generator, -fl.theta) if fl.closed_form else flow(fl.generator, -fl.theta, True)
    _, base = inv.point(np.full(pts.shape[1:], tt), pts)
    shift = base - pts
    uniform = np.allclose(shift, shift.reshape(grid.m, -1)[:, :1].reshape((grid.m,) + (1,) * grid.m),
                          atol=1e-13 * max(1.0, grid.L))
    steps = shift.reshape(grid.m, -1)[:, 0] / grid.h
    if uniform and np.allclose(steps, np.round(steps), atol=1e-9):
        # grid-aligned translation: exact index shift
        Wb = np.roll(W, tuple(-int(round(s)) for s in steps), axis=tuple(range(grid.m)))
        Wb = _pad_periodic(Wb)
        err = 0.0
    else:
        spectral = _fourier_eval(W, grid, base)
        cub = _cubic_eval(W, grid, np.mod(base, grid.L))
        Wb = spectral if interp == "spectral" else cub
        err = float(np.max(np.abs(spectral - cub)))
    Phi, psi = fl.action(np.full(pts.shape[1:], tt), base)
    u1 = Phi[0, 0] * Wb.real + Phi[0, 1] * Wb.imag + psi[0]
    v1 = Phi[1, 0] * Wb.real + Phi[1, 1] * Wb.imag + psi[1]
    return u1 + 1j * v1, err


def symmetry_transport_residual(sys: RDSystem, X: Generator, theta: float, traj: Trajectory,
                                interp: str = "spectral") -> TransportResult:
    """Max-norm residual of the trajectory carried by ``exp(theta X)``,
    with the untransformed residual as baseline."""
    if sp.simplify(X.eta) != 0:
        raise ValueError("transport is implemented for flows that keep t fixed")
    if interp not in ("spectral", "cubic"):
        raise ValueError("interp must be 'spectral' or 'cubic'")
    grid = traj.grid
    fl = flow(X, theta)
    per, res_max, base_max, ierr = [], 0.0, 0.0, 0.0
    for tt, frame in zip(traj.times, traj.frames):
        base_frames = [_pad_periodic(W) for W in frame]
        r0 = float(np.max(np.abs(discrete_residual(sys, base_frames, grid.tau, grid.h, grid.m))))
        moved = []
        for dt, W in zip((-grid.tau, 0.0, grid.tau), frame):
            Wt, e = _transport_frame(fl, W, tt + dt, grid, interp)
            moved.append(Wt)
            ierr = max(ierr, e)
        r1 = float(np.max(np.abs(discrete_residual(sys, moved, grid.tau, grid.h, grid.m))))
        per.append({"t": tt, "residual": r1, "baseline": r0})
        res_max, base_max = max(res_max, r1), max(base_max, r0)
    return TransportResult(res_max, base_max, ierr, per)


# --------------------------------------------------------------------------
# run descriptors
# --------------------------------------------------------------------------

def _system_from(desc, m: int) -> RDSystem:
    if isinstance(desc, Mapping) and "view" in desc:
        from .catalog import get_view
        w = get_view(desc["view"])
        vals = {k: sp.nsimplify(val) for k, val in desc.get("params", {}).items()}
        return w.system(vals, m)
    if isinstance(desc, Mapping) and "entry" in desc:
        from .catalog import get
        e = get(desc["entry"])
        vals = {k: sp.nsimplify(val) for k, val in desc.get("params", {}).items()}
        return e.system(m, vals, desc.get("fchoice"))
    d = dict(desc)
    return RDSystem.from_strings(int(d.get("m", m)), sp.nsimplify(d["a"]), d["f1"], d["f2"])


def run_descriptor(desc: Mapping) -> tuple[dict, str]:
    """Run ``{system, grid, ic, T, flows}``; returns the JSON summary and the
    residual table as CSV text."""
    from .symmetry import parse_generator

    g = desc["grid"]
    m = int(g.get("m", 1))
    sys = _system_from(desc["system"], m)
    a = _a_value(sys)
    grid = Grid.stable(m, int(g["n"]), float(g.get("L", 2 * np.pi)), a, float(g.get("fraction", 1.0))) \
        if "tau" not in g else Grid(m, int(g["n"]), float(g.get("L", 2 * np.pi)), float(g["tau"]), a)
    ic_d = dict(desc.get("ic", {"kind": "gaussian"}))
    ic = initial_condition(grid, ic_d.pop("kind"), **ic_d)
    T = float(desc.get("T", 0.1))
    traj = integrate(sys, grid, ic, T, samples=int(desc.get("samples", 5)))
    rows = ["generator,theta,t,residual,baseline"]
    summary = {"grid": grid.to_json(), "T": T, "max_amplitude": traj.max_amplitude(), "flows": []}
    for fd in desc.get("flows", []):
        X = parse_generator(fd["generator"], sys.A, m, fd.get("gamma"))
        res = symmetry_transport_residual(sys, X, float(fd["theta"]), traj, fd.get("interp", "spectral"))
        summary["flows"].append({"generator": fd["generator"], "theta": fd["theta"], **res.to_json()})
        for p in res.per_time:
            rows.append(f"{fd['generator']},{fd['theta']},{p['t']:.10g},{p['residual']:.10g},{p['baseline']:.10g}")
    return summary, "\n".join(rows) + "\n"
