"""Shared builders for the test-suite: concrete systems with known extra
symmetries and random generator templates around them."""
from __future__ import annotations

import numpy as np
import sympy as sp

from rdsym import catalog as cat
from rdsym.expr import param, parse, t
from rdsym.guards import parse_guard
from rdsym.symmetry import GeneratorTemplate

# (entry, m, required guard, opaque choice); the guards grant G, Ghat or K
SYSTEMS = [
    ("T1.1", 1, "mu == a and kappa == 0", "power"),
    ("T1.1", 2, "mu == a and kappa != 0", "exponential"),
    ("T1.2", 1, "nu == a*sigma and sigma == 4", None),
    ("T1.2", 2, "nu == a*sigma", None),
    ("T2.1", 1, "true", "rational"),
    ("T2.5", 2, "true", "power"),
    ("T3.1", 1, "a*sigma == 0 and mu != 0", None),
    ("T3.2", 2, "a*sigma == nu and a*mu == 0", None),
    ("T3.3", 1, "omega0 != 0 and a*(mu - nu) == 2*lambda", None),
    ("T3.4", 1, "nu*mu == lambda*sigma and lambda == a*mu", None),
]


def _q(rng, lo=-3, hi=3) -> sp.Rational:
    p = 0
    while p == 0:
        p = int(rng.integers(lo, hi + 1))
    return sp.Rational(p, int(rng.integers(1, 4)))


def concrete_system(row, seed: int = 0):
    """``(entry, values, system, known templates)`` for one row of SYSTEMS."""
    eid, m, guard, fc = row
    e = cat.get(eid)
    rng = np.random.default_rng([seed, e.table, e.item, m])
    vals = e.space.sample(rng, m, require=parse_guard(guard, m).dnf[0])
    sys_ = e.system(m, vals, fc)
    A = sys_.A
    known = [T.subs(vals) for _, T in e.templates(m)]
    unit = lambda k: tuple(1 if i == k else 0 for i in range(m))
    for add in e.additional:
        if not parse_guard(add.effective_guard(), m).holds(vals):
            continue
        if add.kind == "K":
            known.append(GeneratorTemplate(m, A, lam=1))
        elif add.kind == "G":
            known += [GeneratorTemplate(m, A, sigma=unit(k)) for k in range(m)]
        else:
            g = parse(add.gamma, m).xreplace(e.space.derived_exprs(m)).xreplace(vals)
            known += [GeneratorTemplate(m, A, omega=unit(k), gamma=sp.nsimplify(g)) for k in range(m)]
    # basic symmetries
    known.append(GeneratorTemplate(m, A, nu_t=1))
    known += [GeneratorTemplate(m, A, rho=unit(k)) for k in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            P = sp.zeros(m, m)
            P[i, j], P[j, i] = 1, -1
            known.append(GeneratorTemplate(m, A, Psi=P))
    return e, vals, sys_, known


def random_template(rng, sys_, known) -> GeneratorTemplate:
    """A random combination of known symmetries, with a random defect added
    half of the time (the defect may itself happen to be a symmetry)."""
    m, A = sys_.m, sys_.A
    T = GeneratorTemplate(m, A)
    k = int(rng.integers(1, 4))
    for idx in rng.choice(len(known), size=min(k, len(known)), replace=False):
        T = T.combine(known[int(idx)], _q(rng))
    if rng.random() < 0.5:
        return T
    J = sp.Matrix([[0, -1], [1, 0]])
    kind = int(rng.integers(0, 8))
    zero_omega = all(o == 0 for o in T.omega)
    if kind == 0:
        d = GeneratorTemplate(m, A, mu_D=_q(rng))
    elif kind == 1:
        d = GeneratorTemplate(m, A, C=_q(rng) * sp.eye(2) + _q(rng) * J)
    elif kind == 2:
        d = GeneratorTemplate(m, A, B=(_q(rng), _q(rng)))
    elif kind == 3:
        d = GeneratorTemplate(m, A, B=(_q(rng) * t, 0))
    elif kind == 4:
        d = GeneratorTemplate(m, A, lam=_q(rng))
    elif kind == 5:
        d = GeneratorTemplate(m, A, sigma=tuple(_q(rng) for _ in range(m)))
    elif kind == 6 and zero_omega:
        d = GeneratorTemplate(m, A, omega=tuple(_q(rng) for _ in range(m)), gamma=_q(rng))
    else:
        P = sp.Matrix(m, m, lambda i, j: _q(rng))
        d = GeneratorTemplate(m, A, Psi=P, C=_q(rng) * t * J)
    return T.combine(d, 1)
