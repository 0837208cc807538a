"""Acceptance suite: one recorded PASS/FAIL line per criterion (see the
terminal summary of a pytest run)."""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from helpers import SYSTEMS, concrete_system, random_template
from rdsym import algebra as alg
from rdsym import catalog as cat
from rdsym import equivalence as eqv
from rdsym import numeric as nm
from rdsym.symmetry import check_classifying, is_symmetry

pytestmark = pytest.mark.slow

GUARDED = [e for e in cat.load() if e.additional]


def _short(fails, n=3):
    return "; ".join(f"{r['entry']} {r.get('generator', r.get('aet'))} m={r.get('m', '-')} "
                     f"{r['check']} {r.get('clause', '')} -> {r.get('verdict', r.get('outcome', ''))}".strip()
                     for r in fails[:n])


def test_c1_main_symmetries_of_every_entry(criterion):
    t0 = time.perf_counter()
    rep = cat.verify_catalog(samples=5, ms=(1, 2, 3), guards=False, seed=0)
    dt = time.perf_counter() - t0
    checks = [r for r in rep.records if r["check"] in ("oracle", "classifying")]
    verdicts = {r["verdict"] for r in checks}
    entries = {r["entry"] for r in checks}
    ok = rep.ok and len(entries) == 16 and verdicts <= {"ProvenZero", "NumericallyZero"} and dt < 300
    assert criterion("C1", ok, f"{len(checks)} checks over {len(entries)} entries, "
                               f"{len(rep.failures())} failures, {dt:.0f} s (target < 300 s)"
                     + ("" if rep.ok else f"; {_short(rep.failures())}"))


def _guard_run(listed):
    rep = cat.Report()
    for e in GUARDED:
        rep.extend(cat.verify_entry(e, ms=(1, 2, 3), main=False, listed=listed))
    return rep


def _critical_power_witness(rep):
    k = [r for r in rep.records if r["entry"] == "T1.2" and r["generator"].startswith("K[")]
    plus = [r for r in k if r["check"] == "guard+"]
    minus = [r for r in k if r["check"] == "guard-" and "sigma" in r.get("clause", "")]
    return plus and minus and all(r["ok"] for r in plus) and \
        all(r["verdict"] == "NonZero" for r in minus)


def test_c2_guard_sharpness_as_listed(criterion):
    rep = _guard_run(listed=True)
    fails = rep.failures()
    bad = sorted({r["entry"] for r in fails})
    ok = rep.ok and _critical_power_witness(rep)
    assert criterion("C2", ok, f"listed guards: {len(rep.records)} records, {len(fails)} failures"
                               + (f" in {bad}: {_short(fails)}" if fails else ""))


def test_c2_guard_sharpness_corrected(criterion):
    rep = _guard_run(listed=False)
    fails = rep.failures()
    ok = rep.ok and _critical_power_witness(rep)
    assert criterion("C2-corrected", ok, f"corrected guards: {len(rep.records)} records, "
                                         f"{len(fails)} failures" + (f": {_short(fails)}" if fails else ""))


def test_c3_oracle_and_classifying_equations_agree(criterion):
    t0 = time.perf_counter()
    total = disagree = passed = 0
    where = []
    for row in SYSTEMS:
        e, _, s, known = concrete_system(row)
        rng = np.random.default_rng([1, e.table, e.item, row[1]])
        for i in range(100):
            T = random_template(rng, s, known)
            a = bool(check_classifying(s, T, rng=rng, prove_limit=0))
            b = bool(is_symmetry(s, T.expand(), rng=rng, prove_limit=0))
            total += 1
            passed += a
            if a != b:
                disagree += 1
                where.append(f"{e.id} m={row[1]} #{i}")
    dt = time.perf_counter() - t0
    assert criterion("C3", disagree == 0 and total == 1000,
                     f"{total} templates on {len(SYSTEMS)} systems ({passed} symmetries), "
                     f"{disagree} discrepancies {where[:3]}, {dt:.0f} s")


def test_c4_subalgebra_classification(criterion):
    counts = {d: len(alg.enumerate_algebras(d)) for d in (2, 3, 4)}
    rng = np.random.default_rng(2024)
    bad = 0
    for i in range(500):
        kind = i % 4
        if kind == 0:
            src = alg.g1()
        elif kind == 1:
            src = alg.g2()
        elif kind == 2:
            src = alg.g3(Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5))))
        else:
            src = alg.g4()
        U = alg.random_conjugator(rng)
        g = U.conjugate(src)
        res = alg.canonicalize_tail(g)
        want = alg.canonicalize_tail(src)
        if not (alg.verify_canonical(g, res) and (res.form, res.alpha) == (want.form, want.alpha)):
            bad += 1
    ok = counts == {2: 3, 3: 2, 4: 1} and bad == 0
    assert criterion("C4", ok, f"classes per dimension {counts} (want 3/2/1), "
                               f"500 conjugates, {bad} not returned to their source form")


def test_c5_lie_closure(criterion):
    rng = np.random.default_rng(5)
    open_ = []
    for e in cat.load():
        for m in (1, 2):
            vals = e.space.sample(rng, m)
            if not cat.closure_for_entry(e, m, vals, rng=0).closed:
                open_.append(f"{e.id} m={m}")
    consts = {}
    for mu in (1, 2, Fraction(1, 2)):
        basis = dict(alg.realizations("A23", 1, mu=mu))["dilatation"]
        r = alg.closure_check(basis, 1, adjoin_basic=False)
        consts[str(mu)] = r.closed and r.constants == {("X0", "X1"): {"X1": 1}}
    ok = not open_ and all(consts.values())
    assert criterion("C5", ok, f"16 entries at m = 1, 2: {len(open_)} not closed {open_}; "
                               f"[g1, g2] = g2 for the dilatation realization: {consts}")


def _aet_run(include_refuted):
    rep = eqv.AETReport()
    for e in cat.load():
        rep.records += eqv.verify_aet_claims(e, samples=2, include_refuted=include_refuted).records
    return rep


def test_c6_aet_claims_as_listed(criterion):
    rep = _aet_run(include_refuted=True)
    fails = rep.failures()
    joint = sorted({r["entry"] for r in rep.records if r["check"] == "joint"})
    assert criterion("C6", rep.ok, f"all listed claims: {len(rep.records)} records, joint checks on {joint}, "
                                   f"{len(fails)} failures" + (f": {_short(fails)}" if fails else ""))


def test_c6_aet_claims_without_refuted(criterion):
    rep = _aet_run(include_refuted=False)
    fails = rep.failures()
    assert criterion("C6-corrected", rep.ok, f"claims without the refuted ones: {len(rep.records)} records, "
                                             f"{len(fails)} failures" + (f": {_short(fails)}" if fails else ""))


def _transport(view, params, n):
    s = cat.get_view(view).system(params, 1)
    g = nm.Grid.stable(1, n, 2 * math.pi, float(s.A.a))
    ic = nm.initial_condition(g, "modulated", depth=0.2)
    T = 0.2
    traj = nm.integrate(s, g, ic, T, samples=[T / 2, 0.9 * T])
    from rdsym.symmetry import G
    return nm.symmetry_transport_residual(s, G(1, s.A, 1), 0.2, traj)


def test_c7_galilei_transport(criterion):
    t0 = time.perf_counter()
    ns = (256, 512, 1024)
    good = [_transport("exz3", {"sigma": 1}, n) for n in ns]
    ctrl = [_transport("cgl", {"a": 1, "alpha": 1}, n) for n in ns]
    dt = time.perf_counter() - t0
    within = all(r.ratio < 5 for r in good)
    orders = [(math.log2(a.residual / b.residual), math.log2(a.baseline / b.baseline))
              for a, b in zip(good, good[1:])]
    same_order = all(abs(p - q) < 0.5 and p > 1 for p, q in orders)
    stalls = ctrl[-1].residual > 0.1 and ctrl[-1].residual > 0.5 * ctrl[-2].residual
    ok = within and same_order and stalls and dt < 120
    assert criterion("C7", ok,
                     "exz3 ratios " + ", ".join(f"{r.ratio:.3f}" for r in good)
                     + "; orders (residual, baseline) " + ", ".join(f"({p:.2f}, {q:.2f})" for p, q in orders)
                     + "; CGL residuals " + ", ".join(f"{r.residual:.3g}" for r in ctrl)
                     + f"; {dt:.0f} s (target < 120 s)")


def test_c8_fourier_mode_decay(criterion):
    errs = {a: nm.fourier_mode_error(a) for a in (0.0, 0.5, 1.0)}
    ok = all(e < 1e-4 for e in errs.values())
    assert criterion("C8", ok, "relative errors at t = 0.1: "
                               + ", ".join(f"a={a}: {e:.2e}" for a, e in errs.items()))
