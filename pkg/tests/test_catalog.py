import numpy as np
import pytest
import sympy as sp

from rdsym import catalog as cat
from rdsym.expr import explicit_polar, param, u, v
from rdsym.symmetry import extension_conditions


def test_all_sixteen_entries_load():
    entries = cat.load()
    assert len(entries) == 16
    assert [sum(e.table == k for e in entries) for k in (1, 2, 3)] == [2, 9, 5]
    assert cat.get(1, 2).id == "T1.2"


def test_show_lists_the_source_and_symmetries():
    text = cat.show(cat.get("T1.2"))
    assert "f1 =" in text and "X1" in text and "K if" in text


def test_every_view_resolves_to_one_entry_and_keeps_its_galilei_claim():
    rng = np.random.default_rng(5)
    assert {w.id for w in cat.views()} >= {"exz1", "exz2", "exz3", "exz4a", "exz4b", "exz4c",
                                           "cgl", "nls_critical"}
    for w in cat.views():
        e = cat.get(w.entry)
        vals = w.space.sample(rng, 1)
        resolved = w.resolve(vals, 1)
        assert {str(k) for k in resolved} == set(e.params), w.id
        flags = extension_conditions(w.system(vals, 1), rng=rng)
        assert flags.galilei == w.galilei, w.id


def test_ginzburg_landau_view_is_the_first_entry():
    w = cat.get_view("cgl")
    assert w.entry == "T1.1"
    s = w.system({"a": 1, "alpha": 2}, 1)
    R2 = u ** 2 + v ** 2
    assert sp.simplify(explicit_polar(s.f[0]) - (u * (1 - R2) + 2 * R2 * v)) == 0
    assert sp.simplify(explicit_polar(s.f[1]) - (v * (1 - R2) - 2 * R2 * u)) == 0


def test_instantiation_rejects_bad_parameters():
    with pytest.raises(cat.CatalogError):
        cat.instantiate(cat.get("T1.2"), {"a": 1, "lambda": 1, "mu": 0, "nu": 0})
    with pytest.raises(cat.CatalogError):
        cat.instantiate(cat.get("T1.2"), {"a": 1, "lambda": 0, "mu": 0, "nu": 1, "sigma": 1})


def test_guarded_generators_follow_the_guard():
    e = cat.get("T1.2")
    _, crit = cat.instantiate(e, {"a": 0, "lambda": 1, "mu": 1, "nu": 0, "sigma": 4}, m=1)
    _, off = cat.instantiate(e, {"a": 0, "lambda": 1, "mu": 1, "nu": 0, "sigma": 2}, m=1)
    assert "K" in {g.name for g in crit} and "K" not in {g.name for g in off}


def test_reports_are_deterministic_and_perturbations_break():
    e = cat.get("T2.1")
    r1 = cat.verify_entry(e, samples=1, ms=(1,), seed=4)
    r2 = cat.verify_entry(e, samples=1, ms=(1,), seed=4)
    assert r1.jsonl() == r2.jsonl()
    assert r1.ok
    pert = [r for r in r1.records if r["check"] == "perturbation"]
    assert pert and all(r["verdict"] == "broken" for r in pert)


def test_corrected_guards_are_sharp():
    for eid in ("T3.2", "T3.4"):
        rep = cat.verify_entry(cat.get(eid), ms=(1,), main=False)
        assert rep.ok, rep.failures()[:2]


def test_listed_guards_have_witnesses_against_them():
    rep = cat.verify_entry(cat.get("T3.2"), ms=(1,), main=False, listed=True)
    bad = {(r["generator"], r["clause"]) for r in rep.failures()}
    assert ("Ghat[(mu != 0 and a*sigma == nu - mu) or (a == 0 and mu != 0)]", "mu == 0 and a == 0") in bad
    rep = cat.verify_entry(cat.get("T3.4"), ms=(1,), main=False, listed=True, seed=1)
    assert any(r["check"] == "guard-" and r["generator"].startswith("Ghat") for r in rep.failures())


def test_closure_of_an_instantiated_entry():
    res = cat.closure_for_entry(cat.get("T1.2"), 1, {"a": 0, "lambda": 1, "mu": 1, "nu": 0, "sigma": 4})
    assert res.closed


def test_families_carry_their_kernel():
    fams = cat.families(cat.get("T2.2"), 1, {"a": 0, "beta": 1, "kappa": 0})
    assert len(fams) == 1
    assert fams[0][1].vec == (1, 0)
    assert param("kappa") not in fams[0][1].kappa.free_symbols
