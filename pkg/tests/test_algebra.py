from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from rdsym import algebra as alg
from rdsym.algebra import TailMatrix, commutator
from rdsym.expr import t
from rdsym.symmetry import Generator

small = st.fractions(min_value=-5, max_value=5, max_denominator=6)
tails = st.builds(TailMatrix.from_entries, small, small, small, small)


@settings(max_examples=60, deadline=None)
@given(tails, tails)
def test_bracket_is_the_matrix_commutator(x, y):
    M = x.matrix() * y.matrix() - y.matrix() * x.matrix()
    assert x.bracket(y).matrix() == M


@settings(max_examples=40, deadline=None)
@given(tails, tails, tails)
def test_jacobi_identity(x, y, z):
    s = x.bracket(y.bracket(z)) + y.bracket(z.bracket(x)) + z.bracket(x.bracket(y))
    assert s.is_zero()


@settings(max_examples=15, deadline=None)
@given(tails, tails)
def test_realization_is_a_homomorphism_and_hat_reverses(x, y):
    lhs = commutator(x.realization(1), y.realization(1))
    assert (lhs - x.bracket(y).realization(1)).is_zero_field()
    hat = commutator(x.operator(1), y.operator(1))
    assert (hat - y.bracket(x).operator(1)).is_zero_field()


@settings(max_examples=80, deadline=None)
@given(tails)
def test_canonical_form_is_verified_exactly(g):
    res = alg.canonicalize_tail(g)
    assert alg.verify_canonical(g, res)
    assert res.form in ("zero", "g1", "g2", "g3")


def test_tie_breaking_order():
    assert alg.canonicalize_tail(TailMatrix()).form == "zero"
    assert alg.canonicalize_tail(TailMatrix.from_entries(B1=3, B2=1)).form == "g2"
    assert alg.canonicalize_tail(TailMatrix.from_entries(B1=1, c1=2)).form == "g1"
    res = alg.canonicalize_tail(TailMatrix.from_entries(c1=1, c2=2))
    assert res.form == "g3" and res.alpha == Fraction(1, 2) and res.scale == 2


def test_conjugates_return_to_their_source_form():
    rng = np.random.default_rng(11)
    for src in [alg.g1(), alg.g2(), alg.g3(Fraction(-2, 3)), alg.g4()]:
        for _ in range(20):
            U = alg.random_conjugator(rng)
            res = alg.canonicalize_tail(U.conjugate(src))
            want = alg.canonicalize_tail(src)
            assert (res.form, res.alpha) == (want.form, want.alpha)


def test_conjugate_agrees_with_matrix_product():
    rng = np.random.default_rng(2)
    U = alg.random_conjugator(rng)
    g = TailMatrix.from_entries(1, -2, Fraction(1, 3), 4)
    assert alg.conjugate(U, g) == U.conjugate(g)


def test_named_classes_classify_to_themselves():
    for name in alg.NAMED_CLASSES:
        cls = alg.classify_subalgebra(alg.named_basis(name, Fraction(1)))
        assert cls.name == name


def test_classify_rejects_open_subspaces():
    with pytest.raises(ValueError):
        alg.classify_subalgebra([alg.g1(), alg.g2() + alg.g3(0)])


def test_enumeration_dimension_two():
    names = [c.name for c in alg.enumerate_algebras(2)]
    assert names == ["A21", "A22", "A23"]


def test_search_budget_is_reported():
    with pytest.raises(alg.SearchBudgetExceeded):
        alg.enumerate_algebras(3, budget=10)


def test_closure_detects_a_missing_bracket():
    X = Generator(0, (0,), (t ** 2, 0), "t2du")
    res = alg.closure_check([X], 1)
    assert not res.closed and res.witness is not None


def test_dilatation_realization_gives_g1_g2_bracket():
    basis = dict(alg.realizations("A23", 1, mu=2))["dilatation"]
    res = alg.closure_check(basis, 1, adjoin_basic=False)
    assert res.closed
    assert res.constants == {("X0", "X1"): {"X1": 1}}


@pytest.mark.parametrize("cls", ["A21", "A22", "A23", "A31"])
def test_realizations_close(cls):
    for label, basis in alg.realizations(cls, 1):
        assert alg.closure_check(basis, 1).closed, label


def test_three_dimensional_dilatation_needs_the_rotation_partner():
    good = dict(alg.realizations("A32", 1, mu=1))["dilatation"]
    bad = dict(alg.realizations("A32", 1, mu=1, literal=True))["dilatation"]
    assert alg.closure_check(good, 1).closed
    assert not alg.closure_check(bad, 1).closed


def test_exponential_realization_and_rotations():
    expo = dict(alg.realizations("A41", 2))["exponential"]
    assert alg.closure_check(expo, 2, adjoin_basic=False).closed
    assert not alg.closure_check(expo, 2).closed
    assert alg.closure_check(dict(alg.realizations("A41", 1))["exponential"], 1).closed


def test_fundamental_pair_solves_the_linear_system():
    (F1, G1), (F2, G2) = alg.fundamental_pair(1, 2, -1, 3)
    # dF/dt = lam F + nu G, dG/dt = sigma F + gamma G
    for F, G in ((F1, G1), (F2, G2)):
        assert sp.simplify(sp.diff(F, t) - (F + 2 * G)) == 0
        assert sp.simplify(sp.diff(G, t) - (-F + 3 * G)) == 0
    assert sp.simplify(F1 * G2 - F2 * G1) != 0
