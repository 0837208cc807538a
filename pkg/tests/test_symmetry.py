import pytest
import sympy as sp

from rdsym import catalog as cat
from rdsym.algebra import commutator
from rdsym.expr import u, v, xs
from rdsym.model import DiffusionMatrix, RDSystem
from rdsym.symmetry import (D, G, Generator, GeneratorTemplate, J, K, P, P0, StructureError,
                            basic_symmetries, check_classifying, check_structure,
                            extension_conditions, invariance_residual, is_symmetry,
                            parse_generator, prolong2, report_record)


def nls(m, power=2, a=0):
    """W_t = (a + i) Laplace(W) + i |W|^power W in components."""
    r = f"(u^2 + v^2)^({power}/2)"
    return RDSystem.from_strings(m, str(a), f"-{r}*v", f"{r}*u")


def test_generator_must_be_affine_in_u():
    with pytest.raises(StructureError):
        Generator(0, (0,), (u ** 2, 0))
    with pytest.raises(StructureError):
        Generator(u, (0,), (0, 0))


def test_basic_symmetries_of_an_isotropic_system():
    s = cat.get("T2.1").system(2, {"a": 1, "nu": 2}, "power")
    for X in basic_symmetries(2):
        assert is_symmetry(s, X, rng=0)


def test_schroedinger_algebra_of_the_critical_nls():
    s = nls(2)
    A = s.A
    for X in [P0(2), P(1, 2), J(1, 2, 2), G(1, A, 2), G(2, A, 2), K(A, 2),
              parse_generator("2*D - u*d_u - v*d_v", A, 2),
              parse_generator("u*d_v - v*d_u", A, 2)]:
        assert is_symmetry(s, X, rng=1), X.name


def test_conformal_symmetry_needs_the_critical_power():
    assert not is_symmetry(nls(1), K(nls(1).A, 1), rng=0)
    assert is_symmetry(nls(1, power=4), K(nls(1, power=4).A, 1), rng=0)


def test_galilei_of_the_ginzburg_landau_form():
    # with a != 0 the boost rescales |W|, which only a linear source tolerates
    cgl = RDSystem.from_strings(1, "1", "u - (u^2 + v^2)*(u - v)", "v - (u^2 + v^2)*(u + v)")
    assert not is_symmetry(cgl, G(1, cgl.A, 1), rng=0)
    linear = RDSystem.from_strings(1, "1", "u", "v")
    assert is_symmetry(linear, G(1, linear.A, 1), rng=0)
    # with a = 0 the boost is a phase rotation and the cubic term is harmless
    s = RDSystem.from_strings(1, "0", "u - (u^2 + v^2)*v", "v + (u^2 + v^2)*u")
    assert is_symmetry(s, G(1, s.A, 1), rng=0)


def test_known_commutators():
    A = DiffusionMatrix(sp.Rational(1, 2))
    m = 2
    k = commutator(P0(m), K(A, m))
    expected = D(m).scale(4) - parse_generator("u*d_u + v*d_v", A, m).scale(m)
    assert (k - expected).is_zero_field()
    assert (commutator(P0(m), G(1, A, m)) - P(1, m)).is_zero_field()
    assert commutator(P(1, m), P(2, m)).is_zero_field()


def test_prolongation_of_a_translation_is_trivial():
    pr = prolong2(P(1, 1))
    assert all(sp.expand(c) == 0 for c in pr.values())


def test_structure_equations_reject_x_dependent_eta():
    A = DiffusionMatrix(1)
    X = Generator(xs(1)[0], (0,), (0, 0))
    res = check_structure(X, A, rng=0)
    assert not all(bool(vd) for vd in res.values())


def test_oracle_and_classifying_agree_on_a_galilei_template():
    s = nls(1)
    T = GeneratorTemplate(1, s.A, sigma=(1,))
    assert check_classifying(s, T, rng=0)
    assert is_symmetry(s, T.expand(), rng=0)
    T2 = GeneratorTemplate(1, s.A, sigma=(1,), mu_D=1)
    assert not check_classifying(s, T2, rng=0)
    assert not is_symmetry(s, T2.expand(), rng=0)


def test_extension_flags_for_the_critical_nls():
    flags = extension_conditions(nls(2), rng=0)
    assert flags.galilei and flags.conformal
    flags1 = extension_conditions(nls(1), rng=0)
    assert flags1.galilei and not flags1.conformal


def test_residual_is_exactly_zero_for_the_phase_rotation():
    s = nls(1)
    res = invariance_residual(s, parse_generator("u*d_v - v*d_u", s.A, 1))
    assert all(sp.simplify(r) == 0 for r in res)


def test_report_record_fields():
    s = nls(1)
    vd = is_symmetry(s, D(1), rng=0)
    rec = report_record("X", "D", vd, 1, {"a": 0})
    assert rec["verdict"] == "NonZero" and "witness" in rec and rec["sample"] == {"a": 0.0}
