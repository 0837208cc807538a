import pytest
import sympy as sp

from rdsym import catalog as cat
from rdsym import equivalence as eqv
from rdsym.expr import param, t, u, v
from rdsym.model import RDSystem
from rdsym.symmetry import P0, is_symmetry, parse_generator


def cubic(a="0"):
    return RDSystem.from_strings(1, a, "-(u^2 + v^2)*v", "(u^2 + v^2)*u")


@pytest.mark.parametrize("aid", [1, 2, 3, 4, 5])
def test_one_parameter_group_law(aid):
    assert eqv.aet_group_law(aid)


def test_group_law_of_the_parametrised_maps():
    w1, w2 = sp.symbols("w1 w2", real=True)
    nu, sigma, lam = param("nu"), param("sigma"), param("lambda")
    for aid in (6, 7, 8):
        T1, _ = eqv.aet_map(aid, w1, nu, sigma, lam)
        T2, _ = eqv.aet_map(aid, w2, nu, sigma, lam)
        T3, _ = eqv.aet_map(aid, w1 + w2, nu, sigma, lam)
        assert sp.simplify(sp.expand_trig(T2 * T1 - T3)) == sp.zeros(2, 2)


def test_missing_parameters_are_reported():
    with pytest.raises(ValueError):
        eqv.aet_map(6)
    with pytest.raises(ValueError):
        eqv.aet_map(9)


def test_scaling_aet_preserves_linear_homogeneous_sources():
    s = cat.get("T2.1").system(1, {"a": 1, "nu": 0}, "power")
    new = eqv.apply(eqv.AET(1, 2), s)
    assert sp.simplify(new.f[0] - (s.f[0] + 2 * u)) == 0


def test_scaling_aet_breaks_a_cubic_source():
    with pytest.raises(eqv.FormNotPreserved, match="depends on t"):
        eqv.apply(eqv.AET(1, 1), cubic())


def test_rotation_aet_adds_a_phase_term():
    new = eqv.apply(eqv.AET(2, 3), cubic())
    assert sp.simplify(new.f[0] - (cubic().f[0] - 3 * v)) == 0
    assert sp.simplify(new.f[1] - (cubic().f[1] + 3 * u)) == 0


def test_rescaling_one_component_changes_the_diffusion_part():
    with pytest.raises(eqv.FormNotPreserved, match="diffusion part changed"):
        eqv.apply(eqv.AET(3, 1), cat.get("T2.9").system(1, {"a": 1, "lambda": 2}))


def test_linear_transform_conjugates_the_source():
    T = eqv.Linear(K1=1, K2=1, lam=2)
    new = eqv.apply(T, cubic())
    K = T.K
    Uo = K.inv() * sp.Matrix([u, v])
    f_old = sp.Matrix([e.xreplace({u: Uo[0], v: Uo[1]}) for e in cubic().f])
    want = 4 * K * f_old
    assert all(sp.simplify(a - b) == 0 for a, b in zip(new.f, want))


def test_singular_linear_transform_is_rejected():
    with pytest.raises(ValueError):
        eqv.Linear(K1=0, K2=0)


def test_kernel_maps_a_system_to_itself_and_pushes_translations():
    s = cubic()
    K = eqv.Kernel(shift=3, b=(1,))
    assert eqv.apply(K, s) is s
    X = eqv.push_generator(K, P0(1))
    assert (X - P0(1)).is_zero_field()


def test_pushed_symmetry_is_a_symmetry_of_the_new_system():
    s = cubic()
    T = eqv.AET(2, 1)
    new = eqv.apply(T, s)
    X = eqv.push_generator(T, parse_generator("2*D - u*d_u - v*d_v", s.A, 1))
    assert is_symmetry(new, X, rng=0)


def test_claims_of_an_entry_are_verified_and_reported():
    rep = eqv.verify_aet_claims(cat.get("T2.1"), samples=1)
    assert rep.ok
    checks = {r["check"] for r in rep.records}
    assert checks == {"under-guard", "off-guard"}


def test_refuted_claim_is_flagged():
    rep = eqv.verify_aet_claims(cat.get("T2.9"), samples=1)
    bad = {r["aet"] for r in rep.failures()}
    assert "3" in {str(b) for b in bad}
    rep2 = eqv.verify_aet_claims(cat.get("T2.9"), samples=1, include_refuted=False)
    assert rep2.ok
