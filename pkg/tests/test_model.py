import pytest
import sympy as sp

from rdsym.expr import jet, param, t, u, v, xs
from rdsym.model import DiffusionMatrix, RDSystem, from_complex


def test_type_one_matrix_inverse():
    A = DiffusionMatrix(param("a"))
    assert sp.simplify(A.matrix * A.inverse() - sp.eye(2)) == sp.zeros(2, 2)
    assert A.commutes(sp.Matrix([[2, -3], [3, 2]]))
    assert not A.commutes(sp.Matrix([[1, 0], [0, 2]]))


def test_only_type_one_is_supported():
    with pytest.raises(ValueError):
        DiffusionMatrix(1, kind="II")


def test_json_roundtrip():
    s = RDSystem.from_strings(2, "1/2", "u*(1 - u^2 - v^2)", "v*(1 - u^2 - v^2)")
    back = RDSystem.from_json(s.to_json())
    assert back.m == 2 and sp.simplify(back.f[0] - s.f[0]) == 0


def test_source_may_not_depend_on_t_x_or_derivatives():
    with pytest.raises(ValueError):
        RDSystem(1, DiffusionMatrix(0), (u + t, v))
    with pytest.raises(ValueError):
        RDSystem(1, DiffusionMatrix(0), (u * xs(1)[0], v))
    with pytest.raises(ValueError):
        RDSystem(1, DiffusionMatrix(0), (jet(1, ["x1"]), v))


def test_complex_form_splits_into_components():
    W = u + sp.I * v
    re, im = from_complex(sp.I * W)
    assert sp.simplify(re + v) == 0 and sp.simplify(im - u) == 0


def test_residual_vanishes_on_the_manifold():
    s = RDSystem.from_strings(1, "2", "u*v", "u - v")
    M = s.manifold()
    assert all(sp.expand(M.reduce(r)) == 0 for r in s.residual())


def test_manifold_eliminates_mixed_derivatives():
    s = RDSystem.from_strings(1, "0", "u^2", "v")
    val = s.manifold().value(1, ("t", "x1"))
    x1 = jet(1, ["x1"])
    expected = -jet(2, ["x1", "x1", "x1"]) + 2 * u * x1
    assert sp.expand(val - expected) == 0
