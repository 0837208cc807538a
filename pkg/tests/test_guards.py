import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from rdsym.expr import param
from rdsym.guards import ParamSpace, SamplingError, parse_guard

a, mu, nu, sigma, lam = (param(n) for n in ("a", "mu", "nu", "sigma", "lambda"))


def test_dnf_of_nested_guard():
    g = parse_guard("(mu != 0 and a*sigma == nu - mu) or (a == 0 and nu != 0)")
    assert len(g.dnf) == 2 and all(len(c) == 2 for c in g.dnf)


def test_lambda_is_usable_as_a_parameter_name():
    g = parse_guard("lambda == a*mu")
    assert g.holds({lam: 2, a: 1, mu: 2})
    assert not g.holds({lam: 1, a: 1, mu: 2})


def test_m_is_substituted():
    g = parse_guard("sigma == 4/m", 2)
    assert g.holds({sigma: 2}) and not g.holds({sigma: 4})


def test_violations_flip_one_atom_per_clause():
    g = parse_guard("nu == a*sigma and sigma == 4/m", 1)
    viol = g.violations()
    assert len(viol) == 2
    assert [sum(x.op == "!=" for x in c) for c in viol] == [1, 1]


def test_trivial_guard():
    assert parse_guard("true").trivial
    assert parse_guard(None).violations() == []


def test_sampler_honours_equalities_and_constraints():
    space = ParamSpace({"a": "real", "mu": "real", "nu": "real", "sigma": "real"}, {},
                       parse_guard("mu != nu"))
    rng = np.random.default_rng(3)
    g = parse_guard("a*sigma == nu - mu and mu != 0")
    for _ in range(20):
        vals = space.sample(rng, 1, require=g.dnf[0])
        assert g.holds(vals) and vals[mu] != vals[nu]


def test_sampler_derived_fields():
    space = ParamSpace({"lambda": "nonzero", "mu": "real", "nu": "real"},
                       {"sigma": "-(mu - nu)^2/(4*lambda)", "delta": "(mu - nu)^2/4 + lambda*sigma"})
    vals = space.sample(np.random.default_rng(0), 1)
    assert vals[param("delta")] == 0


def test_unsatisfiable_requirement_is_reported():
    space = ParamSpace({"epsilon": "pm1"}, {})
    with pytest.raises(SamplingError):
        space.sample(np.random.default_rng(0), 1, require=parse_guard("epsilon == 3").dnf[0], tries=20)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([1, 2, 3]))
def test_sampled_points_satisfy_required_clauses(seed, m):
    space = ParamSpace({"a": "real", "nu": "real", "sigma": "real"}, {})
    g = parse_guard("nu == a*sigma and sigma == 4/m", m)
    rng = np.random.default_rng(seed)
    for conj in list(g.dnf) + g.violations():
        vals = space.sample(rng, m, require=conj)
        assert all(x.holds(vals) for x in conj)
