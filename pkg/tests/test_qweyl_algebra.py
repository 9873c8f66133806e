import numpy as np
import pytest

from qtrace.laurent import LaurentPoly
from qtrace.qweyl_algebra import (
    AlgebraElement,
    AlgebraParams,
    apply_g,
    apply_rho,
    check_relations_preserved,
    degree_zero_part,
    multiply,
    random_element,
)

from conftest import flagship_poly


@pytest.fixture(scope="module")
def params():
    return AlgebraParams(q=0.5, P=flagship_poly(), k=1)


def test_uv_contracts_to_p(params):
    uv = multiply(AlgebraElement.u(), AlgebraElement.v(), params)
    expect = params.P.scale_arg(1.0 / params.q)
    assert degree_zero_part(uv).allclose(expect)
    assert set(uv.terms) == {0}


def test_vu_contracts_to_p(params):
    vu = multiply(AlgebraElement.v(), AlgebraElement.u(), params)
    assert degree_zero_part(vu).allclose(params.P.scale_arg(params.q))


def test_z_commutation(params):
    zu = multiply(AlgebraElement.z_pow(1), AlgebraElement.u(), params)
    assert set(zu.terms) == {1}
    assert zu.terms[1].allclose(LaurentPoly({1: params.q ** 2}))


def test_associativity_on_flagship_pair(params):
    u, v = AlgebraElement.u(), AlgebraElement.v()
    lhs = multiply(multiply(u, v, params), v, params)
    rhs = multiply(u, multiply(v, v, params), params)
    assert lhs.allclose(rhs, tol=1e-12)


def test_associativity_random_triples(params):
    rng = np.random.default_rng(42)
    for _ in range(50):
        a, b, c = (random_element(rng) for _ in range(3))
        lhs = multiply(multiply(a, b, params), c, params)
        rhs = multiply(a, multiply(b, c, params), params)
        assert lhs.allclose(rhs, tol=1e-10)


def test_gu_example(params):
    gu = apply_g(AlgebraElement.u(), params.with_twist(1, 2))
    # q^2 Z^-2 u normal-orders to q^-2 u Z^-2
    assert set(gu.terms) == {1}
    assert gu.terms[1].allclose(LaurentPoly({-2: params.q ** -2}))


def test_g_fixes_z(params):
    z5 = AlgebraElement.z_pow(5)
    assert apply_g(z5, params).allclose(z5)


def test_g_is_multiplicative(params):
    rng = np.random.default_rng(7)
    for _ in range(20):
        a, b = random_element(rng), random_element(rng)
        lhs = apply_g(multiply(a, b, params), params)
        rhs = multiply(apply_g(a, params), apply_g(b, params), params)
        assert lhs.allclose(rhs, tol=1e-10)


def test_rho_inverts_z(params):
    out = apply_rho(AlgebraElement.z_pow(1), params)
    assert degree_zero_part(out).allclose(LaurentPoly({-1: 1.0}))


def test_rho_is_antilinear_on_scalars(params):
    out = apply_rho(AlgebraElement.scalar(1.0j), params)
    assert degree_zero_part(out).allclose(LaurentPoly({0: -1.0j}))


def test_rho_is_multiplicative(params):
    rng = np.random.default_rng(12)
    for _ in range(20):
        a, b = random_element(rng), random_element(rng)
        lhs = apply_rho(multiply(a, b, params), params)
        rhs = multiply(apply_rho(a, params), apply_rho(b, params), params)
        assert lhs.allclose(rhs, tol=1e-10)


def test_rho_squared_is_twist_by_2k(params):
    rng = np.random.default_rng(23)
    doubled = params.with_twist(params.k, 2 * params.k)
    for _ in range(20):
        a = random_element(rng)
        lhs = apply_rho(apply_rho(a, params), params)
        rhs = apply_g(a, doubled)
        assert lhs.allclose(rhs, tol=1e-10)


def test_rho_rejects_non_self_conjugate():
    bad = AlgebraParams(q=0.5, P=LaurentPoly({1: 1.0, 0: -3.0}), k=1)
    with pytest.raises(ValueError, match="conjugate"):
        apply_rho(AlgebraElement.u(), bad)


def test_degree_zero_projection(params):
    uR = AlgebraElement.ladder(1, LaurentPoly({2: 1.0}))
    assert degree_zero_part(uR).is_zero()
    el = AlgebraElement.z_pow(-3, 7.0)
    assert degree_zero_part(el).allclose(LaurentPoly({-3: 7.0}))


@pytest.mark.parametrize("l", [-3, 0, 2, 5])
def test_relations_preserved_by_g_for_any_l(l):
    p = AlgebraParams(q=0.5, P=LaurentPoly({1: 1.0, 0: -3.0}), k=0, l=l)
    assert check_relations_preserved("g", p).max_residual < 1e-12


def test_relations_preserved_by_rho_self_conjugate(params):
    assert check_relations_preserved("rho", params).max_residual < 1e-12


def test_relations_broken_by_rho_non_self_conjugate():
    p = AlgebraParams(q=0.5, P=LaurentPoly({1: 1.0, 0: -2.0}), k=1)
    report = check_relations_preserved("rho", p)
    assert report.residuals["uv=P(q-1Z)"] > 1e-3
    assert report.max_residual > 1e-3


def test_params_validation():
    with pytest.raises(ValueError, match="q must lie"):
        AlgebraParams(q=1.5, P=LaurentPoly.one(), k=0)
    with pytest.raises(ValueError, match="nonzero"):
        AlgebraParams(q=0.5, P=LaurentPoly.zero(), k=0)
    with pytest.raises(ValueError, match="q"):
        AlgebraParams(q=0.5, P=LaurentPoly({1: 1.0, 0: -0.5}), k=0)


def test_twist_exponent_defaults_to_2k():
    p = AlgebraParams(q=0.5, P=LaurentPoly.one(), k=3)
    assert p.l == 6


def test_element_json_shape(params):
    el = AlgebraElement.ladder(2, LaurentPoly({0: 1.0}))
    doc = el.to_json_dict()
    assert doc == {"terms": {"2": {"0": [1.0, 0.0]}}}
