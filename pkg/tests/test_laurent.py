import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtrace.laurent import (
    BilateralSeries,
    LaurentPoly,
    conj_invol,
    ct,
    kernel_basis,
    left_inverse,
    right_inverse,
    roots,
    scale_arg,
    solve_division,
)


def series_from(coeffs: dict, window):
    s = BilateralSeries.zeros(window)
    for e, c in coeffs.items():
        s.coeffs[e - s.lo] = c
    return s


# ---------------------------------------------------------------- ct


def test_ct_reads_off_constant_coefficient():
    p = LaurentPoly({-2: 3.0, 0: 5.0, 1: 2.0})
    assert ct(p) == 5.0


def test_ct_zero_series():
    assert ct(LaurentPoly.zero()) == 0.0
    assert ct(BilateralSeries.zeros((-4, 4))) == 0.0


def test_ct_of_p_times_right_inverse_is_one():
    p = LaurentPoly({1: 1.0, 0: -2.0})
    inv = right_inverse(p, (0, 64))
    prod = inv.mul_poly(p)
    assert abs(ct(prod) - 1.0) < 1e-10
    interior = prod.interior(2)
    # delta at z^0 only
    interior[0 - (prod.lo + 2)] -= 1.0
    assert np.max(np.abs(interior)) < 1e-10


# ---------------------------------------------------------------- scale_arg


def test_scale_arg_direct():
    p = LaurentPoly({1: 1.0, -1: 1.0})
    out = scale_arg(p, 0.5)
    assert out.get(1) == pytest.approx(0.5)
    assert out.get(-1) == pytest.approx(2.0)


def test_scale_arg_identity():
    p = LaurentPoly({3: 2.0, -2: 1.0 + 1.0j})
    assert scale_arg(p, 1.0) == p


def test_scale_arg_rejects_zero():
    with pytest.raises(ValueError):
        scale_arg(LaurentPoly.one(), 0.0)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(
        st.complex_numbers(max_magnitude=5.0, allow_nan=False, allow_infinity=False),
        min_size=17,
        max_size=17,
    ),
    st.floats(min_value=0.2, max_value=3.0),
)
def test_scale_arg_preserves_ct(vals, factor):
    s = BilateralSeries(-8, 8, np.array(vals, dtype=complex))
    assert ct(scale_arg(s, factor)) == ct(s)


# ---------------------------------------------------------------- conj_invol


def test_conj_invol_fixes_real_palindromic():
    p = LaurentPoly({1: 1.0, -1: 1.0, 0: -2.0333})
    assert conj_invol(p) == p


def test_conj_invol_direct():
    out = conj_invol(LaurentPoly({1: 1.0j}))
    assert out.get(-1) == pytest.approx(-1.0j)


@settings(max_examples=50, deadline=None)
@given(
    st.dictionaries(
        st.integers(min_value=-6, max_value=6),
        st.complex_numbers(max_magnitude=10.0, allow_nan=False, allow_infinity=False),
        max_size=8,
    )
)
def test_conj_invol_is_involution(d):
    p = LaurentPoly(d)
    assert conj_invol(conj_invol(p)).allclose(p)


# ---------------------------------------------------------------- roots


def test_roots_of_flagship_quadratic():
    s = 1.2 + 1.0 / 1.2
    rd = roots(LaurentPoly({1: 1.0, -1: 1.0, 0: -s}))
    locs = sorted(abs(r) for r, _ in rd.roots)
    assert locs == pytest.approx([1.0 / 1.2, 1.2], abs=1e-9)
    assert all(m == 1 for _, m in rd.roots)
    assert rd.n == 2


def test_roots_linear():
    rd = roots(LaurentPoly({1: 1.0, 0: -2.0}))
    assert rd.roots[0][0] == pytest.approx(2.0)
    assert rd.roots[0][1] == 1


def test_roots_double_root_clusters():
    p = LaurentPoly.from_roots([2.0, 2.0], min_exp=-1)
    rd = roots(p, cluster_tol=1e-6)
    assert len(rd.roots) == 1
    r, mult = rd.roots[0]
    assert mult == 2
    assert r == pytest.approx(2.0, abs=1e-6)


def test_roots_reconstruction_matches_on_circle():
    rng = np.random.default_rng(11)
    locs = 0.8 + rng.random(3) * 1.5
    p = LaurentPoly.from_roots(locs, leading=1.3 - 0.2j, min_exp=-1)
    rd = roots(p)
    assert rd.max_residual_on_circle(p) < 1e-8


def test_roots_rejects_zero_poly():
    with pytest.raises(ValueError):
        roots(LaurentPoly.zero())


# ---------------------------------------------------------------- inverses


def test_right_inverse_geometric_series():
    inv = right_inverse(LaurentPoly({1: 1.0, 0: -2.0}), (0, 32))
    expect = [-0.5 * 0.5 ** t for t in range(6)]
    assert np.allclose(inv.coeffs[:6], expect)


def test_right_inverse_of_one():
    inv = right_inverse(LaurentPoly.one(), (0, 8))
    assert inv.get(0) == 1.0
    assert np.max(np.abs(inv.coeffs[1:])) == 0.0


def test_left_inverse_geometric_series():
    inv = left_inverse(LaurentPoly({1: 1.0, 0: -2.0}), (-32, 0))
    # z^-1 (1 + 2 z^-1 + 4 z^-2 + ...)
    assert inv.get(0) == 0.0
    assert inv.get(-1) == pytest.approx(1.0)
    assert inv.get(-2) == pytest.approx(2.0)
    assert inv.get(-3) == pytest.approx(4.0)


@pytest.mark.parametrize("side", ["right", "left"])
def test_inverse_residual_random_cubic(side):
    rng = np.random.default_rng(3)
    p = LaurentPoly.from_roots(0.8 + rng.random(3), leading=1.1)
    if side == "right":
        inv = right_inverse(p, (0, 48))
    else:
        inv = left_inverse(p, (-48, 0))
    prod = inv.mul_poly(p)
    assert abs(ct(prod) - 1.0) < 1e-12
    interior = prod.interior(p.spread + 1).copy()
    if prod.lo + p.spread + 1 <= 0 <= prod.hi - p.spread - 1:
        interior[0 - (prod.lo + p.spread + 1)] -= 1.0
    assert np.max(np.abs(interior)) < 1e-12


# ---------------------------------------------------------------- kernel


def test_kernel_single_root_is_geometric():
    rd = roots(LaurentPoly({1: 1.0, 0: -2.0}))
    (f,) = kernel_basis(rd, (-16, 16))
    ls = np.arange(-16, 17)
    assert np.allclose(f.coeffs, 2.0 ** (-ls.astype(float)))


def test_kernel_two_roots_annihilated():
    p = LaurentPoly.from_roots([2.0, 3.0], min_exp=-1)
    basis = kernel_basis(roots(p), (-64, 64))
    assert len(basis) == 2
    for f in basis:
        pf = f.mul_poly(p)
        assert np.max(np.abs(pf.interior(p.spread))) <= 1e-10 * f.max_abs()


def test_kernel_size_and_independence_random_roots():
    rng = np.random.default_rng(7)
    locs = (0.7 + rng.random(4)) * np.exp(2j * np.pi * rng.random(4))
    p = LaurentPoly.from_roots(locs, min_exp=-2)
    rd = roots(p)
    basis = kernel_basis(rd, (-64, 64))
    assert len(basis) == rd.n == 4
    cols = np.column_stack(
        [f.coeffs / np.linalg.norm(f.coeffs) for f in basis]
    )
    sv = np.linalg.svd(cols, compute_uv=False)
    assert sv[-1] > 1e-8


def test_kernel_multiplicity_uses_falling_factorials():
    p = LaurentPoly.from_roots([2.0, 2.0])
    basis = kernel_basis(roots(p, cluster_tol=1e-6), (-48, 48))
    assert len(basis) == 2
    for f in basis:
        pf = f.mul_poly(p)
        assert np.max(np.abs(pf.interior(p.spread))) <= 1e-10 * f.max_abs()


def test_kernel_rejects_root_at_zero():
    from qtrace.laurent import RootData

    rd = RootData(roots=((0.0 + 0j, 1),), leading_exponent=0, leading_coeff=1.0)
    with pytest.raises(ValueError):
        kernel_basis(rd, (-8, 8))


# ---------------------------------------------------------------- division


def test_solve_division_target_p_itself():
    p = LaurentPoly({1: 1.0, 0: -2.0})
    target = BilateralSeries.from_poly(p, (-24, 24))
    s = solve_division(target, p)
    resid = s.mul_poly(p) - target
    assert np.max(np.abs(resid.interior(p.spread + 1))) < 1e-10


def test_solve_division_zero_target():
    p = LaurentPoly({1: 1.0, 0: -2.0})
    s = solve_division(BilateralSeries.zeros((-8, 8)), p)
    assert s.max_abs() == 0.0


def test_solve_division_random_target():
    rng = np.random.default_rng(5)
    p = LaurentPoly({1: 1.0, 0: -2.0})
    target = BilateralSeries.zeros((-16, 16))
    target.coeffs[:] = rng.normal(size=33) + 1j * rng.normal(size=33)
    s = solve_division(target, p)
    resid = s.mul_poly(p) - target
    assert np.max(np.abs(resid.interior(p.spread + 1))) < 1e-9 * target.max_abs()


# ---------------------------------------------------------------- structural


def test_poly_canonical_pruning():
    p = LaurentPoly({0: 1.0, 5: 1e-16})
    assert p.get(5) == 0.0
    assert p.max_exp == 0


def test_series_windows_intersect_on_add():
    a = BilateralSeries.zeros((-4, 8))
    b = BilateralSeries.zeros((-8, 4))
    c = a + b
    assert c.window == (-4, 4)
    assert "[-4,4]" in c.truncation_note


def test_series_requires_zero_in_window():
    with pytest.raises(ValueError):
        BilateralSeries.zeros((2, 8))


def test_poly_json_roundtrip():
    p = LaurentPoly({-1: 1.0, 0: -2.0333 + 0.25j, 1: 1.0})
    assert LaurentPoly.from_json_dict(p.to_json_dict()).allclose(p)
