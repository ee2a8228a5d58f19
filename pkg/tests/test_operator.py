import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bos_spectrum.exceptions import ResonantEpsilonError
from bos_spectrum.operator import (build_truncated, compare_reflection, entry_sub, entry_sup,
                                   heun_parameters, integer_inverse, reflect_minus,
                                   sl_coefficients, validate_epsilon)

eps_st = st.floats(min_value=1e-3, max_value=1.999, allow_nan=False)


@pytest.mark.parametrize("eps,n,expected", [(1.0, 1, 0.0), (0.5, 3, 1.5), (2.0 - 1e-15, 2, 2.0)])
def test_entry_sub_hand_values(eps, n, expected):
    assert entry_sub(eps, n) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("eps,n,expected", [(1.0, 1, -1.0), (0.5, 2, -1.5), (1e-300, 5, 0.0)])
def test_entry_sup_hand_values(eps, n, expected):
    assert entry_sup(eps, n) == pytest.approx(expected, abs=1e-14)


def test_entries_reject_nonpositive_row():
    with pytest.raises(ValueError):
        entry_sub(0.5, 0)
    with pytest.raises(ValueError):
        entry_sup(0.5, 0)


def test_two_by_two_section():
    T = build_truncated(0.3, 2)
    np.testing.assert_allclose(T.to_dense(), [[1.0, -0.3], [0.3, 2.0]], rtol=0, atol=1e-15)


def test_one_by_one_section():
    assert build_truncated(0.7, 1).to_dense().tolist() == [[1.0]]


def test_row_two_of_three():
    T = build_truncated(0.5, 3).to_dense()
    assert (T[1, 0], T[1, 1], T[1, 2]) == (0.5, 2.0, -1.5)


@pytest.mark.parametrize("bad", [0, -3, 2.5, True])
def test_build_rejects_bad_size(bad):
    with pytest.raises(ValueError):
        build_truncated(0.5, bad)


@pytest.mark.parametrize("bad", [0.0, 2.0, -0.1, 2.5, float("nan")])
def test_build_rejects_epsilon_outside_interval(bad):
    with pytest.raises(ValueError, match=r"\(0, 2\)"):
        build_truncated(bad, 4)


def test_closures_touch_only_last_row():
    plain = build_truncated(0.5, 50).to_dense()
    for closure in ("asymptotic", "asymptotic-linear"):
        closed = build_truncated(0.5, 50, closure).to_dense()
        np.testing.assert_array_equal(plain[:-1], closed[:-1])
        assert not np.array_equal(plain[-1], closed[-1])


@given(eps=eps_st, N=st.integers(min_value=1, max_value=60))
@settings(max_examples=60, deadline=None)
def test_section_structure(eps, N):
    T = build_truncated(eps, N)
    n = np.arange(1, N + 1)
    assert np.array_equal(T.diag, n.astype(float))
    np.testing.assert_allclose(T.sub, 0.5 * eps * n[1:] * (n[1:] - 1), rtol=1e-15)
    np.testing.assert_allclose(T.sup, -0.5 * eps * n[:-1] * (n[:-1] + 1), rtol=1e-15)
    assert np.all(np.isfinite(T.to_dense()))


def test_theorem_mode_rejects_integer_inverse():
    assert validate_epsilon(0.5) == 0.5
    with pytest.raises(ResonantEpsilonError, match="1/ε ∈ Z") as info:
        validate_epsilon(0.5, theorem=True)
    assert info.value.integer == 2
    validate_epsilon(0.5 + 1e-6, theorem=True)
    assert integer_inverse(1.0 / 3.0) == 3
    assert integer_inverse(0.7) is None


@pytest.mark.parametrize("eps,lam,delta,eps_h,mu", [
    (0.5, 1.0, 3.0, -1.0, 4.0),
    (1.0, 0.0, 2.0, 0.0, 0.0),
    (0.4, 2.0, None, None, 10.0),
])
def test_heun_parameters_hand_values(eps, lam, delta, eps_h, mu):
    h = heun_parameters(eps, lam)
    assert (h.alpha, h.beta, h.gamma, h.a) == (1.0, 0.0, 0.0, -1.0)
    if delta is not None:
        assert h.delta == pytest.approx(delta, abs=1e-15)
        assert h.eps_h == pytest.approx(eps_h, abs=1e-15)
    assert h.mu == pytest.approx(mu, rel=1e-15)


@given(eps=eps_st, lam=st.complex_numbers(max_magnitude=1e3, allow_nan=False,
                                          allow_infinity=False))
@settings(max_examples=100, deadline=None)
def test_fuchs_relation(eps, lam):
    assert abs(heun_parameters(eps, lam).fuchs_defect()) <= 4 * np.finfo(float).eps * (1 + 1 / eps)


def test_sl_coefficients_hand_values():
    c = sl_coefficients(1.0)
    assert float(c.p(0.5)) == pytest.approx(0.25, rel=1e-15)
    assert float(c.w(0.5)) == pytest.approx(2.0 / 3.0, rel=1e-15)
    for eps in (0.3, 0.7, 1.3):
        c = sl_coefficients(eps)
        assert float(c.p(0.0)) == 1.0
        assert float(c.zw(0.0)) == 1.0
        assert float(c.q(0.3)) == 0.0
        assert float(c.p(1.0)) == 0.0 and float(c.zw(1.0)) == 0.0
        assert float(c.p(1 - 1e-9)) < 1e-9 and float(c.w(1 - 1e-9)) < 1e-3


def test_w_pole_at_origin_is_reported():
    with pytest.raises(ZeroDivisionError):
        sl_coefficients(0.5).w(0.0)
    with pytest.raises(ValueError):
        sl_coefficients(0.5).p(1.5)


# below about 0.05 the powers (1-z)**(1/eps) underflow to zero in double precision
@given(eps=st.floats(min_value=0.05, max_value=1.999))
@settings(max_examples=30, deadline=None)
def test_sl_coefficients_positive_inside(eps):
    rng = np.random.default_rng(7)
    z = rng.uniform(1e-9, 1 - 1e-9, 1000)
    c = sl_coefficients(eps)
    assert np.all(c.p(z) > 0)
    assert np.all(c.w(z) > 0)
    # z w(z) extends continuously to 1 at the origin
    assert abs(float(c.zw(1e-12)) - 1.0) < 1e-9


def test_reflection_small_sections():
    assert reflect_minus(build_truncated(0.3, 1)).to_dense().tolist() == [[-1.0]]
    assert reflect_minus(build_truncated(0.3, 2)).diag.tolist() == [-1.0, -2.0]


def test_reflection_spectrum_relation():
    T = build_truncated(0.5, 6)
    cmp = compare_reflection(T)
    # the row formula at negative indices gives exactly -T
    np.testing.assert_array_equal(reflect_minus(T).to_dense(), -T.to_dense())
    assert cmp.opposite_sign <= 1e-12
    assert cmp.same_sign > 0.1


def test_matvec_and_row_norm():
    T = build_truncated(0.7, 9)
    x = np.arange(1.0, 10.0)
    np.testing.assert_allclose(T.matvec(x), T.to_dense() @ x, rtol=1e-15)
    assert T.row_norm() == pytest.approx(np.abs(T.to_dense()).sum(axis=1).max(), rel=1e-15)
    assert math.isfinite(T.row_norm())
