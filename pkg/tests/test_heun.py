import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bos_spectrum.exceptions import ConvergenceError, ResonantEpsilonError
from bos_spectrum.heun import (K_MAX, connection_at, connection_fit, connection_roots,
                               heun_residual, overlap_points, sample_overlap, series_at_0,
                               series_at_1)
from bos_spectrum.operator import heun_parameters
from bos_spectrum.recurrence import find_real_roots, forward_run


def test_series_at_origin_hand_values():
    s = series_at_0(heun_parameters(0.5, 1.0), 3)
    np.testing.assert_allclose(s.coeffs, [1.0, 0.0, 1.0 / 3.0], atol=1e-15)
    assert s.exponent == 1.0 and s.center == 0.0 and s.radius == 1.0


def test_series_at_origin_only_exponent_one():
    with pytest.raises(ValueError):
        series_at_0(heun_parameters(0.7, 1.0), 10, branch=0)


@given(eps=st.floats(min_value=0.05, max_value=1.95),
       lam=st.complex_numbers(max_magnitude=40, allow_nan=False, allow_infinity=False))
@settings(max_examples=60, deadline=None)
def test_series_matches_forward_recurrence(eps, lam):
    c = series_at_0(heun_parameters(eps, lam), 20).coeffs
    v = forward_run(eps, lam, 20).v
    assert c[0] == 1
    assert np.max(np.abs(c - v)) <= 1e-12 * max(1.0, np.max(np.abs(v)))


def test_origin_residual_drops_with_K():
    p = heun_parameters(0.7, 2.3)
    res = [float(heun_residual(p, series_at_0(p, K), [0.1])[0]) for K in (3, 6, 12)]
    assert res[0] > res[1] > res[2] or res[2] <= 1e-15
    assert res[2] <= 1e-10


def test_regular_solution_at_one():
    p = heun_parameters(0.7, 3.0)
    u1 = series_at_1(p, 0, 30)
    assert u1.coeffs[0] == 1
    assert u1(1.0)[0] == 1.0


def test_singular_solution_blows_up():
    p = heun_parameters(0.5, 3.0)
    u2 = series_at_1(p, "singular", 40, allow_resonant=True)
    assert abs(u2(1 - 1e-4)[0]) >= 1e8
    u2 = series_at_1(heun_parameters(0.7, 3.0), -1 / 0.7, 40)
    assert abs(u2(1 - 1e-4)[0]) >= 1e4 ** (1 / 0.7) * 0.5


@pytest.mark.parametrize("eps", [0.5, 1.0, 1.0 / 3.0])
def test_resonant_epsilon_rejected(eps):
    with pytest.raises(ResonantEpsilonError) as info:
        series_at_1(heun_parameters(eps, 1.0), 0, 20)
    assert info.value.integer == round(1 / eps)
    assert str(info.value.integer) in str(info.value)


def test_bad_exponent_choice():
    with pytest.raises(ValueError):
        series_at_1(heun_parameters(0.7, 1.0), 0.5, 20)


@pytest.mark.parametrize("choice", [0, "singular"])
def test_residual_near_one(choice):
    p = heun_parameters(0.7, 2.0)
    assert heun_residual(p, series_at_1(p, choice, 60), [0.9])[0] <= 1e-8


@pytest.mark.parametrize("eps", [0.5, 1.0 / 3.0, 1.0])
def test_logarithmic_solution_solves_equation(eps):
    p = heun_parameters(eps, 4.2)
    u2 = series_at_1(p, "singular", 80, allow_resonant=True)
    assert u2.log_coeff != 0
    z = 1 - 0.3 * np.exp(1j * np.linspace(0.3, 2 * np.pi - 0.3, 9))
    assert np.max(heun_residual(p, u2, z)) <= 1e-10


@pytest.mark.parametrize("eps,center", [(0.7, 0.0), (0.7, 1.0), (1.3, 0.0), (1.3, 1.0)])
def test_residual_geometric_in_K(eps, center):
    p = heun_parameters(eps, 5.0)
    z = center + 0.3 * np.exp(1j * np.linspace(0, 2 * np.pi, 16, endpoint=False))
    if center == 1.0:
        z = z[np.abs(np.angle(1 - z)) < 3.0]
    build = (lambda K: series_at_0(p, K)) if center == 0 else (lambda K: series_at_1(p, 0, K))
    res = [np.max(heun_residual(p, build(K), z)) for K in (5, 10, 20)]
    assert res[1] < 0.1 * res[0] and (res[2] < 0.1 * res[1] or res[2] < 1e-13)


def test_overlap_points_margin():
    z = overlap_points()
    assert z.size == 12
    assert np.all(np.abs(z) <= 0.8) and np.all(np.abs(z - 1) <= 0.8)
    with pytest.raises(ValueError):
        overlap_points(radius=0.45)


def test_fit_exact_representation():
    s = sample_overlap(0.7, 2.0)
    fit = connection_fit(s.u1, s.u1, s.u2)
    assert abs(fit.a - 1) <= 1e-12 and abs(fit.b) <= 1e-12
    assert fit.residual <= 1e-12


def test_fit_preconditions():
    s = sample_overlap(0.7, 2.0)
    with pytest.raises(ValueError):
        connection_fit(s.u[:5], s.u1[:5], s.u2[:5])
    with pytest.raises(ConvergenceError):
        connection_fit(s.u, s.u1, 2 * s.u1)


def test_adaptive_truncation_is_capped():
    s = sample_overlap(0.7, 2.0)
    assert 4 < s.terms_used <= K_MAX


@pytest.fixture(scope="module")
def roots_half():
    return find_real_roots(0.5, (0.1, 10.0))


def test_connection_vanishes_at_first_eigenvalue(roots_half):
    assert connection_at(0.5, roots_half[0], allow_resonant=True).ratio <= 1e-6


def test_connection_large_at_first_midpoint(roots_half):
    mid = 0.5 * (roots_half[0] + roots_half[1])
    assert connection_at(0.5, mid, allow_resonant=True).ratio >= 1e-2


def test_connection_continuity():
    lam0, delta = 2.0, 1e-4
    b0 = connection_at(0.7, lam0).b
    d1 = abs(connection_at(0.7, lam0 + delta).b - b0)
    d2 = abs(connection_at(0.7, lam0 + 2 * delta).b - b0)
    assert d1 > 0
    assert d2 / d1 == pytest.approx(2.0, rel=1e-2)


def test_connection_zeros_match_shooting():
    ref = find_real_roots(1.3, (0.1, 12.0))
    got = connection_roots(1.3, (0.1, 12.0))
    assert len(got) == len(ref) == 3
    np.testing.assert_allclose(got, ref, rtol=1e-6)
