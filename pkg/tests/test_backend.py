import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bos_spectrum import _backend, _fallback
from bos_spectrum.eigensolver import balance
from bos_spectrum.operator import build_truncated

kernels = pytest.importorskip("bos_spectrum._kernels")
IMPLS = [kernels, _fallback]


def _sorted(wr, wi):
    lam = wr + 1j * wi
    return lam[np.lexsort((lam.imag, lam.real))]


def test_compiled_backend_selected():
    assert _backend.COMPILED
    assert _backend.hessenberg_eigvals is kernels.hessenberg_eigvals


@pytest.mark.parametrize("impl", IMPLS)
def test_hessenberg_random_matrix(impl):
    rng = np.random.default_rng(1)
    h = np.triu(rng.standard_normal((30, 30)), -1)
    wr, wi, fail = impl.hessenberg_eigvals(np.ascontiguousarray(h.copy()))
    assert fail == -1
    ref = np.linalg.eigvals(h)
    np.testing.assert_allclose(_sorted(wr, wi), ref[np.lexsort((ref.imag, ref.real))],
                               atol=1e-10)


@given(eps=st.floats(min_value=0.1, max_value=1.9), N=st.integers(min_value=1, max_value=40))
@settings(max_examples=30, deadline=None)
def test_compiled_and_fallback_agree_on_sections(eps, N):
    h = balance(build_truncated(eps, N, "asymptotic-linear")).operator.to_dense()
    a = kernels.hessenberg_eigvals(np.ascontiguousarray(h.copy()))
    b = _fallback.hessenberg_eigvals(np.ascontiguousarray(h.copy()))
    assert a[2] == b[2] == -1
    np.testing.assert_allclose(_sorted(a[0], a[1]), _sorted(b[0], b[1]),
                               atol=1e-9 * (1 + np.max(np.abs(h))))


@pytest.mark.parametrize("impl", IMPLS)
def test_budget_exhaustion_reports_row(impl):
    h = balance(build_truncated(0.5, 20)).operator.to_dense()
    _, _, fail = impl.hessenberg_eigvals(np.ascontiguousarray(h.copy()), 0)
    assert 0 <= fail < 20


def _mp_reference(eps, lam, m, v_m, v_m1, n_out):
    with mpmath.workdps(50):
        h = mpmath.mpf(eps) / 2
        lam = mpmath.mpc(lam)
        a2, a1 = mpmath.mpc(v_m1), mpmath.mpc(v_m)
        out = {}
        for n in range(m - 1, 0, -1):
            vn = (h * (n + 1) * (n + 2) * a2 + (lam - n - 1) * a1) / (h * n * (n + 1))
            a2, a1 = a1, vn
            if n <= n_out:
                out[n] = vn
        return np.array([complex(out[k] / out[1]) for k in range(1, n_out + 1)])


@pytest.mark.parametrize("impl", IMPLS)
@pytest.mark.parametrize("extended", [False, True])
def test_backward_recurrence_against_reference(impl, extended):
    eps, lam, m = 0.7, 6.1 + 0.4j, 900
    ref = _mp_reference(eps, lam, m, 1.0, -0.99, 8)
    v, e = impl.backward_recurrence(eps, lam, m, 1.0 + 0j, -0.99 + 0j, 8, extended)
    got = v / v[0]
    tol = 1e-13 if extended else 1e-9
    np.testing.assert_allclose(got, ref, rtol=tol, atol=tol * np.max(np.abs(ref)))


@pytest.mark.parametrize("extended", [False, True])
def test_backward_recurrence_scaling_consistent(extended):
    # small eps makes the values span far beyond the double range
    eps, lam, m = 0.05, 3.0, 3000
    a, ea = kernels.backward_recurrence(eps, lam, m, 1.0 + 0j, -0.9 + 0j, 6, extended)
    b, eb = _fallback.backward_recurrence(eps, lam, m, 1.0 + 0j, -0.9 + 0j, 6, extended)
    np.testing.assert_allclose(a / a[0], b / b[0], rtol=1e-9)
    ratio = np.log2(abs(a[0])) + ea - (np.log2(abs(b[0])) + eb)
    assert abs(ratio) < 1e-6


def test_backward_recurrence_rejects_long_output():
    for impl in IMPLS:
        with pytest.raises(ValueError):
            impl.backward_recurrence(0.5, 1.0, 10, 1.0, 0.0, 12)
