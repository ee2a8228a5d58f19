import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bos_spectrum.eigensolver import (EigenPair, SpectrumResult, balance, eigen_all, eigenvalues,
                                      filter_stable, inverse_iteration)
from bos_spectrum.exceptions import ConvergenceError
from bos_spectrum.operator import TridiagonalOperator, build_truncated


def test_two_by_two_real_pair():
    lams = eigenvalues(build_truncated(0.3, 2))
    np.testing.assert_allclose(lams.real, [1.1, 1.9], rtol=0, atol=1e-12)
    assert np.all(lams.imag == 0)


def test_one_by_one():
    assert eigenvalues(build_truncated(1.3, 1)).tolist() == [1.0]


def test_two_by_two_complex_pair():
    lams = eigenvalues(build_truncated(0.7, 2))
    root = math.sqrt(4 * 0.49 - 1)
    expected = np.array([(3 - 1j * root) / 2, (3 + 1j * root) / 2])
    np.testing.assert_allclose(lams, expected, rtol=0, atol=1e-12)


def test_balance_small_cases():
    b = balance(build_truncated(0.3, 2)).operator
    np.testing.assert_allclose(b.to_dense(), [[1, -0.3], [0.3, 2]], atol=1e-15)
    b = balance(build_truncated(0.5, 3)).operator
    assert abs(b.sub[1]) == pytest.approx(1.5, rel=1e-15)
    assert abs(b.sup[1]) == pytest.approx(1.5, rel=1e-15)


def test_balance_equalizes_general_tridiagonal():
    rng = np.random.default_rng(3)
    n = 12
    sub = rng.uniform(0.1, 10, n - 1)
    sup = -rng.uniform(0.1, 10, n - 1)
    T = TridiagonalOperator(sub, np.arange(1.0, n + 1), sup, 0.5)
    bal = balance(T)
    np.testing.assert_allclose(np.abs(bal.operator.sub), np.abs(bal.operator.sup), rtol=1e-14)
    assert np.all(bal.operator.sub > 0) and np.all(bal.operator.sup < 0)
    ref = np.sort_complex(np.linalg.eigvals(T.to_dense()))
    np.testing.assert_allclose(np.sort_complex(eigenvalues(T)), ref, rtol=1e-11, atol=1e-11)
    # eigenvectors map back through the recorded scaling
    lam = eigenvalues(bal.operator)[0]
    vb, _ = inverse_iteration(bal.operator, lam)
    v = bal.to_original(vb)
    assert np.linalg.norm(T.matvec(v) - lam * v) <= 1e-9 * np.linalg.norm(v) * T.row_norm()


def test_balance_preserves_spectrum_eight_by_eight():
    T = build_truncated(0.7, 8)
    a = np.sort_complex(np.linalg.eigvals(T.to_dense()))
    b = np.sort_complex(np.linalg.eigvals(balance(T).operator.to_dense()))
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


@pytest.mark.parametrize("eps", [0.3, 0.5, 0.7, 1.3])
@pytest.mark.parametrize("N", [4, 16, 32, 64])
def test_qr_matches_lapack(eps, N):
    T = build_truncated(eps, N)
    ours = eigenvalues(T)
    ref = np.linalg.eigvals(balance(T).operator.to_dense())
    ref = ref[np.lexsort((ref.imag, ref.real))]
    # sensitive eigenvalues of the non-normal section limit the agreement
    scale = 1e-11 * (1 + np.abs(ref)) * max(1.0, N / 4) ** 4
    assert np.all(np.abs(ours - ref) <= scale)


def test_sorted_and_deterministic():
    T = build_truncated(0.5, 200)
    a = eigenvalues(T)
    b = eigenvalues(T)
    assert a.tobytes() == b.tobytes()
    key = list(zip(a.real, a.imag))
    assert key == sorted(key)


def test_budget_exhaustion_names_row():
    with pytest.raises(ConvergenceError) as info:
        eigenvalues(build_truncated(0.5, 50), budget=1)
    assert info.value.index is not None and 1 <= info.value.index <= 50


def test_eigen_all_counts_and_vectors():
    T = build_truncated(0.5, 60, "asymptotic-linear")
    res = eigen_all(T, want_vectors=True, indices=[0, 1, 2])
    assert isinstance(res, SpectrumResult) and len(res.pairs) == 60
    for p in res.pairs[:3]:
        assert abs(np.linalg.norm(p.vector) - 1) <= 1e-12
        assert p.residual <= 1e-10 * (1 + abs(p.lam)) * T.row_norm()
    assert res.pairs[5].vector is None


def test_filter_identical_keeps_all():
    res = eigen_all(build_truncated(0.5, 10))
    assert len(filter_stable(res, res, 1e-14)) == 10
    assert all(p.stable for p in filter_stable(res, res, 1e-14))


@pytest.mark.parametrize("closure", ["none", "asymptotic", "asymptotic-linear"])
def test_filter_forty_versus_eighty_is_real(closure):
    small = eigen_all(build_truncated(0.5, 40, closure))
    large = eigen_all(build_truncated(0.5, 80, closure))
    kept = filter_stable(small, large, 1e-8)
    assert all(abs(p.lam.imag) <= 1e-8 * (1 + abs(p.lam)) for p in kept)
    if closure == "asymptotic-linear":
        # the tail closure makes the lowest eigenvalues settle already at N=40
        assert [round(p.lam.real, 6) for p in kept] == [1.167235, 2.968445]


def test_filter_disjoint_and_mismatched_epsilon():
    a = SpectrumResult(0.5, 2, [EigenPair(1.0), EigenPair(2.0)])
    b = SpectrumResult(0.5, 2, [EigenPair(5.0), EigenPair(7.0)])
    assert filter_stable(a, b, 1e-12) == []
    with pytest.raises(ValueError):
        filter_stable(a, SpectrumResult(0.7, 2, [EigenPair(1.0)]), 1e-8)


@given(eps=st.floats(min_value=0.05, max_value=1.95), N=st.integers(min_value=1, max_value=30))
@settings(max_examples=40, deadline=None)
def test_trace_and_conjugate_closure(eps, N):
    lams = eigenvalues(build_truncated(eps, N))
    assert len(lams) == N
    assert abs(lams.sum().real - N * (N + 1) / 2) <= 1e-9 * N * N
    # real matrix: the spectrum is closed under conjugation
    np.testing.assert_allclose(np.sort_complex(lams), np.sort_complex(lams.conj()),
                               atol=1e-8 * N * N)


def test_inverse_iteration_phase_and_residual():
    T = build_truncated(1.3, 300, "asymptotic-linear")
    lam = eigenvalues(T)[0]
    v, res = inverse_iteration(T, lam)
    first = v[np.flatnonzero(np.abs(v) > 0)[0]]
    assert first.imag == 0 and first.real > 0
    assert res <= 1e-10 * T.row_norm()
