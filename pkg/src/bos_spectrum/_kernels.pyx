# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.

Two kernels dominate runtime: the Francis double-shift QR sweep on a dense
upper-Hessenberg matrix, and the downward three-term recurrence evaluated for
every trial eigenvalue during root searches.  ``_fallback.py`` mirrors both
signatures in plain Python.

The double-double routines rely on exact IEEE rounding; never build this
module with ``-ffast-math``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, fma, ldexp, frexp

cnp.import_array()


# ---------------------------------------------------------------------------
# Francis double-shift QR (eigenvalues only)
# ---------------------------------------------------------------------------

cdef inline double _sign(double a, double b) nogil:
    return fabs(a) if b >= 0.0 else -fabs(a)


def hessenberg_eigvals(double[:, ::1] h, long budget=-1):
    """Eigenvalues of an upper-Hessenberg matrix.

    ``budget`` caps the total number of QR sweeps (default ``30*max(10, n)``).
    Returns ``(wr, wi, fail)`` where ``fail`` is the 0-based row being
    deflated when the budget ran out, or -1 on success.  ``h`` is overwritten.
    """
    cdef Py_ssize_t n = h.shape[0]
    wr_arr = np.zeros(n, dtype=np.float64)
    wi_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] wr = wr_arr
    cdef double[::1] wi = wi_arr
    cdef int fail = -1
    if budget < 0:
        budget = 30 * (n if n > 10 else 10)
    with nogil:
        fail = _hqr(h, n, wr, wi, budget)
    return wr_arr, wi_arr, fail


cdef int _hqr(double[:, ::1] a, Py_ssize_t n, double[::1] wr, double[::1] wi,
              long budget) nogil:
    # 0-based transcription of the classical EISPACK hqr loop
    cdef Py_ssize_t nn, m, l, k, j, i, mmin
    cdef long its, total = 0
    cdef double z = 0.0, y, x, w, v, u, t, s, r = 0.0, q = 0.0, p = 0.0, anorm

    anorm = 0.0
    for i in range(n):
        for j in range(i - 1 if i > 0 else 0, n):
            anorm += fabs(a[i, j])
    nn = n - 1
    t = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = fabs(a[l - 1, l - 1]) + fabs(a[l, l])
                if s == 0.0:
                    s = anorm
                if fabs(a[l, l - 1]) + s == s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = sqrt(fabs(q))
                x += t
                if q >= 0.0:
                    z = p + _sign(z, p)
                    wr[nn - 1] = x + z
                    wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = 0.0
                    wi[nn] = 0.0
                else:
                    wr[nn - 1] = x + p
                    wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if total >= budget:
                return <int>nn
            if its > 0 and its % 10 == 0:
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = fabs(a[nn, nn - 1]) + fabs(a[nn - 1, nn - 2])
                x = 0.75 * s
                y = x
                w = -0.4375 * s * s
            its += 1
            total += 1
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = fabs(p) + fabs(q) + fabs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = fabs(a[m, m - 1]) * (fabs(q) + fabs(r))
                v = fabs(p) * (fabs(a[m - 1, m - 1]) + fabs(z) + fabs(a[m + 1, m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i, i - 2] = 0.0
                if i != m + 2:
                    a[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = 0.0
                    if k != nn - 1:
                        r = a[k + 2, k - 1]
                    x = fabs(p) + fabs(q) + fabs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = _sign(sqrt(p * p + q * q + r * r), p)
                if s != 0.0:
                    if k == m:
                        if l != m:
                            a[k, k - 1] = -a[k, k - 1]
                    else:
                        a[k, k - 1] = -s * x
                    p += s
                    x = p / s
                    y = q / s
                    z = r / s
                    q /= p
                    r /= p
                    for j in range(k, nn + 1):
                        p = a[k, j] + q * a[k + 1, j]
                        if k != nn - 1:
                            p += r * a[k + 2, j]
                            a[k + 2, j] -= p * z
                        a[k + 1, j] -= p * y
                        a[k, j] -= p * x
                    mmin = nn if nn < k + 3 else k + 3
                    for i in range(l, mmin + 1):
                        p = x * a[i, k] + y * a[i, k + 1]
                        if k != nn - 1:
                            p += z * a[i, k + 2]
                            a[i, k + 2] -= p * r
                        a[i, k + 1] -= p * q
                        a[i, k] -= p
            if l >= nn - 1:
                break
    return -1


# ---------------------------------------------------------------------------
# double-double arithmetic
# ---------------------------------------------------------------------------

cdef struct dd:
    double hi
    double lo

cdef struct cdd:
    dd re
    dd im


cdef inline dd _two_sum(double a, double b) nogil:
    cdef dd r
    cdef double bb
    r.hi = a + b
    bb = r.hi - a
    r.lo = (a - (r.hi - bb)) + (b - bb)
    return r

cdef inline dd _quick(double a, double b) nogil:
    cdef dd r
    r.hi = a + b
    r.lo = b - (r.hi - a)
    return r

cdef inline dd _add(dd x, dd y) nogil:
    cdef dd s = _two_sum(x.hi, y.hi)
    cdef dd t = _two_sum(x.lo, y.lo)
    s.lo += t.hi
    s = _quick(s.hi, s.lo)
    s.lo += t.lo
    return _quick(s.hi, s.lo)

cdef inline dd _neg(dd x) nogil:
    x.hi = -x.hi
    x.lo = -x.lo
    return x

cdef inline dd _mul(dd x, dd y) nogil:
    cdef double p = x.hi * y.hi
    cdef double e = fma(x.hi, y.hi, -p)
    e += x.hi * y.lo + x.lo * y.hi
    return _quick(p, e)

cdef inline dd _div(dd x, dd y) nogil:
    cdef double q1 = x.hi / y.hi
    cdef dd r = _add(x, _neg(_mul(_dd(q1), y)))
    cdef double q2 = r.hi / y.hi
    r = _add(r, _neg(_mul(_dd(q2), y)))
    cdef double q3 = r.hi / y.hi
    return _add(_quick(q1, q2), _dd(q3))

cdef inline dd _dd(double a) nogil:
    cdef dd r
    r.hi = a
    r.lo = 0.0
    return r

cdef inline dd _scale(dd x, int e) nogil:
    x.hi = ldexp(x.hi, e)
    x.lo = ldexp(x.lo, e)
    return x

cdef inline cdd _cmul(cdd a, cdd b) nogil:
    cdef cdd r
    r.re = _add(_mul(a.re, b.re), _neg(_mul(a.im, b.im)))
    r.im = _add(_mul(a.re, b.im), _mul(a.im, b.re))
    return r

cdef inline cdd _cmul_real(cdd a, dd b) nogil:
    cdef cdd r
    r.re = _mul(a.re, b)
    r.im = _mul(a.im, b)
    return r

cdef inline cdd _cadd(cdd a, cdd b) nogil:
    cdef cdd r
    r.re = _add(a.re, b.re)
    r.im = _add(a.im, b.im)
    return r

cdef inline cdd _cdiv_real(cdd a, dd b) nogil:
    cdef cdd r
    r.re = _div(a.re, b)
    r.im = _div(a.im, b)
    return r

cdef inline cdd _cscale(cdd a, int e) nogil:
    a.re = _scale(a.re, e)
    a.im = _scale(a.im, e)
    return a


# ---------------------------------------------------------------------------
# downward recurrence
# ---------------------------------------------------------------------------

DEF _RESCALE = 600


def backward_recurrence(double eps, double complex lam, Py_ssize_t m,
                        double complex v_m, double complex v_m1,
                        Py_ssize_t n_out, bint extended=False,
                        double complex v_m1_lo=0j):
    """Run the eigenvalue recurrence downward from indices ``m+1, m``.

    ``v_m1_lo`` is a low-order correction to ``v_m1`` used only by the
    double-double path.  Returns ``(v, e)`` with ``v[k]`` holding entry
    ``k+1`` for ``k < n_out`` and the true sequence equal to ``v * 2**e``.
    """
    if n_out > m + 1:
        raise ValueError("n_out must not exceed m + 1")
    out = np.zeros(n_out, dtype=np.complex128)
    exps = np.zeros(n_out, dtype=np.int64)
    cdef double complex[::1] o = out
    cdef long long[::1] ex = exps
    cdef long long e = 0
    if extended:
        e = _backward_dd(eps, lam, m, v_m, v_m1, v_m1_lo, n_out, o, ex)
    else:
        e = _backward_d(eps, lam, m, v_m, v_m1, n_out, o, ex)
    # put every stored entry on the final exponent
    cdef Py_ssize_t k
    for k in range(n_out):
        if ex[k] != e:
            o[k] = ldexp(o[k].real, <int>(ex[k] - e)) + 1j * ldexp(o[k].imag, <int>(ex[k] - e))
    return out, int(e)


cdef long long _backward_d(double eps, double complex lam, Py_ssize_t m,
                           double complex v_m, double complex v_m1,
                           Py_ssize_t n_out, double complex[::1] o,
                           long long[::1] ex) nogil:
    cdef double h = 0.5 * eps
    cdef double complex a2 = v_m1   # index n + 2
    cdef double complex a1 = v_m    # index n + 1
    cdef double complex vn
    cdef Py_ssize_t n
    cdef long long e = 0
    cdef double mag
    cdef double nn
    if m + 1 <= n_out:
        o[m] = v_m1
        ex[m] = 0
    if m <= n_out:
        o[m - 1] = v_m
        ex[m - 1] = 0
    n = m - 1
    while n >= 1:
        nn = <double>n
        vn = (h * (nn + 1.0) * (nn + 2.0) * a2 + (lam - nn - 1.0) * a1) / (h * nn * (nn + 1.0))
        a2 = a1
        a1 = vn
        mag = fabs(vn.real) + fabs(vn.imag)
        if mag > 1e180:
            a1 = ldexp(vn.real, -_RESCALE) + 1j * ldexp(vn.imag, -_RESCALE)
            a2 = ldexp(a2.real, -_RESCALE) + 1j * ldexp(a2.imag, -_RESCALE)
            e += _RESCALE
        elif mag < 1e-180 and mag != 0.0:
            a1 = ldexp(vn.real, _RESCALE) + 1j * ldexp(vn.imag, _RESCALE)
            a2 = ldexp(a2.real, _RESCALE) + 1j * ldexp(a2.imag, _RESCALE)
            e -= _RESCALE
        if n <= n_out:
            o[n - 1] = a1
            ex[n - 1] = e
        n -= 1
    return e


cdef long long _backward_dd(double eps, double complex lam, Py_ssize_t m,
                            double complex v_m, double complex v_m1,
                            double complex v_m1_lo,
                            Py_ssize_t n_out, double complex[::1] o,
                            long long[::1] ex) nogil:
    cdef dd h = _dd(0.5 * eps)
    cdef cdd a2, a1, vn, coef_l
    cdef dd lam_re = _dd(lam.real)
    cdef dd up, down
    cdef Py_ssize_t n
    cdef long long e = 0
    cdef double mag
    a2.re = _add(_dd(v_m1.real), _dd(v_m1_lo.real))
    a2.im = _add(_dd(v_m1.imag), _dd(v_m1_lo.imag))
    a1.re = _dd(v_m.real)
    a1.im = _dd(v_m.imag)
    if m + 1 <= n_out:
        o[m] = v_m1
        ex[m] = 0
    if m <= n_out:
        o[m - 1] = v_m
        ex[m - 1] = 0
    n = m - 1
    while n >= 1:
        # integer products are exact in double for n < 2**26
        up = _mul(h, _dd(<double>((n + 1) * (n + 2))))
        down = _mul(h, _dd(<double>(n * (n + 1))))
        coef_l.re = _add(lam_re, _dd(-<double>(n + 1)))
        coef_l.im = _dd(lam.imag)
        vn = _cadd(_cmul_real(a2, up), _cmul(coef_l, a1))
        vn = _cdiv_real(vn, down)
        a2 = a1
        a1 = vn
        mag = fabs(vn.re.hi) + fabs(vn.im.hi)
        if mag > 1e180:
            a1 = _cscale(a1, -_RESCALE)
            a2 = _cscale(a2, -_RESCALE)
            e += _RESCALE
        elif mag < 1e-180 and mag != 0.0:
            a1 = _cscale(a1, _RESCALE)
            a2 = _cscale(a2, _RESCALE)
            e -= _RESCALE
        if n <= n_out:
            o[n - 1] = (a1.re.hi + a1.re.lo) + 1j * (a1.im.hi + a1.im.lo)
            ex[n - 1] = e
        n -= 1
    return e
