"""Pure-Python versions of the compiled kernels.

Same signatures and return conventions as ``_kernels``.  The QR sweep
vectorizes the row/column updates with numpy; the extended-precision
recurrence uses mpmath at 32 significant digits instead of double-double.
"""
import math

import mpmath
import numpy as np


def hessenberg_eigvals(h, budget=-1):
    """Eigenvalues of an upper-Hessenberg matrix (overwrites ``h``).

    ``budget`` caps the total number of QR sweeps (default ``30*max(10, n)``).
    Returns ``(wr, wi, fail)``; ``fail`` is the 0-based row being deflated
    when the budget ran out, or -1.
    """
    a = h
    n = a.shape[0]
    if budget < 0:
        budget = 30 * max(10, n)
    total = 0
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = float(np.sum(np.abs(np.triu(a, -1))))
    nn = n - 1
    t = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) + s == s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if total >= budget:
                return wr, wi, nn
            if its > 0 and its % 10 == 0:
                t += x
                idx = np.arange(nn + 1)
                a[idx, idx] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
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
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
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
                    r = a[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
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
                third = k != nn - 1
                pr = a[k, k:nn + 1] + q * a[k + 1, k:nn + 1]
                if third:
                    pr = pr + r * a[k + 2, k:nn + 1]
                    a[k + 2, k:nn + 1] -= pr * z
                a[k + 1, k:nn + 1] -= pr * y
                a[k, k:nn + 1] -= pr * x
                mmin = min(nn, k + 3)
                pc = x * a[l:mmin + 1, k] + y * a[l:mmin + 1, k + 1]
                if third:
                    pc = pc + z * a[l:mmin + 1, k + 2]
                    a[l:mmin + 1, k + 2] -= pc * r
                a[l:mmin + 1, k + 1] -= pc * q
                a[l:mmin + 1, k] -= pc
            if l >= nn - 1:
                break
    return wr, wi, -1


def backward_recurrence(eps, lam, m, v_m, v_m1, n_out, extended=False, v_m1_lo=0j):
    """Downward recurrence; returns ``(v, e)`` with true values ``v * 2**e``."""
    if n_out > m + 1:
        raise ValueError("n_out must not exceed m + 1")
    if extended:
        return _backward_mp(eps, lam, m, v_m, v_m1, v_m1_lo, n_out)
    out = np.zeros(n_out, dtype=complex)
    h = 0.5 * eps
    a2 = complex(v_m1)
    a1 = complex(v_m)
    if m + 1 <= n_out:
        out[m] = a2
    if m <= n_out:
        out[m - 1] = a1
    lam = complex(lam)
    e = 0
    exps = np.zeros(n_out, dtype=np.int64)
    for n in range(m - 1, 0, -1):
        vn = (h * (n + 1) * (n + 2) * a2 + (lam - n - 1) * a1) / (h * n * (n + 1))
        a2, a1 = a1, vn
        mag = abs(vn.real) + abs(vn.imag)
        if mag > 1e180:
            a1 *= 2.0 ** -600
            a2 *= 2.0 ** -600
            e += 600
        elif 0.0 < mag < 1e-180:
            a1 *= 2.0 ** 600
            a2 *= 2.0 ** 600
            e -= 600
        if n <= n_out:
            out[n - 1] = a1
            exps[n - 1] = e
    out = out * np.exp2((exps - e).astype(float))
    return out, e


def _backward_mp(eps, lam, m, v_m, v_m1, v_m1_lo, n_out):
    with mpmath.workdps(32):
        h = mpmath.mpf(eps) / 2
        lam = mpmath.mpc(lam)
        a2 = mpmath.mpc(v_m1) + mpmath.mpc(v_m1_lo)
        a1 = mpmath.mpc(v_m)
        vals = [None] * n_out
        if m + 1 <= n_out:
            vals[m] = a2
        if m <= n_out:
            vals[m - 1] = a1
        for n in range(m - 1, 0, -1):
            vn = (h * (n + 1) * (n + 2) * a2 + (lam - n - 1) * a1) / (h * n * (n + 1))
            a2, a1 = a1, vn
            if n <= n_out:
                vals[n - 1] = vn
        # mpmath has an unbounded exponent; rescale so the largest entry is O(1)
        big = max(abs(x) for x in vals)
        e = int(mpmath.floor(mpmath.log(big, 2))) if big != 0 else 0
        scale = mpmath.ldexp(1, -e)
        out = np.array([complex(x * scale) for x in vals])
    return out, e
