"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py --size 200 --start 2000 --repeat 3
"""
import argparse
import time

import numpy as np

from bos_spectrum import _backend, _fallback
from bos_spectrum.eigensolver import balance
from bos_spectrum.operator import build_truncated
from bos_spectrum.recurrence import _seed

try:
    from bos_spectrum import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_qr(impl, T, repeat):
    dense = balance(T).operator.to_dense()

    def run():
        wr, wi, fail = impl.hessenberg_eigvals(np.ascontiguousarray(dense.copy()))
        return np.sort_complex(wr + 1j * wi)
    return best_of(run, repeat)


def bench_recurrence(impl, eps, lam, M, extended, repeat):
    v_m, v_m1, lo = _seed(eps, lam, M, "asymptotic", extended)

    def run():
        v, e = impl.backward_recurrence(eps, lam, M, v_m, v_m1, 10, extended, lo)
        return v / v[0]
    return best_of(run, repeat)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epsilon", type=float, default=0.5)
    ap.add_argument("--size", type=int, default=200, help="matrix size for the QR sweep")
    ap.add_argument("--start", type=int, default=2000, help="start index of the recurrence")
    ap.add_argument("--lam", type=float, default=12.66)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if _kernels is None:
        print("compiled kernels not built; only the fallback is timed")
    T = build_truncated(args.epsilon, args.size, "asymptotic-linear")
    cases = [
        ("hessenberg_eigvals", lambda impl: bench_qr(impl, T, args.repeat)),
        ("backward_recurrence double",
         lambda impl: bench_recurrence(impl, args.epsilon, complex(args.lam), args.start, False,
                                       args.repeat)),
        ("backward_recurrence extended",
         lambda impl: bench_recurrence(impl, args.epsilon, complex(args.lam), args.start, True,
                                       args.repeat)),
    ]
    print(f"{'kernel':32s} {'compiled [s]':>14s} {'fallback [s]':>14s} {'speedup':>9s} "
          f"{'max diff':>10s}")
    for name, fn in cases:
        tf, of = fn(_fallback)
        if _kernels is not None:
            tc, oc = fn(_kernels)
            diff = float(np.max(np.abs(oc - of)) / max(np.max(np.abs(of)), 1e-300))
            print(f"{name:32s} {tc:14.6f} {tf:14.6f} {tf / tc:9.1f} {diff:10.2e}")
        else:
            print(f"{name:32s} {'-':>14s} {tf:14.6f} {'-':>9s} {'-':>10s}")
    print(f"active backend: {'compiled' if _backend.COMPILED else 'fallback'}")


if __name__ == "__main__":
    main()
