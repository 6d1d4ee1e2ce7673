"""Compiled vs pure-Python kernels: row reduction mod p, divisor sums, one basis build.

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""

import argparse
import json
import time

import numpy as np

from theta_doubler import kernels
from theta_doubler.characters import kronecker_character
from theta_doubler.eisbasis import weight_k_basis
from theta_doubler.ff import make_field


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bench_rref(n, p, rng):
    A = rng.integers(0, p, size=(n, n + n // 2), dtype=np.int64)
    return lambda: kernels.rref_modp(A.copy(), p, -1)


def bench_divisor(P, p):
    L = 2
    out = np.zeros((P, L), dtype=np.int64)
    idx = np.arange(P)
    phi = np.where(idx % 23 == 0, -1, idx % 2).astype(np.int64)
    psi = np.zeros(P, dtype=np.int64)
    dpow = np.array([pow(int(d), 4, p) for d in range(P)], dtype=np.int64)

    def run():
        out[:] = 0
        kernels.divisor_accumulate(out, phi, dpow, psi, L, p, 1)

    return run


def bench_basis(N, p):
    F = make_field(p)
    chi = kronecker_character(-23).extend(N)
    return lambda: weight_k_basis(N, p, chi, F)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    cases = [(f"rref {n}x{n + n // 2} mod 5", bench_rref(n, 5, rng)) for n in (100, 300, 600)]
    cases += [(f"divisor sums P={P}", bench_divisor(P, 5)) for P in (10**4, 10**5)]
    cases.append(("basis M_5(23*11)", bench_basis(253, 5)))
    backends = ["python"]
    try:
        kernels.use_backend("cython")
        backends.insert(0, "cython")
    except ImportError:
        print("compiled core not built; timing the fallback only")
    rows = []
    for name, fn in cases:
        row = {"case": name}
        for b in backends:
            kernels.use_backend(b)
            row[b] = best_of(fn, args.repeat)
        rows.append(row)
    kernels.use_backend(backends[0])
    width = max(len(r["case"]) for r in rows)
    print(f"{'case':<{width}}  " + "  ".join(f"{b:>10}" for b in backends) + ("   speedup" if len(backends) == 2 else ""))
    for r in rows:
        line = f"{r['case']:<{width}}  " + "  ".join(f"{r[b]:>9.4f}s" for b in backends)
        if len(backends) == 2:
            line += f"  {r['python'] / r['cython']:>8.1f}x"
        print(line)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
