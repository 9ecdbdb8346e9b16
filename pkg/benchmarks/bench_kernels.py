#!/usr/bin/env python3
"""Compare the compiled (numba) and pure-numpy kernel backends.

Runs each hot kernel on a representative workload in both backends,
reports wall time and speedup, and verifies agreement: RK4 integrators
and the MLP kernels must match bit for bit; the LSTM kernels are allowed
one ulp of drift because the two backends use different transcendental
implementations (libm vs numpy's vectorized exp/tanh).

Usage::

    python benchmarks/bench_kernels.py [--repeat N]

The backend of the running process is fixed at import time, so this
script re-executes itself once with ``TSSID_NUMBA=0`` to collect the
numpy timings, then prints the side-by-side table.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

REPEAT_DEFAULT = 5


def _workloads():
    rng = np.random.default_rng(20250817)
    n = 20_000
    u = 300.0 + 60.0 * np.sin(np.linspace(0.0, 40.0, n))

    # sparse model: second-order linear (cascade canonical form)
    xi = np.array([
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, -11.111111, -8.3333333, 4.4444444, 0.0],
    ])
    expo = np.array([
        [0, 0, 0, 0],
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 1, 0],
        [0, 0, 0, 1],
    ], dtype=np.int64)
    trig = np.zeros((5, 4), dtype=np.int64)
    U2 = np.column_stack([u, np.gradient(u, 0.02)])

    mlp_sizes = np.array([5, 24, 24, 24, 24, 1], dtype=np.int64)
    n_mlp = int(np.sum(mlp_sizes[:-1] * mlp_sizes[1:] + mlp_sizes[1:]))
    mlp_flat = rng.normal(0.0, 0.2, n_mlp)
    X = rng.normal(0.0, 1.0, (4096, 5))
    Y = rng.normal(0.0, 1.0, (4096, 1))

    in_dim, hidden, layers, lb, batch = 5, 6, 3, 20, 256
    n_lstm = 0
    d = in_dim
    for _ in range(layers):
        n_lstm += d * 4 * hidden + hidden * 4 * hidden + 4 * hidden
        d = hidden
    n_lstm += hidden + 1
    lstm_flat = rng.normal(0.0, 0.2, n_lstm)
    XW = rng.normal(0.0, 1.0, (batch, lb, in_dim))
    YW = rng.normal(0.0, 1.0, (batch, lb))

    return {
        "rk4_first_order": ("rk4_first_order", (10.0, 0.5, 0.2, u, 0.02, 100.0)),
        "rk4_cascade": ("rk4_cascade", (0.4, 0.6, 0.15, u, 0.02, 120.0, 0.0)),
        "rk4_sparse": ("rk4_sparse", (xi, expo, trig, U2, 0.02,
                                      np.array([120.0, 0.0]))),
        "mlp_value_and_grad": ("mlp_value_and_grad", (mlp_flat, mlp_sizes, X, Y)),
        "lstm_value_and_grad": ("lstm_value_and_grad",
                                (lstm_flat, in_dim, hidden, layers, XW, YW)),
    }


def _flatten(result):
    if isinstance(result, tuple):
        return np.concatenate([np.asarray(r, dtype=np.float64).ravel() for r in result])
    return np.asarray(result, dtype=np.float64).ravel()


def run_backend(repeat: int) -> dict:
    from tssid import kernels

    out = {"backend": kernels.BACKEND, "times": {}, "digests": {}}
    for name, (fn_name, args) in _workloads().items():
        fn = getattr(kernels, fn_name)
        flat = _flatten(fn(*args))  # warm-up / JIT compile
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn(*args)
            best = min(best, time.perf_counter() - t0)
        out["times"][name] = best
        out["digests"][name] = flat.tobytes().hex()[:32]
        out.setdefault("values", {})[name] = flat[:8].tolist()
        out.setdefault("full", {})[name] = flat.tolist() if flat.size <= 4096 else None
        out.setdefault("summary", {})[name] = [float(np.sum(flat)), float(flat.size)]
    return out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=REPEAT_DEFAULT)
    parser.add_argument("--emit-json", action="store_true",
                        help="print raw results as JSON (used by the re-exec)")
    args = parser.parse_args()

    if args.emit_json:
        print(json.dumps(run_backend(args.repeat)))
        return 0

    here = run_backend(args.repeat)
    env = dict(os.environ)
    env["TSSID_NUMBA"] = "0" if here["backend"] == "numba" else "1"
    other_raw = subprocess.run(
        [sys.executable, __file__, "--repeat", str(args.repeat), "--emit-json"],
        env=env, capture_output=True, text=True, check=True,
    )
    other = json.loads(other_raw.stdout)

    numba_side = here if here["backend"] == "numba" else other
    numpy_side = other if here["backend"] == "numba" else here

    print(f"{'kernel':<22}{'numba':>12}{'numpy':>12}{'speedup':>10}   agreement")
    for name in _workloads():
        tn = numba_side["times"][name]
        tp = numpy_side["times"][name]
        same = numba_side["digests"][name] == numpy_side["digests"][name]
        if same:
            agree = "bitwise"
        elif numba_side["full"][name] is not None:
            a = np.array(numba_side["full"][name])
            b = np.array(numpy_side["full"][name])
            agree = f"max |diff| {np.max(np.abs(a - b)):.2e}"
        else:
            a = np.array(numba_side["summary"][name])
            b = np.array(numpy_side["summary"][name])
            agree = f"sum drift {abs(a[0] - b[0]):.3e}"
        print(f"{name:<22}{tn * 1e3:>10.2f}ms{tp * 1e3:>10.2f}ms{tp / tn:>10.1f}x   {agree}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
