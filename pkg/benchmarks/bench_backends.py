"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_backends.py [--repeat N]

Times the three hot kernels on a representative synthetic workload and
prints a table with per-call times and the native speedup. Outputs are
cross-checked for bit equality while timing.
"""

import argparse
import time

import numpy as np

from ctxsal._kernels import _fallback
from ctxsal.context_features import OrientationSet, _direction_table
from ctxsal.core_types import BinaryMask
from ctxsal.morphology import generate_context
from ctxsal.synth import synth_image

try:
    from ctxsal._kernels import _native
except ImportError:
    _native = None


def _workload():
    img, gt = synth_image(seed=7, index=0, width=128, height=128)
    mask = BinaryMask(gt.bits)
    ctx = generate_context(mask).context
    raw = np.ascontiguousarray(np.transpose(img.data, (2, 0, 1)), dtype=np.float32)
    smooth = raw * np.float32(0.9)
    dirs, _, _ = _direction_table(OrientationSet())

    n = 128 * 128
    idx = np.arange(n, dtype=np.int64).reshape(128, 128)
    ea = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    eb = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    field = raw.astype(np.float64)
    w_r = np.sqrt(((field[:, :, 1:] - field[:, :, :-1]) ** 2).sum(axis=0)).ravel()
    w_d = np.sqrt(((field[:, 1:, :] - field[:, :-1, :]) ** 2).sum(axis=0)).ravel()
    weights = np.concatenate([w_r, w_d])
    order = np.argsort(weights, kind="stable").astype(np.int64)

    return {
        "ray_feature_samples": (mask.as_u8(), ctx.as_u8(), raw, smooth, dirs, 40.0),
        "chebyshev_ring_distance": (mask.as_u8(),),
        "felzenszwalb_labels": (n, ea, eb, weights, order, 1.2),
    }


def _time(fn, args, repeat):
    out = fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _equal(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    work = _workload()
    print(f"{'kernel':<26} {'python':>12} {'native':>12} {'speedup':>9}  match")
    for name, call_args in work.items():
        py_t, py_out = _time(getattr(_fallback, name), call_args, args.repeat)
        if _native is None:
            print(f"{name:<26} {py_t * 1e3:>10.2f}ms {'-':>12} {'-':>9}")
            continue
        nat_t, nat_out = _time(getattr(_native, name), call_args, args.repeat)
        match = "yes" if _equal(py_out, nat_out) else "NO"
        print(
            f"{name:<26} {py_t * 1e3:>10.2f}ms {nat_t * 1e3:>10.2f}ms "
            f"{py_t / nat_t:>8.1f}x  {match}"
        )
    if _native is None:
        print("\ncompiled extension not built; only the fallback was timed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
