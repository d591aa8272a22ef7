"""Benchmark the compiled kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from relprobe.probe.kernels import _pykernels

try:
    from relprobe.probe.kernels import _ckernels
except ImportError:
    _ckernels = None


def bench_case(name, make_args, fn_py, fn_c, repeat):
    t_py = min(timeit.repeat(lambda: fn_py(*make_args()), number=1, repeat=repeat))
    if fn_c is None:
        print(f"{name:<14} python {t_py * 1e6:9.1f} us   compiled (not built)")
        return
    t_c = min(timeit.repeat(lambda: fn_c(*make_args()), number=1, repeat=repeat))
    print(f"{name:<14} python {t_py * 1e6:9.1f} us   compiled {t_c * 1e6:9.1f} us"
          f"   speedup {t_py / t_c:5.2f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=200)
    parser.add_argument("--batch", type=int, default=64)
    parser.add_argument("--width", type=int, default=750)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    b, h = args.batch, args.width
    x = rng.normal(size=(b, h))
    act = np.maximum(rng.normal(size=(b, h)), 0)
    u = rng.random((b, h))
    logits = rng.normal(size=(b, 2))
    labels = rng.integers(0, 2, b)
    nparam = h * h
    param = rng.normal(size=nparam)
    grad = rng.normal(size=nparam)
    m = np.zeros(nparam)
    v = np.zeros(nparam)

    cases = [
        ("relu_", lambda: (x.copy(),), "relu_"),
        ("relu_grad_", lambda: (x.copy(), act), "relu_grad_"),
        ("dropout_", lambda: (x.copy(), u, 0.5), "dropout_"),
        ("softmax_xent", lambda: (logits.copy(), labels), "softmax_xent"),
        ("adam_", lambda: (param.copy(), grad, m.copy(), v.copy(),
                           1e-3, 0.9, 0.999, 1e-8, 0.1, 1e-3), "adam_"),
    ]
    print(f"batch={b} width={h} repeat={args.repeat} (best of)")
    for name, make_args, attr in cases:
        bench_case(name, make_args, getattr(_pykernels, attr),
                   getattr(_ckernels, attr) if _ckernels else None, args.repeat)


if __name__ == "__main__":
    main()
