"""Time the compiled kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each row runs both implementations on the same inputs, checks the outputs
agree, and reports the best-of-N wall time.
"""
import argparse
import sys
import timeit

import numpy as np

from lesionseg import _backend, _fallback
from lesionseg.morphology import disk_se


def _cases(rng):
    lesion = np.zeros((400, 600), np.uint8)
    yy, xx = np.mgrid[:400, :600]
    lesion[((yy - 200) / 90.0) ** 2 + ((xx - 300) / 140.0) ** 2 <= 1] = 1
    noise = (rng.random((400, 600)) < 0.5).astype(np.uint8)
    disk15 = disk_se(15).offsets
    disk10 = disk_se(10).offsets
    c1 = rng.random((64, 26, 26, 60)).astype(np.float32)
    c2 = rng.random((64, 9, 9, 60)).astype(np.float32)
    dcols = rng.random((64, 9, 9, 5, 5, 60)).astype(np.float32)
    pooled, arg = _fallback.maxpool_forward(c1, 2, 2)
    return [
        ("dilate 400x600, disk r=15", "dilate", (lesion, disk15)),
        ("erode 400x600, disk r=15", "erode", (lesion, disk15)),
        ("dilate 400x600, disk r=10", "dilate", (lesion, disk10)),
        ("label 400x600 noise, 8-conn", "label", (noise, 8)),
        ("label 400x600 noise, 4-conn", "label", (noise, 4)),
        ("maxpool fwd 64x26x26x60 k2s2", "maxpool_forward", (c1, 2, 2)),
        ("maxpool fwd 64x9x9x60 k3s3", "maxpool_forward", (c2, 3, 3)),
        ("maxpool bwd 64x13x13x60", "maxpool_backward", (pooled, arg, 26, 26)),
        ("col2im 64x9x9x5x5x60", "col2im", (dcols, 13, 13)),
    ]


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-5, atol=1e-5)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    ext = _backend.compiled()
    if ext is None:
        print("compiled extension not built; install with `pip install -e . --no-build-isolation`")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'cython ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for title, name, inputs in _cases(rng):
        fast, slow = getattr(ext, name), getattr(_fallback, name)
        if not _same(fast(*inputs), slow(*inputs)):
            print(f"{title}: outputs differ", file=sys.stderr)
            return 1
        t_fast = min(timeit.repeat(lambda: fast(*inputs), number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*inputs), number=1, repeat=args.repeat))
        print(f"{title:34s} {t_fast * 1e3:10.2f} {t_slow * 1e3:10.2f} {t_slow / t_fast:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
