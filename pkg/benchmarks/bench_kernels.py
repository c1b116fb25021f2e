"""Compare the numba kernels with their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--records 200] [--repeat 5]

Both implementations are called directly, so one process measures both
regardless of PWCLOCK_DISABLE_NUMBA. Compilation happens before timing.
"""

import argparse
import timeit

import numpy as np

from pwclock import _kernels
from pwclock.counting import CountRecord
from pwclock.tomography import (
    _INIT_MIX,
    TomographyConfig,
    build_projector_set,
    cholesky_factor,
    clamp_to_physical,
    linear_reconstruction,
)


def random_density(rng, d=4):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def mle_inputs(rng, ps, n_records):
    out = []
    for _ in range(n_records):
        counts = rng.poisson(500 * ps.probabilities(random_density(rng))).astype(float)
        start = clamp_to_physical(linear_reconstruction(CountRecord(list(ps.labels), counts), ps))
        seed = (1 - _INIT_MIX) * start + _INIT_MIX * np.eye(4) / 4
        out.append((_kernels.pack_factor(cholesky_factor(seed)), counts))
    return out


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--records", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels.numba is None:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    ps = build_projector_set()
    cfg = TomographyConfig()
    psi = np.ascontiguousarray(ps.vectors)
    inputs = mle_inputs(rng, ps, args.records)
    mats = [random_density(rng) for _ in range(args.records)]

    def eig_numba():
        for m in mats:
            _kernels.jacobi_eigh(m, 1e-15, 64)

    def eig_numpy():
        for m in mats:
            _kernels.numpy_eigh(m)

    def mle(ascent):
        def go():
            for x0, c in inputs:
                ascent(x0, psi, c, cfg.mle_tolerance, cfg.mle_max_iters)
        return go

    eig_numba()
    _kernels.mle_ascent_numba(*inputs[0][:1], psi, inputs[0][1], cfg.mle_tolerance, cfg.mle_max_iters)

    rows = [
        ("hermitian eigensolver (4x4)", best_of(eig_numba, args.repeat), best_of(eig_numpy, args.repeat)),
        ("MLE ascent", best_of(mle(_kernels.mle_ascent_numba), args.repeat),
         best_of(mle(_kernels.mle_ascent_numpy), args.repeat)),
    ]
    print(f"{args.records} inputs per kernel, best of {args.repeat}")
    print(f"{'kernel':<30}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, tn, tp in rows:
        print(f"{name:<30}{tn:>12.4f}{tp:>12.4f}{tp / tn:>9.1f}x")


if __name__ == "__main__":
    main()
