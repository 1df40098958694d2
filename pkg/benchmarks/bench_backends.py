"""Timing comparison of the numba kernels against the NumPy fallback.

Run as a script::

    python3 benchmarks/bench_backends.py [--horizon 100000] [--batch 4096]

Three regimes, matching how the library spends its time:

* ``trajectory`` -- one seed, long horizon (rotation estimation); the
  fallback pays interpreter cost per step.
* ``hit_times``  -- a seed bank watched for band escape (invariant-circle
  witness search); early exits keep it scalar all the way down.
* ``advance``    -- wide batch, short horizon (level-set mesh sweeps);
  the fallback runs vectorized numpy here and is genuinely competitive.

Accuracy note printed at the end: the backends agree per step to an ulp or
two (numba's libm and numpy's differ at ~0.07% of trig arguments), which
chaotic parameters amplify over long horizons; agreement is therefore
reported as the max single-step deviation from identical states.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from torustwist import _kernels_numba, _kernels_numpy
from torustwist import maps

FAMILIES = (
    ("standard k=10", maps.builtin_standard(10.0)),
    ("saddle_center a=3 g=1", maps.builtin_saddle_center(3.0, 1.0)),
    ("circle_diffeo w=0.2 e=0.5", maps.builtin_circle_diffeo(0.2, 0.5)),
)


def _time(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - t0, out


def _row(label, steps, t_nb, t_np):
    print("  %-28s numba %9.2e st/s   numpy %9.2e st/s   %6.1fx"
          % (label, steps / t_nb, steps / t_np, t_np / t_nb))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=100_000,
                    help="steps for the single-seed regimes")
    ap.add_argument("--batch", type=int, default=4096,
                    help="seeds for the wide-batch regime")
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    seeds = 64
    fphi, fi = rng.random(seeds), rng.random(seeds)
    zeros = np.zeros(seeds)
    bphi, bfi = rng.random(args.batch), rng.random(args.batch)
    bz = np.zeros(args.batch)
    short = max(args.horizon // 50, 1)

    warm = maps.builtin_standard(1.0)
    _kernels_numba.trajectory(warm.kind, warm.kernel_params, 0.1, 0.2, 0.0, 0.0, 2)
    _kernels_numba.advance(warm.kind, warm.kernel_params, bphi[:2], bfi[:2],
                           bz[:2], bz[:2], 2)
    _kernels_numba.hit_times(warm.kind, warm.kernel_params, fphi[:2], fi[:2],
                             zeros[:2], zeros[:2], 2, 2.0, -1.0)

    for label, fam in FAMILIES:
        print(label)
        t_nb, _ = _time(_kernels_numba.trajectory, fam.kind, fam.kernel_params,
                        0.1, 0.2, 0.0, 0.0, args.horizon)
        t_np, _ = _time(_kernels_numpy.trajectory, fam.kind, fam.kernel_params,
                        0.1, 0.2, 0.0, 0.0, args.horizon)
        _row("trajectory 1 x %d" % args.horizon, args.horizon, t_nb, t_np)

        t_nb, _ = _time(_kernels_numba.hit_times, fam.kind, fam.kernel_params,
                        fphi, fi, zeros.copy(), zeros.copy(), args.horizon,
                        2.0, -1.0)
        t_np, _ = _time(_kernels_numpy.hit_times, fam.kind, fam.kernel_params,
                        fphi, fi, zeros.copy(), zeros.copy(), args.horizon,
                        2.0, -1.0)
        _row("hit_times %d x %d" % (seeds, args.horizon),
             seeds * args.horizon, t_nb, t_np)

        state = (bphi.copy(), bfi.copy(), bz.copy(), bz.copy())
        t_nb, _ = _time(_kernels_numba.advance, fam.kind, fam.kernel_params,
                        *state, short)
        state = (bphi.copy(), bfi.copy(), bz.copy(), bz.copy())
        t_np, _ = _time(_kernels_numpy.advance, fam.kind, fam.kernel_params,
                        *state, short)
        _row("advance %d x %d" % (args.batch, short),
             args.batch * short, t_nb, t_np)

    print("single-step backend deviation from identical states:")
    for label, fam in FAMILIES:
        state = (bphi.copy(), bfi.copy(), bz.copy(), bz.copy())
        out_nb = _kernels_numba.advance(fam.kind, fam.kernel_params, *state, 1)
        state = (bphi.copy(), bfi.copy(), bz.copy(), bz.copy())
        out_np = _kernels_numpy.advance(fam.kind, fam.kernel_params, *state, 1)
        dev = max(float(np.max(np.abs(a - b))) for a, b in zip(out_nb, out_np))
        print("  %-28s max |diff| = %.2e" % (label, dev))


if __name__ == "__main__":
    main()
