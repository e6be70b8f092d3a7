"""Compare the compiled and numpy sweep kernels.

    python benchmarks/bench_kernels.py [--sizes 2 3 4 5] [--sweeps 20]

For each circuit size both backends run the same SVD sweeps from the same
starting point; the table shows time per sweep, the speedup and the largest
cost difference between the backends.
"""
import argparse
import time

import numpy as np

from gdsynth.circuit import make_kernel
from gdsynth.kernels import available_backends
from gdsynth.linalg import haar_random_unitary
from gdsynth.skeletons import cyclic_skeleton, full_skeleton, required_layers


def skeleton_for(n):
    if n % 2 == 0:
        return full_skeleton(n)
    return cyclic_skeleton(n, 3 * required_layers(n))


def time_backend(cls, s, goal, angles, sweeps, repeat):
    best = float("inf")
    costs = None
    for _ in range(repeat):
        kernel, _, _ = make_kernel(s, angles.copy(), goal, backend=cls)
        t0 = time.perf_counter()
        costs = [kernel.sweep_svd() for _ in range(sweeps)]
        best = min(best, time.perf_counter() - t0)
    return best / sweeps, np.array(costs)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[2, 3, 4, 5])
    p.add_argument("--sweeps", type=int, default=20)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled kernel not built; only the numpy backend is available")
    rng = np.random.default_rng(args.seed)
    print(f"{'n':>2} {'slots':>6} {'cnots':>6} " + " ".join(f"{b + ' ms/sweep':>18}" for b in backends)
          + f" {'speedup':>8} {'max |dC|':>9}")
    for n in args.sizes:
        s = skeleton_for(n)
        goal = haar_random_unitary(n, rng)
        angles = rng.uniform(0, 2 * np.pi, size=(s.n_slots, 3))
        res = {name: time_backend(cls, s, goal, angles, args.sweeps, args.repeat) for name, cls in backends.items()}
        times = [res[b][0] * 1e3 for b in backends]
        line = f"{n:>2} {s.n_slots:>6} {s.n_cnots:>6} " + " ".join(f"{t:>18.3f}" for t in times)
        if len(res) == 2:
            diff = np.max(np.abs(res["python"][1] - res["cython"][1]))
            line += f" {res['python'][0] / res['cython'][0]:>7.1f}x {diff:>9.1e}"
        print(line)


if __name__ == "__main__":
    main()
