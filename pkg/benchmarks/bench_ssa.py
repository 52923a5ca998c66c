"""Compiled SSA kernel against the pure-Python fallback.

    python3 benchmarks/bench_ssa.py [--trajectories N] [--horizon T]

Both backends run the same seeds, so the event counts must agree; the
script checks that before printing throughput.
"""
import argparse
import time

import numpy as np

from crnkit import ReactionNetwork, ssa

GENE = ReactionNetwork.from_lists(["S1", "S2", "S3"], [
    ((1, 0, 0), (0, 1, 0), 2),
    ((0, 1, 0), (1, 0, 0), 1),
    ((1, 0, 0), (1, 0, 1), 5),
    ((0, 0, 1), (0, 0, 0), 1),
])


def bench(backend: str, n: int, horizon: float, seed: int):
    start = time.perf_counter()
    ens = ssa.simulate_ensemble(GENE, (10, 0, 0), n, seed, horizon=horizon, backend=backend)
    return ens, time.perf_counter() - start


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trajectories", type=int, default=2000)
    ap.add_argument("--horizon", type=float, default=20.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    results = {}
    for backend in ssa.available_backends():
        results[backend] = bench(backend, args.trajectories, args.horizon, args.seed)
    print(f"gene network, {args.trajectories} trajectories to t = {args.horizon:g}")
    print(f"{'backend':<8} {'events':>10} {'seconds':>9} {'events/s':>12}")
    for backend, (ens, secs) in results.items():
        print(f"{backend:<8} {ens.n_events:>10} {secs:>9.3f} {ens.n_events / secs:>12.4g}")
    if len(results) == 2:
        (a, ta), (b, tb) = results["cython"], results["python"]
        assert np.array_equal(a.samples, b.samples), "backends disagree"
        print(f"speedup: {tb / ta:.1f}x (identical samples)")


if __name__ == "__main__":
    main()
