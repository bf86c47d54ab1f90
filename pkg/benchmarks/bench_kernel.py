"""Time the compiled and numpy path kernels on identical draws.

    python benchmarks/bench_kernel.py [--paths 2000] [--steps 1000] [--model ou]
"""

import argparse
import time

import numpy as np

from mmpert.core import MarketEnv
from mmpert.kernel import BACKENDS
from mmpert.multi import MultiEnv
from mmpert.price_models import PriceModel
from mmpert.simulation import Policy, SimConfig, build_tables, draw_path_noise, path_seed, simulate_draws


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--paths", type=int, default=2000)
    parser.add_argument("--steps", type=int, default=1000)
    parser.add_argument("--model", choices=["ou", "martingale"], default="ou")
    parser.add_argument("--policy", default=Policy.FIRST_ORDER_FULL.value)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    env = MarketEnv()
    model = PriceModel.ou(0.5, 0.1, 3009.0) if args.model == "ou" else PriceModel.martingale(0.5)
    config = SimConfig(n_steps=args.steps, n_paths=args.paths, policy=args.policy)
    tables = build_tables(MultiEnv.from_single(env), [model], [model], config, model.sigma)

    gauss = np.empty((args.paths, args.steps, 1))
    unif = np.empty((args.paths, args.steps, 1, 2))
    for i in range(args.paths):
        gauss[i], unif[i] = draw_path_noise(path_seed(0, i), args.steps, 1)

    print(f"{args.paths} paths x {args.steps} steps, {args.model}, {config.policy.value}, "
          f"{tables.bias_w.shape[2]} quadrature nodes")
    results = {}
    for name in sorted(BACKENDS):
        best = float("inf")
        for _ in range(args.repeat):
            start = time.perf_counter()
            out = simulate_draws(tables, gauss, unif, backend=name)
            best = min(best, time.perf_counter() - start)
        results[name] = out
        rate = args.paths * args.steps / best / 1e6
        print(f"  {name:>7}: {best:8.3f} s   {rate:7.2f} M path-steps/s")

    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        fills = np.array_equal(py["nbuy"], cy["nbuy"]) and np.array_equal(py["nsell"], cy["nsell"])
        diff = np.max(np.abs(py["pnl"] - cy["pnl"]))
        print(f"  fills identical: {fills}; max |pnl difference|: {diff:.3g}")


if __name__ == "__main__":
    main()
