"""Tatonnement on markets whose agents split 1000 points over the items.

Reports how often the price process converges and how many iterations it
needs, next to the exact solver's verdict on the same budgets.
"""
import argparse
import statistics
from fractions import Fraction

from fisherce.experiments import GenSpec, generate_market, instance_seed
from fisherce.solver import CE_FOUND, solve
from fisherce.tatonnement import VARIANTS, TatonnementConfig, run_tatonnement


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--m-choices", default="3,4,5,6")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--variant", choices=VARIANTS, default="randomized")
    args = p.parse_args(argv)
    ms = [int(x) for x in args.m_choices.split(",")]
    solvable = converged = 0
    iters = []
    for idx in range(args.count):
        seed = instance_seed(args.seed, idx)
        market = generate_market(GenSpec(m=ms[seed % len(ms)], rng_seed=seed, spliddit_like=True))
        gap = 1 + seed % 100
        budgets = (Fraction(500 + gap, 1000), Fraction(500 - gap, 1000))
        solvable += solve(market, budgets).status == CE_FOUND
        tr = run_tatonnement(market, budgets, TatonnementConfig(max_iterations=args.max_iter, rng_seed=seed,
                                                                variant=args.variant))
        if tr.converged:
            converged += 1
            iters.append(tr.iterations_used)
    print(f"instances: {args.count}  exact solver finds a CE: {solvable}  tatonnement converged: {converged}")
    if iters:
        print(f"iterations: median {statistics.median(iters)}, max {max(iters)}")


if __name__ == "__main__":
    main()
