"""Batch of random two-agent markets with budgets crossing between frontier neighbours.

Prints the existence rate and strategy histogram, and writes the full report
as JSON when --out is given.
"""
import argparse
import json
import sys

from fisherce.experiments import GenSpec, run_batch


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--m-choices", default="4,5,6")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--distribution", choices=("uniform", "pareto"), default="uniform")
    p.add_argument("--identical", action="store_true")
    p.add_argument("--out")
    args = p.parse_args(argv)
    ms = [int(x) for x in args.m_choices.split(",")]
    gen = GenSpec(m=ms[0], distribution=args.distribution, identical_preferences=args.identical,
                  rng_seed=args.seed)
    rep = run_batch(gen, "crossing", args.count, m_choices=ms)
    print(f"markets: {args.count}  budget profiles: {len(rep.records)}")
    print(f"existence rate: {rep.existence_rate} ({float(rep.existence_rate):.4f})")
    print(f"strategies: {rep.strategy_histogram}")
    print(f"alarms: {len(rep.alarms)}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(rep.to_dict(), fh, indent=2)
    return 1 if rep.alarms else 0


if __name__ == "__main__":
    sys.exit(main())
