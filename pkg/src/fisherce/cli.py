"""Command-line interface.  Every subcommand prints JSON with fractions as strings.

Exit codes: 0 success, 1 negative verification result or batch alarm,
2 no CE exists (``solve``), 3 validation error, 4 enumeration cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .demand import verify_ce
from .errors import CapExceeded, PreconditionError, ValidationError
from .experiments import BUDGET_MODES, GenSpec, perturb_budgets, run_batch
from .fairness import fairness_report
from .frontier import pareto_frontier
from .market import Allocation, fmt, market_to_dict, parse_market, to_fraction
from .solver import CAP_EXCEEDED, NO_CE_EXISTS, STRATEGIES, solve
from .tatonnement import VARIANTS, TatonnementConfig, run_tatonnement

EXIT_OK, EXIT_NEGATIVE, EXIT_NO_CE, EXIT_INVALID, EXIT_CAP = 0, 1, 2, 3, 4


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: malformed JSON: {exc}") from exc


def _load_market(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_market(fh.read())


def _index(name, names, what):
    if isinstance(name, int) and not isinstance(name, bool):
        if 0 <= name < len(names):
            return name
    elif str(name) in names:
        return names.index(str(name))
    raise ValidationError(f"unknown {what} {name!r}")


def load_allocation(doc: dict, market) -> Allocation:
    """Allocation from ``{"owners": [...]}`` (per item) or ``{"bundles": [[...], ...]}`` (per agent).

    Agents and items may be given by index or by name.
    """
    if not isinstance(doc, dict):
        raise ValidationError("allocation file must be a JSON object")
    if "owners" in doc:
        owners = doc["owners"]
        if not isinstance(owners, list) or len(owners) != market.m:
            raise ValidationError(f"'owners' needs one entry per item ({market.m})")
        return Allocation(tuple(_index(o, market.agent_names, "agent") for o in owners))
    if "bundles" in doc:
        bundles = doc["bundles"]
        if not isinstance(bundles, list) or len(bundles) != market.n:
            raise ValidationError(f"'bundles' needs one list per agent ({market.n})")
        return Allocation.from_bundles(
            [[_index(j, market.item_names, "item") for j in b] for b in bundles], market.m)
    raise ValidationError("allocation needs 'owners' or 'bundles'")


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=2)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------- subcommands

def cmd_solve(args) -> int:
    market, budgets = _load_market(args.market)
    out = solve(market, budgets, strategy=args.strategy)
    doc = out.to_dict(market)
    doc["market"] = market_to_dict(market, budgets)
    _emit(doc, args.out)
    if out.status == NO_CE_EXISTS:
        return EXIT_NO_CE
    if out.status == CAP_EXCEEDED:
        return EXIT_CAP
    return EXIT_OK


def cmd_verify(args) -> int:
    market, budgets = _load_market(args.market)
    doc = _read_json(args.certificate)
    alloc = load_allocation(doc, market)
    if "prices" not in doc:
        raise ValidationError("certificate file needs 'prices'")
    res = verify_ce(market, budgets, alloc, [to_fraction(p) for p in doc["prices"]])
    _emit(res.to_dict(market) if res.ok else {"ok": False, "violation": res.to_dict()}, args.out)
    return EXIT_OK if res.ok else EXIT_NEGATIVE


def cmd_audit(args) -> int:
    market, budgets = _load_market(args.market)
    doc = {}
    if args.frontier:
        doc["frontier"] = pareto_frontier(market).to_json()
    if args.allocation:
        alloc = load_allocation(_read_json(args.allocation), market)
        doc["fairness"] = fairness_report(market, budgets, alloc, mms_d_max=args.mms, nash=args.nash).to_dict()
    if not doc:
        raise ValidationError("audit needs --allocation or --frontier")
    _emit(doc, args.out)
    return EXIT_OK


def cmd_frontier(args) -> int:
    market, _ = _load_market(args.market)
    _emit(pareto_frontier(market).to_json(), args.out)
    return EXIT_OK


def cmd_tatonnement(args) -> int:
    market, budgets = _load_market(args.market)
    cfg = TatonnementConfig(max_iterations=args.max_iter, price_step=args.step,
                            continue_probability=to_fraction(args.continue_probability),
                            rng_seed=args.seed, budget_scale=args.scale, variant=args.variant)
    trace = run_tatonnement(market, budgets, cfg)
    doc = trace.to_dict()
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    _emit(doc, args.out)
    return EXIT_OK


def cmd_perturb(args) -> int:
    market, budgets = _load_market(args.market)
    bp = perturb_budgets(budgets, to_fraction(args.epsilon), args.seed, market)
    _emit({"budgets": [fmt(b) for b in bp], "market": market_to_dict(market, bp, raw=False)}, args.out)
    return EXIT_OK


def cmd_experiment(args) -> int:
    gen = GenSpec(m=args.m, n=args.n, distribution=args.distribution,
                  pareto_shape=to_fraction(args.pareto_shape), identical_preferences=args.identical,
                  rng_seed=args.seed, spliddit_like=args.spliddit_like)
    m_choices = [int(x) for x in args.m_choices.split(",")] if args.m_choices else None
    explicit = args.budgets.split(",") if args.budgets else None
    report = run_batch(gen, args.mode, args.count, strategy=args.strategy, m_choices=m_choices,
                       epsilon=to_fraction(args.epsilon), explicit_budgets=explicit, mms_d_max=args.mms)
    _emit(report.to_dict(timing=args.timing), args.out)
    if report.alarms:
        print(f"{len(report.alarms)} alarm(s) raised", file=sys.stderr)
        return EXIT_NEGATIVE
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fisherce", description="Competitive equilibria in discrete Fisher markets.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--out", help="write JSON here instead of stdout")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("solve", cmd_solve, "find a CE or prove none exists")
    sp.add_argument("market")
    sp.add_argument("--strategy", choices=STRATEGIES, default="auto")
    sp.add_argument("--json", action="store_true", help="accepted for compatibility; output is always JSON")

    sp = add("verify", cmd_verify, "check an allocation and prices")
    sp.add_argument("market")
    sp.add_argument("certificate", help="JSON with 'owners' or 'bundles', and 'prices'")

    sp = add("audit", cmd_audit, "fairness report for an allocation")
    sp.add_argument("market")
    sp.add_argument("--allocation")
    sp.add_argument("--mms", type=int, default=0, metavar="D_MAX")
    sp.add_argument("--nash", action="store_true")
    sp.add_argument("--frontier", action="store_true")

    sp = add("frontier", cmd_frontier, "Pareto frontier with representative allocations")
    sp.add_argument("market")

    sp = add("tatonnement", cmd_tatonnement, "run the integer price process")
    sp.add_argument("market")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-iter", type=int, default=20000)
    sp.add_argument("--scale", type=int, default=1000)
    sp.add_argument("--step", type=int, default=1)
    sp.add_argument("--continue-probability", default="1/2")
    sp.add_argument("--variant", choices=VARIANTS, default="randomized")
    sp.add_argument("--trace")

    sp = add("perturb", cmd_perturb, "jitter the market's budgets")
    sp.add_argument("market")
    sp.add_argument("--epsilon", default="1/1000")
    sp.add_argument("--seed", type=int, default=0)

    sp = add("experiment", cmd_experiment, "random batch run")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--m", type=int, default=4)
    sp.add_argument("--m-choices", help="comma-separated item counts, e.g. 4,5,6")
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--mode", choices=BUDGET_MODES, default="crossing")
    sp.add_argument("--budgets", help="comma-separated budgets for --mode explicit")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--distribution", choices=("uniform", "pareto"), default="uniform")
    sp.add_argument("--pareto-shape", default="2")
    sp.add_argument("--identical", action="store_true")
    sp.add_argument("--spliddit-like", action="store_true")
    sp.add_argument("--epsilon", default="1/1000")
    sp.add_argument("--strategy", choices=STRATEGIES, default="auto")
    sp.add_argument("--mms", type=int, default=0, metavar="D_MAX")
    sp.add_argument("--timing", action="store_true", help="include per-instance seconds (not reproducible)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.fn(args)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValidationError, PreconditionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
