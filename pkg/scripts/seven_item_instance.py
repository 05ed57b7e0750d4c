"""The seven-item instance where no closed-form pricing applies.

Shows that both rectangles are nonempty, that no price vector proportional
to either agent's values supports a CE, and that the LP search still finds one.
"""
import json

from fisherce.frontier import classify_proportionality, rectangle_T, shares
from fisherce.market import fmt, make_market
from fisherce.pricing import scaled_valuation_ces
from fisherce.solver import solve

VALUES = [
    ["0.1420", "0.0808", "0.1921", "0.1717", "0.1651", "0.1200", "0.1283"],
    ["0.0827", "0.1056", "0.1743", "0.1515", "0.1862", "0.1123", "0.1874"],
]
BUDGETS = ["0.8093", "0.1907"]


def main():
    market, budgets = make_market(VALUES, BUDGETS)
    cls = classify_proportionality(market, budgets)
    print(f"budget-proportional allocation: {cls.has_budget_proportional}")
    print(f"anti-proportional PO allocation: {cls.has_anti_proportional_po}")
    for agent in (0, 1):
        s = shares(market, budgets, agent)
        rect = rectangle_T(market, budgets, agent)
        scan = scaled_valuation_ces(market, budgets, agent)
        print(f"agent {agent + 1}: shares [{fmt(s.b_minus)}, {fmt(s.b_plus)}], "
              f"{len(rect)} allocations in the rectangle, {len(scan)} scaled-valuation CEs")
    out = solve(market, budgets)
    print(json.dumps(out.to_dict(market), indent=2))


if __name__ == "__main__":
    main()
