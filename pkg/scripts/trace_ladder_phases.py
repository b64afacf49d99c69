#!/usr/bin/env python3
"""Print the exact phase structure of a ladder instance.

Usage: trace_ladder_phases.py [n] [eps_denominator] [j]

Shows each phase's interval, competitive and queued edges, label slopes, and
edge rates, followed by the event log and the social cost, all as exact
rationals.
"""

import sys
from fractions import Fraction

from fot.core import format_scalar
from fot.equilibrium import nash_flow
from fot.gen import MnParams, geometric_alphas, make_mn


def main() -> int:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    denom = int(sys.argv[2]) if len(sys.argv) > 2 else 10
    j = int(sys.argv[3]) if len(sys.argv) > 3 else 1
    inst = make_mn(MnParams(n=n, horizon=Fraction(1),
                            alphas=geometric_alphas(n, Fraction(1, denom), j)))
    run = nash_flow(inst)
    for i, phase in enumerate(run.phases):
        print(f"phase {i}: [{format_scalar(phase.start)}, {format_scalar(phase.end)})")
        print(f"  competitive: {', '.join(phase.active)}")
        print(f"  queued:      {', '.join(phase.resetting) or '-'}")
        slopes = ", ".join(f"{v}={format_scalar(s)}"
                           for v, s in sorted(phase.label_slopes.items()))
        print(f"  label slopes: {slopes}")
        rates = ", ".join(f"{e}={format_scalar(r)}"
                          for e, r in sorted(phase.edge_rates.items()) if r)
        print(f"  edge rates:   {rates or '-'}")
    for event in run.events:
        what = []
        if event.activations:
            arrivals = ", ".join(
                f"{e} (tail clock {format_scalar(event.tail_arrival[e])})"
                for e in event.activations)
            what.append(f"activated {arrivals}")
        if event.depletions:
            what.append(f"drained {', '.join(event.depletions)}")
        print(f"event at {format_scalar(event.time)}: {'; '.join(what)}")
    print(f"social cost: {format_scalar(run.social_cost)} "
          f"(steady={run.steady}, diverging={run.diverging})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
