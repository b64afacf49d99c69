"""Hand-built instances and flows shared across test modules.

The fixture flows are written down from first principles (integrating the
narrated rates by hand), never taken from the engine under test.
"""

from fractions import Fraction

from fot.core import Edge, Instance, Network
from fot.dynamics import FlowOverTime
from fot.pwl import PiecewiseLinear

F = Fraction


def build_instance(edges, source, sink, supply, nodes=None):
    """edges: iterable of (id, tail, head, capacity, transit)."""
    if nodes is None:
        seen = []
        for _, tail, head, _, _ in edges:
            for v in (tail, head):
                if v not in seen:
                    seen.append(v)
        nodes = tuple(seen)
    net = Network(
        nodes=tuple(nodes),
        edges=tuple(Edge(eid, tail, head) for eid, tail, head, _, _ in edges),
        source=source,
        sink=sink,
    )
    return Instance(
        network=net,
        capacity={eid: F(c) for eid, _, _, c, _ in edges},
        transit={eid: F(t) for eid, _, _, _, t in edges},
        supply=F(supply),
    )


def rates(*pairs):
    return PiecewiseLinear.from_rate_segments([(F(a), F(b)) for a, b in pairs])


def two_link_base_instance():
    """Two parallel links: fast narrow (capacity 1, transit 0) and slow wide
    (capacity 2, transit 1); supply 2."""
    return build_instance(
        [("e1", "v1", "v2", 1, 0), ("f1", "v1", "v2", 2, 1)],
        source="v1", sink="v2", supply=2)


def two_link_equilibrium_flow():
    """The equilibrium of the two-link base instance, integrated by hand:
    everything rides the fast link until its queue wait reaches 1, then the
    supply splits 1/1 and the queue holds steady."""
    return FlowOverTime(
        inflow={"e1": rates((0, 2), (1, 1)), "f1": rates((1, 1))},
        outflow={"e1": rates((0, 1)), "f1": rates((2, 1))},
        sink_cumulative=rates((0, 1), (2, 2)),
    )


def two_link_all_on_slow_flow(paths=False):
    """Feasible but non-equilibrium: the whole supply on the slow link."""
    decomposition = None
    if paths:
        decomposition = {("f1",): rates((0, 2))}
    return FlowOverTime(
        inflow={"e1": rates(), "f1": rates((0, 2))},
        outflow={"e1": rates(), "f1": rates((1, 2))},
        sink_cumulative=rates((1, 2)),
        paths=decomposition,
    )


def ladder3_minus_middle_instance(eps=F(1, 10)):
    """The three-node ladder with its second rung of the fast chain removed:
    one direct slow link plus the fast first hop feeding a slow second hop.
    All routes have free-flow time 1 and the capacities sum to the supply."""
    a0 = 1 + eps
    a1 = 1 + eps ** 2
    return build_instance(
        [("e1", "v1", "v2", a1, 0),
         ("f1", "v1", "v3", a0 - a1, 1),
         ("f2", "v2", "v3", a1, 1)],
        source="v1", sink="v3", supply=a0)


def ladder3_minus_middle_flow(eps=F(1, 10)):
    """Even capacity split on the reduced ladder: no queue ever forms."""
    a0 = 1 + eps
    a1 = 1 + eps ** 2
    return FlowOverTime(
        inflow={"e1": rates((0, a1)), "f1": rates((0, a0 - a1)), "f2": rates((0, a1))},
        outflow={"e1": rates((0, a1)), "f1": rates((1, a0 - a1)), "f2": rates((1, a1))},
        sink_cumulative=rates((1, a0)),
    )


def overloaded_single_link():
    inst = build_instance([("e1", "v1", "v2", 1, 0)],
                          source="v1", sink="v2", supply=2)
    flow = FlowOverTime(
        inflow={"e1": rates((0, 2))},
        outflow={"e1": rates((0, 1))},
        sink_cumulative=rates((0, 1)),
        paths={("e1",): rates((0, 2))},
    )
    return inst, flow
