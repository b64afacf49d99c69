"""Constructive equilibrium computation, phase by phase.

Within a phase the arrival labels are affine in the network entry time.
Their slopes, together with a static flow of value equal to the supply on the
currently competitive edges, solve a small derivative system: on an edge with
a queue the head label grows with the queue drain rate (flow rate over
capacity); on a queue-free edge it grows with the larger of the tail label
slope and the drain rate; labels always take the minimum over incoming
competitive edges, and only edges attaining it may carry flow.

Phases end when an idle edge becomes competitive or a queue empties.  Both
event times are exact roots of affine functions, so the whole run is exact.

The derivative system is solved by exhaustive enumeration of support and
tightness patterns with exact linear solves (the interesting instances have
well under a dozen competitive edges), and every accepted solution is
re-verified against the full axiom list by an independent checker.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Optional, Sequence

from .core import (
    ContractError,
    INF,
    Instance,
    InternalConsistencyError,
    Network,
    NoPathError,
    PhaseCapError,
    Scalar,
    SizeCapError,
    format_scalar,
)
from .dynamics import FlowOverTime, certify_nash, derive_sink_cumulative, validate_feasible
from .pwl import ONE, ZERO, PiecewiseLinear

MAX_ACTIVE_EDGES = 16


# -- exact linear algebra ------------------------------------------------------


def solve_exact(rows: list[tuple[list[Fraction], Fraction]], n: int):
    """Gauss-Jordan over rationals.

    Returns ("unique", vector), ("inconsistent", None) or
    ("underdetermined", None).
    """
    mat = [list(coeffs) + [rhs] for coeffs, rhs in rows]
    pivot_cols: list[int] = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = mat[r][c]
        mat[r] = [v / inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivot_cols.append(c)
        r += 1
        if r == len(mat):
            break
    for i in range(r, len(mat)):
        if mat[i][n] != 0:
            return "inconsistent", None
    if r < n:
        return "underdetermined", None
    sol = [ZERO] * n
    for i, c in enumerate(pivot_cols):
        sol[c] = mat[i][n]
    return "unique", sol


# -- per-phase derivative system ----------------------------------------------


@dataclass(frozen=True)
class ThinFlow:
    """Label slopes per reachable node and flow rates per competitive edge."""

    label_slopes: Mapping[str, Fraction]
    edge_rates: Mapping[str, Fraction]


def _drain_ratio(rate: Fraction, cap: Fraction, tail_slope: Fraction,
                 resetting: bool) -> Fraction:
    if resetting:
        return rate / cap
    return max(tail_slope, rate / cap)


def verify_thin_flow(net: Network, active: frozenset[str], resetting: frozenset[str],
                     capacity: Mapping[str, Fraction], supply: Fraction,
                     label_slopes: Mapping[str, Fraction],
                     edge_rates: Mapping[str, Fraction]) -> Optional[str]:
    """Standalone axiom checker; returns a reason string if invalid."""
    by_id = net.edge_by_id
    nodes = set(label_slopes)
    if net.source not in nodes or label_slopes[net.source] != 1:
        return "source label slope must be one"
    for v, slope in label_slopes.items():
        if slope < 0:
            return f"negative label slope at {v}"
    for eid in active:
        if edge_rates.get(eid, ZERO) < 0:
            return f"negative rate on {eid}"
    balance = {v: ZERO for v in nodes}
    for eid in active:
        e = by_id[eid]
        rate = edge_rates.get(eid, ZERO)
        balance[e.tail] -= rate
        balance[e.head] += rate
    for v in nodes:
        expected = ZERO
        if v == net.source:
            expected = -supply
        elif v == net.sink:
            expected = supply
        if balance[v] != expected:
            return f"conservation fails at {v}"
    incoming: dict[str, list[Fraction]] = {v: [] for v in nodes}
    for eid in active:
        e = by_id[eid]
        rate = edge_rates.get(eid, ZERO)
        ratio = _drain_ratio(rate, capacity[eid], label_slopes[e.tail],
                             eid in resetting)
        incoming[e.head].append(ratio)
        if label_slopes[e.head] > ratio:
            return f"head label of {eid} grows past its drain ratio"
        if rate > 0 and label_slopes[e.head] != ratio:
            return f"{eid} carries flow without attaining the head minimum"
    for v in nodes:
        if v == net.source:
            continue
        if not incoming[v]:
            return f"{v} has no competitive in-edge"
        if label_slopes[v] != min(incoming[v]):
            return f"label slope at {v} is not the incoming minimum"
    return None


def _support_is_path_closed(support: Sequence[str], by_id, source: str, sink: str) -> bool:
    """Every support edge must lie on a source-sink route inside the support."""
    if not support:
        return False
    heads: dict[str, list[str]] = {}
    tails: dict[str, list[str]] = {}
    for eid in support:
        e = by_id[eid]
        heads.setdefault(e.tail, []).append(e.head)
        tails.setdefault(e.head, []).append(e.tail)

    def closure(start: str, table: dict[str, list[str]]) -> set[str]:
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in table.get(v, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    from_source = closure(source, heads)
    to_sink = closure(sink, tails)
    if sink not in from_source:
        return False
    for eid in support:
        e = by_id[eid]
        if e.tail not in from_source or e.head not in to_sink:
            return False
    return True


def thin_flow(net: Network, active: frozenset[str], resetting: frozenset[str],
              capacity: Mapping[str, Fraction], supply: Fraction) -> ThinFlow:
    """Solve the per-phase derivative system on the competitive edge set.

    Patterns (which edges carry flow; for each flow edge whether the capacity
    term or the tail slope pins the head; for each flow-free node which
    in-edge attains its minimum) are enumerated in a fixed order and each one
    is solved exactly; the first solution passing `verify_thin_flow` wins,
    which makes the support choice the lexicographically smallest valid one.
    Patterns whose linear system is degenerate are skipped: their solution
    sets are faces whose corners other patterns pin down.
    """
    for tf in enumerate_thin_flows(net, active, resetting, capacity, supply):
        return tf
    raise InternalConsistencyError(
        "no valid derivative pattern found (this should be impossible for a "
        "feasible competitive edge set)")


def enumerate_thin_flows(net: Network, active: frozenset[str],
                         resetting: frozenset[str],
                         capacity: Mapping[str, Fraction],
                         supply: Fraction):
    """Yield every verified pattern solution in deterministic order.

    Different patterns may realize different flow splits, but their label
    slopes all agree (labels are the unique observable); the test suite
    asserts that agreement by exhausting this generator on small systems.
    """
    if not resetting <= active:
        raise ContractError("resetting edges must be competitive")
    by_id = net.edge_by_id
    edge_order = [e.id for e in net.edges if e.id in active]
    if len(edge_order) > MAX_ACTIVE_EDGES:
        raise SizeCapError(f"more than {MAX_ACTIVE_EDGES} competitive edges")

    # Reachability inside the competitive subgraph defines the node set.
    reach = {net.source}
    frontier = [net.source]
    adjacency: dict[str, list[str]] = {}
    for eid in edge_order:
        adjacency.setdefault(by_id[eid].tail, []).append(eid)
    while frontier:
        v = frontier.pop()
        for eid in adjacency.get(v, ()):
            w = by_id[eid].head
            if w not in reach:
                reach.add(w)
                frontier.append(w)
    for eid in edge_order:
        if by_id[eid].tail not in reach:
            raise ContractError(f"competitive edge {eid} is unreachable from the source")
    if net.sink not in reach:
        raise NoPathError("sink not reachable through competitive edges")

    nodes = [v for v in net.nodes if v in reach]
    node_index = {v: i for i, v in enumerate(nodes)}
    in_active: dict[str, list[str]] = {v: [] for v in nodes}
    for eid in edge_order:
        in_active[by_id[eid].head].append(eid)

    for support_mask in product((0, 1), repeat=len(edge_order)):
        support = [eid for eid, bit in zip(edge_order, support_mask) if bit]
        if not _support_is_path_closed(support, by_id, net.source, net.sink):
            continue
        support_set = set(support)
        x_index = {eid: len(nodes) + i for i, eid in enumerate(support)}
        n = len(nodes) + len(support)

        base_rows: list[tuple[list[Fraction], Fraction]] = []

        def row() -> list[Fraction]:
            return [ZERO] * n

        r = row()
        r[node_index[net.source]] = ONE
        base_rows.append((r, ONE))
        for v in nodes:
            if v == net.sink:
                continue
            r = row()
            for eid in support:
                e = by_id[eid]
                if e.head == v:
                    r[x_index[eid]] += ONE
                if e.tail == v:
                    r[x_index[eid]] -= ONE
            base_rows.append((r, -supply if v == net.source else ZERO))

        branch_options = []
        for eid in support:
            if eid in resetting:
                branch_options.append(("cap",))
            else:
                branch_options.append(("cap", "label"))
        flowless = [v for v in nodes
                    if v != net.source and not (set(in_active[v]) & support_set)]
        argmin_options = [tuple(in_active[v]) for v in flowless]

        for branches in product(*branch_options):
            for argmins in product(*argmin_options):
                rows = list(base_rows)
                for eid, branch in zip(support, branches):
                    e = by_id[eid]
                    r = row()
                    if branch == "cap":
                        r[node_index[e.head]] = ONE
                        r[x_index[eid]] = -ONE / capacity[eid]
                    else:
                        r[node_index[e.head]] = ONE
                        r[node_index[e.tail]] = -ONE
                    rows.append((r, ZERO))
                for v, eid in zip(flowless, argmins):
                    e = by_id[eid]
                    r = row()
                    r[node_index[v]] = ONE
                    if eid not in resetting:
                        r[node_index[e.tail]] = -ONE
                    rows.append((r, ZERO))
                status, sol = solve_exact(rows, n)
                if status != "unique":
                    continue
                label_slopes = {v: sol[node_index[v]] for v in nodes}
                edge_rates = {eid: ZERO for eid in edge_order}
                for eid in support:
                    edge_rates[eid] = sol[x_index[eid]]
                if verify_thin_flow(net, active, resetting, capacity, supply,
                                    label_slopes, edge_rates) is None:
                    yield ThinFlow(label_slopes, edge_rates)


# -- phase engine ---------------------------------------------------------------


@dataclass(frozen=True)
class Phase:
    start: Fraction
    end: Scalar  # Fraction, or INF for the final phase
    active: tuple[str, ...]
    resetting: tuple[str, ...]
    label_slopes: Mapping[str, Fraction]
    edge_rates: Mapping[str, Fraction]


@dataclass(frozen=True)
class Event:
    """A phase boundary: which edges became competitive and which queues
    emptied, with the wall-clock tail arrival time of each activated edge."""

    time: Fraction
    activations: tuple[str, ...]
    depletions: tuple[str, ...]
    tail_arrival: Mapping[str, Fraction]


@dataclass(frozen=True)
class EquilibriumRun:
    instance: Instance
    phases: tuple[Phase, ...]
    events: tuple[Event, ...]
    labels: Mapping[str, object]  # PiecewiseLinear, or INF for unreachable nodes
    flow: FlowOverTime
    social_cost: Scalar
    steady: bool
    diverging: bool


def _tight_sets(inst: Instance, arrival: Mapping[str, Fraction],
                queue: Mapping[str, Fraction]) -> tuple[frozenset[str], frozenset[str]]:
    """Competitive edges (tail arrival + wait + transit equals head arrival)
    and the subset with a positive queue."""
    active = set()
    resetting = set()
    for e in inst.network.edges:
        if e.tail not in arrival:
            continue
        wait = queue[e.id] / inst.capacity[e.id]
        if arrival[e.tail] + wait + inst.transit[e.id] == arrival[e.head]:
            active.add(e.id)
            if queue[e.id] > 0:
                resetting.add(e.id)
    return frozenset(active), frozenset(resetting)


def next_event(inst: Instance, arrival: Mapping[str, Fraction],
               queue: Mapping[str, Fraction], tf: ThinFlow,
               active: frozenset[str]) -> tuple[Scalar, tuple[str, ...], tuple[str, ...]]:
    """Earliest phase-ending event from the given state under the given
    derivatives: queue depletions and activations of idle edges.  Returns
    (delta, activations, depletions); delta is INF when the phase is final.
    """
    slopes = tf.label_slopes
    best: Scalar = INF
    activations: list[str] = []
    depletions: list[str] = []
    for e in inst.network.edges:
        if e.tail not in arrival:
            continue
        rate = tf.edge_rates.get(e.id, ZERO)
        tail_slope = slopes[e.tail]
        if queue[e.id] > 0:
            drain = rate - inst.capacity[e.id] * tail_slope
            if drain < 0:
                delta = -queue[e.id] / drain
                if delta < best:
                    best, activations, depletions = delta, [], [e.id]
                elif delta == best:
                    depletions.append(e.id)
        if e.id not in active:
            wait = queue[e.id] / inst.capacity[e.id]
            gap = arrival[e.tail] + wait + inst.transit[e.id] - arrival[e.head]
            entry_slope = ZERO if queue[e.id] > 0 else tail_slope
            closing = slopes[e.head] - entry_slope
            if closing > 0:
                delta = gap / closing
                if delta < best:
                    best, activations, depletions = delta, [e.id], []
                elif delta == best:
                    activations.append(e.id)
    return best, tuple(activations), tuple(depletions)


def nash_flow(inst: Instance, phase_cap: int = 200, self_check: bool = True) -> EquilibriumRun:
    """Compute the equilibrium of an acyclic instance with constant supply.

    The run terminates with a final phase in which either all labels grow at
    unit speed (steady) or the sink label grows faster forever (diverging,
    unbounded cost).  With `self_check` the resulting flow is re-validated by
    the independent feasibility and equilibrium checkers.
    """
    net = inst.network
    order = net.topological_order()
    reachable = net.reachable_from(net.source)
    if net.sink not in reachable:
        raise NoPathError("no source-sink path; cost is unbounded by convention")

    # Earliest arrivals on the empty network: free-flow distances.
    arrival: dict[str, Fraction] = {net.source: ZERO}
    for v in order:
        if v not in reachable or v == net.source:
            continue
        arrival[v] = min(arrival[e.tail] + inst.transit[e.id]
                         for e in net.in_edges[v] if e.tail in arrival)
    queue: dict[str, Fraction] = {eid: ZERO for eid in inst.edge_ids}

    now = ZERO
    phases: list[Phase] = []
    events: list[Event] = []
    label_points: dict[str, list[tuple[Fraction, Fraction]]] = {
        v: [(ZERO, arrival[v])] for v in arrival}
    in_segments: dict[str, list[tuple[Fraction, Fraction]]] = {
        eid: [] for eid in inst.edge_ids}
    out_segments: dict[str, list[tuple[Fraction, Fraction]]] = {
        eid: [] for eid in inst.edge_ids}
    final_slopes: Optional[Mapping[str, Fraction]] = None

    for _ in range(phase_cap):
        active, resetting = _tight_sets(inst, arrival, queue)
        tf = thin_flow(net, active, resetting, inst.capacity, inst.supply)
        delta, activations, depletions = next_event(inst, arrival, queue, tf, active)

        phases.append(Phase(
            start=now,
            end=INF if delta is INF else now + delta,
            active=tuple(sorted(active)),
            resetting=tuple(sorted(resetting)),
            label_slopes=dict(tf.label_slopes),
            edge_rates={eid: tf.edge_rates.get(eid, ZERO) for eid in inst.edge_ids},
        ))

        # Emit constant-rate flow segments for this phase, on each edge's own
        # wall clock (tail arrival time; head side shifted by the transit).
        for e in net.edges:
            if e.tail not in arrival:
                continue
            tail_slope = tf.label_slopes[e.tail]
            if tail_slope == 0:
                continue  # local clock frozen; nothing enters or drains
            rate = tf.edge_rates.get(e.id, ZERO)
            wall_start = arrival[e.tail]
            inflow_rate = rate / tail_slope
            if queue[e.id] > 0 or rate > inst.capacity[e.id] * tail_slope:
                outflow_rate = inst.capacity[e.id]
            else:
                outflow_rate = inflow_rate
            in_segments[e.id].append((wall_start, inflow_rate))
            out_segments[e.id].append((wall_start + inst.transit[e.id], outflow_rate))

        if delta is INF:
            final_slopes = tf.label_slopes
            break

        # Advance the exact state to the event time.
        for v in arrival:
            arrival[v] = arrival[v] + tf.label_slopes[v] * delta
            label_points[v].append((now + delta, arrival[v]))
        for e in net.edges:
            if e.tail not in arrival:
                continue
            rate = tf.edge_rates.get(e.id, ZERO)
            drain = rate - inst.capacity[e.id] * tf.label_slopes[e.tail]
            if queue[e.id] > 0:
                queue[e.id] = queue[e.id] + drain * delta
            elif drain > 0:
                queue[e.id] = drain * delta
            if queue[e.id] < 0:
                raise InternalConsistencyError(f"queue of {e.id} went negative")
        now = now + delta
        events.append(Event(
            time=now,
            activations=activations,
            depletions=depletions,
            tail_arrival={eid: arrival[net.edge_by_id[eid].tail] for eid in activations},
        ))
    else:
        summary = ", ".join(
            f"[{format_scalar(p.start)}, {format_scalar(p.end)})" for p in phases[-5:])
        raise PhaseCapError(
            f"no final phase within {phase_cap} phases; last intervals: {summary}")

    labels: dict[str, object] = {}
    for v in net.nodes:
        if v not in arrival:
            labels[v] = INF
        else:
            labels[v] = PiecewiseLinear.from_points(
                label_points[v], final_slopes[v])

    inflow = {eid: PiecewiseLinear.from_rate_segments(segs)
              for eid, segs in in_segments.items()}
    outflow = {eid: PiecewiseLinear.from_rate_segments(segs)
               for eid, segs in out_segments.items()}
    flow = FlowOverTime(
        inflow=inflow,
        outflow=outflow,
        sink_cumulative=derive_sink_cumulative(inst, inflow, outflow),
    )

    sink_latency = labels[net.sink] - PiecewiseLinear.identity()
    cost = sink_latency.supremum()
    steady = all(s == 1 for s in final_slopes.values())
    diverging = final_slopes[net.sink] > 1

    run = EquilibriumRun(
        instance=inst,
        phases=tuple(phases),
        events=tuple(events),
        labels=labels,
        flow=flow,
        social_cost=cost,
        steady=steady,
        diverging=diverging,
    )
    if self_check:
        report = validate_feasible(inst, flow)
        if not report.ok:
            raise InternalConsistencyError(f"engine flow is infeasible:\n{report}")
        ok, nash_report = certify_nash(inst, flow)
        if not ok:
            raise InternalConsistencyError(f"engine flow is not an equilibrium:\n{nash_report}")
    return run


def social_cost_ne(inst: Instance, phase_cap: int = 200,
                   self_check: bool = True) -> Scalar:
    """Social cost of the canonical computed equilibrium."""
    return nash_flow(inst, phase_cap=phase_cap, self_check=self_check).social_cost
