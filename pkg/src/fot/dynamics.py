"""Queue and label mechanics for a given flow over time.

The deterministic queueing model: flow entering an edge faster than its
capacity waits in a point queue at the tail; total edge delay is queue wait
plus free-flow transit.  Given a flow (cumulative in/outflow per edge plus
cumulative sink arrivals), this module derives waiting times and earliest
arrival labels, validates the four feasibility conditions, checks both
equilibrium characterizations (flow only on currently shortest paths; no
particle overtakes another), and evaluates the social cost.

Everything here is an independent check: it never trusts the phase engine
that produced a flow, only the curves themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .core import (
    ContractError,
    DomainError,
    INF,
    Instance,
    InternalConsistencyError,
    MalformedFlowError,
    Scalar,
    format_scalar,
)
from .pwl import ONE, ZERO, PiecewiseLinear, minimum

Path = tuple[str, ...]


@dataclass(frozen=True)
class FlowOverTime:
    """Cumulative edge inflows/outflows, cumulative sink arrivals, and an
    optional path decomposition (cumulative amount entered per path)."""

    inflow: Mapping[str, PiecewiseLinear]
    outflow: Mapping[str, PiecewiseLinear]
    sink_cumulative: PiecewiseLinear
    paths: Optional[Mapping[Path, PiecewiseLinear]] = None


def zero_flow(inst: Instance) -> FlowOverTime:
    zero = PiecewiseLinear.constant(ZERO)
    return FlowOverTime(
        inflow={eid: zero for eid in inst.edge_ids},
        outflow={eid: zero for eid in inst.edge_ids},
        sink_cumulative=zero,
    )


def derive_sink_cumulative(inst: Instance,
                           inflow: Mapping[str, PiecewiseLinear],
                           outflow: Mapping[str, PiecewiseLinear]) -> PiecewiseLinear:
    """Sink arrivals implied by the edge curves: inflow to the sink node minus
    what leaves it again."""
    total = PiecewiseLinear.constant(ZERO)
    t = inst.network.sink
    for e in inst.network.in_edges[t]:
        total = total + outflow[e.id]
    for e in inst.network.out_edges[t]:
        total = total - inflow[e.id]
    return total


# -- queueing primitives -----------------------------------------------------


def waiting_curve(inst: Instance, flow: FlowOverTime, edge_id: str) -> PiecewiseLinear:
    """Waiting time in the edge queue as a function of queue-entry time:
    (cumulative inflow now minus cumulative outflow one transit later) over
    capacity."""
    tau = inst.transit[edge_id]
    shifted = flow.outflow[edge_id].compose(PiecewiseLinear.affine(ONE, tau))
    return (flow.inflow[edge_id] - shifted).scale(ONE / inst.capacity[edge_id])


def waiting_time(inst: Instance, flow: FlowOverTime, edge_id: str,
                 at: Fraction) -> Fraction:
    if at < 0:
        raise DomainError("waiting time is defined for nonnegative times only")
    return waiting_curve(inst, flow, edge_id)(at)


def exit_curve(inst: Instance, flow: FlowOverTime, edge_id: str) -> PiecewiseLinear:
    """Head-arrival time for a particle entering the edge queue at a given
    time: entry + wait + transit."""
    wait = waiting_curve(inst, flow, edge_id)
    return PiecewiseLinear.identity().add_constant(inst.transit[edge_id]) + wait


def labels(inst: Instance, flow: FlowOverTime) -> dict[str, PiecewiseLinear | object]:
    """Earliest-arrival label per node, as a function of network entry time.

    The source labels the entry time itself; every other reachable node takes
    the pointwise minimum over its incoming edges of the tail label pushed
    through that edge's exit map.  Unreachable nodes get the INF sentinel.
    Restricted to acyclic networks (the recursion follows a topological
    order).
    """
    net = inst.network
    order = net.topological_order()
    reachable = net.reachable_from(net.source)
    out: dict[str, PiecewiseLinear | object] = {}
    exit_curves = {eid: exit_curve(inst, flow, eid) for eid in inst.edge_ids}
    for v in order:
        if v not in reachable:
            out[v] = INF
            continue
        if v == net.source:
            out[v] = PiecewiseLinear.identity()
            continue
        candidates = []
        for e in net.in_edges[v]:
            tail_label = out[e.tail]
            if tail_label is INF:
                continue
            candidates.append(exit_curves[e.id].compose(tail_label))
        out[v] = minimum(*candidates)
    return out


def node_latency(inst: Instance, flow: FlowOverTime, v: str, at: Fraction) -> Scalar:
    """Time needed to reach node v when entering the network at `at`."""
    label = labels(inst, flow)[v]
    if label is INF:
        return INF
    return label(at) - at


# -- feasibility -------------------------------------------------------------

CAPACITY = "Capacity(1)"
LINK_CONSERVATION = "LinkConservation(2)"
NODE_CONSERVATION = "NodeConservation(3)"
QUEUE_DISCIPLINE = "QueueDiscipline(4)"
SHORTEST_PATHS = "ShortestPaths"
NO_OVERTAKING = "NoOvertaking"


@dataclass(frozen=True)
class Violation:
    condition: str
    where: str
    at: Optional[Fraction]
    lhs: Scalar
    rhs: Scalar
    detail: str = ""

    def __str__(self) -> str:
        at = "-" if self.at is None else format_scalar(self.at)
        return (f"{self.condition} at {self.where}, time {at}: "
                f"{format_scalar(self.lhs)} vs {format_scalar(self.rhs)} {self.detail}")


@dataclass(frozen=True)
class ViolationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "no violations"
        return "\n".join(str(v) for v in self.violations)


def _first_difference(f: PiecewiseLinear, g: PiecewiseLinear) -> Optional[Fraction]:
    """Smallest witness point where two curves differ (None if equal)."""
    if f == g:
        return None
    if f.xs[0] != g.xs[0]:
        return max(f.xs[0], g.xs[0])
    for x in sorted(set(f.xs) | set(g.xs)):
        if f(x) != g(x):
            return x
    return max(f.xs[-1], g.xs[-1])  # values agree; final slopes differ


def _check_structure(inst: Instance, flow: FlowOverTime) -> None:
    ids = set(inst.edge_ids)
    if set(flow.inflow) != ids or set(flow.outflow) != ids:
        raise MalformedFlowError("flow curves must cover exactly the edge set")
    for name, curves in (("inflow", flow.inflow), ("outflow", flow.outflow)):
        for eid, curve in curves.items():
            if curve.xs[0] != 0 or curve.ys[0] != 0:
                raise MalformedFlowError(f"{name} of {eid} must start at (0, 0)")
            if not curve.is_nondecreasing():
                raise MalformedFlowError(f"{name} of {eid} must be nondecreasing")
    gamma = flow.sink_cumulative
    if gamma.xs[0] != 0 or gamma.ys[0] != 0 or not gamma.is_nondecreasing():
        raise MalformedFlowError("sink arrivals must be nondecreasing from (0, 0)")
    if flow.paths is not None:
        net = inst.network
        total = PiecewiseLinear.constant(ZERO)
        for path, curve in flow.paths.items():
            _check_path_shape(inst, path)
            if not curve.is_nondecreasing() or curve.ys[0] != 0:
                raise MalformedFlowError(f"path curve for {path} malformed")
            total = total + curve
        if total != PiecewiseLinear.affine(inst.supply, ZERO):
            raise MalformedFlowError("path decomposition must sum to the supply")


def _check_path_shape(inst: Instance, path: Path) -> None:
    net = inst.network
    by_id = net.edge_by_id
    if not path or any(eid not in by_id for eid in path):
        raise MalformedFlowError(f"unknown edges in path {path}")
    if by_id[path[0]].tail != net.source or by_id[path[-1]].head != net.sink:
        raise MalformedFlowError(f"path {path} does not join source to sink")
    for a, b in zip(path, path[1:]):
        if by_id[a].head != by_id[b].tail:
            raise MalformedFlowError(f"path {path} is not edge-connected")


def validate_feasible(inst: Instance, flow: FlowOverTime,
                      sample_grid: Sequence[Fraction] = ()) -> ViolationReport:
    """Check the four feasibility conditions exactly.

    Within a segment of the piecewise-linear curves every condition is
    affine, so exact curve identities plus per-segment slope checks decide
    the universally quantified statements; the optional `sample_grid` adds
    redundant pointwise probes on top.
    """
    _check_structure(inst, flow)
    found: list[Violation] = []
    ident = PiecewiseLinear.identity()

    for eid in inst.edge_ids:
        cap = inst.capacity[eid]
        tau = inst.transit[eid]
        outflow = flow.outflow[eid]
        inflow = flow.inflow[eid]

        # (1) outflow rate never exceeds capacity
        for a, _, _, slope in outflow.segments():
            if slope > cap:
                found.append(Violation(CAPACITY, eid, a, slope, cap,
                                       "outflow rate above capacity"))

        wait = waiting_curve(inst, flow, eid)
        exit_map = ident.add_constant(tau) + wait

        # (4a) waiting times are never negative
        neg_at = _first_below_zero(wait)
        if neg_at is not None:
            found.append(Violation(QUEUE_DISCIPLINE, eid, neg_at, wait(neg_at), ZERO,
                                   "negative queue"))
            continue  # the remaining conditions are meaningless here

        # queue-entry order must be preserved, otherwise the exit map is no
        # function of entry time and condition (2) cannot even be posed
        if not exit_map.is_nondecreasing():
            found.append(Violation(LINK_CONSERVATION, eid, exit_map.xs[0],
                                   ZERO, ZERO, "exit map decreases (overtaking inside queue)"))
            continue

        # (2) everything that entered by time x has left by exit_map(x)
        composed = outflow.compose(exit_map)
        witness = _first_difference(inflow, composed)
        if witness is not None:
            found.append(Violation(LINK_CONSERVATION, eid, witness,
                                   inflow(witness), composed(witness),
                                   "cumulative in/outflow mismatch"))

        # (4b) a nonempty queue drains at full capacity
        shifted_out = outflow.compose(ident.add_constant(tau))
        grid = sorted(set(wait.xs) | set(shifted_out.xs))
        for i, a in enumerate(grid):
            b = grid[i + 1] if i + 1 < len(grid) else None
            wait_positive = wait(a) > 0 or (b is not None and wait(b) > 0) or (
                b is None and wait.slope_right(a) > 0)
            if not wait_positive:
                continue
            rate = shifted_out.slope_right(a)
            if rate != cap:
                found.append(Violation(QUEUE_DISCIPLINE, eid, a, rate, cap,
                                       "queued edge not draining at capacity"))

    # (3) node conservation, with source and sink exceptions
    net = inst.network
    for v in net.nodes:
        into = PiecewiseLinear.constant(ZERO)
        for e in net.in_edges[v]:
            into = into + flow.outflow[e.id]
        outof = PiecewiseLinear.constant(ZERO)
        for e in net.out_edges[v]:
            outof = outof + flow.inflow[e.id]
        if v == net.source:
            expected = into + PiecewiseLinear.affine(inst.supply, ZERO)
            witness = _first_difference(outof, expected)
        elif v == net.sink:
            expected = into - flow.sink_cumulative
            witness = _first_difference(outof, expected)
        else:
            witness = _first_difference(outof, into)
        if witness is not None:
            found.append(Violation(NODE_CONSERVATION, v, witness,
                                   outof(witness), into(witness),
                                   "flow conservation broken"))

    for at in sample_grid:
        for eid in inst.edge_ids:
            wait_at = waiting_time(inst, flow, eid, at)
            exit_at = at + wait_at + inst.transit[eid]
            if flow.inflow[eid](at) != flow.outflow[eid](exit_at):
                found.append(Violation(LINK_CONSERVATION, eid, at,
                                       flow.inflow[eid](at), flow.outflow[eid](exit_at),
                                       "pointwise probe failed"))

    return ViolationReport(tuple(found))


def _first_below_zero(curve: PiecewiseLinear) -> Optional[Fraction]:
    for x, y in zip(curve.xs, curve.ys):
        if y < 0:
            return x
    if curve.final_slope < 0:
        # crosses zero somewhere on the final ray
        x, y = curve.xs[-1], curve.ys[-1]
        return x - y / curve.final_slope + 1
    return None


# -- equilibrium characterizations -------------------------------------------


def certify_nash(inst: Instance, flow: FlowOverTime) -> tuple[bool, ViolationReport]:
    """Check both equilibrium characterizations and assert they agree.

    (a) Flow is sent only over currently shortest paths: whenever an edge is
        strictly slower than the best route to its head, its inflow at the
        tail-arrival time is zero.
    (b) No flow overtakes any other flow: cumulative sink arrivals evaluated
        at the sink label equal supply times entry time, identically.

    The two verdicts must coincide for feasible flows; a disagreement is an
    internal bug, not a property of the input.
    """
    lab = labels(inst, flow)
    net = inst.network
    found: list[Violation] = []

    for e in net.edges:
        tail_label = lab[e.tail]
        head_label = lab[e.head]
        if tail_label is INF:
            if flow.inflow[e.id] != PiecewiseLinear.constant(ZERO):
                found.append(Violation(SHORTEST_PATHS, e.id, None, ZERO, ZERO,
                                       "flow on an edge unreachable from the source"))
            continue
        via_edge = exit_curve(inst, flow, e.id).compose(tail_label)
        gap = via_edge - head_label
        pushed = flow.inflow[e.id].compose(tail_label)
        grid = sorted(set(gap.xs) | set(pushed.xs))
        for i, a in enumerate(grid):
            b = grid[i + 1] if i + 1 < len(grid) else None
            if b is None:
                slower = gap(a) > 0 or gap.final_slope > 0
            else:
                slower = gap(a) > 0 or gap(b) > 0
            rate = pushed.slope_right(a)
            if slower and rate > 0:
                found.append(Violation(SHORTEST_PATHS, e.id, a, gap(a), ZERO,
                                       "inflow on a currently non-shortest edge"))
    sent_shortest = not found

    sink_label = lab[net.sink]
    overtake_free = False
    if sink_label is INF:
        found.append(Violation(NO_OVERTAKING, net.sink, None, ZERO, inst.supply,
                               "sink unreachable"))
    else:
        onboard = flow.sink_cumulative.compose(sink_label)
        target = PiecewiseLinear.affine(inst.supply, ZERO)
        witness = _first_difference(onboard, target)
        if witness is None:
            overtake_free = True
        else:
            found.append(Violation(NO_OVERTAKING, net.sink, witness,
                                   onboard(witness), target(witness),
                                   "sink arrivals out of step with entries"))

    if sent_shortest != overtake_free:
        raise InternalConsistencyError(
            "shortest-path and no-overtaking characterizations disagree: "
            f"{sent_shortest} vs {overtake_free}")
    return sent_shortest, ViolationReport(tuple(found))


# -- social cost -------------------------------------------------------------


def path_latency_curve(inst: Instance, flow: FlowOverTime, path: Path) -> PiecewiseLinear:
    """Travel time along a path as a function of the entry time into its
    first queue: chain the exit maps, then subtract the entry time."""
    arrival = PiecewiseLinear.identity()
    for eid in path:
        arrival = exit_curve(inst, flow, eid).compose(arrival)
    return arrival - PiecewiseLinear.identity()


def social_cost(inst: Instance, flow: FlowOverTime) -> Scalar:
    """Largest latency experienced by any particle that actually travels.

    With an explicit path decomposition the supremum runs over the times at
    which each path carries positive entry rate.  Without one the flow must
    certify as an equilibrium, in which case every particle rides a currently
    shortest path and the sink latency curve carries the supremum.
    """
    if flow.paths is not None:
        _check_structure(inst, flow)
        best: Scalar = ZERO
        for path, cumulative in flow.paths.items():
            latency = path_latency_curve(inst, flow, path)
            grid = sorted(set(latency.xs) | set(cumulative.xs))
            for i, a in enumerate(grid):
                b = grid[i + 1] if i + 1 < len(grid) else None
                rate = cumulative.slope_right(a)
                if rate <= 0:
                    continue
                if b is None:
                    if latency.final_slope > 0:
                        return INF
                    candidate = latency(a)
                else:
                    candidate = max(latency(a), latency(b))
                if best is not INF and candidate > best:
                    best = candidate
        return best

    ok, report = certify_nash(inst, flow)
    if not ok:
        raise ContractError(
            "social cost of a non-equilibrium flow needs an explicit path "
            f"decomposition; certification failed:\n{report}")
    sink_label = labels(inst, flow)[inst.network.sink]
    latency = sink_label - PiecewiseLinear.identity()
    return latency.supremum()


# -- JSON / CSV interchange ---------------------------------------------------
#
# Flow JSON: {"inflow": {edge: [[start, rate], ...]}, "outflow": {...},
#             "sink": {"breakpoints": [[x, y], ...], "final_slope": "p/q"},
#             "paths": {"e1,e2": [[start, rate], ...]}}   (paths optional)


def pwl_to_obj(curve: PiecewiseLinear) -> dict:
    return {
        "breakpoints": [[format_scalar(x), format_scalar(y)]
                        for x, y in zip(curve.xs, curve.ys)],
        "final_slope": format_scalar(curve.final_slope),
    }


def pwl_from_obj(obj: dict) -> PiecewiseLinear:
    from .core import as_fraction
    points = [(as_fraction(x), as_fraction(y)) for x, y in obj["breakpoints"]]
    return PiecewiseLinear.from_points(points, as_fraction(obj["final_slope"]))


def _rates_to_obj(curve: PiecewiseLinear) -> list[list[str]]:
    return [[format_scalar(x), format_scalar(r)] for x, r in curve.rate_pairs()]


def _rates_from_obj(pairs) -> PiecewiseLinear:
    from .core import as_fraction
    return PiecewiseLinear.from_rate_segments(
        [(as_fraction(x), as_fraction(r)) for x, r in pairs])


def flow_to_obj(flow: FlowOverTime) -> dict:
    obj = {
        "inflow": {eid: _rates_to_obj(c) for eid, c in sorted(flow.inflow.items())},
        "outflow": {eid: _rates_to_obj(c) for eid, c in sorted(flow.outflow.items())},
        "sink": pwl_to_obj(flow.sink_cumulative),
    }
    if flow.paths is not None:
        obj["paths"] = {",".join(path): _rates_to_obj(c)
                        for path, c in sorted(flow.paths.items())}
    return obj


def flow_from_obj(obj: dict) -> FlowOverTime:
    paths = None
    if "paths" in obj:
        paths = {tuple(key.split(",")): _rates_from_obj(pairs)
                 for key, pairs in obj["paths"].items()}
    return FlowOverTime(
        inflow={eid: _rates_from_obj(p) for eid, p in obj["inflow"].items()},
        outflow={eid: _rates_from_obj(p) for eid, p in obj["outflow"].items()},
        sink_cumulative=pwl_from_obj(obj["sink"]),
        paths=paths,
    )


def flow_to_csv_rows(flow: FlowOverTime) -> list[tuple[str, str, str, str, str]]:
    """One row per (curve, breakpoint): kind, name, x, value, slope_right."""
    rows = []

    def emit(kind: str, name: str, curve: PiecewiseLinear) -> None:
        for x in curve.xs:
            rows.append((kind, name, format_scalar(x), format_scalar(curve(x)),
                         format_scalar(curve.slope_right(x))))

    for eid, curve in sorted(flow.inflow.items()):
        emit("inflow", eid, curve)
    for eid, curve in sorted(flow.outflow.items()):
        emit("outflow", eid, curve)
    emit("sink", "sink", flow.sink_cumulative)
    if flow.paths is not None:
        for path, curve in sorted(flow.paths.items()):
            emit("path", ",".join(path), curve)
    return rows
