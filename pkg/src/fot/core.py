"""Exact scalars, networks, instances, and the JSON interchange format.

Every numeric quantity in this package is an exact rational
(`fractions.Fraction`).  The single non-rational value is the ``INF``
sentinel used for unbounded costs; it supports comparisons but no
arithmetic, so an infinity can never leak silently into a computation.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Union


class FotError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FotError):
    """An exact function was evaluated outside its domain."""


class ContractError(FotError):
    """A documented precondition was violated by the caller."""


class ParameterError(FotError):
    """Construction parameters are out of their documented range."""


class UnsupportedTopologyError(FotError):
    """The operation is restricted to acyclic networks."""


class NoPathError(FotError):
    """The instance has no directed source-sink path."""


class SizeCapError(FotError):
    """Input exceeds the exhaustive-search size cap."""


class PhaseCapError(FotError):
    """The phase computation exceeded its hard iteration cap."""


class InternalConsistencyError(FotError):
    """Two independent characterizations disagreed; indicates a bug."""


class MalformedFlowError(FotError):
    """A flow's curves are structurally inconsistent."""


class _PosInfinity:
    """Positive infinity sentinel.

    Orders above every rational; equality only with itself.  Arithmetic is
    deliberately undefined (a ``TypeError`` surfaces immediately), because no
    operation in this package may produce infinity implicitly.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __eq__(self, other) -> bool:
        return other is self

    def __hash__(self) -> int:
        return hash("fot.INF")

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return other is self

    def __gt__(self, other) -> bool:
        return other is not self

    def __ge__(self, other) -> bool:
        return True


INF = _PosInfinity()

Scalar = Union[Fraction, _PosInfinity]


def is_finite(x: Scalar) -> bool:
    return x is not INF


_RATIONAL_RE = re.compile(r"[+-]?\d+(/\d+)?\Z")


def parse_scalar(text: str) -> Scalar:
    """Parse ``"p/q"``, ``"p"`` or ``"inf"`` into an exact scalar.

    Decimal and float syntax is rejected: exactness is a package-wide
    invariant, so the boundary accepts nothing but ratios of integers.
    """
    text = text.strip()
    if text == "inf":
        return INF
    if not _RATIONAL_RE.match(text):
        raise ParameterError(f"not an exact rational: {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError as exc:
        raise ParameterError(f"zero denominator: {text!r}") from exc


def format_scalar(x: Scalar) -> str:
    if x is INF:
        return "inf"
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def as_fraction(x) -> Fraction:
    """Coerce int/str/Fraction to Fraction, rejecting floats."""
    if isinstance(x, float):
        raise ParameterError("floats are not accepted; pass an exact rational")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        value = parse_scalar(x)
        if value is INF:
            raise ParameterError("expected a finite rational, got 'inf'")
        return value
    raise ParameterError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str


@dataclass(frozen=True)
class Network:
    """Directed multigraph with designated source and sink.

    Parallel edges are allowed; edge ids are stable strings so that reports
    can refer to edges by name.
    """

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    source: str
    sink: str

    def __post_init__(self):
        if self.source == self.sink:
            raise ParameterError("source and sink must differ")
        if len(set(self.nodes)) != len(self.nodes):
            raise ParameterError("duplicate node names")
        node_set = set(self.nodes)
        seen = set()
        for e in self.edges:
            if e.id in seen:
                raise ParameterError(f"duplicate edge id {e.id!r}")
            seen.add(e.id)
            if e.tail not in node_set or e.head not in node_set:
                raise ParameterError(f"edge {e.id!r} references unknown node")
        for terminal in (self.source, self.sink):
            if terminal not in node_set:
                raise ParameterError(f"terminal {terminal!r} is not a node")

    @cached_property
    def edge_by_id(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def out_edges(self) -> dict[str, tuple[Edge, ...]]:
        table: dict[str, list[Edge]] = {v: [] for v in self.nodes}
        for e in self.edges:
            table[e.tail].append(e)
        return {v: tuple(es) for v, es in table.items()}

    @cached_property
    def in_edges(self) -> dict[str, tuple[Edge, ...]]:
        table: dict[str, list[Edge]] = {v: [] for v in self.nodes}
        for e in self.edges:
            table[e.head].append(e)
        return {v: tuple(es) for v, es in table.items()}

    def topological_order(self) -> tuple[str, ...]:
        """Nodes in topological order; raises if the graph has a cycle."""
        indeg = {v: 0 for v in self.nodes}
        for e in self.edges:
            indeg[e.head] += 1
        ready = [v for v in self.nodes if indeg[v] == 0]
        order: list[str] = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for e in self.out_edges[v]:
                indeg[e.head] -= 1
                if indeg[e.head] == 0:
                    ready.append(e.head)
        if len(order) != len(self.nodes):
            raise UnsupportedTopologyError("network contains a directed cycle")
        return tuple(order)

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
            return True
        except UnsupportedTopologyError:
            return False

    def reachable_from(self, start: str) -> frozenset[str]:
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for e in self.out_edges[v]:
                if e.head not in seen:
                    seen.add(e.head)
                    stack.append(e.head)
        return frozenset(seen)

    def reaching_to(self, goal: str) -> frozenset[str]:
        seen = {goal}
        stack = [goal]
        while stack:
            v = stack.pop()
            for e in self.in_edges[v]:
                if e.tail not in seen:
                    seen.add(e.tail)
                    stack.append(e.tail)
        return frozenset(seen)

    def has_path(self, u: str, v: str) -> bool:
        return v in self.reachable_from(u)

    @property
    def has_st_path(self) -> bool:
        return self.has_path(self.source, self.sink)

    def transposed(self) -> "Network":
        return Network(
            nodes=self.nodes,
            edges=tuple(Edge(e.id, e.head, e.tail) for e in self.edges),
            source=self.sink,
            sink=self.source,
        )


@dataclass(frozen=True)
class Instance:
    """A routing game: network, per-edge capacity and transit time, supply.

    Capacities are flow units per unit time (all positive), transit times are
    nonnegative, supply is the constant inflow rate at the source.  A
    sub-instance produced by `restrict` may legally have no source-sink path;
    downstream operations then report unbounded cost.
    """

    network: Network
    capacity: Mapping[str, Fraction]
    transit: Mapping[str, Fraction]
    supply: Fraction

    def __post_init__(self):
        ids = {e.id for e in self.network.edges}
        if set(self.capacity) != ids or set(self.transit) != ids:
            raise ParameterError("capacity/transit maps must cover exactly the edge set")
        for eid in ids:
            if self.capacity[eid] <= 0:
                raise ParameterError(f"capacity of {eid!r} must be positive")
            if self.transit[eid] < 0:
                raise ParameterError(f"transit time of {eid!r} must be nonnegative")
        if self.supply <= 0:
            raise ParameterError("supply must be positive")

    @property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.network.edges)

    @property
    def has_st_path(self) -> bool:
        return self.network.has_st_path


def transpose(inst: Instance) -> Instance:
    """Reverse every edge and swap source with sink; attributes unchanged."""
    return Instance(
        network=inst.network.transposed(),
        capacity=dict(inst.capacity),
        transit=dict(inst.transit),
        supply=inst.supply,
    )


def restrict(inst: Instance, keep: Iterable[str]) -> Instance:
    """Sub-instance on the given edge ids; nodes and terminals unchanged.

    A result without any source-sink path is legal; cost computations on it
    report unbounded values.
    """
    keep_set = set(keep)
    unknown = keep_set - set(inst.edge_ids)
    if unknown:
        raise ParameterError(f"unknown edge ids: {sorted(unknown)}")
    net = Network(
        nodes=inst.network.nodes,
        edges=tuple(e for e in inst.network.edges if e.id in keep_set),
        source=inst.network.source,
        sink=inst.network.sink,
    )
    return Instance(
        network=net,
        capacity={eid: inst.capacity[eid] for eid in keep_set},
        transit={eid: inst.transit[eid] for eid in keep_set},
        supply=inst.supply,
    )


# --- JSON interchange -------------------------------------------------------
#
# Instance:  {"nodes": [...],
#             "edges": [{"id", "tail", "head", "capacity": "p/q", "transit": "p/q"}],
#             "source": ..., "sink": ..., "supply": "p/q"}
# Network JSON is the same object without capacity/transit/supply.
# Rationals travel as "p/q" strings; unknown keys are ignored on input.


def network_to_obj(net: Network) -> dict:
    return {
        "nodes": list(net.nodes),
        "edges": [{"id": e.id, "tail": e.tail, "head": e.head} for e in net.edges],
        "source": net.source,
        "sink": net.sink,
    }


def network_from_obj(obj: dict) -> Network:
    return Network(
        nodes=tuple(obj["nodes"]),
        edges=tuple(Edge(d["id"], d["tail"], d["head"]) for d in obj["edges"]),
        source=obj["source"],
        sink=obj["sink"],
    )


def instance_to_obj(inst: Instance) -> dict:
    obj = network_to_obj(inst.network)
    for entry, edge in zip(obj["edges"], inst.network.edges):
        entry["capacity"] = format_scalar(inst.capacity[edge.id])
        entry["transit"] = format_scalar(inst.transit[edge.id])
    obj["supply"] = format_scalar(inst.supply)
    return obj


def instance_from_obj(obj: dict) -> Instance:
    net = network_from_obj(obj)
    capacity = {d["id"]: as_fraction(d["capacity"]) for d in obj["edges"]}
    transit = {d["id"]: as_fraction(d["transit"]) for d in obj["edges"]}
    return Instance(net, capacity, transit, as_fraction(obj["supply"]))


def is_instance_obj(obj: dict) -> bool:
    return "supply" in obj


def dumps(obj: dict) -> str:
    """Deterministic JSON rendering (sorted keys, no float formatting)."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def loads(text: str) -> dict:
    return json.loads(text)
