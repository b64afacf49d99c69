"""Generators for the instance families used throughout the package.

The central family is the ladder network: a fast chain of zero-transit edges
from source to sink whose capacities shrink along the chain, plus one slow
bypass edge from every chain node straight to the sink, all with the same
transit time.  Its capacity ladder is parameterized either by a geometric
recipe (exact rationals arbitrarily close to one) or by an all-integer
recipe, and the family's transposes, four-node variants, host embeddings,
random test DAGs, and plain parallel-link chains are generated here as well.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    ContractError,
    Edge,
    Instance,
    Network,
    ParameterError,
)

F = Fraction


@dataclass(frozen=True)
class MnParams:
    """Size, common bypass transit time, and the strictly decreasing positive
    capacity ladder (first entry doubles as the supply)."""

    n: int
    horizon: Fraction  # transit time of every bypass edge
    alphas: tuple[Fraction, ...]

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("need at least two nodes")
        if self.horizon <= 0:
            raise ParameterError("bypass transit time must be positive")
        if len(self.alphas) != self.n:
            raise ParameterError("need exactly one capacity per level")
        for a, b in zip(self.alphas, self.alphas[1:]):
            if not a > b:
                raise ParameterError("capacities must strictly decrease")
        if self.alphas[-1] <= 0:
            raise ParameterError("capacities must stay positive")


def make_mn(params: MnParams) -> Instance:
    """The n-node ladder instance.

    Chain edges e_k run v_k -> v_{k+1} with zero transit and capacity
    alphas[k]; bypass edges f_k run v_k -> v_n with transit `horizon`.  The
    bypass capacities are consecutive ladder differences, except the last one
    which closes the budget so that the total network capacity equals the
    supply alphas[0].
    """
    n = params.n
    alphas = params.alphas
    nodes = tuple(f"v{i}" for i in range(1, n + 1))
    edges = []
    capacity: dict[str, Fraction] = {}
    transit: dict[str, Fraction] = {}
    for k in range(1, n):
        eid = f"e{k}"
        edges.append(Edge(eid, f"v{k}", f"v{k + 1}"))
        capacity[eid] = alphas[k]
        transit[eid] = F(0)
    for k in range(1, n):
        fid = f"f{k}"
        edges.append(Edge(fid, f"v{k}", f"v{n}"))
        capacity[fid] = alphas[k - 1] - alphas[k] if k <= n - 2 else alphas[n - 2]
        transit[fid] = params.horizon
    net = Network(nodes=nodes, edges=tuple(edges), source="v1", sink=f"v{n}")
    return Instance(net, capacity, transit, supply=alphas[0])


def geometric_alphas(n: int, eps: Fraction, j: int) -> tuple[Fraction, ...]:
    """Capacity ladder 1 + eps^(j+k); valid for 0 < eps < 1/(2n), j >= 1."""
    eps = F(eps)
    if not 0 < eps < F(1, 2 * n):
        raise ParameterError(f"eps must lie in (0, 1/{2 * n})")
    if j < 1:
        raise ParameterError("j must be at least 1")
    return tuple(1 + eps ** (j + k) for k in range(n))


def integer_alphas(n: int, eps: Fraction, j: int) -> tuple[Fraction, ...]:
    """All-integer ladder 2^(a(n+j)) + 2^(a(n-k)) with the smallest a such
    that 1/2^a <= eps; produces instances with integer capacities only."""
    eps = F(eps)
    if not 0 < eps < F(1, 2 * n):
        raise ParameterError(f"eps must lie in (0, 1/{2 * n})")
    if j < 1:
        raise ParameterError("j must be at least 1")
    a = 1
    while F(1, 2 ** a) > eps:
        a += 1
    return tuple(F(2 ** (a * (n + j)) + 2 ** (a * (n - k))) for k in range(n))


def integer_alpha_bound(n: int, eps: Fraction, horizon: Fraction) -> Fraction:
    """Cost target that the integer ladder is built to exceed:
    (1 - n/2^(a-1)) * (n-1) * horizon."""
    eps = F(eps)
    a = 1
    while F(1, 2 ** a) > eps:
        a += 1
    return (1 - F(n, 2 ** (a - 1))) * (n - 1) * F(horizon)


def make_ladder(n: int, eps: Fraction, j: int = 1,
                horizon: Fraction = F(1), integer: bool = False) -> Instance:
    """Convenience builder: ladder instance from either capacity recipe."""
    alphas = integer_alphas(n, eps, j) if integer else geometric_alphas(n, eps, j)
    return make_mn(MnParams(n=n, horizon=F(horizon), alphas=alphas))


# -- four-node variants --------------------------------------------------------


def make_m3_variants() -> tuple[Network, Network]:
    """The two four-node relatives of the three-node ladder.

    First variant: the sink side of the fast chain is stretched by an extra
    edge g, with the second bypass running parallel to the second chain edge.
    Second variant: the long bypass is subdivided by a node that also
    receives the short bypass (this one is isomorphic to the classic
    four-node crossover network).
    """
    prime = Network(
        nodes=("s", "x", "y", "t"),
        edges=(
            Edge("e1", "s", "x"),
            Edge("e2", "x", "y"),
            Edge("g", "y", "t"),
            Edge("f1", "s", "t"),
            Edge("f2", "x", "y"),
        ),
        source="s",
        sink="t",
    )
    double_prime = Network(
        nodes=("s", "x", "B", "t"),
        edges=(
            Edge("e1", "s", "x"),
            Edge("e2", "x", "t"),
            Edge("f1", "s", "B"),
            Edge("g", "B", "t"),
            Edge("f2", "x", "B"),
        ),
        source="s",
        sink="t",
    )
    return prime, double_prime


def instantiate_m3_variant(net: Network, params: MnParams) -> Instance:
    """Put the three-node ladder parameters onto a four-node variant: the
    extra edge g gets zero transit and full supply capacity, so the instance
    behaves exactly like the ladder instance itself."""
    if params.n != 3:
        raise ParameterError("variant instantiation needs a three-level ladder")
    a0, a1, a2 = params.alphas
    capacity = {"e1": a1, "e2": a2, "f1": a0 - a1, "f2": a1, "g": a0}
    transit = {"e1": F(0), "e2": F(0), "f1": params.horizon,
               "f2": params.horizon, "g": F(0)}
    ids = {e.id for e in net.edges}
    if ids != set(capacity):
        raise ParameterError("network does not look like a four-node variant")
    return Instance(net, capacity, transit, supply=a0)


# -- host embeddings -----------------------------------------------------------


def embed_paradox_instance(host: Network, embedding, horizon: Fraction,
                           alphas: Sequence[Fraction]) -> Instance:
    """Plant a three-level ladder instance onto a host along a subdivision.

    The first edge of each embedded path takes the designated ladder
    parameters (chain edges zero transit with capacities alphas[1],
    alphas[2]; bypass edges `horizon` transit with capacities alphas[0] -
    alphas[1] and alphas[1]); the remaining edges of embedded paths are free
    (zero transit, supply capacity), and every other host edge is priced out
    with transit three times the horizon.
    """
    from .topology import verify_embedding

    horizon = F(horizon)
    a0, a1, a2 = (F(a) for a in alphas)
    if not 0 < a2 < a1 < a0:
        raise ParameterError("need 0 < alphas[2] < alphas[1] < alphas[0]")
    verify_embedding(host, embedding)
    designated = {
        "e1": (F(0), a1),
        "e2": (F(0), a2),
        "f1": (horizon, a0 - a1),
        "f2": (horizon, a1),
    }
    missing = set(designated) - set(embedding.edge_paths)
    if missing:
        raise ContractError(f"embedding lacks ladder edges {sorted(missing)}")
    capacity: dict[str, Fraction] = {}
    transit: dict[str, Fraction] = {}
    for eid in (e.id for e in host.edges):
        capacity[eid] = a0
        transit[eid] = 3 * horizon
    for pattern_edge, path in embedding.edge_paths.items():
        for eid in path:
            capacity[eid] = a0
            transit[eid] = F(0)
        if pattern_edge in designated:
            tau, cap = designated[pattern_edge]
            transit[path[0]] = tau
            capacity[path[0]] = cap
    source = embedding.node_images[embedding.pattern.source]
    sink = embedding.node_images[embedding.pattern.sink]
    net = host if (host.source, host.sink) == (source, sink) else Network(
        nodes=host.nodes, edges=host.edges, source=source, sink=sink)
    return Instance(net, capacity, transit, supply=a0)


# -- plain chains and random DAGs -----------------------------------------------


def make_chain(sections: Sequence[Sequence[tuple[Fraction, Fraction]]],
               supply: Fraction) -> Instance:
    """Chain of parallel links: one node per junction, section k holding
    parallel edges with the given (transit, capacity) pairs."""
    if not sections or any(not s for s in sections):
        raise ParameterError("every section needs at least one link")
    nodes = tuple(f"n{i}" for i in range(len(sections) + 1))
    edges = []
    capacity: dict[str, Fraction] = {}
    transit: dict[str, Fraction] = {}
    for k, section in enumerate(sections):
        for i, (tau, cap) in enumerate(section):
            eid = f"s{k}_{i}"
            edges.append(Edge(eid, nodes[k], nodes[k + 1]))
            transit[eid] = F(tau)
            capacity[eid] = F(cap)
    net = Network(nodes=nodes, edges=tuple(edges), source=nodes[0], sink=nodes[-1])
    return Instance(net, capacity, transit, supply=F(supply))


def random_dag(nodes: int, edges: int, seed: int) -> Network:
    """Random DAG on `nodes` labeled vertices with `edges` edges.

    Deterministic construction: vertices n0..n{k-1} are in topological
    order; the candidate edge set is all ordered pairs (i, j) with i < j in
    lexicographic order; a Fisher-Yates shuffle driven by
    `random.Random(seed).randrange` picks the first `edges` of them.  Source
    is n0, sink is the last vertex.
    """
    if nodes < 2:
        raise ParameterError("need at least two nodes")
    pairs = [(i, j) for i in range(nodes) for j in range(i + 1, nodes)]
    if edges > len(pairs):
        raise ParameterError(f"at most {len(pairs)} edges fit on {nodes} nodes")
    rng = random.Random(seed)
    deck = list(pairs)
    for i in range(len(deck) - 1, 0, -1):
        j = rng.randrange(i + 1)
        deck[i], deck[j] = deck[j], deck[i]
    chosen = sorted(deck[:edges])
    names = tuple(f"n{i}" for i in range(nodes))
    edge_list = tuple(Edge(f"g{k}", names[i], names[j])
                      for k, (i, j) in enumerate(chosen))
    return Network(nodes=names, edges=edge_list, source=names[0], sink=names[-1])
