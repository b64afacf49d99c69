from fractions import Fraction

import pytest

from fot.core import ContractError, Edge, Instance, Network, SizeCapError
from fot.gen import MnParams, geometric_alphas, make_mn, random_dag
from fot.topology import (
    PATTERN_IDS,
    PATTERN_TRANSPOSE,
    PATTERNS,
    ClassificationReport,
    Embedding,
    classify,
    find_subdivision,
    is_chain_of_parallel_links,
    pattern_network,
    series_parallel,
    smooth,
    uses_only_chains,
    verify_embedding,
)

F = Fraction


def ladder_net(n):
    return make_mn(MnParams(n=n, horizon=F(1),
                            alphas=geometric_alphas(n, F(1, 10 * n), 1))).network


def subdivide(net: Network, edge_id: str, pieces: int) -> Network:
    """Replace an edge by a path of `pieces` edges through fresh nodes."""
    if pieces < 2:
        return net
    target = net.edge_by_id[edge_id]
    nodes = list(net.nodes)
    edges = [e for e in net.edges if e.id != edge_id]
    here = target.tail
    for i in range(pieces - 1):
        fresh = f"{edge_id}_mid{i}"
        nodes.append(fresh)
        edges.append(Edge(f"{edge_id}_part{i}", here, fresh))
        here = fresh
    edges.append(Edge(f"{edge_id}_part{pieces - 1}", here, target.head))
    return Network(tuple(nodes), tuple(edges), net.source, net.sink)


def parallel_links(counts):
    """Chain of parallel links with the given section sizes."""
    nodes = tuple(f"c{i}" for i in range(len(counts) + 1))
    edges = []
    for k, count in enumerate(counts):
        for i in range(count):
            edges.append(Edge(f"p{k}_{i}", nodes[k], nodes[k + 1]))
    return Network(nodes, tuple(edges), nodes[0], nodes[-1])


def chain_of_parallel_paths():
    # Sections of 4, 1, 4, 5 parallel routes with scattered subdivisions.
    net = parallel_links([4, 1, 4, 5])
    for eid, pieces in [("p0_0", 3), ("p0_2", 2), ("p0_3", 5),
                        ("p2_0", 3), ("p2_1", 4), ("p2_2", 6), ("p2_3", 2)]:
        net = subdivide(net, eid, pieces)
    return net


# -- patterns and embeddings -----------------------------------------------------


def test_pattern_registry():
    assert set(PATTERN_IDS) == set(PATTERNS)
    assert pattern_network("M3T") == pattern_network("M3").transposed()
    assert set(PATTERN_TRANSPOSE) == set(PATTERN_IDS)
    with pytest.raises(Exception):
        pattern_network("nope")


def test_find_subdivision_ladder4_hosts_ladder3():
    host = ladder_net(4)
    emb = find_subdivision(host, "M3")
    assert emb is not None
    verify_embedding(host, emb)
    assert emb.node_images == {"v1": "v1", "v2": "v2", "v3": "v4"}
    assert emb.edge_paths["e2"] == ("e2", "e3")
    assert emb.edge_paths["e1"] == ("e1",)


def test_find_subdivision_respects_subdivided_hosts():
    host = subdivide(subdivide(ladder_net(3), "f1", 3), "e1", 2)
    emb = find_subdivision(host, "M3")
    assert emb is not None
    verify_embedding(host, emb)


def test_transposed_ladder_has_no_forward_pattern():
    # the forward pattern needs a node of in-degree three; the transpose
    # tops out at two, and subdivisions preserve branch degrees
    assert find_subdivision(pattern_network("M3T"), "M3") is None


def test_crossover_and_second_variant_are_isomorphic():
    emb = find_subdivision(pattern_network("Wheatstone"), "M3DoublePrime")
    assert emb is not None
    assert all(len(p) == 1 for p in emb.edge_paths.values())
    back = find_subdivision(pattern_network("M3DoublePrime"), "Wheatstone")
    assert back is not None


def test_variant_prime_is_self_transpose():
    prime = pattern_network("M3Prime")
    emb = find_subdivision(prime.transposed(), "M3Prime")
    assert emb is not None and all(len(p) == 1 for p in emb.edge_paths.values())


def test_patterns_are_not_minors_of_each_other():
    for a in ("M3", "M3Prime", "M3DoublePrime"):
        for b in ("M3", "M3Prime", "M3DoublePrime"):
            found = find_subdivision(pattern_network(a), b)
            assert (found is not None) == (a == b)


def test_transpose_compatibility_on_random_hosts():
    for seed in range(1, 25):
        host = random_dag(7, 11, seed)
        flipped = host.transposed()
        for pid in ("M3", "M3T", "M3Prime", "M3DoublePrime"):
            one = find_subdivision(flipped, pid) is not None
            other = find_subdivision(host, PATTERN_TRANSPOSE[pid]) is not None
            assert one == other, (seed, pid)


def test_size_cap_is_loud():
    with pytest.raises(SizeCapError):
        find_subdivision(random_dag(20, 30, 1), "M3", node_cap=15, edge_cap=25)


def test_verify_embedding_rejects_defects():
    host = ladder_net(4)
    emb = find_subdivision(host, "M3")
    broken = Embedding(emb.pattern, dict(emb.node_images),
                       {**emb.edge_paths, "f2": ("f3",)})
    with pytest.raises(ContractError):
        verify_embedding(host, broken)
    not_injective = Embedding(emb.pattern,
                              {**emb.node_images, "v2": emb.node_images["v1"]},
                              dict(emb.edge_paths))
    with pytest.raises(ContractError):
        verify_embedding(host, not_injective)


# -- chains ------------------------------------------------------------------------


def test_single_path_uses_only_chains():
    net = parallel_links([1, 1, 1])
    ok, witness = uses_only_chains(net)
    assert ok and witness is None


def test_ladder3_breaks_the_chain_property():
    ok, witness = uses_only_chains(pattern_network("M3"))
    assert not ok
    assert witness[0] == "v1" and witness[1] == "v3"


def test_chain_of_parallel_paths_uses_only_chains():
    ok, witness = uses_only_chains(chain_of_parallel_paths())
    assert ok, witness


def test_is_chain_of_parallel_links():
    assert is_chain_of_parallel_links(parallel_links([2]), "c0", "c1")
    assert is_chain_of_parallel_links(parallel_links([4, 1, 4, 5]), "c0", "c4")
    with pytest.raises(ContractError):
        # an edge that no terminal pair path uses violates the precondition
        is_chain_of_parallel_links(pattern_network("M3"), "v1", "v2")


def test_transposed_ladder_is_not_a_chain():
    net = pattern_network("M3T")
    assert not is_chain_of_parallel_links(net, "v3", "v1")


# -- smoothing ----------------------------------------------------------------------


def test_smooth_two_edge_path():
    inst = Instance(
        network=Network(("s", "x", "t"),
                        (Edge("a", "s", "x"), Edge("b", "x", "t")), "s", "t"),
        capacity={"a": F(2), "b": F(5)},
        transit={"a": F(1), "b": F(3)},
        supply=F(1),
    )
    out = smooth(inst)
    assert len(out.network.edges) == 1
    merged = out.network.edges[0]
    assert (merged.tail, merged.head) == ("s", "t")
    assert out.capacity[merged.id] == 2
    assert out.transit[merged.id] == 4


def test_smooth_fixpoint_when_nothing_to_do():
    inst = make_mn(MnParams(n=3, horizon=F(1),
                            alphas=geometric_alphas(3, F(1, 10), 1)))
    assert smooth(inst) == inst


def test_smooth_collapses_subdivided_chain():
    base = chain_of_parallel_paths()
    inst = Instance(
        network=base,
        capacity={e.id: F(i % 3 + 1) for i, e in enumerate(base.edges)},
        transit={e.id: F(i % 4) for i, e in enumerate(base.edges)},
        supply=F(1),
    )
    out = smooth(inst)
    assert is_chain_of_parallel_links(out.network, "c0", "c4")
    assert len(out.network.nodes) == 5

    def path_profile(instance):
        paths = []

        def walk(v, acc_ids):
            if v == instance.network.sink:
                transit = sum((instance.transit[i] for i in acc_ids), F(0))
                cap = min(instance.capacity[i] for i in acc_ids)
                paths.append((transit, cap))
                return
            for e in instance.network.out_edges[v]:
                walk(e.head, acc_ids + [e.id])

        walk(instance.network.source, [])
        return sorted(paths)

    assert path_profile(inst) == path_profile(out)


# -- series-parallel and classification -----------------------------------------------


def test_series_parallel_facts():
    for n in range(2, 9):
        assert series_parallel(ladder_net(n))
    assert not series_parallel(pattern_network("Wheatstone"))
    assert not series_parallel(pattern_network("M3DoublePrime"))
    assert series_parallel(parallel_links([3, 1, 2]))
    assert series_parallel(pattern_network("M3"))
    assert series_parallel(pattern_network("M3Prime"))


def test_classify_ladder():
    report = classify(ladder_net(4))
    assert report.series_parallel
    assert report.minors["M3"] is not None
    assert report.minors["Wheatstone"] is None
    assert not report.uses_only_chains
    assert report.forward_paradox and report.either_direction_paradox


def test_classify_crossover():
    report = classify(pattern_network("Wheatstone"))
    assert not report.series_parallel
    assert report.minors["M3DoublePrime"] is not None
    assert report.forward_paradox


def test_classify_parallel_chain():
    report = classify(parallel_links([3]))
    assert report.uses_only_chains
    assert all(emb is None for emb in report.minors.values())
    assert not report.forward_paradox and not report.either_direction_paradox
    assert report.series_parallel


def test_classify_transposed_ladder():
    report = classify(pattern_network("M3T"))
    assert report.minors["M3"] is None
    assert report.minors["M3T"] is not None
    assert not report.forward_paradox
    assert report.either_direction_paradox
    assert not report.uses_only_chains


def test_chain_property_equals_pattern_absence_on_random_dags():
    # classify() enforces the equivalence internally as a hard error, so a
    # pass over a random corpus is already a two-classifier agreement check.
    for seed in range(1, 41):
        report = classify(random_dag(8, 14, seed))
        assert isinstance(report, ClassificationReport)
        assert report.uses_only_chains == (not report.either_direction_paradox)
