from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fot.core import (
    INF,
    Edge,
    Instance,
    Network,
    ParameterError,
    UnsupportedTopologyError,
    as_fraction,
    dumps,
    format_scalar,
    instance_from_obj,
    instance_to_obj,
    is_instance_obj,
    loads,
    network_from_obj,
    parse_scalar,
    restrict,
    transpose,
)

rationals = st.fractions(min_value=-100, max_value=100, max_denominator=50)


def two_link_instance():
    net = Network(
        nodes=("s", "t"),
        edges=(Edge("e1", "s", "t"), Edge("f1", "s", "t")),
        source="s",
        sink="t",
    )
    return Instance(
        network=net,
        capacity={"e1": Fraction(1), "f1": Fraction(2)},
        transit={"e1": Fraction(0), "f1": Fraction(1)},
        supply=Fraction(2),
    )


def test_parse_format_roundtrip():
    for text in ["3/4", "-7/2", "5", "0", "inf"]:
        assert format_scalar(parse_scalar(text)) == text


def test_parse_rejects_floats_and_junk():
    with pytest.raises(ParameterError):
        parse_scalar("0.5")
    with pytest.raises(ParameterError):
        parse_scalar("1/0")
    with pytest.raises(ParameterError):
        as_fraction(0.5)


def test_infinity_ordering():
    half = Fraction(1, 2)
    assert half < INF and INF > half
    assert not INF < half
    assert INF <= INF and INF >= half
    assert INF == INF and INF != half
    with pytest.raises(TypeError):
        INF + half  # arithmetic never produces or consumes infinity


@given(rationals, rationals)
def test_exact_addition_roundtrip(a, b):
    assert (a + b) - b == a


def test_network_validation():
    with pytest.raises(ParameterError):
        Network(("s",), (), "s", "s")
    with pytest.raises(ParameterError):
        Network(("s", "t"), (Edge("e", "s", "t"), Edge("e", "s", "t")), "s", "t")
    with pytest.raises(ParameterError):
        Network(("s", "t"), (Edge("e", "s", "x"),), "s", "t")


def test_instance_validation():
    inst = two_link_instance()
    with pytest.raises(ParameterError):
        Instance(inst.network, {"e1": Fraction(1)}, dict(inst.transit), Fraction(1))
    with pytest.raises(ParameterError):
        Instance(inst.network, {"e1": Fraction(0), "f1": Fraction(1)},
                 dict(inst.transit), Fraction(1))
    with pytest.raises(ParameterError):
        Instance(inst.network, dict(inst.capacity),
                 {"e1": Fraction(-1), "f1": Fraction(0)}, Fraction(1))
    with pytest.raises(ParameterError):
        Instance(inst.network, dict(inst.capacity), dict(inst.transit), Fraction(0))


def test_topological_order_and_cycle_detection():
    net = Network(
        nodes=("a", "b", "c"),
        edges=(Edge("x", "a", "b"), Edge("y", "b", "c")),
        source="a",
        sink="c",
    )
    assert net.topological_order() == ("a", "b", "c")
    cyclic = Network(
        nodes=("a", "b"),
        edges=(Edge("x", "a", "b"), Edge("y", "b", "a")),
        source="a",
        sink="b",
    )
    with pytest.raises(UnsupportedTopologyError):
        cyclic.topological_order()
    assert not cyclic.is_acyclic()


def test_transpose_is_involution_and_preserves_attributes():
    inst = two_link_instance()
    flipped = transpose(inst)
    assert flipped.network.source == "t" and flipped.network.sink == "s"
    assert {(e.tail, e.head) for e in flipped.network.edges} == {("t", "s")}
    assert transpose(flipped) == inst
    assert sorted(flipped.capacity.values()) == sorted(inst.capacity.values())
    assert sorted(flipped.transit.values()) == sorted(inst.transit.values())
    assert flipped.supply == inst.supply


def test_restrict_full_set_is_identity():
    inst = two_link_instance()
    assert restrict(inst, ["e1", "f1"]) == inst


def test_restrict_subset_and_no_path_is_legal():
    inst = two_link_instance()
    sub = restrict(inst, ["e1"])
    assert sub.edge_ids == ("e1",)
    assert sub.has_st_path
    empty = restrict(inst, [])
    assert not empty.has_st_path  # legal; downstream reports unbounded cost
    with pytest.raises(ParameterError):
        restrict(inst, ["nope"])


def test_instance_json_roundtrip():
    inst = two_link_instance()
    obj = instance_to_obj(inst)
    assert is_instance_obj(obj)
    assert instance_from_obj(loads(dumps(obj))) == inst
    # unknown keys are tolerated
    obj["_meta"] = {"anything": 1}
    assert instance_from_obj(obj) == inst


def test_network_json_without_attributes():
    inst = two_link_instance()
    obj = instance_to_obj(inst)
    del obj["supply"]
    assert not is_instance_obj(obj)
    net = network_from_obj(obj)
    assert net == inst.network
