import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import g7, pairs
from cpds.instance import (
    DuplicateEdgeError,
    Instance,
    InstanceFormatError,
    MalformedHeaderError,
    NegativeCapacityError,
    SelfLoopError,
    UnknownVertexError,
    connected_components,
    format_instance,
    grid_like_instance,
    parse_edge_list,
    parse_instance,
    random_connected_graph,
)

G7_TEXT = """c the seven-vertex example
p cpds 7 7
z a b c d
e a b
e b c
e c d
e d a
e a e
e b f
e c g
"""


def test_parse_g7():
    inst = parse_instance(G7_TEXT, capacity=2)
    assert inst.n == 7 and inst.m == 7
    assert len(inst.zero_injection_set) == 4
    assert [inst.label(v) for v in sorted(inst.zero_injection_set)] == ["a", "b", "c", "d"]
    assert inst.capacity == 2


def test_single_isolated_vertex():
    inst = parse_instance("p cpds 1 0\n")
    assert inst.n == 1 and inst.m == 0
    assert inst.label(0) == "1"


@pytest.mark.parametrize(
    "text,err,line",
    [
        ("p cpds 2 1\ne a a\n", SelfLoopError, 2),
        ("p cpds 2 2\ne a b\ne b a\n", DuplicateEdgeError, 3),
        ("e a b\n", MalformedHeaderError, 1),
        ("p cpds x 1\n", MalformedHeaderError, 1),
        ("p cpds 2 1\np cpds 2 1\n", MalformedHeaderError, 2),
        ("p cpds 2 1\ne a b\ne b c\n", UnknownVertexError, 3),
        ("p cpds 2 1\nq a b\n", InstanceFormatError, 2),
        ("p cpds 3 2\ne a b\n", MalformedHeaderError, 2),
        ("c only a comment\n", MalformedHeaderError, 1),
    ],
)
def test_parse_errors_carry_line(text, err, line):
    with pytest.raises(err) as info:
        parse_instance(text)
    assert info.value.line == line


def test_negative_capacity():
    with pytest.raises(NegativeCapacityError):
        parse_instance(G7_TEXT, capacity=-1)


def test_unmentioned_vertices_get_fresh_labels():
    inst = parse_instance("p cpds 4 1\ne 1 x\n")
    assert [inst.label(v) for v in range(4)] == ["1", "x", "2", "3"]


def test_round_trip_keeps_labels_and_structure():
    inst = g7()
    back = parse_instance(format_instance(inst, "round trip"))
    relabel = {back.label(v): v for v in range(back.n)}
    assert back.n == inst.n and back.m == inst.m
    for u, v in inst.edges():
        assert relabel[inst.label(v)] in back.adjacency[relabel[inst.label(u)]]
    assert {back.label(v) for v in back.zero_injection_set} == {"a", "b", "c", "d"}


def test_edge_list_importer():
    inst = parse_edge_list("# comment\n1 2\n2 3\n", "2\n", capacity=1, name="p3")
    assert inst.n == 3 and inst.m == 2
    assert [inst.label(v) for v in inst.zero_injection_set] == ["2"]
    with pytest.raises(UnknownVertexError):
        parse_edge_list("1 2\n", "9\n")
    with pytest.raises(DuplicateEdgeError):
        parse_edge_list("1 2\n2 1\n")


def test_constructor_rejects_bad_adjacency():
    with pytest.raises(ValueError):
        Instance(adjacency=((1,), ()), zero_injection=(False, False))
    with pytest.raises(ValueError):
        Instance(adjacency=((0,),), zero_injection=(False,))
    with pytest.raises(TypeError):
        Instance.from_edges(2, [(0, 1)], [True, False])


def test_propagation_index_g7():
    inst = g7(2)
    idx = inst.propagations
    assert len(idx.a_p) == 11
    assert set(idx.a_p) == pairs(inst, "ab", "ad", "ae", "ba", "bc", "bf", "cb", "cd", "cg", "da", "dc")
    assert set(idx.a_d) == pairs(inst, "ab", "ad", "ae", "ba", "bc", "bf", "cb", "cd", "cg")
    assert g7(3).propagations.a_d == ()
    for p, i in idx.a_p_pos.items():
        assert idx.a_p[i] == p


def test_components():
    assert len(connected_components(g7())) == 1
    inst = g7()
    plus = Instance.from_edges(8, [(u, v) for u, v in inst.edges()], inst.zero_injection_set,
                               labels=list("abcdefgx"), name="g")
    comps = connected_components(plus)
    assert [c.n for c in comps] == [7, 1]
    assert comps[1].origin == (7,) and comps[1].label(0) == "x"
    two = Instance.from_edges(4, [(0, 1), (2, 3)], [0, 3])
    comps = connected_components(two)
    assert [c.n for c in comps] == [2, 2]
    assert comps[1].origin == (2, 3) and comps[1].zero_injection == (False, True)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 14), st.floats(0, 0.6), st.integers(0, 10_000))
def test_handshake_and_index_sizes(n, p, seed):
    rng = random.Random(seed)
    edges = random_connected_graph(n, p, rng)
    zero = [v for v in range(n) if rng.random() < 0.5]
    k = rng.randint(0, 3)
    inst = Instance.from_edges(n, edges, zero, capacity=k)
    assert sum(inst.degree(v) for v in range(n)) == 2 * inst.m
    assert len(inst.propagations.a_p) == sum(inst.degree(u) for u in zero)
    assert len(inst.propagations.a_d) == sum(inst.degree(u) for u in range(n) if inst.degree(u) > k)
    assert inst.is_connected()


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 16), st.integers(0, 10_000))
def test_components_partition(n, seed):
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.15]
    inst = Instance.from_edges(n, edges, [v for v in range(n) if rng.random() < 0.5])
    comps = connected_components(inst)
    assert sum(c.n for c in comps) == n
    assert sorted(v for c in comps for v in c.origin) == list(range(n))
    assert sum(c.m for c in comps) == inst.m
    for c in comps:
        assert c.is_connected()
        for u, v in c.edges():
            assert c.origin[v] in inst.adjacency[c.origin[u]]


def test_grid_like_generator_is_connected_and_seeded():
    a = grid_like_instance(6, 8, seed=3)
    b = grid_like_instance(6, 8, seed=3)
    assert a == b
    assert a.is_connected()
    assert a.n >= 48
    assert 0 < len(a.zero_injection_set) < a.n
