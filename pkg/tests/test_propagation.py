import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import g7, pairs
from cpds.fps import precedence_digraph
from cpds.instance import Instance, random_connected_graph
from cpds.oracle import _masks, closure
from cpds.propagation import (
    CapFunction,
    incremental_unmonitor,
    is_k_capacitated,
    is_power_dominating,
    monitored_set,
    replay,
)


def ids(inst, text):
    lab = {inst.label(v): v for v in range(inst.n)}
    return {lab[c] for c in text}


def rho_of(inst, mapping):
    lab = {inst.label(v): v for v in range(inst.n)}
    return CapFunction.of({lab[u]: {lab[v] for v in vs} for u, vs in mapping.items()})


def test_single_device_monitors_g7():
    inst = g7(2)
    rho = rho_of(inst, {"a": "bd"})
    trace = monitored_set(inst, rho)
    assert trace.monitored == frozenset(range(7))
    assert trace.applied_props == pairs(inst, "ae", "dc", "bf", "cg")
    assert replay(inst, rho, trace)


def test_empty_function_monitors_nothing():
    assert monitored_set(g7(), CapFunction.of()).monitored == frozenset()


def test_propagation_blocked_by_two_unmonitored_neighbours():
    inst = g7(2)
    trace = monitored_set(inst, rho_of(inst, {"e": "a"}))
    assert trace.monitored == ids(inst, "ea")


def test_capacity_checks():
    assert is_k_capacitated(g7(2), rho_of(g7(2), {"a": "bd"}))
    assert is_k_capacitated(g7(0), rho_of(g7(0), {"a": ""}))
    assert not is_k_capacitated(g7(1), rho_of(g7(1), {"a": "bd"}))
    assert is_power_dominating(g7(2), rho_of(g7(2), {"a": "bd"}))
    assert not is_power_dominating(g7(1), rho_of(g7(1), {"a": "bd"}))
    assert not is_power_dominating(g7(2), rho_of(g7(2), {"e": "a"}))
    everyone = CapFunction.of({v: () for v in range(7)})
    assert is_power_dominating(g7(0), everyone)


def test_trace_dump_format():
    inst = g7(2)
    text = monitored_set(inst, rho_of(inst, {"a": "bd"})).dump(inst)
    lines = text.splitlines()
    assert lines[0] == "DR a -> {a,b,d}"
    assert all(line.startswith("PR ") for line in lines[1:])
    assert len(lines) == 5


def test_rho_validation():
    inst = g7()
    with pytest.raises(ValueError):
        rho_of(inst, {"a": "c"}).validate(inst)
    with pytest.raises(ValueError):
        CapFunction.of({9: ()}).validate(inst)


def test_incremental_examples():
    inst = g7(2)
    rho = rho_of(inst, {"a": "bd"})
    trace = monitored_set(inst, rho)
    a, d = ids(inst, "a").pop(), ids(inst, "d").pop()
    for new in (rho.without(a, d), rho, rho.without(a)):
        inc = incremental_unmonitor(inst, trace, new)
        assert inc.monitored == monitored_set(inst, new).monitored
        assert replay(inst, new, inc)
    assert incremental_unmonitor(inst, trace, rho.without(a)).monitored == frozenset()


def random_instance(rng, n_lo=2, n_hi=10):
    n = rng.randint(n_lo, n_hi)
    edges = random_connected_graph(n, rng.uniform(0.1, 0.5), rng)
    zero = [v for v in range(n) if rng.random() < rng.random()]
    return Instance.from_edges(n, edges, zero, capacity=rng.randint(0, 3))


def random_rho(rng, inst, p=0.3):
    mapping = {}
    for u in range(inst.n):
        if rng.random() < p:
            nb = list(inst.adjacency[u])
            rng.shuffle(nb)
            mapping[u] = nb[: rng.randint(0, len(nb))]
    return CapFunction.of(mapping)


def naive_random_order(inst, rho, rng):
    """Apply DR then PR steps in a random order until nothing applies."""
    mon = set()
    for u, vs in rho.assignment.items():
        mon.add(u)
        mon.update(vs)
    while True:
        cands = []
        for u in inst.zero_injection_set & mon:
            rest = [w for w in inst.adjacency[u] if w not in mon]
            if len(rest) == 1:
                cands.append(rest[0])
        if not cands:
            return mon
        mon.add(rng.choice(cands))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_least_fixed_point_is_order_independent(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    rho = random_rho(rng, inst)
    expect = monitored_set(inst, rho).monitored
    for _ in range(3):
        assert naive_random_order(inst, rho, rng) == expect
    start = 0
    for u, vs in rho.assignment.items():
        start |= 1 << u
        for v in vs:
            start |= 1 << v
    mask = closure(inst, _masks(inst), start)
    assert {v for v in range(inst.n) if mask >> v & 1} == expect


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_monotonicity(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    rho = random_rho(rng, inst)
    base = monitored_set(inst, rho).monitored
    u = rng.randrange(inst.n)
    bigger = dict(rho.assignment)
    extra = set(bigger.get(u, ()))
    if inst.adjacency[u]:
        extra.add(rng.choice(inst.adjacency[u]))
    bigger[u] = extra
    assert base <= monitored_set(inst, CapFunction.of(bigger)).monitored


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_proper_traces_are_acyclic(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    rho = random_rho(rng, inst, p=0.5)
    trace = monitored_set(inst, rho)
    assert replay(inst, rho, trace)
    assert precedence_digraph(inst, trace.applied_props).is_acyclic()


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 100_000))
def test_incremental_matches_from_scratch(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    rho = random_rho(rng, inst, p=0.6)
    trace = monitored_set(inst, rho)
    for _ in range(4):
        if not rho.assignment:
            break
        u = rng.choice(sorted(rho.assignment))
        if rho[u] and rng.random() < 0.6:
            new = rho.without(u, rng.choice(sorted(rho[u])))
        else:
            new = rho.without(u)
        trace = incremental_unmonitor(inst, trace, new)
        rho = new
        assert trace.monitored == monitored_set(inst, rho).monitored
        assert replay(inst, rho, trace)
