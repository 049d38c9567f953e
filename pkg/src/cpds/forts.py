"""Forts and the capacity-aware hitting rows of the FORT-IP model.

A fort is a non-empty vertex set ``F`` such that every zero-injection
vertex outside ``F`` with a neighbour in ``F`` has at least two neighbours
in ``F``.  Boundary vertices without the zero-injection property can never
propagate, so they impose no condition; when every vertex is
zero-injection this is the classical definition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from cpds.instance import Instance
from cpds.propagation import CalcTrace


@dataclass(frozen=True)
class Fort:
    vertices: frozenset[int]
    boundary: frozenset[int]

    @classmethod
    def of(cls, inst: Instance, vertices: Iterable[int]) -> "Fort":
        vs = frozenset(vertices)
        return cls(vs, boundary(inst, vs))

    def row_terms(self, inst: Instance) -> tuple[list[int], list[tuple[int, int]]]:
        """Placement variables and ``(v, u)`` channel variables of the hitting row.

        The row reads ``sum(s) + sum(w) >= 1``: some vertex of the fort is
        placed, a boundary vertex with degree at most ``k`` is placed, or a
        boundary vertex of larger degree spends a channel on the fort.
        """
        k = inst.capacity
        s_terms = sorted(self.vertices)
        w_terms = []
        for v in sorted(self.boundary):
            if inst.degree(v) <= k:
                s_terms.append(v)
            else:
                w_terms.extend((v, u) for u in inst.adjacency[v] if u in self.vertices)
        return s_terms, w_terms


def boundary(inst: Instance, vertices: frozenset[int]) -> frozenset[int]:
    return frozenset(w for v in vertices for w in inst.adjacency[v] if w not in vertices)


def is_fort(inst: Instance, vertices: Iterable[int]) -> bool:
    fs = frozenset(vertices)
    if not fs:
        return False
    for v in boundary(inst, fs):
        if inst.zero_injection[v] and sum(1 for u in inst.adjacency[v] if u in fs) < 2:
            return False
    return True


def fort_from_infeasible(inst: Instance, trace: CalcTrace) -> Fort:
    """The unmonitored vertices of a non-covering calculation always form a fort."""
    missing = frozenset(range(inst.n)) - trace.monitored
    if not missing:
        raise ValueError("every vertex is monitored; there is no fort to extract")
    return Fort.of(inst, missing)


def minimize_fort(inst: Instance, fort: Fort | Iterable[int]) -> Fort:
    """Drop vertices, highest id first, while the remaining set stays a fort.

    Inside counts ``|N(v) & F|`` are maintained so each removal test costs
    ``O(deg)``. The result admits no single-vertex removal.
    """
    vs = fort.vertices if isinstance(fort, Fort) else frozenset(fort)
    if not is_fort(inst, vs):
        raise ValueError("input is not a fort")
    inside = set(vs)
    count = [0] * inst.n
    for v in inside:
        for u in inst.adjacency[v]:
            count[u] += 1

    def removable(x: int) -> bool:
        if len(inside) == 1:
            return False
        # x joins the boundary if it keeps a neighbour inside
        if inst.zero_injection[x] and count[x] == 1:
            return False
        for u in inst.adjacency[x]:
            if u not in inside and inst.zero_injection[u] and count[u] == 2:
                return False
        return True

    changed = True
    while changed:
        changed = False
        for x in sorted(inside, reverse=True):
            if removable(x):
                inside.discard(x)
                for u in inst.adjacency[x]:
                    count[u] -= 1
                changed = True
    return Fort.of(inst, inside)
