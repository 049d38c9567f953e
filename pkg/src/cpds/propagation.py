"""Monitored sets under the domination rule (DR) and propagation rule (PR).

DR: a placed vertex ``u`` monitors itself and every vertex of ``rho(u)``.
PR: a monitored zero-injection vertex whose neighbours are all monitored
except one monitors that last neighbour.

The monitored set is the least fixed point of both rules.  Computations
return a :class:`CalcTrace` recording one step per newly monitored vertex,
so every trace is proper by construction.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

from cpds.instance import Instance

Pair = tuple[int, int]


@dataclass(frozen=True)
class CapFunction:
    """Placement ``S`` plus, for each placed ``u``, the neighbours ``rho(u)`` it monitors."""

    assignment: Mapping[int, frozenset[int]] = field(default_factory=dict)

    @classmethod
    def of(cls, mapping: Mapping[int, Iterable[int]] | None = None) -> "CapFunction":
        mapping = mapping or {}
        return cls({u: frozenset(vs) for u, vs in sorted(mapping.items())})

    @property
    def placed(self) -> frozenset[int]:
        return frozenset(self.assignment)

    def __getitem__(self, u: int) -> frozenset[int]:
        return self.assignment[u]

    def __len__(self) -> int:
        return len(self.assignment)

    def validate(self, inst: Instance) -> None:
        for u, vs in self.assignment.items():
            if not 0 <= u < inst.n:
                raise ValueError(f"placed vertex {u} out of range")
            extra = set(vs) - set(inst.adjacency[u])
            if extra:
                raise ValueError(f"rho({u}) contains non-neighbours {sorted(extra)}")

    def without(self, u: int, v: int | None = None) -> "CapFunction":
        """Drop ``v`` from ``rho(u)``, or unplace ``u`` entirely when ``v`` is None."""
        new = dict(self.assignment)
        if v is None:
            new.pop(u, None)
        elif u in new:
            new[u] = new[u] - {v}
        return CapFunction(new)

    def relabel(self, mapping: Mapping[int, int]) -> "CapFunction":
        return CapFunction.of(
            {mapping[u]: {mapping[v] for v in vs} for u, vs in self.assignment.items()}
        )


class Step(NamedTuple):
    rule: str  # "DR" or "PR"
    source: int
    target: int


@dataclass(frozen=True)
class CalcTrace:
    steps: tuple[Step, ...]
    monitored: frozenset[int]

    @property
    def applied_props(self) -> frozenset[Pair]:
        return frozenset((s.source, s.target) for s in self.steps if s.rule == "PR")

    def order(self) -> dict[int, int]:
        return {s.target: i for i, s in enumerate(self.steps)}

    def dump(self, inst: Instance | None = None) -> str:
        """One line per step: ``DR u -> {..}`` (grouped per source) or ``PR u -> v``."""
        lab = inst.label if inst is not None else str
        lines = []
        i = 0
        while i < len(self.steps):
            s = self.steps[i]
            if s.rule == "DR":
                group = [s.target]
                while (
                    i + 1 < len(self.steps)
                    and self.steps[i + 1].rule == "DR"
                    and self.steps[i + 1].source == s.source
                ):
                    i += 1
                    group.append(self.steps[i].target)
                lines.append(f"DR {lab(s.source)} -> {{{','.join(lab(v) for v in group)}}}")
            else:
                lines.append(f"PR {lab(s.source)} -> {lab(s.target)}")
            i += 1
        return "\n".join(lines)


def is_k_capacitated(inst: Instance, rho: CapFunction) -> bool:
    return all(len(vs) <= inst.capacity for vs in rho.assignment.values())


class _Closure:
    """Mutable state shared by the full and the incremental computations."""

    def __init__(self, inst: Instance, monitored: list[bool]):
        self.inst = inst
        self.mon = monitored
        self.steps: list[Step] = []
        self._unmon: dict[int, int] = {}
        self.queue: deque[int] = deque()

    def unmonitored_count(self, u: int) -> int:
        c = self._unmon.get(u)
        if c is None:
            c = sum(1 for w in self.inst.adjacency[u] if not self.mon[w])
            self._unmon[u] = c
        return c

    def consider(self, u: int) -> None:
        if self.inst.zero_injection[u] and self.mon[u] and self.unmonitored_count(u) == 1:
            self.queue.append(u)

    def mark(self, v: int, step: Step) -> None:
        self.mon[v] = True
        self.steps.append(step)
        for u in self.inst.adjacency[v]:
            if u in self._unmon:
                self._unmon[u] -= 1
            self.consider(u)
        self.consider(v)

    def apply_dr(self, rho: CapFunction, sources: Iterable[int]) -> None:
        for u in sources:
            if not self.mon[u]:
                self.mark(u, Step("DR", u, u))
            for v in sorted(rho.assignment[u]):
                if not self.mon[v]:
                    self.mark(v, Step("DR", u, v))

    def run_pr(self) -> None:
        while self.queue:
            u = self.queue.popleft()
            if self.unmonitored_count(u) != 1:
                continue
            v = next(w for w in self.inst.adjacency[u] if not self.mon[w])
            self.mark(v, Step("PR", u, v))


def monitored_set(inst: Instance, rho: CapFunction) -> CalcTrace:
    """Compute ``M(rho)`` with a FIFO worklist of PR candidates."""
    state = _Closure(inst, [False] * inst.n)
    state.apply_dr(rho, sorted(rho.assignment))
    state.run_pr()
    return CalcTrace(tuple(state.steps), frozenset(v for v in range(inst.n) if state.mon[v]))


def is_power_dominating(inst: Instance, rho: CapFunction) -> bool:
    if not is_k_capacitated(inst, rho):
        return False
    return len(monitored_set(inst, rho).monitored) == inst.n


def incremental_unmonitor(inst: Instance, trace: CalcTrace, rho: CapFunction) -> CalcTrace:
    """Update ``trace`` after entries were removed from the function it was computed for.

    ``rho`` is the function after the change and must be obtained from the
    old one by unplacing vertices or shrinking some ``rho(u)``. Vertices
    whose justification disappeared are unmonitored, the loss cascades
    through dependent PR steps, and the closure is then resumed locally.
    """
    steps = trace.steps
    prop_from = {s.source: s.target for s in steps if s.rule == "PR"}
    mon = [False] * inst.n
    for v in trace.monitored:
        mon[v] = True

    lost: list[int] = []
    for s in steps:
        if s.rule != "DR":
            continue
        u, v = s.source, s.target
        ok = u in rho.assignment and (v == u or v in rho.assignment[u])
        if not ok and mon[v]:
            mon[v] = False
            lost.append(v)

    # a PR step (u, v) needs every vertex of N[u] \ {v}
    queue = deque(lost)
    while queue:
        x = queue.popleft()
        for u in (x, *inst.adjacency[x]):
            v = prop_from.get(u)
            if v is None or v == x or not mon[v]:
                continue
            mon[v] = False
            lost.append(v)
            queue.append(v)

    if not lost:
        return CalcTrace(steps, trace.monitored)

    lost_set = set(lost)
    state = _Closure(inst, mon)
    # re-monitor lost vertices that some remaining DR source still covers
    for x in sorted(lost_set):
        if mon[x]:
            continue
        if x in rho.assignment:
            state.mark(x, Step("DR", x, x))
            continue
        for u in inst.adjacency[x]:
            if u in rho.assignment and x in rho.assignment[u]:
                state.mark(x, Step("DR", u, x))
                break
    for x in lost_set:
        for u in (x, *inst.adjacency[x]):
            state.consider(u)
    state.run_pr()

    kept = tuple(s for s in steps if s.target not in lost_set)
    monitored = (trace.monitored - lost_set) | {s.target for s in state.steps}
    return CalcTrace(kept + tuple(state.steps), frozenset(monitored))


def replay(inst: Instance, rho: CapFunction, trace: CalcTrace) -> bool:
    """Check that ``trace`` is a proper calculation for ``rho`` ending at a fixed point."""
    mon: set[int] = set()
    received: set[int] = set()
    for s in trace.steps:
        if s.target in mon:
            return False
        if s.rule == "DR":
            if s.source not in rho.assignment:
                return False
            if s.target != s.source and s.target not in rho.assignment[s.source]:
                return False
        elif s.rule == "PR":
            u, v = s.source, s.target
            if not inst.zero_injection[u] or v not in inst.adjacency[u] or u not in mon:
                return False
            if any(w not in mon for w in inst.adjacency[u] if w != v):
                return False
            if v in received:
                return False
            received.add(v)
        else:
            return False
        mon.add(s.target)
    if mon != set(trace.monitored):
        return False
    # fixed point: no rule can add anything
    for u, vs in rho.assignment.items():
        if u not in mon or any(v not in mon for v in vs):
            return False
    for u in range(inst.n):
        if inst.zero_injection[u] and u in mon:
            if sum(1 for w in inst.adjacency[u] if w not in mon) == 1:
                return False
    return True
