"""Precedence digraphs and forbidden propagation sets.

A propagation ``(u, v)`` can fire only after every ``w`` in ``N[u] - {v}``
is monitored, so it imposes the precedences ``psi(u, v) = {(w, v)}``.
``phi`` inverts this map arc by arc.  A set of propagations whose
precedence digraph has a cycle cannot be applied in full by any proper
calculation; such sets yield the lazy rows of the FPS and EFPS models.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product
from typing import Iterable

from cpds.instance import Instance

Pair = tuple[int, int]


def _rng(seed) -> random.Random:
    if isinstance(seed, random.Random):
        return seed
    return random.Random(seed)


def psi(inst: Instance, p: Pair) -> frozenset[Pair]:
    u, v = p
    if not inst.zero_injection[u] or v not in inst.adjacency[u]:
        raise ValueError(f"{p} is not a potential propagation")
    return frozenset((w, v) for w in (u, *inst.adjacency[u]) if w != v)


def phi(inst: Instance, e: Pair) -> frozenset[Pair]:
    """Propagations of the instance that impose the precedence ``e``."""
    w, v = e
    if w == v:
        return frozenset()
    out = set()
    nv = inst.adjacency[v]
    if inst.zero_injection[w] and w in nv:
        out.add((w, v))
    for u in inst.adjacency[w]:
        if u != v and inst.zero_injection[u] and u in nv:
            out.add((u, v))
    return frozenset(out)


class PrecedenceDigraph:
    """The digraph ``(V, psi(R))`` with, per arc, the propagations of ``R`` imposing it."""

    def __init__(self, inst: Instance, props: Iterable[Pair] = ()):
        self.inst = inst
        self.props: frozenset[Pair] = frozenset(props)
        back: dict[Pair, set[Pair]] = {}
        for p in self.props:
            for e in psi(inst, p):
                back.setdefault(e, set()).add(p)
        self.back: dict[Pair, frozenset[Pair]] = {e: frozenset(ps) for e, ps in back.items()}
        self.pred: list[list[int]] = [[] for _ in range(inst.n)]
        self.succ: list[list[int]] = [[] for _ in range(inst.n)]
        for w, v in sorted(self.back):
            assert w != v, "psi never yields loops"
            self.succ[w].append(v)
            self.pred[v].append(w)

    @property
    def arcs(self) -> frozenset[Pair]:
        return frozenset(self.back)

    def has_arc(self, w: int, v: int) -> bool:
        return (w, v) in self.back

    def imposing(self, e: Pair) -> frozenset[Pair]:
        """``phi(e)`` restricted to this digraph's propagation set."""
        return self.back.get(e, frozenset())

    def is_acyclic(self) -> bool:
        indeg = [len(p) for p in self.pred]
        stack = [v for v in range(self.inst.n) if indeg[v] == 0]
        seen = 0
        while stack:
            v = stack.pop()
            seen += 1
            for x in self.succ[v]:
                indeg[x] -= 1
                if indeg[x] == 0:
                    stack.append(x)
        return seen == self.inst.n

    def to_dot(self, cycle: "Cycle | None" = None) -> str:
        """DOT rendering; each arc is annotated with the propagations imposing it."""
        inst = self.inst
        hi = set(cycle.arcs) if cycle is not None else set()
        lines = ["digraph D {"]
        for v in range(inst.n):
            shape = "box" if inst.zero_injection[v] else "circle"
            lines.append(f'  "{inst.label(v)}" [shape={shape}];')
        for (w, v), ps in sorted(self.back.items()):
            lab = " ".join(f"{inst.label(a)}>{inst.label(b)}" for a, b in sorted(ps))
            color = ", color=magenta" if (w, v) in hi else ""
            lines.append(f'  "{inst.label(w)}" -> "{inst.label(v)}" [label="{lab}"{color}];')
        lines.append("}")
        return "\n".join(lines)


def precedence_digraph(inst: Instance, props: Iterable[Pair]) -> PrecedenceDigraph:
    return PrecedenceDigraph(inst, props)


def full_digraph(inst: Instance) -> PrecedenceDigraph:
    """The digraph ``D`` of all potential propagations, cached on the instance."""
    cached = inst.__dict__.get("_full_digraph")
    if cached is None:
        cached = PrecedenceDigraph(inst, inst.propagations.a_p)
        inst.__dict__["_full_digraph"] = cached
    return cached


@dataclass(frozen=True)
class Cycle:
    """Simple directed cycle ``v0 -> v1 -> ... -> v_{r-1} -> v0``."""

    vertices: tuple[int, ...]

    @classmethod
    def from_arcs(cls, arcs: Iterable[Pair]) -> "Cycle":
        arcs = list(arcs)
        for (a, b), (c, _) in zip(arcs, arcs[1:] + arcs[:1]):
            if b != c:
                raise ValueError("arcs do not chain")
        verts = tuple(a for a, _ in arcs)
        if len(set(verts)) != len(verts):
            raise ValueError("cycle repeats a vertex")
        return cls(verts)

    @property
    def arcs(self) -> tuple[Pair, ...]:
        vs = self.vertices
        return tuple((vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs)))

    def __len__(self) -> int:
        return len(self.vertices)

    def canonical(self) -> "Cycle":
        vs = self.vertices
        i = vs.index(min(vs))
        return Cycle(vs[i:] + vs[:i])

    def same_as(self, other: "Cycle") -> bool:
        return self.canonical() == other.canonical()


@dataclass(frozen=True)
class Fps:
    propagations: frozenset[Pair]
    cycle: Cycle
    minimal: bool = False

    @property
    def rhs(self) -> int:
        return len(self.propagations) - 1


@dataclass(frozen=True)
class Efps:
    cycle: Cycle
    propagations: frozenset[Pair]

    @property
    def bound(self) -> int:
        return len(self.cycle) - 1


def find_cycle_from(dg: PrecedenceDigraph, start: int, unmonitored, seed=None) -> Cycle | None:
    """Walk backwards from ``start`` through unmonitored predecessors until a vertex repeats.

    Predecessors are drawn at random. When the walk reaches a vertex with
    no usable predecessor it backtracks and never revisits it, so a cycle
    is returned whenever one is reachable backwards from ``start``.
    """
    rng = _rng(seed)
    allowed = unmonitored if isinstance(unmonitored, (set, frozenset)) else set(unmonitored)
    if start not in allowed:
        return None
    path = [start]
    on_path = {start: 0}
    dead: set[int] = set()
    while path:
        v = path[-1]
        cands = [w for w in dg.pred[v] if w in allowed and w not in dead]
        if not cands:
            dead.add(v)
            path.pop()
            del on_path[v]
            continue
        w = rng.choice(cands)
        if w in on_path:
            i = on_path[w]
            # path[t+1] -> path[t]; close with w = path[i] -> path[-1]
            return Cycle((path[i], *reversed(path[i + 1 :])))
        on_path[w] = len(path)
        path.append(w)
    return None


def find_chord(dg: PrecedenceDigraph, cycle: Cycle) -> Pair | None:
    """First chord by source position, then target position; None if chordless."""
    vs = cycle.vertices
    pos = {v: i for i, v in enumerate(vs)}
    r = len(vs)
    for i, u in enumerate(vs):
        nxt = vs[(i + 1) % r]
        best = None
        for v in dg.succ[u]:
            j = pos.get(v)
            if j is None or v == nxt:
                continue
            if best is None or j < best:
                best = j
        if best is not None:
            return (u, vs[best])
    return None


def trim_to_chordless(dg: PrecedenceDigraph, cycle: Cycle) -> Cycle:
    """Shortcut chords until the cycle is chordless in ``dg``.

    A chord ``(u, v)`` is replaced by the cycle made of the chord and the
    path from ``v`` to ``u`` along the current cycle.
    """
    while True:
        chord = find_chord(dg, cycle)
        if chord is None:
            return cycle
        u, v = chord
        vs = cycle.vertices
        i, j = vs.index(u), vs.index(v)
        if j <= i:
            cycle = Cycle(vs[j : i + 1])
        else:
            cycle = Cycle(vs[j:] + vs[: i + 1])


def fps_choices(dg: PrecedenceDigraph, cycle: Cycle, active=None) -> list[list[Pair]]:
    """For each arc of ``cycle``, the sorted candidates ``phi(e) & active``."""
    out = []
    for e in cycle.arcs:
        cands = dg.imposing(e)
        if active is not None:
            cands = cands & frozenset(active)
        if not cands:
            raise ValueError(f"arc {e} is not imposed by the active propagations")
        out.append(sorted(cands))
    return out


def minimal_fps_from_cycle(dg: PrecedenceDigraph, cycle: Cycle, active=None, seed=None) -> Fps:
    """Pick one imposing propagation per arc; for a chordless cycle the result is a minimal FPS."""
    rng = _rng(seed)
    chosen = frozenset(rng.choice(c) for c in fps_choices(dg, cycle, active))
    return Fps(chosen, cycle, minimal=True)


def all_minimal_fps_for_cycle(dg: PrecedenceDigraph, cycle: Cycle, active=None) -> list[frozenset[Pair]]:
    return [frozenset(pick) for pick in product(*fps_choices(dg, cycle, active))]


def efps_from_cycle(dg_full: PrecedenceDigraph, cycle: Cycle) -> Efps:
    props: set[Pair] = set()
    for e in cycle.arcs:
        ps = dg_full.imposing(e)
        if not ps:
            raise ValueError(f"arc {e} is not an arc of the digraph")
        props |= ps
    return Efps(cycle, frozenset(props))


def is_fps(inst: Instance, props: Iterable[Pair]) -> bool:
    return not PrecedenceDigraph(inst, props).is_acyclic()


def two_cycles(dg: PrecedenceDigraph) -> list[Cycle]:
    return [Cycle((w, v)) for (w, v) in sorted(dg.back) if w < v and (v, w) in dg.back]


def enumerate_f2(inst: Instance) -> list[Fps]:
    """All minimal FPSs whose digraph holds a 2-cycle.

    Two propagations with distinct targets ``a`` and ``b`` form such a set
    exactly when one imposes ``(b, a)`` and the other ``(a, b)``, so the
    family is the union over 2-cycles of ``phi(a, b) x phi(b, a)``.
    """
    dg = full_digraph(inst)
    seen: dict[frozenset[Pair], Fps] = {}
    for cyc in two_cycles(dg):
        a, b = cyc.vertices
        for p, q in product(sorted(dg.imposing((a, b))), sorted(dg.imposing((b, a)))):
            key = frozenset((p, q))
            if key not in seen:
                seen[key] = Fps(key, cyc, minimal=True)
    return list(seen.values())


def enumerate_c2(inst: Instance) -> list[Efps]:
    dg = full_digraph(inst)
    return [efps_from_cycle(dg, c) for c in two_cycles(dg)]
