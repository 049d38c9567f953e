"""Instance representation, text formats and derived index sets.

An instance is an undirected simple graph, a set of zero-injection
vertices and a single capacity ``k`` shared by every measurement device.
Vertices are dense integer ids ``0..n-1``; string labels are kept only for
I/O.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Sequence

Pair = tuple[int, int]


class InstanceFormatError(ValueError):
    """Base class for instance file errors; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class MalformedHeaderError(InstanceFormatError):
    pass


class DuplicateEdgeError(InstanceFormatError):
    pass


class SelfLoopError(InstanceFormatError):
    pass


class UnknownVertexError(InstanceFormatError):
    pass


class NegativeCapacityError(InstanceFormatError):
    pass


@dataclass(frozen=True)
class PropagationSetIndex:
    """The potential propagations ``a_p`` and the capacity-limited pairs ``a_d``.

    ``a_p`` holds every ``(u, v)`` with ``u`` zero-injection and ``v`` a
    neighbour of ``u``; ``a_d`` holds every ``(u, v)`` with ``deg(u) > k``.
    Both are ordered by source then by neighbour order.
    """

    a_p: tuple[Pair, ...]
    a_d: tuple[Pair, ...]
    a_p_pos: dict[Pair, int] = field(repr=False, compare=False)
    a_d_pos: dict[Pair, int] = field(repr=False, compare=False)


@dataclass(frozen=True)
class Instance:
    adjacency: tuple[tuple[int, ...], ...]
    zero_injection: tuple[bool, ...]
    capacity: int = 0
    labels: tuple[str, ...] | None = None
    name: str = ""
    # original vertex ids when this instance is a component of another one
    origin: tuple[int, ...] | None = None

    def __post_init__(self):
        n = len(self.adjacency)
        if len(self.zero_injection) != n:
            raise ValueError("zero_injection must have one flag per vertex")
        if self.capacity < 0:
            raise NegativeCapacityError(f"capacity must be non-negative, got {self.capacity}")
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("labels must have one entry per vertex")
        for u, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"neighbour list of {u} must be sorted and duplicate-free")
            for v in nbrs:
                if v == u:
                    raise ValueError(f"self-loop at vertex {u}")
                if not 0 <= v < n:
                    raise ValueError(f"neighbour {v} of {u} out of range")
                if u not in self.adjacency[v]:
                    raise ValueError(f"adjacency not symmetric for edge {u}-{v}")

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Pair],
        zero_injection: Iterable[int] = (),
        capacity: int = 0,
        labels: Sequence[str] | None = None,
        name: str = "",
    ) -> "Instance":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        zi = [False] * n
        for v in zero_injection:
            if isinstance(v, bool):
                raise TypeError("zero_injection takes vertex ids, not flags")
            zi[v] = True
        return cls(
            adjacency=tuple(tuple(sorted(s)) for s in nbrs),
            zero_injection=tuple(zi),
            capacity=capacity,
            labels=tuple(labels) if labels is not None else None,
            name=name,
        )

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def closed_neighborhood(self, v: int) -> tuple[int, ...]:
        return tuple(sorted((v, *self.adjacency[v])))

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    @cached_property
    def zero_injection_set(self) -> frozenset[int]:
        return frozenset(v for v, z in enumerate(self.zero_injection) if z)

    def edges(self) -> list[Pair]:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def label(self, v: int) -> str:
        if self.labels is None:
            return str(v)
        return self.labels[v]

    def with_capacity(self, k: int) -> "Instance":
        return replace(self, capacity=k)

    def with_zero_injection(self, vertices: Iterable[int]) -> "Instance":
        chosen = set(vertices)
        return replace(self, zero_injection=tuple(v in chosen for v in range(self.n)))

    @cached_property
    def propagations(self) -> PropagationSetIndex:
        return build_propagation_index(self)

    def is_connected(self) -> bool:
        return len(connected_components(self)) <= 1


def build_propagation_index(inst: Instance) -> PropagationSetIndex:
    k = inst.capacity
    a_p = tuple((u, v) for u in range(inst.n) if inst.zero_injection[u] for v in inst.adjacency[u])
    a_d = tuple((u, v) for u in range(inst.n) if inst.degree(u) > k for v in inst.adjacency[u])
    return PropagationSetIndex(
        a_p=a_p,
        a_d=a_d,
        a_p_pos={p: i for i, p in enumerate(a_p)},
        a_d_pos={p: i for i, p in enumerate(a_d)},
    )


def connected_components(inst: Instance) -> list[Instance]:
    """Split ``inst`` into its connected components.

    Components are ordered by their smallest vertex id and re-indexed in
    increasing original id; ``origin`` maps local ids back to ``inst``.
    """
    seen = [False] * inst.n
    parts: list[list[int]] = []
    for s in range(inst.n):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in inst.adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    queue.append(v)
        parts.append(sorted(comp))

    if len(parts) == 1 and inst.origin is None:
        return [replace(inst, origin=tuple(range(inst.n)))]

    out = []
    for i, comp in enumerate(parts):
        local = {v: j for j, v in enumerate(comp)}
        adjacency = tuple(tuple(local[w] for w in inst.adjacency[v]) for v in comp)
        base_origin = inst.origin
        out.append(
            Instance(
                adjacency=adjacency,
                zero_injection=tuple(inst.zero_injection[v] for v in comp),
                capacity=inst.capacity,
                labels=tuple(inst.label(v) for v in comp),
                name=f"{inst.name}#{i}" if inst.name else f"#{i}",
                origin=tuple(base_origin[v] if base_origin else v for v in comp),
            )
        )
    return out


# --------------------------------------------------------------------------
# text formats


def _free_labels(used: set[str]):
    i = 1
    while True:
        if str(i) not in used:
            yield str(i)
        i += 1


def parse_instance(text: str | bytes, capacity: int = 0, name: str = "") -> Instance:
    """Parse the line-oriented ``p cpds`` format.

    ``c`` lines are comments, ``p cpds <n> <m>`` must be the first
    non-comment line, ``z`` lines list zero-injection labels and each
    ``e`` line is one edge. Labels get ids in order of first appearance;
    vertices never mentioned receive the smallest unused integer labels.
    """
    if isinstance(text, bytes):
        text = text.decode()
    if capacity < 0:
        raise NegativeCapacityError(f"capacity must be non-negative, got {capacity}")

    n = m = None
    ids: dict[str, int] = {}
    labels: list[str] = []
    zero: set[int] = set()
    edges: dict[frozenset[int], int] = {}
    last_line = 0

    def vertex(label: str, lineno: int) -> int:
        if label not in ids:
            if len(labels) >= n:
                raise UnknownVertexError(
                    f"label {label!r} exceeds the {n} vertices declared in the header", lineno
                )
            ids[label] = len(labels)
            labels.append(label)
        return ids[label]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        tokens = raw.split()
        if not tokens or tokens[0] == "c":
            continue
        kind = tokens[0]
        if n is None:
            if kind != "p":
                raise MalformedHeaderError("expected 'p cpds <n> <m>' before any data", lineno)
            if len(tokens) != 4 or tokens[1] != "cpds":
                raise MalformedHeaderError("header must read 'p cpds <n> <m>'", lineno)
            try:
                n, m = int(tokens[2]), int(tokens[3])
            except ValueError:
                raise MalformedHeaderError("vertex and edge counts must be integers", lineno) from None
            if n < 0 or m < 0:
                raise MalformedHeaderError("vertex and edge counts must be non-negative", lineno)
            continue
        if kind == "p":
            raise MalformedHeaderError("duplicate header", lineno)
        if kind == "z":
            for label in tokens[1:]:
                zero.add(vertex(label, lineno))
        elif kind == "e":
            if len(tokens) != 3:
                raise InstanceFormatError("edge lines must read 'e <label> <label>'", lineno)
            if tokens[1] == tokens[2]:
                raise SelfLoopError(f"self-loop at {tokens[1]!r}", lineno)
            u, v = vertex(tokens[1], lineno), vertex(tokens[2], lineno)
            key = frozenset((u, v))
            if key in edges:
                raise DuplicateEdgeError(
                    f"edge {tokens[1]}-{tokens[2]} already given on line {edges[key]}", lineno
                )
            edges[key] = lineno
        else:
            raise InstanceFormatError(f"unknown line type {kind!r}", lineno)

    if n is None:
        raise MalformedHeaderError("missing 'p cpds <n> <m>' header", last_line or None)
    if len(edges) != m:
        raise MalformedHeaderError(f"header declares {m} edges but {len(edges)} were given", last_line)

    fresh = _free_labels(set(labels))
    while len(labels) < n:
        labels.append(next(fresh))
    return Instance.from_edges(
        n,
        (tuple(e) for e in edges),
        zero_injection=zero,
        capacity=capacity,
        labels=labels,
        name=name,
    )


def read_instance(path, capacity: int = 0) -> Instance:
    from pathlib import Path

    p = Path(path)
    return parse_instance(p.read_text(), capacity=capacity, name=p.stem)


def format_instance(inst: Instance, comment: str | None = None) -> str:
    """Render ``inst`` in the ``p cpds`` format (capacity is not stored).

    Labels survive a round trip; dense ids may be renumbered because the
    parser assigns them by first appearance.
    """
    lines = []
    if comment:
        lines.extend(f"c {c}" for c in comment.splitlines())
    lines.append(f"p cpds {inst.n} {inst.m}")
    lines.extend(f"e {inst.label(u)} {inst.label(v)}" for u, v in inst.edges())
    zi = [inst.label(v) for v in range(inst.n) if inst.zero_injection[v]]
    if zi:
        lines.append("z " + " ".join(zi))
    return "\n".join(lines) + "\n"


def parse_edge_list(edge_text: str, zero_injection_text: str = "", capacity: int = 0, name: str = "") -> Instance:
    """Import a plain ``u v`` edge list plus a whitespace-separated zero-injection list."""
    ids: dict[str, int] = {}
    labels: list[str] = []
    edges: set[frozenset[int]] = set()

    def vertex(label: str) -> int:
        if label not in ids:
            ids[label] = len(labels)
            labels.append(label)
        return ids[label]

    for lineno, raw in enumerate(edge_text.splitlines(), start=1):
        tokens = raw.split()
        if not tokens or tokens[0].startswith("#"):
            continue
        if len(tokens) != 2:
            raise InstanceFormatError("edge list lines must contain two labels", lineno)
        if tokens[0] == tokens[1]:
            raise SelfLoopError(f"self-loop at {tokens[0]!r}", lineno)
        key = frozenset((vertex(tokens[0]), vertex(tokens[1])))
        if key in edges:
            raise DuplicateEdgeError(f"edge {tokens[0]}-{tokens[1]} repeated", lineno)
        edges.add(key)

    zero = set()
    for lineno, raw in enumerate(zero_injection_text.splitlines(), start=1):
        for label in raw.split():
            if label.startswith("#"):
                break
            if label not in ids:
                raise UnknownVertexError(f"zero-injection label {label!r} is not in the edge list", lineno)
            zero.add(ids[label])
    return Instance.from_edges(
        len(labels), (tuple(e) for e in edges), zero, capacity=capacity, labels=labels, name=name
    )


# --------------------------------------------------------------------------
# generators


def random_connected_graph(n: int, p: float, rng: random.Random) -> list[Pair]:
    """Random spanning tree plus independent extra edges with probability ``p``."""
    edges = set()
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        u, v = order[i], order[rng.randrange(i)]
        edges.add((min(u, v), max(u, v)))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < p:
                edges.add((u, v))
    return sorted(edges)


def grid_like_instance(
    rows: int,
    cols: int,
    seed: int = 0,
    drop: float = 0.25,
    chords: float = 0.05,
    pendants: float = 0.15,
    zero_fraction: float = 0.25,
    capacity: int = 0,
) -> Instance:
    """Synthetic power-grid-like graph.

    A ``rows x cols`` grid keeps a random spanning tree and each remaining
    grid edge with probability ``1 - drop``; a few diagonal chords and
    pendant buses are added and a ``zero_fraction`` of the buses is marked
    zero-injection. Average degree lands near that of transmission grids.
    """
    rng = random.Random(seed)
    n = rows * cols

    def vid(r, c):
        return r * cols + c

    grid = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                grid.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                grid.append((vid(r, c), vid(r + 1, c)))
    rng.shuffle(grid)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = set()
    rest = []
    for u, v in grid:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            edges.add((min(u, v), max(u, v)))
        else:
            rest.append((u, v))
    for u, v in rest:
        if rng.random() >= drop:
            edges.add((min(u, v), max(u, v)))
    for r in range(rows - 1):
        for c in range(cols - 1):
            if rng.random() < chords:
                u, v = vid(r, c), vid(r + 1, c + 1)
                edges.add((u, v))
    total = n
    for v in range(n):
        if rng.random() < pendants:
            edges.add((v, total))
            total += 1
    zero = [v for v in range(total) if rng.random() < zero_fraction]
    return Instance.from_edges(total, edges, zero, capacity=capacity, name=f"grid{rows}x{cols}s{seed}")
