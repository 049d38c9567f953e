"""Brute-force reference solvers for small instances.

These deliberately share no code with the propagation engine or the MILP
models: the closure is recomputed on integer bitmasks so that agreement
with the formulations is meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable

from cpds.instance import Instance
from cpds.propagation import CapFunction

DEFAULT_MAX_N = 12


class OracleSizeError(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    optimum: int
    witness: CapFunction
    nodes: int


def _masks(inst: Instance) -> list[int]:
    return [sum(1 << u for u in inst.adjacency[v]) for v in range(inst.n)]


def closure(inst: Instance, nbr: list[int], start: int) -> int:
    """Apply the propagation rule to the monitored bitmask ``start`` until nothing changes."""
    mon = start
    zi = [v for v in range(inst.n) if inst.zero_injection[v]]
    changed = True
    while changed:
        changed = False
        for v in zi:
            if not (mon >> v) & 1:
                continue
            rest = nbr[v] & ~mon
            if rest and rest & (rest - 1) == 0:
                mon |= rest
                changed = True
    return mon


def _check_size(inst: Instance, max_n: int) -> None:
    if inst.n > max_n:
        raise OracleSizeError(f"oracle limited to n <= {max_n}, got {inst.n}")


def brute_force_cpds(inst: Instance, max_n: int = DEFAULT_MAX_N) -> OracleResult:
    """Smallest placement admitting a ``k``-capacitated power dominating function.

    Placements are tried by increasing size and lexicographically within a
    size.  A placement is skipped outright when even unlimited capacity
    fails to monitor the graph.  Otherwise each placed ``u`` picks a subset
    of its unplaced neighbours of size ``min(k, |N(u) - S|)``; placed
    neighbours are monitored anyway and larger subsets never hurt.
    """
    _check_size(inst, max_n)
    n, k = inst.n, inst.capacity
    full = (1 << n) - 1
    nbr = _masks(inst)
    nodes = 0
    for size in range(n + 1):
        for placed in combinations(range(n), size):
            nodes += 1
            smask = sum(1 << u for u in placed)
            open_nbrs = {u: [v for v in inst.adjacency[u] if not (smask >> v) & 1] for u in placed}
            base = smask
            for u in placed:
                base |= nbr[u]
            if closure(inst, nbr, base) != full:
                continue
            choices = [list(combinations(open_nbrs[u], min(k, len(open_nbrs[u])))) for u in placed]
            for pick in product(*choices):
                nodes += 1
                mon = smask
                for sub in pick:
                    for v in sub:
                        mon |= 1 << v
                if closure(inst, nbr, mon) == full:
                    return OracleResult(size, CapFunction.of(dict(zip(placed, pick))), nodes)
    raise AssertionError("placing every vertex always monitors the graph")


def brute_force_pds(inst: Instance, max_n: int = DEFAULT_MAX_N) -> OracleResult:
    """Uncapacitated optimum: every placed vertex observes its whole neighbourhood."""
    _check_size(inst, max_n)
    n = inst.n
    full = (1 << n) - 1
    nbr = _masks(inst)
    nodes = 0
    for size in range(n + 1):
        for placed in combinations(range(n), size):
            nodes += 1
            mon = 0
            for u in placed:
                mon |= (1 << u) | nbr[u]
            if closure(inst, nbr, mon) == full:
                return OracleResult(size, CapFunction.of({u: inst.adjacency[u] for u in placed}), nodes)
    raise AssertionError("placing every vertex always monitors the graph")


def oracle_value(inst: Instance) -> int:
    return brute_force_cpds(inst).optimum


def k_star(inst: Instance, solver: Callable[[Instance], int] | None = None) -> int:
    """Smallest capacity whose optimum equals the uncapacitated one.

    ``solver`` maps an instance (with its capacity set) to the optimum and
    defaults to the brute-force oracle.  The optimum is non-increasing in
    ``k`` and constant from the maximum degree on, so a binary search over
    ``0..max_degree`` is exact.
    """
    solver = solver or oracle_value
    top = inst.max_degree
    target = solver(inst.with_capacity(top))
    lo, hi = 0, top
    while lo < hi:
        mid = (lo + hi) // 2
        if solver(inst.with_capacity(mid)) == target:
            hi = mid
        else:
            lo = mid + 1
    return lo
