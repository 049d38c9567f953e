"""Lazy-row separation for the FPS/EFPS and FORT models.

Every separator receives a rounded integral assignment, rebuilds the
capacitated placement it encodes and runs the propagation engine.  When
everything ends up monitored the assignment is accepted; otherwise rows
that cut it off are returned.
"""

from __future__ import annotations

import logging
import random
from typing import TYPE_CHECKING

import numpy as np

from cpds.fps import (
    Cycle,
    efps_from_cycle,
    find_cycle_from,
    full_digraph,
    minimal_fps_from_cycle,
    precedence_digraph,
    trim_to_chordless,
)
from cpds.forts import fort_from_infeasible, minimize_fort
from cpds.instance import Instance
from cpds.milp.model import LazyVerdict, Row
from cpds.propagation import CalcTrace, CapFunction, monitored_set

if TYPE_CHECKING:
    from cpds.formulations import VarLayout

log = logging.getLogger(__name__)


def decode_rho(inst: Instance, values, layout: "VarLayout") -> CapFunction:
    """Placement encoded by ``s`` and ``w``.

    A placed vertex of degree at most ``k`` observes its whole
    neighbourhood; a placed vertex of larger degree observes the
    neighbours whose channel variable is set.
    """
    k = inst.capacity
    mapping = {}
    for u in range(inst.n):
        if values[layout.s[u]] < 0.5:
            continue
        if inst.degree(u) <= k:
            mapping[u] = inst.adjacency[u]
        else:
            mapping[u] = [v for v in inst.adjacency[u] if values[layout.w[(u, v)]] > 0.5]
    return CapFunction.of(mapping)


def active_propagations(values, layout: "VarLayout") -> frozenset[tuple[int, int]]:
    return frozenset(p for p, j in layout.y.items() if values[j] > 0.5)


class _Base:
    name = "separator"

    def __init__(self, inst: Instance, layout: "VarLayout"):
        self.inst = inst
        self.layout = layout
        self.last_trace: CalcTrace | None = None
        self.last_missing = 0

    def trace(self, values) -> CalcTrace:
        self.last_trace = monitored_set(self.inst, decode_rho(self.inst, values, self.layout))
        self.last_missing = self.inst.n - len(self.last_trace.monitored)
        return self.last_trace

    def accepts(self, values) -> bool:
        return len(self.trace(values).monitored) == self.inst.n


class FpsSeparator(_Base):
    """Cycle-based separation.

    From every unmonitored vertex a randomized backward walk in the
    precedence digraph of the active propagations finds a cycle, which is
    shortened until chordless.  In ``fps`` mode one active propagation per
    arc gives a minimal forbidden set; in ``efps`` mode all propagations
    imposing the cycle's arcs form the row.
    """

    def __init__(self, inst: Instance, layout: "VarLayout", mode: str = "fps", seed=0):
        if mode not in ("fps", "efps"):
            raise ValueError(f"unknown separation mode {mode!r}")
        super().__init__(inst, layout)
        self.mode = mode
        self.name = mode.upper()
        self.rng = random.Random(seed)

    def find_cycles(self, values) -> list[Cycle]:
        trace = self.trace(values)
        missing = sorted(set(range(self.inst.n)) - trace.monitored)
        if not missing:
            return []
        active = active_propagations(values, self.layout)
        dg = precedence_digraph(self.inst, active)
        unmon = frozenset(missing)
        cycles: dict[tuple, Cycle] = {}
        for v in missing:
            cyc = find_cycle_from(dg, v, unmon, self.rng)
            if cyc is None:
                continue
            cyc = trim_to_chordless(dg, cyc)
            cycles.setdefault(cyc.canonical().vertices, cyc)
        return list(cycles.values())

    def rows_for(self, values, cycles) -> list[Row]:
        lay = self.layout
        rows: dict[tuple, Row] = {}
        if self.mode == "fps":
            active = active_propagations(values, lay)
            dg = precedence_digraph(self.inst, active)
            for cyc in cycles:
                f = minimal_fps_from_cycle(dg, cyc, active, self.rng)
                row = Row(tuple((lay.y[p], 1.0) for p in sorted(f.propagations)), "<=", float(f.rhs), "fps")
                rows.setdefault(row.key(), row)
        else:
            dg_full = full_digraph(self.inst)
            for cyc in cycles:
                ef = efps_from_cycle(dg_full, cyc)
                row = Row(tuple((lay.y[p], 1.0) for p in sorted(ef.propagations)), "<=", float(ef.bound), "efps")
                rows.setdefault(row.key(), row)
        return list(rows.values())

    def __call__(self, values: np.ndarray) -> LazyVerdict:
        cycles = self.find_cycles(values)
        if not cycles:
            if len(self.last_trace.monitored) < self.inst.n:
                # only possible when the coverage rows are violated
                raise RuntimeError("unmonitored vertices without a precedence cycle")
            return LazyVerdict()
        rows = self.rows_for(values, cycles)
        log.debug("%s separation: %d cycles, %d rows", self.name, len(cycles), len(rows))
        return LazyVerdict(rows)


class FortSeparator(_Base):
    """Return the hitting row of a minimal fort inside the unmonitored set."""

    name = "FORT"

    def __call__(self, values: np.ndarray) -> LazyVerdict:
        trace = self.trace(values)
        if len(trace.monitored) == self.inst.n:
            return LazyVerdict()
        fort = minimize_fort(self.inst, fort_from_infeasible(self.inst, trace))
        s_terms, w_terms = fort.row_terms(self.inst)
        terms = [(self.layout.s[v], 1.0) for v in s_terms]
        terms += [(self.layout.w[(v, u)], 1.0) for v, u in w_terms]
        return LazyVerdict([Row(tuple(terms), ">=", 1.0, "fort")])
