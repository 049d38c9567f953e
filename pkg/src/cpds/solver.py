"""End-to-end solving: build a model, run it, decode and verify the answer."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from cpds.formulations import Formulation, Options, build, model_label
from cpds.instance import Instance, connected_components
from cpds.milp import Limits, ModelSpec, SolveResult, solve
from cpds.milp.model import round_values
from cpds.propagation import CapFunction, is_k_capacitated, monitored_set
from cpds.separation import decode_rho

log = logging.getLogger(__name__)


class VerificationError(RuntimeError):
    """The decoded solution does not match what the solver reported."""


@dataclass
class SolveReport:
    instance: str
    n: int
    m: int
    k: int
    model: str
    options: str
    status: str
    objective: int | None
    bound: float | None
    gap: float | None
    time_s: float
    sep_time_s: float
    lazy_rows: int
    init_rows: int
    vars: int
    verified: bool
    rho: CapFunction | None = None
    callbacks: int = 0
    iterations: int = 0
    components: int = 1
    added_rows: list = field(default_factory=list, repr=False)

    @property
    def placed(self) -> frozenset[int]:
        return self.rho.placed if self.rho is not None else frozenset()


def relative_gap(objective, bound, n: int) -> float | None:
    """``(ub - lb) / ub`` where a missing incumbent counts as ``n``."""
    ub = n if objective is None else objective
    if bound is None:
        return None if objective is None else 0.0
    if ub <= 0:
        return 0.0
    return max(0.0, (ub - bound) / ub)


def verify(inst: Instance, rho: CapFunction, objective) -> bool:
    """Hard check of a decoded solution; raises :class:`VerificationError` on mismatch."""
    rho.validate(inst)
    if not is_k_capacitated(inst, rho):
        raise VerificationError("decoded function exceeds the capacity")
    trace = monitored_set(inst, rho)
    if len(trace.monitored) != inst.n:
        missing = sorted(set(range(inst.n)) - trace.monitored)
        raise VerificationError(f"decoded function leaves {[inst.label(v) for v in missing]} unmonitored")
    if objective is not None and round(objective) != len(rho.placed):
        raise VerificationError(f"objective {objective} but {len(rho.placed)} vertices are placed")
    return True


def verify_and_report(inst: Instance, kind: Formulation, options: Options, model: ModelSpec, res: SolveResult) -> SolveReport:
    rho = None
    verified = False
    if res.values is not None:
        x = round_values(res.values, model)
        rho = decode_rho(inst, x, model.meta["layout"])
        verified = verify(inst, rho, res.objective)
    obj = None if res.objective is None else int(round(res.objective))
    bound = res.bound
    if res.status == "optimal":
        bound = obj
    return SolveReport(
        instance=inst.name,
        n=inst.n,
        m=inst.m,
        k=inst.capacity,
        model=model_label(kind, options),
        options=options.label() if kind in (Formulation.FPS, Formulation.EFPS) else "",
        status=res.status,
        objective=obj,
        bound=bound,
        gap=relative_gap(obj, bound, inst.n),
        time_s=res.stats.wall_time,
        sep_time_s=res.stats.separation_time,
        lazy_rows=res.stats.lazy_rows,
        init_rows=model.meta.get("initial_rows", len(model.rows)),
        vars=model.num_vars,
        verified=verified,
        rho=rho,
        callbacks=res.stats.callbacks,
        iterations=res.stats.iterations,
        added_rows=list(res.added_rows),
    )


def solve_component(
    inst: Instance,
    kind: Formulation,
    options: Options,
    limits: Limits,
    backend: str,
    mode: str,
    seed: int,
) -> tuple[SolveReport, ModelSpec]:
    model = build(inst, kind, options, seed=seed)
    t0 = time.perf_counter()
    res = solve(model, limits, backend=backend, mode=mode)
    res.stats.wall_time = time.perf_counter() - t0
    return verify_and_report(inst, kind, options, model, res), model


def solve_cpds(
    inst: Instance,
    kind: Formulation | str = Formulation.EFPS,
    options: Options = Options(),
    limits: Limits | None = None,
    backend: str = "scip",
    mode: str = "auto",
    seed: int = 0,
) -> SolveReport:
    """Solve ``inst`` at its capacity with the given model.

    Disconnected inputs are split into components that are solved
    independently; objectives, bounds and statistics are summed and the
    decoded placement is mapped back to the original vertex ids.
    """
    kind = Formulation.parse(kind) if isinstance(kind, str) else kind
    limits = limits or Limits(seed=seed)
    comps = connected_components(inst) if inst.n else []
    if len(comps) <= 1:
        if not comps:
            comps = [inst]
        report, _ = solve_component(comps[0], kind, options, limits, backend, mode, seed)
        report.instance = inst.name
        return report

    t0 = time.perf_counter()
    reports = []
    for comp in comps:
        lim = limits
        if limits.time_limit is not None:
            left = limits.time_limit - (time.perf_counter() - t0)
            lim = Limits(max(left, 1e-3), limits.threads, limits.seed)
        rep, _ = solve_component(comp, kind, options, lim, backend, mode, seed)
        reports.append((comp, rep))

    statuses = {r.status for _, r in reports}
    status = "optimal" if statuses == {"optimal"} else ("infeasible" if "infeasible" in statuses else "time-limit")
    if all(r.objective is not None for _, r in reports):
        objective = sum(r.objective for _, r in reports)
        mapping: dict[int, frozenset[int]] = {}
        for comp, r in reports:
            for u, vs in r.rho.assignment.items():
                mapping[comp.origin[u]] = frozenset(comp.origin[v] for v in vs)
        rho = CapFunction.of(mapping)
        verified = verify(inst, rho, objective)
    else:
        objective, rho, verified = None, None, False
    bounds = [r.bound for _, r in reports]
    bound = None if any(b is None for b in bounds) else sum(bounds)
    first = reports[0][1]
    return SolveReport(
        instance=inst.name,
        n=inst.n,
        m=inst.m,
        k=inst.capacity,
        model=first.model,
        options=first.options,
        status=status,
        objective=objective,
        bound=bound,
        gap=relative_gap(objective, bound, inst.n),
        time_s=time.perf_counter() - t0,
        sep_time_s=sum(r.sep_time_s for _, r in reports),
        lazy_rows=sum(r.lazy_rows for _, r in reports),
        init_rows=sum(r.init_rows for _, r in reports),
        vars=sum(r.vars for _, r in reports),
        verified=verified,
        rho=rho,
        callbacks=sum(r.callbacks for _, r in reports),
        iterations=sum(r.iterations for _, r in reports),
        components=len(reports),
    )
