from __future__ import annotations

import time

from cpds.milp.backends import BackendError, LazyDriver, get_backend
from cpds.milp.model import Limits, ModelSpec, SolveResult, SolveStats

MAX_ITERATIONS = 100_000


class NonConvergenceError(RuntimeError):
    pass


def solve(model: ModelSpec, limits: Limits | None = None, backend="scip", mode: str = "auto") -> SolveResult:
    """Solve ``model`` to optimality or until the time limit.

    ``mode`` is ``"callback"`` (lazy rows injected inside the search),
    ``"iterative"`` (re-solve after each separation round) or ``"auto"``,
    which uses callbacks whenever the backend offers them.
    """
    limits = limits or Limits()
    be = get_backend(backend) if isinstance(backend, str) else backend
    if model.lazy is None:
        return be.solve(model, limits)
    if mode == "auto":
        mode = "callback" if be.supports_callbacks else "iterative"
    if mode == "iterative":
        return iterative_lazy_loop(model, limits, be)
    if mode != "callback":
        raise ValueError(f"unknown mode {mode!r}")
    if not be.supports_callbacks:
        raise BackendError(f"backend {be.name} cannot run lazy callbacks")
    driver = LazyDriver(model)
    res = be.solve(model, limits, driver=driver)
    res.stats.lazy_rows = len(driver.added)
    res.stats.separation_time = driver.time
    res.stats.callbacks = driver.calls
    res.added_rows = list(driver.added)
    return res


def iterative_lazy_loop(model: ModelSpec, limits: Limits | None = None, backend="highs", max_iterations: int = MAX_ITERATIONS) -> SolveResult:
    """Solve, separate the optimum, add the rows and repeat until accepted."""
    limits = limits or Limits()
    be = get_backend(backend) if isinstance(backend, str) else backend
    if model.lazy is None:
        return be.solve(model, limits)
    driver = LazyDriver(model)
    t0 = time.perf_counter()
    nodes = 0
    best_bound = None
    for it in range(1, max_iterations + 1):
        remaining = None
        if limits.time_limit is not None:
            remaining = limits.time_limit - (time.perf_counter() - t0)
            if remaining <= 0:
                return _finish(SolveResult("time-limit", None, None, best_bound, SolveStats()), driver, it - 1, t0, nodes)
        res = be.solve(model, Limits(remaining, limits.threads, limits.seed), extra_rows=driver.added)
        nodes += res.stats.nodes
        if res.status == "infeasible":
            return _finish(res, driver, it, t0, nodes)
        if res.status == "time-limit":
            if res.values is not None and not driver.accepts(res.values):
                res.values, res.objective = None, None
            return _finish(res, driver, it, t0, nodes)
        best_bound = res.objective
        rows = driver.separate(res.values)
        if not rows:
            return _finish(res, driver, it, t0, nodes)
    raise NonConvergenceError(f"lazy loop did not converge in {max_iterations} iterations")


def _finish(res: SolveResult, driver: LazyDriver, iterations: int, t0: float, nodes: int) -> SolveResult:
    res.stats.lazy_rows = len(driver.added)
    res.stats.separation_time = driver.time
    res.stats.callbacks = driver.calls
    res.stats.iterations = iterations
    res.stats.nodes = nodes
    res.stats.wall_time = time.perf_counter() - t0
    res.added_rows = list(driver.added)
    return res
