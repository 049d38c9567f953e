"""MILP backends.

``highs`` goes through :func:`scipy.optimize.milp` and has no in-tree
callbacks, so lazy rows are handled by the iterative loop.  ``scip`` uses
PySCIPOpt and injects lazy rows from a constraint handler that only sees
integral solutions.
"""

from __future__ import annotations

import logging
import time

import numpy as np

from cpds.milp.model import (
    INT_TOL,
    Limits,
    ModelError,
    ModelSpec,
    Row,
    SolveResult,
    SolveStats,
    round_values,
)

log = logging.getLogger(__name__)


class BackendError(RuntimeError):
    """The solver failed; never reported as infeasibility."""


class LazyRowError(RuntimeError):
    """A separator emitted a row that the triggering assignment satisfies."""


class LazyDriver:
    """Calls the model's separator, validates rows and filters duplicates globally."""

    def __init__(self, model: ModelSpec, tol: float = 1e-6):
        self.model = model
        self.sep = model.lazy
        self.tol = tol
        self.seen: set[tuple] = set()
        self.added: list[Row] = []
        self.time = 0.0
        self.calls = 0

    def accepts(self, values) -> bool:
        x = round_values(values, self.model)
        t = time.perf_counter()
        try:
            check = getattr(self.sep, "accepts", None)
            return check(x) if check is not None else self.sep(x).feasible
        finally:
            self.time += time.perf_counter() - t

    def separate(self, values) -> list[Row]:
        x = round_values(values, self.model)
        t = time.perf_counter()
        verdict = self.sep(x)
        self.time += time.perf_counter() - t
        self.calls += 1
        if verdict.feasible:
            return []
        for row in verdict.rows:
            viol = row.violation(x)
            if viol <= self.tol:
                raise LazyRowError(f"lazy row {row.name!r} not violated (violation {viol:g})")
        fresh = [r for r in verdict.rows if r.key() not in self.seen]
        if not fresh:
            # a violated row cannot be in force already; re-adding is safe
            fresh = list(verdict.rows)
        for r in fresh:
            self.seen.add(r.key())
        self.added.extend(fresh)
        log.debug(
            "lazy mode=%s unmonitored=%s cuts=%d total=%d sep_time=%.4fs",
            getattr(self.sep, "name", "separator"),
            getattr(self.sep, "last_missing", "?"),
            len(fresh),
            len(self.added),
            self.time,
        )
        return fresh


def _all_rows(model: ModelSpec, extra_rows) -> list[Row]:
    return list(model.rows) + list(extra_rows)


# --------------------------------------------------------------------------
# HiGHS through scipy


class HighsBackend:
    name = "highs"
    supports_callbacks = False

    def solve(self, model: ModelSpec, limits: Limits, extra_rows=(), driver=None) -> SolveResult:
        if driver is not None:
            raise BackendError("highs backend has no in-tree lazy callbacks")
        from scipy.optimize import Bounds, LinearConstraint, milp
        from scipy.sparse import csr_matrix

        t0 = time.perf_counter()
        nv = model.num_vars
        if nv == 0:
            return SolveResult("optimal", 0.0, np.zeros(0), 0.0, SolveStats(wall_time=0.0))
        rows = _all_rows(model, extra_rows)
        constraints = []
        if rows:
            data, ind, ptr = [], [], [0]
            lo = np.empty(len(rows))
            hi = np.empty(len(rows))
            for i, r in enumerate(rows):
                for j, c in r.terms:
                    ind.append(j)
                    data.append(c)
                ptr.append(len(ind))
                lo[i] = r.rhs if r.sense in (">=", "=") else -np.inf
                hi[i] = r.rhs if r.sense in ("<=", "=") else np.inf
            a = csr_matrix((data, ind, ptr), shape=(len(rows), nv))
            constraints.append(LinearConstraint(a, lo, hi))
        lb, ub = model.bounds()
        integrality = np.array([1 if v.integer else 0 for v in model.variables])
        options = {"disp": False, "presolve": True, "mip_rel_gap": 0.0}
        if limits.time_limit is not None:
            options["time_limit"] = max(float(limits.time_limit), 1e-3)
        try:
            res = milp(
                model.objective_vector(),
                constraints=constraints,
                integrality=integrality,
                bounds=Bounds(lb, ub),
                options=options,
            )
        except Exception as exc:  # pragma: no cover - solver crash
            raise BackendError(f"HiGHS failed: {exc}") from exc
        wall = time.perf_counter() - t0
        stats = SolveStats(wall_time=wall, nodes=int(getattr(res, "mip_node_count", 0) or 0))
        bound = getattr(res, "mip_dual_bound", None)
        if res.status == 0:
            return SolveResult("optimal", float(res.fun), res.x, float(res.fun), stats)
        if res.status == 1:
            x = res.x if res.x is not None else None
            obj = float(res.fun) if x is not None else None
            return SolveResult("time-limit", obj, x, None if bound is None else float(bound), stats)
        if res.status == 2:
            return SolveResult("infeasible", None, None, None, stats)
        raise BackendError(f"HiGHS returned status {res.status}: {res.message}")


# --------------------------------------------------------------------------
# SCIP through PySCIPOpt


class ScipBackend:
    """PySCIPOpt backend.

    Creating a SCIP instance loads every plugin and costs several
    milliseconds, which dominates on tiny models.  One instance is kept per
    backend object and its problem is freed and rebuilt between solves; the
    lazy-row handler is included once and pointed at the current driver.
    """

    name = "scip"
    supports_callbacks = True

    def __init__(self, params: dict | None = None):
        self.params = dict(params or {})
        self.heuristics_off = False
        self.binaries_first = False
        self._scip = None
        self._handler = None
        self._defaults: dict = {}

    def _instance(self, pyscipopt):
        if self._scip is None:
            m = pyscipopt.Model()
            m.hideOutput()
            self._handler = _make_handler(pyscipopt)
            # Run after every built-in handler (logicor and setppc enforce at
            # about -2e6) so the separator only sees points that satisfy the
            # materialised rows.
            m.includeConshdlr(
                self._handler,
                "cpds_lazy",
                "lazy rows from combinatorial separation",
                chckpriority=-9_999_999,
                enfopriority=-9_999_999,
                needscons=False,
            )
            if self.heuristics_off:
                m.setHeuristics(pyscipopt.SCIP_PARAMSETTING.OFF)
            for key, val in self.params.items():
                m.setParam(key, val)
            for key in ("misc/usesymmetry", "limits/time"):
                self._defaults[key] = m.getParam(key)
            self._scip = m
        else:
            self._scip.freeProb()
        return self._scip

    def solve(self, model: ModelSpec, limits: Limits, extra_rows=(), driver: LazyDriver | None = None) -> SolveResult:
        try:
            import pyscipopt
        except ImportError as exc:  # pragma: no cover
            raise BackendError("pyscipopt is not installed") from exc
        t0 = time.perf_counter()
        if model.num_vars == 0:
            return SolveResult("optimal", 0.0, np.zeros(0), 0.0, SolveStats())
        m = self._instance(pyscipopt)
        m.createProbBasic(model.name)
        m.setParam("randomization/randomseedshift", int(limits.seed) % 2**31)
        if limits.time_limit is not None:
            m.setParam("limits/time", max(float(limits.time_limit), 1e-3))
        else:
            m.setParam("limits/time", self._defaults["limits/time"])
        # symmetry reductions only see the materialised rows and would cut
        # off solutions that the lazy rows keep feasible
        m.setParam("misc/usesymmetry", 0 if driver is not None else self._defaults["misc/usesymmetry"])
        xs = []
        for v in model.variables:
            vtype = "B" if v.binary else ("I" if v.integer else "C")
            x = m.addVar(name=v.name, vtype=vtype, lb=v.lb, ub=v.ub)
            if self.binaries_first and vtype == "B":
                m.chgVarBranchPriority(x, 1)
            xs.append(x)
        for r in _all_rows(model, extra_rows):
            _add_row(m, xs, r)
        m.setObjective(pyscipopt.quicksum(c * xs[j] for j, c in model.objective.items()), "minimize")
        self._handler.attach(xs, driver)
        try:
            m.optimize()
        except Exception as exc:  # pragma: no cover
            raise BackendError(f"SCIP failed: {exc}") from exc
        finally:
            self._handler.attach([], None)
        stats = SolveStats(wall_time=time.perf_counter() - t0, nodes=int(m.getNNodes()))
        status = m.getStatus()
        sol = m.getBestSol() if m.getNSols() > 0 else None
        values = np.array([m.getSolVal(sol, x) for x in xs]) if sol is not None else None
        obj = m.getSolObjVal(sol) if sol is not None else None
        if status == "optimal":
            return SolveResult("optimal", obj, values, obj, stats)
        if status in ("timelimit", "userinterrupt", "nodelimit", "gaplimit", "memlimit"):
            return SolveResult("time-limit", obj, values, m.getDualbound(), stats)
        if status == "infeasible":
            return SolveResult("infeasible", None, None, None, stats)
        raise BackendError(f"SCIP returned status {status}")


def _add_row(m, xs, r: Row):
    import pyscipopt

    expr = pyscipopt.quicksum(c * xs[j] for j, c in r.terms)
    if r.sense == "<=":
        return m.addCons(expr <= r.rhs, name=r.name or "")
    if r.sense == ">=":
        return m.addCons(expr >= r.rhs, name=r.name or "")
    return m.addCons(expr == r.rhs, name=r.name or "")


def _make_handler(pyscipopt):
    SCIP_RESULT = pyscipopt.SCIP_RESULT

    class LazyHandler(pyscipopt.Conshdlr):
        xs: list = []
        driver: LazyDriver | None = None

        def attach(self, xs, driver):
            self.xs = xs
            self.driver = driver

        def _values(self, sol):
            return np.array([self.model.getSolVal(sol, x) for x in self.xs])

        def _enforce(self, solinfeasible):
            if self.driver is None:
                return {"result": SCIP_RESULT.FEASIBLE}
            if solinfeasible:
                # an earlier handler already rejected this point, possibly
                # because materialised rows are violated; separating it
                # would feed the separator a point outside its domain
                return {"result": SCIP_RESULT.INFEASIBLE}
            try:
                rows = self.driver.separate(self._values(None))
            except ModelError:
                return {"result": SCIP_RESULT.INFEASIBLE}
            if not rows:
                return {"result": SCIP_RESULT.FEASIBLE}
            for r in rows:
                _add_row(self.model, self.xs, r)
            return {"result": SCIP_RESULT.CONSADDED}

        def conscheck(self, constraints, solution, checkintegrality, checklprows, printreason, completely):
            if self.driver is None:
                return {"result": SCIP_RESULT.FEASIBLE}
            try:
                ok = self.driver.accepts(self._values(solution))
            except ModelError:
                ok = False
            return {"result": SCIP_RESULT.FEASIBLE if ok else SCIP_RESULT.INFEASIBLE}

        def consenfolp(self, constraints, nusefulconss, solinfeasible):
            return self._enforce(solinfeasible)

        def consenfops(self, constraints, nusefulconss, solinfeasible, objinfeasible):
            return self._enforce(solinfeasible)

        def conslock(self, constraint, locktype, nlockspos, nlocksneg):
            if self.driver is None:
                return
            for x in self.xs:
                self.model.addVarLocks(x, nlockspos + nlocksneg, nlockspos + nlocksneg)

    return LazyHandler()


# Tiny models (a few dozen variables) spend most of their time in root
# cutting planes and primal heuristics; switching both off roughly halves
# the wall time per solve without affecting optimality.  The time-indexed
# models also carry general integer order variables; once the binaries are
# fixed those are decided by difference constraints, so branching on the
# binaries first avoids a lot of useless branching.
SCIP_LITE_PARAMS = {
    "separating/maxrounds": 0,
    "separating/maxroundsroot": 0,
}


def _scip_lite() -> ScipBackend:
    be = ScipBackend(SCIP_LITE_PARAMS)
    be.name = "scip-lite"
    be.heuristics_off = True
    be.binaries_first = True
    return be


BACKENDS = {"highs": HighsBackend, "scip": ScipBackend, "scip-lite": _scip_lite}


_SHARED: dict = {}


def get_backend(name: str):
    """Backend instance for ``name``, shared within the process so SCIP can be reused."""
    if name not in BACKENDS:
        raise BackendError(f"unknown backend {name!r}; choose from {sorted(BACKENDS)}")
    if name not in _SHARED:
        _SHARED[name] = BACKENDS[name]()
    return _SHARED[name]


__all__ = [
    "BackendError",
    "LazyRowError",
    "LazyDriver",
    "HighsBackend",
    "ScipBackend",
    "get_backend",
    "INT_TOL",
]
