from cpds.milp.backends import BackendError, LazyRowError, get_backend
from cpds.milp.lpfile import to_lp
from cpds.milp.model import (
    INT_TOL,
    VIOLATION_TOL,
    LazyVerdict,
    Limits,
    ModelSpec,
    Row,
    SolveResult,
    SolveStats,
    Variable,
)
from cpds.milp.solve import NonConvergenceError, iterative_lazy_loop, solve

__all__ = [
    "BackendError",
    "LazyRowError",
    "NonConvergenceError",
    "get_backend",
    "to_lp",
    "INT_TOL",
    "VIOLATION_TOL",
    "LazyVerdict",
    "Limits",
    "ModelSpec",
    "Row",
    "SolveResult",
    "SolveStats",
    "Variable",
    "solve",
    "iterative_lazy_loop",
]
