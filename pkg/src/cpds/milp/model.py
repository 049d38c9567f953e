"""Solver-agnostic MILP models with an optional lazy-row generator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

INT_TOL = 1e-6
VIOLATION_TOL = 1e-6

SENSES = ("<=", ">=", "=")


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    lb: int = 0
    ub: int = 1
    integer: bool = True

    @property
    def binary(self) -> bool:
        return self.integer and self.lb == 0 and self.ub == 1


@dataclass(frozen=True)
class Row:
    terms: tuple[tuple[int, float], ...]
    sense: str
    rhs: float
    name: str = ""

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ModelError(f"unknown sense {self.sense!r}")

    def activity(self, x: Sequence[float]) -> float:
        return float(sum(c * x[j] for j, c in self.terms))

    def violation(self, x: Sequence[float]) -> float:
        a = self.activity(x)
        if self.sense == "<=":
            return a - self.rhs
        if self.sense == ">=":
            return self.rhs - a
        return abs(a - self.rhs)

    def key(self) -> tuple:
        """Canonical form used to deduplicate rows."""
        return (tuple(sorted(self.terms)), self.sense, float(self.rhs))


@dataclass
class LazyVerdict:
    """Empty ``rows`` means the assignment is accepted."""

    rows: list[Row] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.rows


class Separator(Protocol):
    name: str

    def __call__(self, values: np.ndarray) -> LazyVerdict: ...


@dataclass
class ModelSpec:
    name: str = "model"
    variables: list[Variable] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    rows: list[Row] = field(default_factory=list)
    lazy: Separator | Callable[[np.ndarray], LazyVerdict] | None = None
    index: dict[str, int] = field(default_factory=dict)
    # builder-specific handles (variable layout etc.)
    meta: dict = field(default_factory=dict)

    def add_var(self, name: str, lb: int = 0, ub: int = 1, integer: bool = True) -> int:
        if name in self.index:
            raise ModelError(f"duplicate variable {name!r}")
        if integer and not (np.isfinite(lb) and np.isfinite(ub)):
            raise ModelError(f"integer variable {name!r} needs finite bounds")
        self.variables.append(Variable(name, lb, ub, integer))
        self.index[name] = len(self.variables) - 1
        return self.index[name]

    def add_row(self, terms, sense: str, rhs: float, name: str = "") -> Row:
        merged: dict[int, float] = {}
        for j, c in terms:
            if not 0 <= j < len(self.variables):
                raise ModelError(f"row {name!r} references undeclared variable {j}")
            merged[j] = merged.get(j, 0.0) + c
        row = Row(tuple((j, c) for j, c in merged.items() if c != 0), sense, rhs, name)
        self.rows.append(row)
        return row

    def set_objective(self, coefs: dict[int, float]) -> None:
        self.objective = dict(coefs)

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        return lb, ub

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.num_vars)
        for j, coef in self.objective.items():
            c[j] = coef
        return c

    def objective_value(self, x: Sequence[float]) -> float:
        return float(sum(c * x[j] for j, c in self.objective.items()))

    def check(self, x: Sequence[float], tol: float = VIOLATION_TOL) -> list[Row]:
        """Rows violated by ``x`` (materialised rows only)."""
        return [r for r in self.rows if r.violation(x) > tol]


@dataclass(frozen=True)
class Limits:
    time_limit: float | None = None
    threads: int = 1
    seed: int = 0


@dataclass
class SolveStats:
    lazy_rows: int = 0
    separation_time: float = 0.0
    callbacks: int = 0
    iterations: int = 1
    nodes: int = 0
    wall_time: float = 0.0


@dataclass
class SolveResult:
    status: str  # "optimal", "time-limit" or "infeasible"
    objective: float | None
    values: np.ndarray | None
    bound: float | None
    stats: SolveStats = field(default_factory=SolveStats)
    added_rows: list[Row] = field(default_factory=list)


def round_values(values: np.ndarray, model: ModelSpec, tol: float = INT_TOL) -> np.ndarray:
    """Round integer variables; values further than ``tol`` from an integer are an error."""
    x = np.asarray(values, dtype=float).copy()
    mask = model.meta.get("_int_mask")
    if mask is None or len(mask) != model.num_vars:
        mask = np.array([v.integer for v in model.variables], dtype=bool)
        model.meta["_int_mask"] = mask
    r = np.round(x[mask])
    bad = np.abs(x[mask] - r) > tol
    if bad.any():
        j = int(np.flatnonzero(mask)[np.argmax(bad)])
        raise ModelError(f"variable {model.variables[j].name} not integral: {x[j]}")
    x[mask] = r
    return x
