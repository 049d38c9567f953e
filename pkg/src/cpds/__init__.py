"""Exact solvers for the capacitated power dominating set problem.

The package is organised bottom-up:

* :mod:`cpds.instance` -- graphs, zero-injection sets, file formats.
* :mod:`cpds.propagation` -- monitored sets under the domination and
  propagation rules.
* :mod:`cpds.fps` -- precedence digraphs and forbidden propagation sets.
* :mod:`cpds.forts` -- forts and their capacity-aware hitting rows.
* :mod:`cpds.milp` -- solver-agnostic MILP models and backends.
* :mod:`cpds.formulations` -- the FPS/EFPS/BRI/JOV/FORT integer programs.
* :mod:`cpds.separation` -- lazy-row separation for FPS/EFPS and forts.
* :mod:`cpds.solver` -- decoding, verification and solve reports.
* :mod:`cpds.oracle` -- brute-force reference solvers.
* :mod:`cpds.bench` / :mod:`cpds.cli` -- benchmark harness and CLI.
"""

from cpds.instance import Instance, parse_instance, connected_components
from cpds.propagation import CapFunction, monitored_set, is_power_dominating
from cpds.formulations import Formulation, Options
from cpds.solver import SolveReport, solve_cpds

__all__ = [
    "Instance",
    "parse_instance",
    "connected_components",
    "CapFunction",
    "monitored_set",
    "is_power_dominating",
    "Formulation",
    "Options",
    "SolveReport",
    "solve_cpds",
]

__version__ = "0.1.0"
