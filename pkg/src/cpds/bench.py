"""Benchmark harness: sweep instances, capacities and models into a CSV file.

A run configuration is a small TOML file::

    instances = ["grids/g1.txt", "grids/g2.txt"]
    models = ["EFPS-IP-OutP-Init", "BRI-IP"]
    k = "auto"            # or 2, or [0, 1, 2]
    time_limit = 60
    runs = 5
    seed = 0
    output = "results.csv"

Relative paths are resolved against the configuration file.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import sys
import traceback
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Callable, Iterable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from cpds.formulations import Formulation, Options, model_label
from cpds.instance import Instance, read_instance
from cpds.milp import Limits
from cpds.oracle import DEFAULT_MAX_N, brute_force_cpds
from cpds.oracle import k_star as k_star_search
from cpds.solver import SolveReport, solve_cpds

log = logging.getLogger(__name__)

CSV_FIELDS = [
    "instance", "n", "m", "k", "model", "options", "run", "seed", "status",
    "objective", "bound", "gap", "time_s", "sep_time_s", "lazy_rows",
    "init_rows", "vars", "verified",
]
NA = "NA"
DEFAULT_TIME_LIMIT = 900.0
KSTAR_MODEL = (Formulation.EFPS, Options(inp=False, outp=True, init2=True))


class ConfigError(ValueError):
    pass


def parse_model_spec(text: str) -> tuple[Formulation, Options]:
    """``"EFPS-IP-OutP-Init"`` -> (EFPS, Options(outp=True, init2=True))."""
    t = text.strip()
    for kind in sorted(Formulation, key=lambda f: -len(f.value)):
        if t.upper().startswith(kind.value):
            rest = t[len(kind.value):]
            opts = Options.parse(rest)
            if opts != Options() and kind not in (Formulation.FPS, Formulation.EFPS):
                raise ConfigError(f"{kind.value} takes no options: {text!r}")
            return kind, opts
    raise ConfigError(f"unknown model {text!r}")


@dataclass
class RunConfig:
    instances: list[Path] = field(default_factory=list)
    models: list[tuple[Formulation, Options]] = field(default_factory=list)
    k: str | int | list[int] = "auto"
    time_limit: float = DEFAULT_TIME_LIMIT
    runs: int = 1
    seed: int = 0
    output: Path = Path("results.csv")
    summary: Path | None = None
    backend: str = "scip"
    workers: int = 1
    oracle_max_n: int = DEFAULT_MAX_N

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if not self.time_limit or self.time_limit <= 0:
            raise ConfigError("time_limit must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if isinstance(self.k, str) and self.k != "auto":
            raise ConfigError(f"k must be an integer, a list or 'auto', got {self.k!r}")

    @classmethod
    def from_dict(cls, data: dict, base: Path = Path(".")) -> "RunConfig":
        known = {"instances", "models", "k", "time_limit", "runs", "seed", "output", "summary",
                 "backend", "workers", "oracle_max_n"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}")
        models = data.get("models", ["EFPS-IP-OutP-Init"])
        if isinstance(models, str):
            models = [models]
        k = data.get("k", "auto")
        if isinstance(k, list) and not all(isinstance(v, int) and v >= 0 for v in k):
            raise ConfigError("k list must hold non-negative integers")
        if isinstance(k, int) and k < 0:
            raise ConfigError("k must be non-negative")

        def resolve(p):
            p = Path(p)
            return p if p.is_absolute() else base / p

        return cls(
            instances=[resolve(p) for p in data.get("instances", [])],
            models=[parse_model_spec(m) for m in models],
            k=k,
            time_limit=float(data.get("time_limit", DEFAULT_TIME_LIMIT)),
            runs=int(data.get("runs", 1)),
            seed=int(data.get("seed", 0)),
            output=resolve(data.get("output", "results.csv")),
            summary=resolve(data["summary"]) if "summary" in data else None,
            backend=str(data.get("backend", "scip")),
            workers=int(data.get("workers", 1)),
            oracle_max_n=int(data.get("oracle_max_n", DEFAULT_MAX_N)),
        )

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(data, path.parent)

    @property
    def summary_path(self) -> Path:
        return self.summary or self.output.with_suffix(".summary.txt")


# --------------------------------------------------------------------------
# k* cache


def _kstar_cache_path(path: Path) -> Path:
    return path.with_name(path.name + ".kstar.json")


def cached_k_star(inst: Instance, path: Path | None = None, backend: str = "scip",
                  time_limit: float | None = None) -> int:
    """k* from the cache file next to ``path``, computing and storing it if needed."""
    digest = None
    if path is not None:
        digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        cache = _kstar_cache_path(Path(path))
        if cache.exists():
            try:
                data = json.loads(cache.read_text())
                if data.get("sha256") == digest:
                    return int(data["k_star"])
            except (ValueError, KeyError):
                log.warning("ignoring unreadable k* cache %s", cache)

    kind, opts = KSTAR_MODEL

    def optimum(i: Instance) -> int:
        rep = solve_cpds(i, kind, opts, Limits(time_limit), backend=backend)
        if rep.status != "optimal":
            raise RuntimeError(f"k* search: {i.name} k={i.capacity} not solved to optimality")
        return rep.objective

    value = k_star_search(inst, optimum)
    if path is not None:
        try:
            _kstar_cache_path(Path(path)).write_text(json.dumps({"sha256": digest, "k_star": value}) + "\n")
        except OSError as exc:
            log.warning("could not write k* cache: %s", exc)
    return value


def k_values(cfg: RunConfig, inst: Instance, path: Path | None) -> list[int]:
    if cfg.k == "auto":
        return list(range(cached_k_star(inst, path, cfg.backend, cfg.time_limit) + 1))
    if isinstance(cfg.k, int):
        return [cfg.k]
    return sorted(set(cfg.k))


# --------------------------------------------------------------------------
# rows


def _fmt(v) -> str:
    if v is None:
        return NA
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def report_row(rep: SolveReport, run: int, seed: int) -> dict[str, str]:
    vals = {
        "instance": rep.instance, "n": rep.n, "m": rep.m, "k": rep.k, "model": rep.model,
        "options": rep.options or "none", "run": run, "seed": seed, "status": rep.status,
        "objective": rep.objective, "bound": None if rep.bound is None else float(rep.bound),
        "gap": rep.gap, "time_s": rep.time_s, "sep_time_s": rep.sep_time_s,
        "lazy_rows": rep.lazy_rows, "init_rows": rep.init_rows, "vars": rep.vars,
        "verified": rep.verified,
    }
    return {k: _fmt(vals[k]) for k in CSV_FIELDS}


def error_row(inst: Instance, k: int, kind: Formulation, opts: Options, run: int, seed: int) -> dict[str, str]:
    vals = dict.fromkeys(CSV_FIELDS, NA)
    vals.update(instance=inst.name, n=str(inst.n), m=str(inst.m), k=str(k), model=model_label(kind, opts),
                options=opts.label() or "none", run=str(run), seed=str(seed), status="error",
                verified="false")
    return vals


_INT_FIELDS = {"n", "m", "k", "run", "seed", "objective", "lazy_rows", "init_rows", "vars"}
_FLOAT_FIELDS = {"bound", "gap", "time_s", "sep_time_s"}


def parse_row(row: dict[str, str]) -> dict:
    out: dict = {}
    for key in CSV_FIELDS:
        raw = row[key]
        if raw == "":
            raise ValueError(f"blank field {key!r}")
        if raw == NA:
            out[key] = None
        elif key in _INT_FIELDS:
            out[key] = int(raw)
        elif key in _FLOAT_FIELDS:
            out[key] = float(raw)
        elif key == "verified":
            out[key] = raw == "true"
        else:
            out[key] = raw
    return out


def read_results(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [parse_row(r) for r in reader]


# --------------------------------------------------------------------------
# summary


@dataclass
class ModelSummary:
    model: str
    runs: int
    optimal_pct: float
    mean_time: float
    mean_sep_time: float
    mean_gap: float


def summarize(rows: Iterable[dict]) -> list[ModelSummary]:
    """Per-model averages over parsed rows; missing gaps count as 1."""
    groups: dict[str, list[dict]] = defaultdict(list)
    for r in rows:
        groups[r["model"]].append(r)
    out = []
    for model, rs in groups.items():
        out.append(ModelSummary(
            model=model,
            runs=len(rs),
            optimal_pct=100.0 * sum(r["status"] == "optimal" for r in rs) / len(rs),
            mean_time=fmean(r["time_s"] if r["time_s"] is not None else 0.0 for r in rs),
            mean_sep_time=fmean(r["sep_time_s"] if r["sep_time_s"] is not None else 0.0 for r in rs),
            mean_gap=fmean(r["gap"] if r["gap"] is not None else 1.0 for r in rs),
        ))
    return out


def format_summary(summaries: list[ModelSummary]) -> str:
    lines = [f"{'model':<24} {'runs':>5} {'opt%':>7} {'time_s':>10} {'sep_s':>10} {'gap':>8}"]
    for s in summaries:
        lines.append(f"{s.model:<24} {s.runs:>5d} {s.optimal_pct:>7.1f} {s.mean_time:>10.3f} "
                     f"{s.mean_sep_time:>10.3f} {s.mean_gap:>8.4f}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# running


@dataclass(frozen=True)
class Cell:
    inst: Instance
    k: int
    kind: Formulation
    options: Options
    run: int
    seed: int
    time_limit: float
    backend: str


def run_cell(cell: Cell) -> dict[str, str]:
    inst = cell.inst.with_capacity(cell.k)
    try:
        rep = solve_cpds(inst, cell.kind, cell.options, Limits(cell.time_limit, seed=cell.seed),
                         backend=cell.backend, seed=cell.seed)
        return report_row(rep, cell.run, cell.seed)
    except Exception:  # recorded and the sweep continues
        log.error("cell %s k=%d %s run %d failed:\n%s", inst.name, cell.k,
                  model_label(cell.kind, cell.options), cell.run, traceback.format_exc())
        return error_row(inst, cell.k, cell.kind, cell.options, cell.run, cell.seed)


def load_instances(cfg: RunConfig) -> list[tuple[Path, Instance]]:
    return [(p, read_instance(p)) for p in cfg.instances]


def plan(cfg: RunConfig, instances=None) -> list[Cell]:
    instances = load_instances(cfg) if instances is None else instances
    cells = []
    for path, inst in instances:
        for k in k_values(cfg, inst, path):
            for kind, opts in cfg.models:
                for run in range(cfg.runs):
                    cells.append(Cell(inst, k, kind, opts, run, cfg.seed + run, cfg.time_limit, cfg.backend))
    return cells


def run_benchmark(cfg: RunConfig, out=None) -> list[dict[str, str]]:
    """Run every (instance, k, model, run) cell and write the CSV and summary.

    Rows are written by this process only, in plan order, whatever the
    number of workers.
    """
    cells = plan(cfg)
    cfg.output.parent.mkdir(parents=True, exist_ok=True)
    rows: list[dict[str, str]] = []
    with open(cfg.output, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        fh.flush()
        if cfg.workers > 1 and len(cells) > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                results = pool.map(run_cell, cells)
                for row in results:
                    writer.writerow(row)
                    fh.flush()
                    rows.append(row)
        else:
            for cell in cells:
                row = run_cell(cell)
                writer.writerow(row)
                fh.flush()
                rows.append(row)
    text = format_summary(summarize(parse_row(r) for r in rows))
    cfg.summary_path.write_text(text)
    (out or sys.stdout).write(text)
    return rows


# --------------------------------------------------------------------------
# cross-check against the oracle


@dataclass
class Disagreement:
    instance: str
    k: int
    values: dict[str, int | None]

    def __str__(self):
        vals = ", ".join(f"{m}={v}" for m, v in self.values.items())
        return f"{self.instance} k={self.k}: {vals}"


@dataclass
class CrossCheckReport:
    checked: int = 0
    oracle_checked: int = 0
    disagreements: list[Disagreement] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements


SolveFn = Callable[..., SolveReport]


def cross_check(cfg: RunConfig, instances=None, solve_fn: SolveFn | None = None) -> CrossCheckReport:
    """Solve every (instance, k) with every model and compare with the oracle when small enough."""
    solve_fn = solve_fn or solve_cpds
    instances = load_instances(cfg) if instances is None else instances
    report = CrossCheckReport()
    for path, inst in instances:
        for k in k_values(cfg, inst, path):
            ik = inst.with_capacity(k)
            values: dict[str, int | None] = {}
            if ik.n <= cfg.oracle_max_n:
                values["oracle"] = brute_force_cpds(ik, cfg.oracle_max_n).optimum
                report.oracle_checked += 1
            for kind, opts in cfg.models:
                rep = solve_fn(ik, kind, opts, Limits(cfg.time_limit, seed=cfg.seed), backend=cfg.backend,
                               seed=cfg.seed)
                values[model_label(kind, opts)] = rep.objective if rep.status == "optimal" else None
            report.checked += 1
            solved = {v for v in values.values() if v is not None}
            if len(solved) > 1:
                report.disagreements.append(Disagreement(inst.name, k, values))
    return report


def rows_to_csv(rows: list[dict[str, str]]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS)
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
