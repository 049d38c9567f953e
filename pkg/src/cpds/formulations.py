"""Integer programs for the capacitated power dominating set problem.

Variables shared by the models:

* ``s_v``  -- a device is placed at ``v``;
* ``w_uv`` -- placed ``u`` with ``deg(u) > k`` spends a channel on ``v``;
* ``y_uv`` -- the propagation rule fires at ``u`` towards ``v``;
* ``x_v``  -- time step at which ``v`` becomes monitored (BRI/JOV only).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

from cpds.fps import enumerate_c2, enumerate_f2
from cpds.instance import Instance
from cpds.milp import ModelSpec
from cpds.separation import FortSeparator, FpsSeparator

Pair = tuple[int, int]


class Formulation(str, enum.Enum):
    FPS = "FPS-IP"
    EFPS = "EFPS-IP"
    BRI = "BRI-IP"
    JOV = "JOV-IP"
    FORT = "FORT-IP"

    @classmethod
    def parse(cls, text: str) -> "Formulation":
        t = text.strip().upper()
        for f in cls:
            if t in (f.value, f.name):
                return f
        raise ValueError(f"unknown formulation {text!r}")


@dataclass(frozen=True)
class Options:
    inp: bool = False
    outp: bool = False
    init2: bool = False

    def label(self) -> str:
        parts = [n for n, on in (("InP", self.inp), ("OutP", self.outp), ("Init", self.init2)) if on]
        return "-".join(parts)

    @classmethod
    def parse(cls, text: str) -> "Options":
        flags = {p.strip().lower() for p in re.split(r"[-+,\s]+", text or "") if p.strip()}
        unknown = flags - {"inp", "outp", "init", "init2"}
        if unknown:
            raise ValueError(f"unknown options {sorted(unknown)}")
        return cls("inp" in flags, "outp" in flags, bool(flags & {"init", "init2"}))


def model_label(kind: Formulation, options: Options) -> str:
    if kind in (Formulation.FPS, Formulation.EFPS) and options.label():
        return f"{kind.value}-{options.label()}"
    return kind.value


@dataclass
class VarLayout:
    s: list[int]
    w: dict[Pair, int] = field(default_factory=dict)
    y: dict[Pair, int] = field(default_factory=dict)
    x: list[int] = field(default_factory=list)


_SAFE = re.compile(r"^[A-Za-z0-9.]+$")


def _vertex_names(inst: Instance) -> list[str]:
    labels = [inst.label(v) for v in range(inst.n)]
    if len(set(labels)) == len(labels) and all(_SAFE.match(lab) for lab in labels):
        return labels
    return [f"v{v}" for v in range(inst.n)]


def _base_model(inst: Instance, name: str, with_y: bool = True) -> tuple[ModelSpec, VarLayout]:
    """Variables s, w (and y) plus the objective and the capacity rows."""
    names = _vertex_names(inst)
    model = ModelSpec(name=name)
    idx = inst.propagations
    lay = VarLayout(s=[model.add_var(f"s_{names[v]}") for v in range(inst.n)])
    for u, v in idx.a_d:
        lay.w[(u, v)] = model.add_var(f"w_{names[u]}_{names[v]}")
    if with_y:
        for u, v in idx.a_p:
            lay.y[(u, v)] = model.add_var(f"y_{names[u]}_{names[v]}")
    model.set_objective({j: 1.0 for j in lay.s})
    model.meta["layout"] = lay
    model.meta["names"] = names
    return model, lay


def _coverage_terms(inst: Instance, lay: VarLayout, v: int) -> list[tuple[int, float]]:
    k = inst.capacity
    terms = [(lay.s[v], 1.0)]
    for u in inst.adjacency[v]:
        if inst.degree(u) <= k:
            terms.append((lay.s[u], 1.0))
        else:
            terms.append((lay.w[(u, v)], 1.0))
        if inst.zero_injection[u]:
            terms.append((lay.y[(u, v)], 1.0))
    return terms


def _add_coverage(model: ModelSpec, inst: Instance, lay: VarLayout) -> None:
    names = model.meta["names"]
    for v in range(inst.n):
        model.add_row(_coverage_terms(inst, lay, v), ">=", 1, f"cover_{names[v]}")


def _add_capacity(model: ModelSpec, inst: Instance, lay: VarLayout) -> None:
    names = model.meta["names"]
    k = inst.capacity
    for v in range(inst.n):
        if inst.degree(v) > k:
            terms = [(lay.w[(v, u)], 1.0) for u in inst.adjacency[v]] + [(lay.s[v], -float(k))]
            model.add_row(terms, "<=", 0, f"cap_{names[v]}")


def add_inp_rows(model: ModelSpec, inst: Instance) -> int:
    """At most one incoming propagation per vertex; returns the number of rows added."""
    lay: VarLayout = model.meta["layout"]
    names = model.meta["names"]
    added = 0
    for v in range(inst.n):
        terms = [(lay.y[(u, v)], 1.0) for u in inst.adjacency[v] if inst.zero_injection[u]]
        if terms:
            model.add_row(terms, "<=", 1, f"inp_{names[v]}")
            added += 1
    return added


def add_outp_rows(model: ModelSpec, inst: Instance) -> int:
    """At most one outgoing propagation, none at all from a placed vertex with ``deg <= k``."""
    lay: VarLayout = model.meta["layout"]
    names = model.meta["names"]
    added = 0
    for v in range(inst.n):
        if not inst.zero_injection[v] or inst.degree(v) == 0:
            continue
        terms = [(lay.y[(v, u)], 1.0) for u in inst.adjacency[v]]
        if inst.degree(v) <= inst.capacity:
            terms.append((lay.s[v], 1.0))
        model.add_row(terms, "<=", 1, f"outp_{names[v]}")
        added += 1
    return added


def _fps_family(inst: Instance, options: Options, name: str, efps: bool, seed: int) -> ModelSpec:
    model, lay = _base_model(inst, name)
    _add_coverage(model, inst, lay)
    _add_capacity(model, inst, lay)
    if options.inp:
        add_inp_rows(model, inst)
    if options.outp:
        add_outp_rows(model, inst)
    if options.init2:
        if efps:
            for i, ef in enumerate(enumerate_c2(inst)):
                terms = [(lay.y[p], 1.0) for p in sorted(ef.propagations)]
                model.add_row(terms, "<=", ef.bound, f"efps2_{i}")
        else:
            for i, f in enumerate(enumerate_f2(inst)):
                terms = [(lay.y[p], 1.0) for p in sorted(f.propagations)]
                model.add_row(terms, "<=", f.rhs, f"fps2_{i}")
    model.lazy = FpsSeparator(inst, lay, mode="efps" if efps else "fps", seed=seed)
    model.meta["initial_rows"] = len(model.rows)
    return model


def build_fps_ip(inst: Instance, options: Options = Options(), seed: int = 0) -> ModelSpec:
    return _fps_family(inst, options, model_label(Formulation.FPS, options), efps=False, seed=seed)


def build_efps_ip(inst: Instance, options: Options = Options(), seed: int = 0) -> ModelSpec:
    return _fps_family(inst, options, model_label(Formulation.EFPS, options), efps=True, seed=seed)


def build_bri_ip(inst: Instance) -> ModelSpec:
    """Time-indexed model with big-M precedence rows ``x_w - x_v + (T+1) y_uv <= T``."""
    model, lay = _base_model(inst, Formulation.BRI.value)
    names = model.meta["names"]
    t = inst.n
    lay.x = [model.add_var(f"x_{names[v]}", 0, t) for v in range(inst.n)]
    _add_coverage(model, inst, lay)
    _add_capacity(model, inst, lay)
    for (u, v), yj in lay.y.items():
        for w in (u, *inst.adjacency[u]):
            if w == v:
                continue
            model.add_row(
                [(lay.x[w], 1.0), (lay.x[v], -1.0), (yj, float(t + 1))],
                "<=",
                t,
                f"prec_{names[u]}_{names[v]}_{names[w]}",
            )
    model.meta["initial_rows"] = len(model.rows)
    return model


def build_jov_ip(inst: Instance) -> ModelSpec:
    model, lay = _base_model(inst, Formulation.JOV.value)
    names = model.meta["names"]
    n, k = inst.n, inst.capacity
    big_m = n
    lay.x = [model.add_var(f"x_{names[v]}", 1, max(n, 1)) for v in range(n)]
    for v in range(n):
        # x_v <= s_v + M(1 - s_v)
        model.add_row([(lay.x[v], 1.0), (lay.s[v], big_m - 1.0)], "<=", big_m, f"dr_self_{names[v]}")
    for v in range(n):
        for u in inst.adjacency[v]:
            if inst.degree(u) <= k:
                model.add_row(
                    [(lay.x[v], 1.0), (lay.s[u], big_m - 1.0)], "<=", big_m, f"dr_nb_{names[v]}_{names[u]}"
                )
    for v in range(n):
        if inst.zero_injection[v] and inst.degree(v) > 0:
            model.add_row([(lay.y[(v, u)], 1.0) for u in inst.adjacency[v]], "<=", 1, f"out_{names[v]}")
    for v in range(n):
        terms = [(lay.y[(u, v)], 1.0) for u in inst.adjacency[v] if inst.zero_injection[u]]
        if terms:
            model.add_row(terms, "<=", 1, f"in_{names[v]}")
    for u, v in inst.edges():
        if inst.zero_injection[u] and inst.zero_injection[v]:
            model.add_row([(lay.y[(u, v)], 1.0), (lay.y[(v, u)], 1.0)], "<=", 1, f"opp_{names[u]}_{names[v]}")
    for (u, v), yj in lay.y.items():
        for w in (u, *inst.adjacency[u]):
            if w == v:
                continue
            # x_v >= x_w + 1 - M(1 - y_uv)
            model.add_row(
                [(lay.x[w], 1.0), (lay.x[v], -1.0), (yj, float(big_m))],
                "<=",
                big_m - 1,
                f"prec_{names[u]}_{names[v]}_{names[w]}",
            )
    for (u, v), wj in lay.w.items():
        model.add_row([(lay.x[v], 1.0), (wj, big_m - 1.0)], "<=", big_m, f"dr_ch_{names[u]}_{names[v]}")
    for v in range(n):
        cover = _coverage_terms(inst, lay, v)
        model.add_row([(lay.x[v], 1.0)] + [(j, -float(big_m)) for j, _ in cover], "<=", 0, f"cover_{names[v]}")
    _add_capacity(model, inst, lay)
    model.meta["initial_rows"] = len(model.rows)
    return model


def build_fort_ip(inst: Instance) -> ModelSpec:
    model, lay = _base_model(inst, Formulation.FORT.value, with_y=False)
    _add_capacity(model, inst, lay)
    model.lazy = FortSeparator(inst, lay)
    model.meta["initial_rows"] = len(model.rows)
    return model


def build(inst: Instance, kind: Formulation | str, options: Options = Options(), seed: int = 0) -> ModelSpec:
    kind = Formulation.parse(kind) if isinstance(kind, str) else kind
    if kind is Formulation.FPS:
        return build_fps_ip(inst, options, seed)
    if kind is Formulation.EFPS:
        return build_efps_ip(inst, options, seed)
    if kind is Formulation.BRI:
        return build_bri_ip(inst)
    if kind is Formulation.JOV:
        return build_jov_ip(inst)
    return build_fort_ip(inst)
