"""CPLEX LP text export for offline inspection."""

from __future__ import annotations

from cpds.milp.model import ModelSpec, Row


def _expr(model: ModelSpec, terms) -> str:
    parts = []
    for j, c in terms:
        name = model.variables[j].name
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        coef = "" if mag == 1 else f"{mag:g} "
        parts.append(f"{sign} {coef}{name}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def _row(model: ModelSpec, r: Row, i: int, prefix: str) -> str:
    name = r.name or f"{prefix}{i}"
    return f" {name}: {_expr(model, r.terms)} {r.sense} {r.rhs:g}"


def to_lp(model: ModelSpec, lazy_rows=()) -> str:
    lines = [f"\\ {model.name}", "Minimize", f" obj: {_expr(model, sorted(model.objective.items()))}"]
    lines.append("Subject To")
    lines.extend(_row(model, r, i, "c") for i, r in enumerate(model.rows))
    if lazy_rows:
        lines.append("Lazy Constraints")
        lines.extend(_row(model, r, i, "lazy") for i, r in enumerate(lazy_rows))
    lines.append("Bounds")
    for v in model.variables:
        if not v.binary:
            lines.append(f" {v.lb:g} <= {v.name} <= {v.ub:g}")
    generals = [v.name for v in model.variables if v.integer and not v.binary]
    binaries = [v.name for v in model.variables if v.binary]
    if generals:
        lines.append("Generals")
        lines.extend(f" {n}" for n in generals)
    if binaries:
        lines.append("Binaries")
        lines.extend(f" {n}" for n in binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"
