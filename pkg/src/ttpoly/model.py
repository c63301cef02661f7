"""Cubic IP model of the unconstrained TTP with variants and strengthening cuts.

Rows are stored exactly (``Fraction`` coefficients keyed by variable index in
the global :class:`~ttpoly.schedule.Layout`). Tags follow ``family[a,b,...]``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .schedule import Instance, Layout, layout

SENSES = ("<=", "=", ">=")

# row families reported together in size and LP-bound summaries
LIFTED_FAMILIES = ("lifted_away_away_a", "lifted_away_away_b", "lifted_home_away", "lifted_away_home")
UNLIFTED_FAMILIES = ("travel_away_away", "travel_home_away", "travel_away_home")
HOME_FLOW_FAMILIES = ("home_flow_out_home", "home_flow_out_away", "home_flow_in_home", "home_flow_in_away")


@dataclass(frozen=True)
class Constraint:
    terms: dict[int, Fraction]
    sense: str
    rhs: Fraction
    tag: str

    @property
    def family(self) -> str:
        return self.tag.split("[", 1)[0]

    def activity(self, point) -> Fraction:
        """Exact left-hand side at ``point`` (integer, rational or float entries)."""
        return sum((c * Fraction(point[v]) for v, c in self.terms.items()), Fraction(0))

    def satisfied(self, point) -> bool:
        lhs = self.activity(point)
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs

    def tight(self, point) -> bool:
        return self.activity(point) == self.rhs


def _row(terms: Iterable[tuple[int, int]], sense: str, rhs, tag: str) -> Constraint:
    acc: dict[int, Fraction] = {}
    for v, c in terms:
        acc[v] = acc.get(v, Fraction(0)) + Fraction(c)
    return Constraint({v: c for v, c in sorted(acc.items()) if c != 0}, sense, Fraction(rhs), tag)


@dataclass(frozen=True)
class BuildOptions:
    mirrored: bool = False
    no_repeaters: bool = False
    U: int | None = None
    lifted_away_away: bool = False
    lifted_home_travel: bool = False
    flow: bool = False
    flow_own_venue: bool = False
    home_flow: bool = False
    flow_equations: bool = False
    hsrt_flow: bool = False
    keep_unlifted: bool = False


@dataclass(frozen=True)
class Model:
    n: int
    name: str
    objective: dict[int, Fraction]
    constraints: tuple[Constraint, ...] = ()
    integral: bool = True
    layout: Layout = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "layout", layout(self.n))

    @property
    def num_vars(self) -> int:
        return self.layout.size

    @property
    def var_names(self) -> list[str]:
        return [self.layout.name(v) for v in range(self.num_vars)]

    @property
    def nonzeros(self) -> int:
        return sum(len(c.terms) for c in self.constraints)

    def family_counts(self) -> Counter:
        return Counter(c.family for c in self.constraints)

    def count(self, *families: str) -> int:
        counts = self.family_counts()
        return sum(counts[f] for f in families)

    def with_rows(self, rows: Iterable[Constraint]) -> "Model":
        return replace(self, constraints=self.constraints + tuple(rows))

    def without(self, *families: str) -> "Model":
        return replace(self, constraints=tuple(c for c in self.constraints if c.family not in families))

    def objective_value(self, point) -> Fraction:
        return sum((c * Fraction(point[v]) for v, c in self.objective.items()), Fraction(0))

    def violated(self, point) -> list[Constraint]:
        return [c for c in self.constraints if not c.satisfied(point)]


def relax(model: Model) -> Model:
    return replace(model, integral=False)


# --- base formulation -------------------------------------------------------

def _objective(inst: Instance) -> dict[int, Fraction]:
    lay = layout(inst.n)
    obj = {}
    for t in range(1, inst.n + 1):
        for (i, j) in lay.arcs:
            if inst.dist(i, j) != 0:
                obj[lay.y(t, i, j)] = inst.dist(i, j)
    return obj


def _others(n: int, *exclude: int) -> list[int]:
    return [v for v in range(1, n + 1) if v not in exclude]


def team_plays_rows(n: int, slots: Iterable[int] | None = None) -> list[Constraint]:
    lay = layout(n)
    slots = range(2, 2 * n - 1) if slots is None else slots
    return [
        _row([(lay.x(k, i, j), 1) for j in _others(n, i)] + [(lay.x(k, j, i), 1) for j in _others(n, i)],
             "=", 1, f"team_plays[{k},{i}]")
        for k in slots for i in range(1, n + 1)
    ]


def pair_plays_rows(n: int) -> list[Constraint]:
    lay = layout(n)
    return [_row([(lay.x(k, i, j), 1) for k in range(1, 2 * n - 1)], "=", 1, f"pair_plays[{i},{j}]")
            for (i, j) in lay.arcs]


def travel_away_away_rows(n: int) -> list[Constraint]:
    lay = layout(n)
    return [
        _row([(lay.x(k, i, t), 1), (lay.x(k + 1, j, t), 1), (lay.y(t, i, j), -1)], "<=", 1,
             f"travel_away_away[{k},{i},{j},{t}]")
        for k in range(1, 2 * n - 2) for (i, j) in lay.arcs for t in _others(n, i, j)
    ]


def travel_home_away_rows(n: int) -> list[Constraint]:
    lay = layout(n)
    return [
        _row([(lay.x(k, t, i), 1) for i in _others(n, t)] + [(lay.x(k + 1, j, t), 1), (lay.y(t, t, j), -1)],
             "<=", 1, f"travel_home_away[{k},{t},{j}]")
        for k in range(1, 2 * n - 2) for (t, j) in lay.arcs
    ]


def travel_away_home_rows(n: int) -> list[Constraint]:
    lay = layout(n)
    return [
        _row([(lay.x(k - 1, i, t), 1)] + [(lay.x(k, t, j), 1) for j in _others(n, t)] + [(lay.y(t, i, t), -1)],
             "<=", 1, f"travel_away_home[{k},{i},{t}]")
        for k in range(2, 2 * n - 1) for (i, t) in lay.arcs
    ]


def travel_first_rows(n: int) -> list[Constraint]:
    lay = layout(n)
    return [_row([(lay.x(1, j, t), 1), (lay.y(t, t, j), -1)], "<=", 0, f"travel_first[{t},{j}]")
            for (t, j) in lay.arcs]


def travel_last_rows(n: int) -> list[Constraint]:
    lay = layout(n)
    last = 2 * n - 2
    return [_row([(lay.x(last, i, t), 1), (lay.y(t, i, t), -1)], "<=", 0, f"travel_last[{i},{t}]")
            for (i, t) in lay.arcs]


def base_model(inst: Instance, unlifted: bool = True) -> Model:
    """Formulation with objective, slot/pair equations and travel linking rows."""
    n = inst.n
    rows = team_plays_rows(n) + pair_plays_rows(n)
    if unlifted:
        rows += travel_away_away_rows(n) + travel_home_away_rows(n) + travel_away_home_rows(n)
    rows += travel_first_rows(n) + travel_last_rows(n)
    return Model(n, inst.name, _objective(inst), tuple(rows))


# --- variants ---------------------------------------------------------------

def add_mirrored(model: Model) -> Model:
    n, lay = model.n, model.layout
    rows = []
    for k in range(1, n):
        assert k + n - 1 <= 2 * n - 2
        for (i, j) in lay.arcs:
            rows.append(_row([(lay.x(k, i, j), 1), (lay.x(k + n - 1, j, i), -1)], "=", 0, f"mirror[{k},{i},{j}]"))
    return model.with_rows(rows)


def add_no_repeaters(model: Model) -> Model:
    n, lay = model.n, model.layout
    return model.with_rows(
        _row([(lay.x(k, i, j), 1), (lay.x(k + 1, j, i), 1)], "<=", 1, f"no_repeat[{k},{i},{j}]")
        for k in range(1, 2 * n - 2) for (i, j) in lay.arcs
    )


def add_hsrt(model: Model, U: int) -> Model:
    """Home-stand and road-trip length caps of ``U`` consecutive matches."""
    n, lay = model.n, model.layout
    if not 1 <= U < 2 * n - 2:
        raise ValueError(f"U must lie in 1..{2 * n - 3}, got {U}")
    rows = []
    for k in range(1, 2 * n - 1 - U):
        for t in range(1, n + 1):
            window = range(k, k + U + 1)
            rows.append(_row([(lay.x(s, t, i), 1) for s in window for i in _others(n, t)], "<=", U,
                             f"home_stand[{k},{t}]"))
            rows.append(_row([(lay.x(s, i, t), 1) for s in window for i in _others(n, t)], "<=", U,
                             f"road_trip[{k},{t}]"))
    return model.with_rows(rows)


# --- lifted model inequalities ----------------------------------------------

def add_lifted_away_away(model: Model) -> Model:
    n, lay = model.n, model.layout
    rows = []
    for k in range(1, 2 * n - 2):
        for (i, j) in lay.arcs:
            for t in _others(n, i, j):
                y = (lay.y(t, i, j), -1)
                rows.append(_row([(lay.x(k, j, t), 1), (lay.x(k, i, t), 1), (lay.x(k + 1, j, t), 1), y], "<=", 1,
                                 f"lifted_away_away_a[{k},{i},{j},{t}]"))
                rows.append(_row([(lay.x(k + 1, i, t), 1), (lay.x(k, i, t), 1), (lay.x(k + 1, j, t), 1), y], "<=", 1,
                                 f"lifted_away_away_b[{k},{i},{j},{t}]"))
    return model.with_rows(rows)


def add_lifted_home_away(model: Model) -> Model:
    n, lay = model.n, model.layout
    rows = []
    for k in range(1, 2 * n - 2):
        for (t, j) in lay.arcs:
            terms = [(lay.x(1, j, t), 1), (lay.x(k, j, t), 1), (lay.x(k + 1, j, t), 1), (lay.y(t, t, j), -1)]
            terms += [(lay.x(k, t, i), 1) for i in _others(n, t)]
            rows.append(_row(terms, "<=", 1, f"lifted_home_away[{k},{t},{j}]"))
    return model.with_rows(rows)


def add_lifted_away_home(model: Model) -> Model:
    n, lay = model.n, model.layout
    last = 2 * n - 2
    rows = []
    for k in range(2, 2 * n - 1):
        for (i, t) in lay.arcs:
            terms = [(lay.x(last, i, t), 1), (lay.x(k, i, t), 1), (lay.x(k - 1, i, t), 1), (lay.y(t, i, t), -1)]
            terms += [(lay.x(k, t, j), 1) for j in _others(n, t)]
            rows.append(_row(terms, "<=", 1, f"lifted_away_home[{k},{i},{t}]"))
    return model.with_rows(rows)


# --- flow families ----------------------------------------------------------

def add_flow(model: Model, include_home_venue: bool = False, distinct: bool = True) -> Model:
    n, lay = model.n, model.layout
    rows = []
    for t in range(1, n + 1):
        for i in range(1, n + 1):
            if i == t and not include_home_venue or i != t and not distinct:
                continue
            suffix = "_own" if i == t else ""
            rows.append(_row([(lay.y(t, i, j), 1) for j in _others(n, i)], ">=", 1, f"flow_out{suffix}[{t},{i}]"))
            rows.append(_row([(lay.y(t, j, i), 1) for j in _others(n, i)], ">=", 1, f"flow_in{suffix}[{t},{i}]"))
    return model.with_rows(rows)


def add_home_flow(model: Model) -> Model:
    n, lay = model.n, model.layout
    rows = []
    for k in range(1, n):
        k2 = k + n - 1
        for t in range(1, n + 1):
            out = [(lay.y(t, t, j), 1) for j in _others(n, t)]
            into = [(lay.y(t, i, t), 1) for i in _others(n, t)]
            home = [(lay.x(s, t, j), 1) for s in (k, k2) for j in _others(n, t)]
            away = [(lay.x(s, j, t), 1) for s in (k, k2) for j in _others(n, t)]
            rows.append(_row(out + home, ">=", 2, f"home_flow_out_home[{k},{t}]"))
            rows.append(_row(out + away, ">=", 2, f"home_flow_out_away[{k},{t}]"))
            rows.append(_row(into + home, ">=", 2, f"home_flow_in_home[{k},{t}]"))
            rows.append(_row(into + away, ">=", 2, f"home_flow_in_away[{k},{t}]"))
    return model.with_rows(rows)


def add_flow_equations(model: Model) -> Model:
    n, lay = model.n, model.layout
    rows = []
    for t in range(1, n + 1):
        for i in _others(n, t):
            rows.append(_row([(lay.y(t, i, j), 1) for j in _others(n, i)], "=", 1, f"flow_eq_out[{t},{i}]"))
            rows.append(_row([(lay.y(t, j, i), 1) for j in _others(n, i)], "=", 1, f"flow_eq_in[{t},{i}]"))
    return model.with_rows(rows)


def add_hsrt_flow(model: Model, U: int) -> Model:
    n, lay = model.n, model.layout
    if U < 1:
        raise ValueError(f"U must be positive, got {U}")
    need = math.ceil((n - 1) / U)
    rows = []
    for t in range(1, n + 1):
        rows.append(_row([(lay.y(t, t, j), 1) for j in _others(n, t)], ">=", need, f"hsrt_flow_home[{t}]"))
        rows.append(_row([(lay.y(t, i, t), 1) for i in _others(n, t)], ">=", need, f"hsrt_flow_away[{t}]"))
    return model.with_rows(rows)


def build(inst: Instance, opts: BuildOptions = BuildOptions()) -> Model:
    if opts.hsrt_flow and opts.U is None:
        raise ValueError("home-stand/road-trip flow rows need U")
    n = inst.n
    model = base_model(inst, unlifted=False)
    rows = list(model.constraints[: len(team_plays_rows(n)) + len(pair_plays_rows(n))])
    if not opts.lifted_away_away or opts.keep_unlifted:
        rows += travel_away_away_rows(n)
    if not opts.lifted_home_travel or opts.keep_unlifted:
        rows += travel_home_away_rows(n) + travel_away_home_rows(n)
    rows += travel_first_rows(n) + travel_last_rows(n)
    model = replace(model, constraints=tuple(rows))
    if opts.mirrored:
        model = add_mirrored(model)
    if opts.no_repeaters:
        model = add_no_repeaters(model)
    if opts.U is not None:
        model = add_hsrt(model, opts.U)
    if opts.lifted_away_away:
        model = add_lifted_away_away(model)
    if opts.lifted_home_travel:
        model = add_lifted_away_home(add_lifted_home_away(model))
    if opts.flow or opts.flow_own_venue:
        model = add_flow(model, include_home_venue=opts.flow_own_venue, distinct=opts.flow)
    if opts.home_flow:
        model = add_home_flow(model)
    if opts.flow_equations:
        model = add_flow_equations(model)
    if opts.hsrt_flow:
        model = add_hsrt_flow(model, opts.U)
    return model


def size_report(model: Model) -> dict:
    return {
        "variables": model.num_vars,
        "constraints": len(model.constraints),
        "nonzeros": model.nonzeros,
        "families": dict(sorted(model.family_counts().items())),
    }


# --- export -----------------------------------------------------------------

def _num(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else repr(float(v))


def _lp_name(tag: str) -> str:
    return tag.replace("[", "(").replace("]", ")")


def _lp_expr(terms: dict[int, Fraction], names: list[str]) -> str:
    parts = []
    for v, c in terms.items():
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {_num(abs(c))} {names[v]}")
    if not parts:
        return "0 " + names[0]
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def _wrap(text: str, width: int = 100) -> list[str]:
    lines, cur = [], ""
    for tok in text.split(" "):
        if cur and len(cur) + len(tok) + 1 > width:
            lines.append(cur)
            cur = tok
        else:
            cur = f"{cur} {tok}" if cur else tok
    lines.append(cur)
    return [" " + line for line in lines]


def lp_text(model: Model) -> str:
    names = model.var_names
    out = [f"\\ {model.name} n={model.n}", "Minimize"]
    out += _wrap("obj: " + _lp_expr(model.objective, names))
    out.append("Subject To")
    for c in model.constraints:
        out += _wrap(f"{_lp_name(c.tag)}: {_lp_expr(c.terms, names)} {c.sense} {_num(c.rhs)}")
    out.append("Bounds")
    out += [f" 0 <= {name} <= 1" for name in names]
    if model.integral:
        out.append("Binaries")
        out += _wrap(" ".join(names))
    out.append("End")
    return "\n".join(out) + "\n"


def export_lp(model: Model, path: str | Path) -> None:
    Path(path).write_text(lp_text(model))


def mps_text(model: Model) -> str:
    """MPS with MPS field order; names exceed 8 characters, so fields are blank-separated."""
    names = model.var_names
    sense_code = {"<=": "L", ">=": "G", "=": "E"}
    rownames = [_lp_name(c.tag) for c in model.constraints]
    out = [f"NAME          {model.name}", "ROWS", " N  obj"]
    out += [f" {sense_code[c.sense]}  {r}" for c, r in zip(model.constraints, rownames)]
    cols: dict[int, list[tuple[str, Fraction]]] = {v: [] for v in range(model.num_vars)}
    for v, c in model.objective.items():
        cols[v].append(("obj", c))
    for c, r in zip(model.constraints, rownames):
        for v, a in c.terms.items():
            cols[v].append((r, a))
    out.append("COLUMNS")
    if model.integral:
        out.append("    MARKER                 'MARKER'                 'INTORG'")
    for v in range(model.num_vars):
        entries = cols[v] or [("obj", Fraction(0))]
        out += [f"    {names[v]:<8}  {r:<8}  {_num(a)}" for r, a in entries]
    if model.integral:
        out.append("    MARKER                 'MARKER'                 'INTEND'")
    out.append("RHS")
    out += [f"    RHS       {r:<8}  {_num(c.rhs)}" for c, r in zip(model.constraints, rownames) if c.rhs != 0]
    out.append("BOUNDS")
    out += [f" UP BND       {name:<8}  1" for name in names]
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def export_mps(model: Model, path: str | Path) -> None:
    Path(path).write_text(mps_text(model))
