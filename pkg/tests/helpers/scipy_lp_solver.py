"""Stand-alone LP-file solver used as the external oracle in tests.

Reads a CPLEX-style LP file with its own parser (nothing from ttpoly is
imported), solves it with scipy's HiGHS and writes a HiGHS-like solution
file::

    python scipy_lp_solver.py model.lp model.sol
"""

from __future__ import annotations

import re
import sys

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

SECTIONS = {
    "minimize": "obj", "minimum": "obj", "min": "obj", "maximize": "max", "maximum": "max", "max": "max",
    "subject to": "rows", "such that": "rows", "st": "rows", "s.t.": "rows",
    "bounds": "bounds", "binaries": "int", "binary": "int", "generals": "int", "general": "int", "end": "end",
}
TERM = re.compile(r"([+-])?\s*(\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)?\s*([A-Za-z_][\w.()\[\],]*)")


def parse_expr(text: str) -> dict[str, float]:
    out: dict[str, float] = {}
    text = text.strip()
    pos = 0
    while pos < len(text):
        m = TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse expression near {text[pos:pos + 30]!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        out[m.group(3)] = out.get(m.group(3), 0.0) + sign * coef
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return out


def read_lp(path: str):
    blocks: dict[str, list[str]] = {"obj": [], "max": [], "rows": [], "bounds": [], "int": []}
    cur = None
    for raw in open(path):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = SECTIONS.get(line.lower())
        if key:
            cur = key
            if key == "end":
                break
            continue
        if cur is None:
            raise ValueError(f"text before the first section: {line!r}")
        blocks[cur].append(line)

    def statements(lines: list[str]) -> list[str]:
        # a new statement starts with "name:"; other lines continue the previous one
        out: list[str] = []
        for ln in lines:
            if re.match(r"^[\w.()\[\],]+\s*:", ln) or not out:
                out.append(ln)
            else:
                out[-1] += " " + ln
        return out

    maximize = bool(blocks["max"])
    obj_lines = blocks["max"] or blocks["obj"]
    obj_text = " ".join(obj_lines)
    obj_text = obj_text.split(":", 1)[1] if ":" in obj_text else obj_text
    obj = parse_expr(obj_text)
    rows = []
    for st in statements(blocks["rows"]):
        name, body = st.split(":", 1)
        m = re.match(r"^(.*?)(<=|>=|=<|=>|=|<|>)\s*([-+]?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)\s*$", body.strip())
        if not m:
            raise ValueError(f"cannot parse row {st!r}")
        sense = {"=<": "<=", "<": "<=", "=>": ">=", ">": ">="}.get(m.group(2), m.group(2))
        rows.append((name.strip(), parse_expr(m.group(1)), sense, float(m.group(3))))
    bounds = {}
    for b in blocks["bounds"]:
        m = re.match(r"^([-+\d.eE]+)\s*<=\s*(\S+)\s*<=\s*([-+\d.eE]+)$", b)
        if not m:
            raise ValueError(f"unsupported bound {b!r}")
        bounds[m.group(2)] = (float(m.group(1)), float(m.group(3)))
    names: list[str] = []
    seen = set()
    for expr in [obj] + [r[1] for r in rows]:
        for v in expr:
            if v not in seen:
                seen.add(v)
                names.append(v)
    for v in bounds:
        if v not in seen:
            seen.add(v)
            names.append(v)
    return maximize, obj, rows, bounds, names


def solve(path: str):
    maximize, obj, rows, bounds, names = read_lp(path)
    idx = {v: i for i, v in enumerate(names)}
    c = np.zeros(len(names))
    for v, a in obj.items():
        c[idx[v]] = -a if maximize else a
    ub_r, ub_c, ub_v, ub_b = [], [], [], []
    eq_r, eq_c, eq_v, eq_b = [], [], [], []
    for name, expr, sense, rhs in rows:
        if sense == "=":
            r = len(eq_b)
            eq_b.append(rhs)
            for v, a in expr.items():
                eq_r.append(r); eq_c.append(idx[v]); eq_v.append(a)
        else:
            s = 1.0 if sense == "<=" else -1.0
            r = len(ub_b)
            ub_b.append(s * rhs)
            for v, a in expr.items():
                ub_r.append(r); ub_c.append(idx[v]); ub_v.append(s * a)
    A_ub = csr_matrix((ub_v, (ub_r, ub_c)), shape=(len(ub_b), len(names))) if ub_b else None
    A_eq = csr_matrix((eq_v, (eq_r, eq_c)), shape=(len(eq_b), len(names))) if eq_b else None
    bnds = [bounds.get(v, (0.0, None)) for v in names]
    res = linprog(c, A_ub=A_ub, b_ub=ub_b or None, A_eq=A_eq, b_eq=eq_b or None, bounds=bnds, method="highs")
    return res, names, maximize


def main(argv: list[str]) -> int:
    if len(argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    res, names, maximize = solve(argv[1])
    status = {0: "Optimal", 2: "Infeasible", 3: "Unbounded"}.get(res.status, "Error")
    lines = ["Model status", status, ""]
    if res.status == 0:
        value = -res.fun if maximize else res.fun
        lines += ["# Primal solution values", f"Objective {float(value)!r}", f"# Columns {len(names)}"]
        lines += [f"{v} {float(x)!r}" for v, x in zip(names, res.x)]
    with open(argv[2], "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0 if status != "Error" else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv))
