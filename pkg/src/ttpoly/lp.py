"""LP relaxation solvers.

Both in-repo kernels share one standard form: the structural columns keep
their bounds ``0 <= x <= u``; inequality rows get a slack column; rows whose
right-hand side the slack cannot absorb get an artificial column. Every row is
scaled so its initial basic column has coefficient +1 and its rhs is >= 0,
which makes the starting basis the identity.

* float mode: dense bounded-variable two-phase tableau simplex, Dantzig
  pricing with a switch to Bland's rule after a run of degenerate pivots.
* exact mode: revised bounded simplex in rationals with Bland's rule. By
  default it starts from the optimal basis of a float solve and re-verifies
  it exactly; ``Exact(start="cold")`` runs both phases from scratch.
* external: exports an LP file and shells out to a user-supplied command.
"""

from __future__ import annotations

import enum
import os
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .exact import ExactGrowthError, SingularMatrixError, SparseLU
from .model import Model, export_lp, relax


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"
    SKIPPED = "Skipped"

    def __str__(self) -> str:
        return self.value


class ExternalSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Float:
    tol: float = 1e-7
    max_iter: int = 200_000
    bland_after: int = 50
    refactor_every: int = 2000


@dataclass(frozen=True)
class Exact:
    start: str = "crossover"  # or "cold"
    max_iter: int = 100_000
    max_bits: int = 4096


@dataclass
class LpResult:
    status: Status
    objective: Fraction | float | None = None
    primal: list | None = None
    iterations: int = 0
    basis: tuple[int, ...] | None = None
    at_upper: tuple[int, ...] = ()
    infeasibility: Fraction | float | None = None  # phase-1 optimum when Infeasible
    ray: dict[int, Fraction | float] | None = None  # structural direction when Unbounded
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class LinearProgram:
    """``min c.x  s.t.  rows,  0 <= x <= upper`` (``None`` means no upper bound)."""

    objective: list[Fraction]
    rows: list[tuple[dict[int, Fraction], str, Fraction]]
    upper: list[Fraction | None]
    names: list[str] = field(default_factory=list)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    @classmethod
    def from_model(cls, model: Model) -> "LinearProgram":
        c = [Fraction(0)] * model.num_vars
        for v, a in model.objective.items():
            c[v] = Fraction(a)
        rows = [(dict(con.terms), con.sense, Fraction(con.rhs)) for con in model.constraints]
        return cls(c, rows, [Fraction(1)] * model.num_vars, model.var_names)


@dataclass
class StandardForm:
    m: int
    num_structural: int
    columns: list[dict[int, Fraction]]
    upper: list[Fraction | None]
    cost: list[Fraction]
    rhs: list[Fraction]
    basis: list[int]  # initial basic column per row
    artificial: range

    @property
    def num_cols(self) -> int:
        return len(self.columns)


def standard_form(lp: LinearProgram) -> StandardForm:
    nv = lp.num_vars
    m = len(lp.rows)
    columns: list[dict[int, Fraction]] = [{} for _ in range(nv)]
    upper: list[Fraction | None] = list(lp.upper)
    cost = list(lp.objective)
    rhs: list[Fraction] = []
    basis: list[int] = [-1] * m
    scale: list[int] = []
    needs_art: list[int] = []
    for r, (terms, sense, b) in enumerate(lp.rows):
        s = 1
        if sense in ("<=", ">="):
            sign = 1 if sense == "<=" else -1
            if sign * b >= 0:
                s = sign
                columns.append({r: Fraction(1)})
                basis[r] = len(columns) - 1
            else:
                s = -1 if b < 0 else 1
                columns.append({r: Fraction(sign * s)})
                needs_art.append(r)
            upper.append(None)
            cost.append(Fraction(0))
        elif sense == "=":
            s = -1 if b < 0 else 1
            needs_art.append(r)
        else:
            raise ValueError(f"unknown sense {sense!r}")
        scale.append(s)
        rhs.append(s * b)
        for v, a in terms.items():
            if a:
                columns[v][r] = s * Fraction(a)
    first_art = len(columns)
    for r in needs_art:
        columns.append({r: Fraction(1)})
        basis[r] = len(columns) - 1
        upper.append(None)
        cost.append(Fraction(0))
    return StandardForm(m, nv, columns, upper, cost, rhs, basis, range(first_art, len(columns)))


# --- float kernel -------------------------------------------------------------

# smallest tableau entry accepted as a pivot
PIVOT_TOL = 1e-7


class _FloatSimplex:
    """Dense bounded-variable tableau. ``beta`` holds the values of the basic variables."""

    def __init__(self, sf: StandardForm, opts: Float):
        self.sf = sf
        self.opts = opts
        m, N = sf.m, sf.num_cols
        A = np.zeros((m, N))
        for j, col in enumerate(sf.columns):
            for r, v in col.items():
                A[r, j] = float(v)
        self.A = A
        self.T = A.copy()
        self.b = np.array([float(v) for v in sf.rhs])
        self.ub = np.array([np.inf if u is None else float(u) for u in sf.upper])
        self.lb = np.zeros(N)
        self.true_lb = self.lb.copy()
        self.true_ub = self.ub.copy()
        self.basis = np.array(sf.basis, dtype=np.int64)
        self.is_basic = np.zeros(N, dtype=bool)
        self.is_basic[self.basis] = True
        self.at_upper = np.zeros(N, dtype=bool)
        self.beta = self.b.copy()
        self.iterations = 0
        self.perturbing = False
        self.shifted = np.zeros(N, dtype=bool)
        self._rng = np.random.default_rng(0)

    def nonbasic_values(self) -> np.ndarray:
        x = np.where(self.at_upper, self.ub, self.lb)
        x[self.basis] = 0.0
        return x

    def values(self) -> np.ndarray:
        x = self.nonbasic_values()
        x[self.basis] = self.beta
        return x

    def reinvert(self) -> None:
        B = self.A[:, self.basis]
        self.T = np.linalg.solve(B, self.A)
        self.T[np.abs(self.T) < 1e-12] = 0.0
        self.beta = np.linalg.solve(B, self.b - self.A @ self.nonbasic_values())

    def fix_bounds(self, cols: np.ndarray, lo: float, hi: float) -> None:
        self.lb[cols] = self.true_lb[cols] = lo
        self.ub[cols] = self.true_ub[cols] = hi

    # bound shifting: a variable entering the basis gets its bounds widened by
    # a small random amount, which breaks ties in later ratio tests
    def _shift(self, j: int) -> None:
        if self.perturbing and not self.shifted[j] and self.true_ub[j] > self.true_lb[j]:
            eps = 1e-6 * (1.0 + self._rng.random(2))
            self.lb[j] = self.true_lb[j] - eps[0]
            if np.isfinite(self.ub[j]):
                self.ub[j] = self.true_ub[j] + eps[1]
            self.shifted[j] = True

    def start_perturbation(self) -> None:
        self.perturbing = True
        for j in self.basis:
            self._shift(int(j))

    def end_perturbation(self) -> None:
        self.perturbing = False
        self.lb[:] = self.true_lb
        self.ub[:] = self.true_ub
        self.shifted[:] = False
        self.reinvert()

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        return cost - cost[self.basis] @ self.T

    def _eligible(self, d: np.ndarray) -> np.ndarray:
        tol = self.opts.tol
        room = self.ub - self.lb > tol
        return ~self.is_basic & room & ((~self.at_upper & (d < -tol)) | (self.at_upper & (d > tol)))

    def _enter(self, r: int, q: int, value: float, d: np.ndarray, leave_upper: bool) -> None:
        leave = self.basis[r]
        self.is_basic[leave] = False
        self.at_upper[leave] = leave_upper
        self.at_upper[q] = False
        self.is_basic[q] = True
        self.basis[r] = q
        self.beta[r] = value
        kernels.pivot(self.T, d, r, q)
        self._shift(q)

    def run(self, cost: np.ndarray) -> Status:
        """Primal simplex from a primal feasible basis."""
        o = self.opts
        d = self.reduced_costs(cost)
        degenerate = 0
        since_refactor = 0
        while True:
            if self.iterations >= o.max_iter:
                return Status.ITERATION_LIMIT
            if since_refactor >= o.refactor_every:
                self.reinvert()
                d = self.reduced_costs(cost)
                since_refactor = 0
            elig = self._eligible(d)
            if not elig.any():
                return Status.OPTIMAL
            bland = degenerate > o.bland_after
            if bland:
                q = int(np.flatnonzero(elig)[0])
            else:
                q = int(np.argmax(np.where(elig, np.abs(d), -1.0)))
            delta = -1.0 if self.at_upper[q] else 1.0
            alpha = self.T[:, q] * delta
            lbB = self.lb[self.basis]
            ubB = self.ub[self.basis]
            ratios = np.full(self.sf.m, np.inf)
            relaxed = np.full(self.sf.m, np.inf)
            pos = alpha > PIVOT_TOL
            neg = (alpha < -PIVOT_TOL) & np.isfinite(ubB)
            ratios[pos] = np.maximum(self.beta[pos] - lbB[pos], 0.0) / alpha[pos]
            ratios[neg] = np.maximum(ubB[neg] - self.beta[neg], 0.0) / -alpha[neg]
            relaxed[pos] = (self.beta[pos] - lbB[pos] + o.tol) / alpha[pos]
            relaxed[neg] = (ubB[neg] - self.beta[neg] + o.tol) / -alpha[neg]
            flip = self.ub[q] - self.lb[q]
            if not np.isfinite(relaxed.min()) and not np.isfinite(flip):
                self.unbounded_column = q
                return Status.UNBOUNDED
            # two-pass ratio test: any row blocking within the tolerance band
            # may leave, and the largest pivot among them is taken
            if bland:
                tmin = ratios.min()
                near = np.flatnonzero(ratios <= tmin + 1e-11)
            else:
                near = np.flatnonzero(ratios <= relaxed.min())
                tmin = ratios[near].min() if near.size else np.inf
            if flip <= tmin:
                theta = flip
                self.beta -= theta * alpha
                self.at_upper[q] = not self.at_upper[q]
            else:
                if bland:
                    r = int(near[np.argmin(self.basis[near])])
                else:
                    r = int(near[np.argmax(np.abs(alpha[near]))])
                theta = ratios[r]
                start = self.ub[q] if self.at_upper[q] else self.lb[q]
                self.beta -= theta * alpha
                leave = self.basis[r]
                self._enter(r, q, start + delta * theta, d, alpha[r] < 0 and np.isfinite(self.ub[leave]))
            degenerate = degenerate + 1 if theta <= o.tol else 0
            self.iterations += 1
            since_refactor += 1

    def dual_cleanup(self, cost: np.ndarray) -> Status:
        """Dual simplex from a dual feasible basis until the basic values respect their bounds."""
        o = self.opts
        d = self.reduced_costs(cost)
        while True:
            if self.iterations >= o.max_iter:
                return Status.ITERATION_LIMIT
            lbB = self.lb[self.basis]
            ubB = self.ub[self.basis]
            below = lbB - self.beta
            above = self.beta - ubB
            viol = np.maximum(below, above)
            r = int(np.argmax(viol))
            if viol[r] <= o.tol:
                return Status.OPTIMAL
            row = self.T[r]
            low = below[r] > 0
            # x_B(r) moves by -row[j] * step_j; pick columns pushing it towards its bound
            cand = ~self.is_basic & (self.ub - self.lb > o.tol)
            if low:
                cand &= np.where(self.at_upper, row > PIVOT_TOL, row < -PIVOT_TOL)
            else:
                cand &= np.where(self.at_upper, row < -PIVOT_TOL, row > PIVOT_TOL)
            if not cand.any():
                return Status.INFEASIBLE
            ratio = np.where(cand, np.abs(d) / np.where(cand, np.abs(row), 1.0), np.inf)
            q = int(np.argmin(ratio))
            target = lbB[r] if low else ubB[r]
            step = (self.beta[r] - target) / row[q]
            start = self.ub[q] if self.at_upper[q] else self.lb[q]
            self.beta -= step * self.T[:, q]
            self._enter(r, q, start + step, d, not low)
            self.iterations += 1


def _solve_float(sf: StandardForm, opts: Float) -> tuple[LpResult, _FloatSimplex]:
    S = _FloatSimplex(sf, opts)
    N = sf.num_cols
    arts = np.array(list(sf.artificial), dtype=np.int64)
    if arts.size:
        c1 = np.zeros(N)
        c1[arts] = 1.0
        status = S.run(c1)
        if status is Status.ITERATION_LIMIT:
            return LpResult(status, iterations=S.iterations, message="phase 1"), S
        S.reinvert()
        infeas = float(S.values()[arts].sum())
        if infeas > max(opts.tol, 1e-6):
            return LpResult(Status.INFEASIBLE, iterations=S.iterations, infeasibility=infeas), S
        S.fix_bounds(arts, 0.0, 0.0)
        S.at_upper[arts] = False
    c = np.array([float(v) for v in sf.cost])
    S.start_perturbation()
    status = S.run(c)
    S.end_perturbation()
    for _ in range(5):
        if status is not Status.OPTIMAL:
            break
        status = S.dual_cleanup(c)
        if status is not Status.OPTIMAL:
            break
        status = S.run(c)
        if status is not Status.OPTIMAL:
            break
        # confirm on a freshly inverted basis; resume if drift hid a violation
        S.reinvert()
        lbB, ubB = S.lb[S.basis], S.ub[S.basis]
        feasible = (S.beta >= lbB - opts.tol).all() and (S.beta <= ubB + opts.tol).all()
        if feasible and not S._eligible(S.reduced_costs(c)).any():
            break
    ns = sf.num_structural
    if status is Status.UNBOUNDED:
        q = S.unbounded_column
        delta = -1.0 if S.at_upper[q] else 1.0
        ray = {q: delta} if q < ns else {}
        for r, j in enumerate(S.basis):
            if j < ns and S.T[r, q]:
                ray[int(j)] = -delta * float(S.T[r, q])
        return LpResult(status, iterations=S.iterations, ray=ray), S
    res = LpResult(status, iterations=S.iterations, basis=tuple(int(j) for j in S.basis),
                   at_upper=tuple(int(j) for j in np.flatnonzero(S.at_upper & np.isfinite(S.ub) & (S.ub > 0))))
    if status is Status.OPTIMAL:
        primal = np.clip(S.values()[:ns], S.true_lb[:ns], S.true_ub[:ns])
        res.primal = primal.tolist()
        res.objective = float(c[:ns] @ primal)
    elif status is Status.INFEASIBLE:
        res.infeasibility = float("nan")
    return res, S


# --- exact kernel -------------------------------------------------------------

class _ExactSimplex:
    def __init__(self, sf: StandardForm, opts: Exact):
        self.sf = sf
        self.opts = opts
        self.upper = list(sf.upper)
        self.iterations = 0

    def _factor(self, basis: list[int]) -> SparseLU:
        return SparseLU([self.sf.columns[j] for j in basis], self.sf.m, self.opts.max_bits)

    def primal(self, lu: SparseLU, at_upper: set[int]) -> list[Fraction]:
        rhs = list(self.sf.rhs)
        for j in at_upper:
            u = self.upper[j]
            for r, v in self.sf.columns[j].items():
                rhs[r] -= u * v
        return lu.solve(rhs)

    def run(self, cost: list[Fraction], basis: list[int], at_upper: set[int]) -> Status:
        """Bland's rule: lowest-index entering column, lowest-index leaving variable."""
        sf = self.sf
        N = sf.num_cols
        while True:
            if self.iterations >= self.opts.max_iter:
                return Status.ITERATION_LIMIT
            lu = self._factor(basis)
            xB = self.primal(lu, at_upper)
            y = lu.solve_transpose([cost[j] for j in basis])
            basic = set(basis)
            q = -1
            for j in range(N):
                if j in basic:
                    continue
                up = j in at_upper
                if not up and self.upper[j] == 0:
                    continue
                dj = cost[j] - sum((y[r] * v for r, v in sf.columns[j].items()), Fraction(0))
                if (dj < 0 and not up) or (dj > 0 and up):
                    q = j
                    break
            if q < 0:
                self.xB = xB
                return Status.OPTIMAL
            delta = -1 if q in at_upper else 1
            alpha = lu.solve(sf.columns[q])
            best: Fraction | None = None
            leave_row = -1
            for r, a in enumerate(alpha):
                if not a:
                    continue
                a = a * delta
                if a > 0:
                    t = xB[r] / a
                else:
                    u = self.upper[basis[r]]
                    if u is None:
                        continue
                    t = (u - xB[r]) / -a
                if best is None or t < best or (t == best and basis[r] < basis[leave_row]):
                    best, leave_row = t, r
            flip = self.upper[q]
            if best is None and flip is None:
                self.unbounded = (q, delta, alpha, basis)
                return Status.UNBOUNDED
            if best is None or (flip is not None and (flip < best or (flip == best and q < basis[leave_row]))):
                if q in at_upper:
                    at_upper.discard(q)
                else:
                    at_upper.add(q)
            else:
                leave = basis[leave_row]
                if alpha[leave_row] * delta < 0:
                    at_upper.add(leave)
                at_upper.discard(q)
                basis[leave_row] = q
            self.iterations += 1


def _solve_exact(sf: StandardForm, opts: Exact, warm: LpResult | None) -> LpResult:
    E = _ExactSimplex(sf, opts)
    arts = list(sf.artificial)
    basis: list[int] | None = None
    at_upper: set[int] = set()
    if warm is not None and warm.basis is not None:
        basis = list(warm.basis)
        at_upper = set(warm.at_upper)
        for j in arts:
            E.upper[j] = Fraction(0)
        try:
            xB = E.primal(E._factor(basis), at_upper)
            art_set = set(arts)
            feasible = all(
                v >= 0 and (j not in art_set or v == 0) and (E.upper[j] is None or v <= E.upper[j])
                for j, v in zip(basis, xB)
            ) and not (at_upper & art_set)
        except SingularMatrixError:
            feasible = False
        if not feasible:
            basis = None
    if basis is None:
        for j in arts:
            E.upper[j] = None
        basis = list(sf.basis)
        at_upper = set()
        if arts:
            c1 = [Fraction(0)] * sf.num_cols
            for j in arts:
                c1[j] = Fraction(1)
            status = E.run(c1, basis, at_upper)
            if status is Status.ITERATION_LIMIT:
                return LpResult(status, iterations=E.iterations, message="phase 1")
            infeas = sum((v for j, v in zip(basis, E.xB) if j in set(arts)), Fraction(0))
            if infeas > 0:
                return LpResult(Status.INFEASIBLE, iterations=E.iterations, infeasibility=infeas)
            for j in arts:
                E.upper[j] = Fraction(0)
    status = E.run(list(sf.cost), basis, at_upper)
    ns = sf.num_structural
    if status is Status.UNBOUNDED:
        q, delta, alpha, b = E.unbounded
        ray = {q: Fraction(delta)} if q < ns else {}
        for r, j in enumerate(b):
            if j < ns and alpha[r]:
                ray[j] = -delta * alpha[r]
        return LpResult(status, iterations=E.iterations, ray=ray)
    if status is not Status.OPTIMAL:
        return LpResult(status, iterations=E.iterations)
    x = [Fraction(0)] * sf.num_cols
    for j in at_upper:
        x[j] = E.upper[j]
    for j, v in zip(basis, E.xB):
        x[j] = v
    primal = x[:ns]
    obj = sum((c * v for c, v in zip(sf.cost[:ns], primal) if c and v), Fraction(0))
    return LpResult(Status.OPTIMAL, obj, primal, E.iterations, tuple(basis), tuple(sorted(at_upper)))


# --- public entry points ------------------------------------------------------

def solve_lp(lp: LinearProgram, mode: Float | Exact | str = "float") -> LpResult:
    if isinstance(mode, str):
        mode = {"float": Float(), "exact": Exact()}[mode.lower()]
    sf = standard_form(lp)
    if isinstance(mode, Float):
        return _solve_float(sf, mode)[0]
    warm = None
    if mode.start == "crossover":
        warm, _ = _solve_float(sf, Float())
        if warm.status is not Status.OPTIMAL:
            warm = None
    elif mode.start != "cold":
        raise ValueError(f"unknown exact start {mode.start!r}")
    try:
        res = _solve_exact(sf, mode, warm)
    except ExactGrowthError as exc:
        raise ExactGrowthError(f"{exc}; raise Exact(max_bits=...) or use float mode") from None
    if warm is not None:
        res.iterations += warm.iterations
    return res


def solve_simplex(model: Model, mode: Float | Exact | str = "float") -> LpResult:
    """Solve the LP relaxation of ``model`` with the in-repo simplex."""
    return solve_lp(LinearProgram.from_model(model), mode)


def check_primal(model: Model, primal: Sequence, tol: float | None = None) -> bool:
    """Bounds and row feasibility; exact when ``tol`` is None."""
    if tol is None:
        return all(0 <= v <= 1 for v in primal) and all(c.satisfied(primal) for c in model.constraints)
    x = np.asarray(primal, dtype=float)
    if (x < -tol).any() or (x > 1 + tol).any():
        return False
    for c in model.constraints:
        act = sum(float(a) * x[v] for v, a in c.terms.items())
        rhs = float(c.rhs)
        if (c.sense == "<=" and act > rhs + tol) or (c.sense == ">=" and act < rhs - tol) or \
                (c.sense == "=" and abs(act - rhs) > tol):
            return False
    return True


# --- external bridge ----------------------------------------------------------

ENV_VAR = "TTP_EXT_SOLVER"

_STATUS_PATTERNS = [
    (Status.INFEASIBLE, re.compile(r"\binfeasible\b", re.I)),
    (Status.UNBOUNDED, re.compile(r"\bunbounded\b", re.I)),
    (Status.OPTIMAL, re.compile(r"\boptimal\b", re.I)),
]
_OBJ = re.compile(r"\bobj(?:ective)?(?:\s+value)?\b\s*[:=]?\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)", re.I)


def parse_solution_text(text: str, names: Sequence[str]) -> LpResult:
    status = None
    for st, pat in _STATUS_PATTERNS:
        if pat.search(text):
            status = st
            break
    if status is None:
        raise ExternalSolverError("solver output has no recognisable status")
    if status is not Status.OPTIMAL:
        return LpResult(status)
    m = _OBJ.search(text)
    if not m:
        raise ExternalSolverError("solver reported optimal but no objective value was found")
    index = {nm: i for i, nm in enumerate(names)}
    primal = [0.0] * len(names)
    for line in text.splitlines():
        tok = line.split()
        for a, b in zip(tok, tok[1:]):
            if a in index:
                try:
                    primal[index[a]] = float(b)
                except ValueError:
                    pass
                break
    return LpResult(Status.OPTIMAL, float(m.group(1)), primal)


def solve_external(model: Model, command_template: str | None = None, timeout: float = 600.0) -> LpResult:
    """Solve the relaxation with an external program.

    ``command_template`` (or ``$TTP_EXT_SOLVER``) may contain ``{lp}`` and
    ``{sol}``, replaced by the exported LP file and the expected solution file.
    The solution file is parsed if the command wrote it, else stdout.
    Without a command the result has status ``Skipped``.
    """
    template = command_template or os.environ.get(ENV_VAR, "").strip()
    if not template:
        return LpResult(Status.SKIPPED, message=f"no external solver configured (set {ENV_VAR})")
    with tempfile.TemporaryDirectory(prefix="ttpoly-") as tmp:
        lp_path = Path(tmp) / "model.lp"
        sol_path = Path(tmp) / "model.sol"
        export_lp(relax(model), lp_path)
        cmd = [part.format(lp=lp_path, sol=sol_path) for part in shlex.split(template)]
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, timeout=timeout)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ExternalSolverError(f"could not run {cmd[0]!r}: {exc}") from None
        if proc.returncode != 0:
            raise ExternalSolverError(f"{cmd[0]!r} exited with {proc.returncode}: {proc.stderr.strip()[:500]}")
        text = sol_path.read_text() if sol_path.exists() else proc.stdout
    return parse_solution_text(text, model.var_names)
