"""Linear programming engines for dual-bound recovery.

All engines solve the same standardized problem:

    maximize c^T x   subject to   A x = b,   x_i >= 0 unless free[i].

Three engines are provided:

  * an embedded dense two-phase tableau simplex (the reference engine,
    no dependencies beyond numpy);
  * a wrapper around scipy's HiGHS interface for large instances;
  * a file-based adapter that shells out to any external solver speaking
    the documented problem/solution text format.

"auto" picks the embedded engine for small problems and HiGHS otherwise.
"""

from __future__ import annotations

import subprocess
import tempfile
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import scipy.optimize
import scipy.sparse as sp

_PIVOT_TOL = 1e-9
_AUTO_SIMPLEX_ROWS = 200
_AUTO_SIMPLEX_COLS = 400


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


class LpEngineError(RuntimeError):
    """Pivot limit or numerical breakdown inside an LP engine."""


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float | None = None
    warning: str | None = None


def _as_dense(A) -> np.ndarray:
    if sp.issparse(A):
        return A.toarray()
    return np.asarray(A, dtype=float)


def _pivot(T: np.ndarray, rhs: np.ndarray, basis: list[int], row: int, col: int) -> None:
    piv = T[row, col]
    T[row] /= piv
    rhs[row] /= piv
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    rhs -= factors * rhs[row]
    basis[row] = col


def _simplex_phase(T: np.ndarray, rhs: np.ndarray, basis: list[int],
                   cost: np.ndarray, max_pivots: int) -> str:
    """Minimize cost^T x on a tableau already in basic form.  Returns
    "optimal" or "unbounded"."""
    n_cols = T.shape[1]
    stall = 0
    last_obj = np.inf
    for _ in range(max_pivots):
        cb = cost[basis]
        reduced = cost - cb @ T
        reduced[basis] = 0.0
        use_bland = stall > 50
        if use_bland:
            candidates = np.nonzero(reduced < -_PIVOT_TOL)[0]
            if candidates.size == 0:
                return "optimal"
            col = int(candidates[0])
        else:
            col = int(np.argmin(reduced))
            if reduced[col] >= -_PIVOT_TOL:
                return "optimal"
        colvals = T[:, col]
        ok = colvals > _PIVOT_TOL
        if not np.any(ok):
            return "unbounded"
        ratios = np.full(rhs.size, np.inf)
        ratios[ok] = rhs[ok] / colvals[ok]
        row = int(np.argmin(ratios))
        if use_bland:
            best = ratios[row]
            tied = np.nonzero(np.abs(ratios - best) <= 1e-12 * (1 + abs(best)))[0]
            row = int(min(tied, key=lambda r: basis[r]))
        _pivot(T, rhs, basis, row, col)
        if not np.all(np.isfinite(T)) or not np.all(np.isfinite(rhs)):
            raise LpEngineError("numerical breakdown in simplex tableau")
        obj = float(cost[basis] @ rhs)
        if obj < last_obj - 1e-12 * (1.0 + abs(last_obj)):
            stall = 0
        else:
            stall += 1
        last_obj = obj
    raise LpEngineError(f"simplex pivot limit ({max_pivots}) exceeded")


def _solve_simplex(A, b, c, free, tol: float) -> LpSolution:
    A = _as_dense(A)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    free = np.asarray(free, dtype=bool)
    m, n = A.shape

    # split free variables into positive and negative parts
    free_idx = np.nonzero(free)[0]
    cols = [A]
    if free_idx.size:
        cols.append(-A[:, free_idx])
    A2 = np.hstack(cols)
    c2 = np.concatenate([c, -c[free_idx]]) if free_idx.size else c.copy()
    n2 = A2.shape[1]

    flip = b < 0
    A2[flip] *= -1.0
    b[flip] *= -1.0

    # phase 1: artificial basis, minimize artificial mass
    T = np.hstack([A2, np.eye(m)])
    rhs = b.copy()
    basis = list(range(n2, n2 + m))
    cost1 = np.concatenate([np.zeros(n2), np.ones(m)])
    max_pivots = 2000 + 200 * (m + n2)
    outcome = _simplex_phase(T, rhs, basis, cost1, max_pivots)
    if outcome == "unbounded":  # cannot happen with bounded-below phase-1 cost
        raise LpEngineError("phase-1 reported unbounded")
    infeas = float(cost1[basis] @ rhs)
    if infeas > tol * (1.0 + np.abs(b).max(initial=0.0)):
        return LpSolution(LpStatus.INFEASIBLE)

    # pivot artificials out of the basis; rows that cannot be cleared are
    # redundant and get dropped
    drop_rows = []
    for r in range(m):
        if basis[r] >= n2:
            nz = np.nonzero(np.abs(T[r, :n2]) > _PIVOT_TOL)[0]
            if nz.size:
                _pivot(T, rhs, basis, r, int(nz[0]))
            else:
                drop_rows.append(r)
    if drop_rows:
        keep = [r for r in range(m) if r not in set(drop_rows)]
        T = T[keep]
        rhs = rhs[keep]
        basis = [basis[r] for r in keep]

    T = T[:, :n2]
    cost2 = -c2  # maximize c2 == minimize -c2
    outcome = _simplex_phase(T, rhs, basis, cost2, max_pivots)
    if outcome == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED)

    x2 = np.zeros(n2)
    x2[basis] = rhs
    x = x2[:n].copy()
    if free_idx.size:
        x[free_idx] -= x2[n:]
    return LpSolution(LpStatus.OPTIMAL, x=x, objective=float(c @ x))


def _solve_highs(A, b, c, free, tol: float) -> LpSolution:
    bounds = [(None, None) if f else (0.0, None) for f in free]
    res = scipy.optimize.linprog(
        -np.asarray(c, dtype=float), A_eq=A, b_eq=b, bounds=bounds,
        method="highs",
        options={"primal_feasibility_tolerance": tol,
                 "dual_feasibility_tolerance": tol})
    if res.status == 0:
        x = np.asarray(res.x, dtype=float)
        return LpSolution(LpStatus.OPTIMAL, x=x, objective=float(np.dot(c, x)))
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE)
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED)
    raise LpEngineError(f"HiGHS failed: {res.message}")


# ---------------------------------------------------------------------------
# external solver adapter: fixed text format, solution file back

def write_lp_file(path: str | Path, A, b, c, free, name: str = "bound_lp") -> None:
    """Write the problem in the documented sectioned text format."""
    A = sp.coo_matrix(A)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    free = np.asarray(free, dtype=bool)
    lines = [f"NAME {name}", "OBJSENSE MAX", f"VARS {c.size}"]
    for k in range(c.size):
        kind = "FREE" if free[k] else "NONNEG"
        lines.append(f"VAR x{k} {kind} {float(c[k])!r}")
    lines.append(f"ROWS {b.size}")
    for r in range(b.size):
        lines.append(f"ROW r{r} EQ {float(b[r])!r}")
    lines.append(f"ENTRIES {A.nnz}")
    for r, k, v in zip(A.row, A.col, A.data):
        lines.append(f"E r{r} x{k} {float(v)!r}")
    lines.append("END")
    Path(path).write_text("\n".join(lines) + "\n")


def read_lp_solution(path: str | Path, nvars: int) -> LpSolution:
    """Parse a solution file produced by an external solver."""
    status = None
    x = np.zeros(nvars)
    for raw in Path(path).read_text().splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "STATUS":
            status = parts[1].upper()
        elif parts[0] == "V":
            idx = int(parts[1].lstrip("x"))
            if not 0 <= idx < nvars:
                raise LpEngineError(f"solution names unknown variable {parts[1]}")
            x[idx] = float(parts[2])
    if status == "OPTIMAL":
        return LpSolution(LpStatus.OPTIMAL, x=x)
    if status == "INFEASIBLE":
        return LpSolution(LpStatus.INFEASIBLE)
    if status == "UNBOUNDED":
        return LpSolution(LpStatus.UNBOUNDED)
    raise LpEngineError(f"external solver returned no parsable STATUS ({status})")


@dataclass
class ExternalLpSolver:
    """Run an external LP solver via the text-file interface.

    `command` is a template list; the placeholders {problem} and {solution}
    are substituted with temporary file paths.
    """

    command: list[str]

    def solve(self, A, b, c, free, tol: float) -> LpSolution:
        with tempfile.TemporaryDirectory(prefix="adalsdp_lp_") as tmp:
            prob = str(Path(tmp) / "problem.lp")
            sol = str(Path(tmp) / "solution.txt")
            write_lp_file(prob, A, b, c, free)
            cmd = [part.format(problem=prob, solution=sol) for part in self.command]
            run = subprocess.run(cmd, capture_output=True, text=True)
            if run.returncode != 0:
                raise LpEngineError(
                    f"external solver exited with {run.returncode}: {run.stderr.strip()}")
            result = read_lp_solution(sol, np.asarray(c).size)
        if result.status == LpStatus.OPTIMAL:
            result.objective = float(np.dot(np.asarray(c, dtype=float), result.x))
        return result


def solve_lp_problem(A, b, c, free, tol: float = 1e-5,
                     engine: "str | ExternalLpSolver" = "auto") -> LpSolution:
    """Dispatch to an LP engine.  `engine` is "auto", "simplex", "highs",
    or an ExternalLpSolver."""
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    free = np.asarray(free, dtype=bool)
    m = A.shape[0] if hasattr(A, "shape") else len(A)

    if c.size == 0:
        # no variables: feasible iff b is (numerically) zero
        if np.all(np.abs(b) <= tol * (1.0 + np.abs(b).max(initial=0.0))):
            return LpSolution(LpStatus.OPTIMAL, x=np.zeros(0), objective=0.0)
        return LpSolution(LpStatus.INFEASIBLE)
    if m == 0:
        # no constraints: bounded only if no improving direction exists
        if np.any(c[free] != 0.0) or np.any(c[~free] > 0.0):
            return LpSolution(LpStatus.UNBOUNDED)
        return LpSolution(LpStatus.OPTIMAL, x=np.zeros(c.size), objective=0.0)

    if isinstance(engine, ExternalLpSolver):
        return engine.solve(A, b, c, free, tol)
    if engine == "auto":
        ncols = c.size + int(np.count_nonzero(free))
        engine = "simplex" if (m <= _AUTO_SIMPLEX_ROWS and ncols <= _AUTO_SIMPLEX_COLS) \
            else "highs"
    if engine == "simplex":
        return _solve_simplex(A, b, c, free, tol)
    if engine == "highs":
        return _solve_highs(A, b, c, free, tol)
    raise ValueError(f"unknown LP engine: {engine!r}")
