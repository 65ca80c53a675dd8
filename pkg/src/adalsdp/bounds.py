"""Certified dual bounds from approximate dual slack matrices.

A first-order run produces a dual slack matrix Z that satisfies the dual
constraint only approximately, so its objective value is not a valid
bound.  This module repairs Z to a PSD matrix Z-hat, then searches for
multipliers that make Z-hat exactly dual-feasible by solving a linear
program over the entrywise identity

    C + A_ineq^T lambda - A_eq^T mu - S = Z-hat,
    lambda >= 0,  S >= 0 supported on nonneg_mask (zero objective),

with one LP row per upper-triangle position in the union of the supports
of C, the constraint matrices, the mask, and Z-hat.  Any optimal
(lambda, mu) certifies -b_ineq^T lambda + b_eq^T mu as a bound on the
internal minimum by weak duality; an unbounded LP certifies primal
infeasibility; an infeasible LP yields no bound from this Z-hat.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .core import ConstraintSense, GeneralSdp, apply_At, triu_index_of
from .lp import ExternalLpSolver, LpEngineError, LpSolution, LpStatus, solve_lp_problem

_Z_SUPPORT_TOL = 1e-12


class BoundStatus(str, Enum):
    CERTIFIED = "Certified"
    LP_INFEASIBLE = "LpInfeasible"
    LP_UNBOUNDED = "LpUnbounded"


@dataclass
class DualBound:
    status: BoundStatus
    value: float | None = None
    lam: np.ndarray | None = None
    mu: np.ndarray | None = None
    s_entries: np.ndarray | None = None
    z_hat: np.ndarray | None = None
    feasibility_residual: float | None = None
    wall_time_sec: float = 0.0
    warning: str | None = None


def psd_repair(z: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm: clip negative eigenvalues."""
    z = np.asarray(z, dtype=float)
    z = 0.5 * (z + z.T)
    vals, vecs = np.linalg.eigh(z)
    if vals.size and vals[0] >= 0.0:
        return z
    out = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
    return 0.5 * (out + out.T)


@dataclass
class BoundLp:
    """Assembled LP data.  Variable order: lambda block, mu block, S block."""

    A: sp.csr_matrix
    rhs: np.ndarray
    obj: np.ndarray
    free: np.ndarray
    n_lambda: int
    n_mu: int
    s_positions: tuple[tuple[int, int], ...]
    row_positions: np.ndarray  # ut position index of each LP row


def build_bound_lp(sdp: GeneralSdp, z_hat: np.ndarray) -> BoundLp:
    """One equality row per upper-triangle position in the union of
    supports.  Positions absent everywhere are omitted (their row is
    0 = 0); positions where only z_hat is nonzero are kept so a stray
    entry makes the LP infeasible rather than silently ignored."""
    z_hat = np.asarray(z_hat, dtype=float)
    if z_hat.shape != (sdp.n, sdp.n):
        raise ValueError("z_hat dimension mismatch")
    ops = sdp.ops
    l, m = sdp.l, sdp.m
    mask = sdp.nonneg_mask or ()

    c_ut = np.zeros(ops.nut)
    c_pos = triu_index_of(sdp.n, sdp.c.i, sdp.c.j)
    c_ut[c_pos] = sdp.c.v

    support = np.zeros(ops.nut, dtype=bool)
    support[c_pos] = True
    support[np.unique(ops.A.indices)] = True
    mask_pos = np.array([triu_index_of(sdp.n, i, j) for i, j in mask], dtype=np.int64)
    if mask_pos.size:
        support[mask_pos] = True
    z_ut = z_hat[ops.iu, ops.ju]
    support[np.abs(z_ut) > _Z_SUPPORT_TOL] = True

    row_pos = np.nonzero(support)[0]
    row_of = np.full(ops.nut, -1, dtype=np.int64)
    row_of[row_pos] = np.arange(row_pos.size)

    # constraint-matrix columns: +coef for lambda, -coef for mu
    acoo = ops.A.tocoo()
    col_sign = np.where(acoo.row < l, 1.0, -1.0)
    entries_r = [row_of[acoo.col]]
    entries_c = [acoo.row]
    entries_v = [acoo.data * col_sign]
    nv = m + mask_pos.size
    if mask_pos.size:
        entries_r.append(row_of[mask_pos])
        entries_c.append(m + np.arange(mask_pos.size))
        entries_v.append(-np.ones(mask_pos.size))
    A = sp.csr_matrix((np.concatenate(entries_v),
                       (np.concatenate(entries_r), np.concatenate(entries_c))),
                      shape=(row_pos.size, nv))

    rhs = z_ut[row_pos] - c_ut[row_pos]
    obj = np.zeros(nv)
    obj[:l] = -ops.b[:l]
    obj[l:m] = ops.b[l:]
    free = np.zeros(nv, dtype=bool)
    free[l:m] = True
    return BoundLp(A=A, rhs=rhs, obj=obj, free=free, n_lambda=l, n_mu=m - l,
                   s_positions=tuple(mask), row_positions=row_pos)


def solve_lp(lp: BoundLp, tol: float = 1e-5,
             engine: "str | ExternalLpSolver" = "auto") -> LpSolution:
    """Solve the bound LP; engine failures degrade to Infeasible with a
    warning rather than raising, so a bound attempt fails safe."""
    try:
        return solve_lp_problem(lp.A, lp.rhs, lp.obj, lp.free, tol=tol, engine=engine)
    except LpEngineError as exc:
        return LpSolution(LpStatus.INFEASIBLE, warning=str(exc))


def recover_bound(sdp: GeneralSdp, z: np.ndarray, tol: float = 1e-5,
                  engine: "str | ExternalLpSolver" = "auto",
                  repair: bool = True) -> DualBound:
    """PSD-repair z, solve the bound LP, and verify the certificate.

    Returns a DualBound whose `value` (user sense) is set only when the
    re-verified certificate is feasible within `tol`: an upper bound for
    MAX problems, a lower bound for MIN problems.
    """
    t0 = time.perf_counter()
    z_hat = psd_repair(z) if repair else 0.5 * (np.asarray(z, float) + np.asarray(z, float).T)
    lp = build_bound_lp(sdp, z_hat)
    sol = solve_lp(lp, tol=tol, engine=engine)

    if sol.status == LpStatus.UNBOUNDED:
        return DualBound(BoundStatus.LP_UNBOUNDED, z_hat=z_hat,
                         wall_time_sec=time.perf_counter() - t0,
                         warning="dual improving ray found: primal side is infeasible")
    if sol.status == LpStatus.INFEASIBLE:
        return DualBound(BoundStatus.LP_INFEASIBLE, z_hat=z_hat,
                         wall_time_sec=time.perf_counter() - t0, warning=sol.warning)

    l, m = sdp.l, sdp.m
    x = np.asarray(sol.x, dtype=float)
    lam = np.maximum(x[:l], 0.0)  # clamp tiny engine negatives, then re-verify
    mu = x[l:m]
    s_entries = np.maximum(x[m:], 0.0)

    # independent certificate check over the full matrix
    y_like = np.concatenate([lam, -mu])
    resid_mat = sdp.ops.C_dense + apply_At(sdp, y_like) - z_hat
    for (i, j), v in zip(lp.s_positions, s_entries):
        resid_mat[i, j] -= v
        if i != j:
            resid_mat[j, i] -= v
    residual = float(np.abs(resid_mat).max(initial=0.0))
    wall = time.perf_counter() - t0

    if residual > tol:
        return DualBound(BoundStatus.LP_INFEASIBLE, z_hat=z_hat, lam=lam, mu=mu,
                         s_entries=s_entries, feasibility_residual=residual,
                         wall_time_sec=wall,
                         warning=f"certificate failed re-verification "
                                 f"(residual {residual:.3e} > tol {tol:.1e})")

    internal = float(-np.dot(sdp.b[:l], lam) + np.dot(sdp.b[l:], mu))
    return DualBound(BoundStatus.CERTIFIED, value=sdp.reported_value(internal),
                     lam=lam, mu=mu, s_entries=s_entries, z_hat=z_hat,
                     feasibility_residual=residual, wall_time_sec=wall)


def make_bound_callback(tol: float = 1e-5,
                        engine: "str | ExternalLpSolver" = "auto"):
    """Adapter for `solver.solve(bound_callback=...)`."""

    def callback(req) -> DualBound:
        return recover_bound(req.sdp, req.Z, tol=tol, engine=engine)

    return callback
