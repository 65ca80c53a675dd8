"""Alternating direction augmented Lagrangian (ADAL) solver.

Solves the canonical problem from `core` by dualizing and applying an
ADMM-style splitting to the dual augmented Lagrangian.  Inequality
constraints are handled through nonnegative slacks, but the slack-extended
matrices are never materialized: the slack block of every matrix iterate
is diagonal with coordinate eigenvectors, so all updates decompose into an
n x n core block plus cheap vector recursions.

The dual pair maintained is (y, Z, p, [S]) against primal (X, s):

    y  in R^m     multipliers (y_i <= 0 at optimality for i <= l),
    Z  PSD        dual slack for the core block,
    p  >= 0       dual slack for the inequality rows,
    S  >= 0       dual surplus supported on nonneg_mask (3-block mode),
    X  PSD-ish    primal matrix (exactly PSD per-iteration in 2-block mode),
    s  >= 0       primal slacks for the inequality rows.

One iteration: a y-update through the factored shifted Gram matrix, a
spectral projection step for (Z, X) plus elementwise recursions for
(p, s), and in 3-block mode a clipped S-update between the Z- and
X-updates.  The penalty sigma follows a norm-ratio rule each iteration.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import ConstraintSense, GeneralSdp, Sense, gram

# Gram matrices up to this order are factored densely (Cholesky); larger
# ones go through sparse LU, which suits the near-diagonal Gram matrices
# the graph relaxations produce.
_DENSE_GRAM_LIMIT = 600


class FactorizationFailed(RuntimeError):
    """Shifted Gram matrix could not be factored (dependent equality rows)."""


class EigFailed(RuntimeError):
    """Dense symmetric eigendecomposition did not converge."""


class SolverStatus(str, Enum):
    CONVERGED = "Converged"
    ITER_LIMIT = "IterLimit"
    TIME_LIMIT = "TimeLimit"
    STALLED = "Stalled"


class SigmaRule(str, Enum):
    LORENZ_TRAN_DINH = "lorenz-tran-dinh"
    FIXED = "fixed"


@dataclass
class SolverConfig:
    eps: float = 1e-5
    max_iter: int = 100_000
    time_limit: float | None = None
    sigma0: float = 1.0
    sigma_rule: SigmaRule = SigmaRule.LORENZ_TRAN_DINH
    postprocess_every: int = 200
    seed: int | None = None  # reserved for randomized tie-breaking; unused

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        if self.postprocess_every < 1:
            raise ValueError("postprocess_every must be >= 1")
        self.sigma_rule = SigmaRule(self.sigma_rule)


class GramFactor:
    """Factorization of the shifted Gram matrix G + Diag(1_l, 0)."""

    def __init__(self, sdp: GeneralSdp):
        m, l = sdp.m, sdp.l
        G = gram(sdp).tolil()
        for i in range(l):
            G[i, i] = G[i, i] + 1.0  # unit slack columns of the extended operator
        G = G.tocsc()
        self.m = m
        self._dense = m <= _DENSE_GRAM_LIMIT
        if m == 0:
            self._cho = None
            return
        if self._dense:
            Gd = G.toarray()
            self._Gd = Gd
            try:
                self._cho = scipy.linalg.cho_factor(Gd)
            except scipy.linalg.LinAlgError as exc:
                raise FactorizationFailed(
                    "shifted Gram matrix is not positive definite; "
                    "equality constraints are linearly dependent") from exc
            # Cholesky can succeed on a singular matrix through a rounding-level
            # pivot; apply the same relative pivot floor as the sparse path.
            piv = np.square(np.diagonal(self._cho[0]))
            if piv.size and piv.min() <= 1e-12 * max(piv.max(), 1.0):
                raise FactorizationFailed(
                    "shifted Gram matrix is numerically singular; "
                    "equality constraints are linearly dependent")
        else:
            try:
                self._lu = spla.splu(G)
            except RuntimeError as exc:
                raise FactorizationFailed(
                    "sparse factorization of the shifted Gram matrix failed; "
                    "equality constraints are linearly dependent") from exc
            d = np.abs(self._lu.U.diagonal())
            if d.size and d.min() <= 1e-12 * max(d.max(), 1.0):
                raise FactorizationFailed(
                    "shifted Gram matrix is numerically singular; "
                    "equality constraints are linearly dependent")
        self._G = G

    def shifted_gram(self) -> np.ndarray:
        if self.m == 0:
            return np.zeros((0, 0))
        return self._G.toarray()

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float).ravel()
        if rhs.size != self.m:
            raise ValueError(f"rhs has length {rhs.size}, expected {self.m}")
        if self.m == 0:
            return np.zeros(0)
        if self._dense:
            return scipy.linalg.cho_solve(self._cho, rhs)
        return self._lu.solve(rhs)


def factorize_gram(sdp: GeneralSdp) -> GramFactor:
    """Factor G + Diag(1_l, 0) once per problem."""
    return GramFactor(sdp)


def psd_split(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a symmetric matrix into its PSD and NSD parts, w = pos + neg."""
    w = np.asarray(w, dtype=float)
    w = 0.5 * (w + w.T)
    try:
        vals, vecs = np.linalg.eigh(w)
    except np.linalg.LinAlgError as exc:
        raise EigFailed("symmetric eigendecomposition failed") from exc
    pos = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
    pos = 0.5 * (pos + pos.T)
    neg = w - pos  # exact complement of the projection
    return pos, neg


def _pad_slack(sdp: GeneralSdp, s: np.ndarray) -> np.ndarray:
    out = np.zeros(sdp.m)
    out[: sdp.l] = s
    return out


def y_update(sdp: GeneralSdp, factor: GramFactor, X: np.ndarray, Z: np.ndarray,
             s: np.ndarray, p: np.ndarray, sigma: float,
             S: np.ndarray | None = None) -> np.ndarray:
    """Closed-form multiplier update through the factored shifted Gram.

    y = (G + Diag(1_l, 0))^-1 [ b/sigma - A(X/sigma - C + Z [+ S])
                                - (s/sigma + p ; 0) ]

    The slack term enters with a minus sign: the slack block of the
    extended matrix X/sigma - C + Z is Diag(s/sigma + p), and it is
    subtracted exactly like the core-block image under A.
    """
    ops = sdp.ops
    M = X / sigma - ops.C_dense + Z
    if S is not None:
        M = M + S
    rhs = ops.b / sigma - ops.A_weighted @ ops.ut(M)
    if sdp.l:
        rhs[: sdp.l] -= s / sigma + p
    return factor.solve(rhs)


def build_W(sdp: GeneralSdp, X: np.ndarray, y: np.ndarray, s: np.ndarray,
            sigma: float, S: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Pre-projection matrix for the spectral step, in block form.

    Returns (W_core, w_slack) where W_core = X/sigma - C + A^T y (+ S in
    3-block mode) and w_slack_i = s_i/sigma + y_i for the inequality rows.
    """
    ops = sdp.ops
    aty = ops.from_ut(ops.At @ np.asarray(y, dtype=float))
    W = X / sigma - ops.C_dense + aty
    if S is not None:
        W = W + S
    w_slack = s / sigma + np.asarray(y, dtype=float)[: sdp.l]
    return W, w_slack


def zx_update(W_core: np.ndarray, w_slack: np.ndarray,
              sigma: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Spectral projection step: Z = -(W)_-, X = sigma (W)_+, and the
    elementwise slack analog p = (-w)_+, s = sigma (w)_+."""
    pos, neg = psd_split(W_core)
    Z = -neg
    X = sigma * pos
    p = np.maximum(0.0, -w_slack)
    s = sigma * np.maximum(0.0, w_slack)
    return Z, X, p, s


def s_update_3block(sdp: GeneralSdp, X: np.ndarray, y: np.ndarray, Z: np.ndarray,
                    sigma: float) -> np.ndarray:
    """Mask-supported surplus update: S = clip_to_mask((C - A^T y - Z - X/sigma)_+)."""
    ops = sdp.ops
    if ops.mask_dense is None:
        raise ValueError("problem has no nonneg_mask; S-update undefined")
    aty = ops.from_ut(ops.At @ np.asarray(y, dtype=float))
    T = ops.C_dense - aty - Z - X / sigma
    S = np.where(ops.mask_dense, np.maximum(T, 0.0), 0.0)
    return S


def residuals(sdp: GeneralSdp, X: np.ndarray, s: np.ndarray, y: np.ndarray,
              Z: np.ndarray, p: np.ndarray,
              S: np.ndarray | None = None) -> tuple[float, float]:
    """Scaled primal and dual residuals (r_P, r_D)."""
    ops = sdp.ops
    ax = ops.A_weighted @ ops.ut(X)
    rp = np.linalg.norm(ax + _pad_slack(sdp, s) - ops.b) / (1.0 + ops.norm_b)
    aty = ops.from_ut(ops.At @ np.asarray(y, dtype=float))
    D = aty + Z - ops.C_dense
    if S is not None:
        D = D + S
    slack_part = np.asarray(y, dtype=float)[: sdp.l] + p
    rd = np.sqrt(np.linalg.norm(D, "fro") ** 2 + np.dot(slack_part, slack_part))
    rd /= 1.0 + ops.norm_C
    return float(rp), float(rd)


def sigma_update(X: np.ndarray, s: np.ndarray, Z: np.ndarray, p: np.ndarray,
                 sigma: float, rule: SigmaRule = SigmaRule.LORENZ_TRAN_DINH) -> float:
    """Norm-ratio penalty update, clamped to [1e-6, 1e6]; holds when the
    dual norm is below 1e-12."""
    if rule == SigmaRule.FIXED:
        return sigma
    num = np.sqrt(np.linalg.norm(X, "fro") ** 2 + np.dot(s, s))
    den = np.sqrt(np.linalg.norm(Z, "fro") ** 2 + np.dot(p, p))
    if den < 1e-12:
        return sigma
    return float(np.clip(num / den, 1e-6, 1e6))


@dataclass
class BoundRequest:
    """Snapshot handed to the post-processing callback."""

    sdp: GeneralSdp
    Z: np.ndarray
    y: np.ndarray
    iteration: int
    elapsed_sec: float


@dataclass
class IterationState:
    """Read-only view of one iteration, for instrumentation hooks."""

    iteration: int
    X: np.ndarray
    s: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    p: np.ndarray
    S: np.ndarray | None
    sigma: float
    r_P: float
    r_D: float


@dataclass
class SolverResult:
    status: SolverStatus
    iterations: int
    primal_objective: float
    dual_objective: float
    r_P: float
    r_D: float
    delta: float
    sigma: float
    X: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    s: np.ndarray
    p: np.ndarray
    S: np.ndarray | None
    best_bound: Any = None
    best_bound_iteration: int | None = None
    best_bound_time: float | None = None
    bound_history: list = field(default_factory=list)
    history: list = field(default_factory=list)
    total_time: float = 0.0
    factor_time: float = 0.0
    eig_time: float = 0.0
    postproc_time: float = 0.0

    @property
    def converged(self) -> bool:
        return self.status == SolverStatus.CONVERGED


def _bound_is_better(sense: Sense, new: float, old: float) -> bool:
    # MAX problems receive upper bounds (keep the smallest), MIN problems
    # lower bounds (keep the largest).
    return new < old if sense == Sense.MAX else new > old


def solve(sdp: GeneralSdp, config: SolverConfig | None = None,
          bound_callback: Callable[[BoundRequest], Any] | None = None,
          on_iteration: Callable[[IterationState], None] | None = None) -> SolverResult:
    """Run ADAL to the requested tolerance.

    `bound_callback` is invoked every `config.postprocess_every` iterations
    and once at termination with a `BoundRequest`; any returned object with
    a numeric `value` attribute participates in best-bound tracking
    (best-so-far in the user sense).  `on_iteration` is called after every
    iteration with an `IterationState`; it is meant for tests and
    instrumentation and must not mutate the arrays it is shown.
    """
    if config is None:
        config = SolverConfig()
    ops = sdp.ops
    n, m, l = sdp.n, sdp.m, sdp.l
    three_block = sdp.nonneg_mask is not None and len(sdp.nonneg_mask) > 0

    t0 = time.perf_counter()
    factor = factorize_gram(sdp)
    factor_time = time.perf_counter() - t0

    X = np.zeros((n, n))
    Z = np.zeros((n, n))
    s = np.zeros(l)
    p = np.zeros(l)
    S = np.zeros((n, n)) if three_block else None
    y = np.zeros(m)
    sigma = float(config.sigma0)

    eig_time = 0.0
    postproc_time = 0.0
    history: list[tuple] = []
    bound_history: list[tuple] = []
    best_bound = None
    best_iter: int | None = None
    best_time: float | None = None
    last_cb_iter = -1

    def run_callback(k: int) -> None:
        nonlocal postproc_time, best_bound, best_iter, best_time, last_cb_iter
        if bound_callback is None or k == last_cb_iter:
            return
        last_cb_iter = k
        t_cb = time.perf_counter()
        bound = bound_callback(BoundRequest(sdp=sdp, Z=Z.copy(), y=y.copy(),
                                            iteration=k,
                                            elapsed_sec=t_cb - t0))
        postproc_time += time.perf_counter() - t_cb
        bound_history.append((k, bound))
        value = getattr(bound, "value", None)
        if value is not None:
            if best_bound is None or _bound_is_better(sdp.user_sense, value,
                                                      best_bound.value):
                best_bound = bound
                best_iter = k
                best_time = time.perf_counter() - t0

    r_P, r_D = residuals(sdp, X, s, y, Z, p, S)
    delta = max(r_P, r_D)
    status = SolverStatus.ITER_LIMIT
    it = 0
    best_delta = np.inf
    last_improve = 0

    if delta <= config.eps:
        status = SolverStatus.CONVERGED
    else:
        for it in range(1, config.max_iter + 1):
            y = y_update(sdp, factor, X, Z, s, p, sigma, S)
            if three_block:
                W_core, w_slack = build_W(sdp, X, y, s, sigma, S)
                t_e = time.perf_counter()
                _, neg = psd_split(W_core)
                eig_time += time.perf_counter() - t_e
                Z = -neg
                S = s_update_3block(sdp, X, y, Z, sigma)
                aty = ops.from_ut(ops.At @ y)
                X = X + sigma * (aty + Z + S - ops.C_dense)
                p = np.maximum(0.0, -w_slack)
                s = sigma * np.maximum(0.0, w_slack)
            else:
                W_core, w_slack = build_W(sdp, X, y, s, sigma)
                t_e = time.perf_counter()
                Z, X, p, s = zx_update(W_core, w_slack, sigma)
                eig_time += time.perf_counter() - t_e

            r_P, r_D = residuals(sdp, X, s, y, Z, p, S)
            delta = max(r_P, r_D)
            elapsed = time.perf_counter() - t0
            history.append((it, r_P, r_D, sigma,
                            sdp.reported_value(float(np.sum(ops.C_dense * X))),
                            elapsed))
            if on_iteration is not None:
                on_iteration(IterationState(it, X, s, y, Z, p, S, sigma, r_P, r_D))

            if delta < best_delta * (1.0 - 1e-3):
                best_delta = delta
                last_improve = it

            if delta <= config.eps:
                status = SolverStatus.CONVERGED
                break
            if config.time_limit is not None and elapsed >= config.time_limit:
                status = SolverStatus.TIME_LIMIT
                break
            if it - last_improve >= 500:
                status = SolverStatus.STALLED
                break
            if it % config.postprocess_every == 0:
                run_callback(it)
            sigma = sigma_update(X, s, Z, p, sigma, config.sigma_rule)
        else:
            status = SolverStatus.ITER_LIMIT

    run_callback(it)

    primal = sdp.reported_value(float(np.sum(ops.C_dense * X)))
    dual = sdp.reported_value(float(np.dot(ops.b, y)))
    return SolverResult(
        status=status, iterations=it,
        primal_objective=primal, dual_objective=dual,
        r_P=r_P, r_D=r_D, delta=delta, sigma=sigma,
        X=X, y=y, Z=Z, s=s, p=p, S=S,
        best_bound=best_bound, best_bound_iteration=best_iter,
        best_bound_time=best_time, bound_history=bound_history,
        history=history,
        total_time=time.perf_counter() - t0, factor_time=factor_time,
        eig_time=eig_time, postproc_time=postproc_time)
