"""Shared test helpers.

Provides tiny hand-checkable instances, an independent slack-expanded
reference implementation of the ADMM iteration (dense, textbook form,
used to pin the block-wise algebra), a brute-force performance-profile
oracle, and a terminal-summary hook that reprints the acceptance
criterion PASS/FAIL lines at the end of the run.
"""

from __future__ import annotations

import numpy as np

from adalsdp.core import (ConstraintSense, GeneralSdp, LinearConstraint,
                          Sense, SparseSymMat)

# --------------------------------------------------------------------------
# acceptance summary plumbing

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# --------------------------------------------------------------------------
# tiny instances with hand-derived optima

def tiny_equality_instance() -> GeneralSdp:
    """min 2x over 1x1 PSD with x = 1; optimum 2.0 at X = [[1]],
    dual optimum y = 2, Z = 0."""
    c = SparseSymMat.from_triplets(1, [(0, 0, 2.0)])
    con = LinearConstraint(SparseSymMat.from_triplets(1, [(0, 0, 1.0)]),
                           1.0, ConstraintSense.EQ)
    return GeneralSdp.make(1, c, [con], sense=Sense.MIN)


def tiny_infeasible_instance() -> GeneralSdp:
    """min x over 1x1 PSD with x = -1: primal infeasible."""
    c = SparseSymMat.from_triplets(1, [(0, 0, 1.0)])
    con = LinearConstraint(SparseSymMat.from_triplets(1, [(0, 0, 1.0)]),
                           -1.0, ConstraintSense.EQ)
    return GeneralSdp.make(1, c, [con], sense=Sense.MIN)


def random_instance(rng: np.random.Generator, n: int, m: int, l: int,
                    density: int = 3) -> GeneralSdp:
    """Random well-posed instance (no planted optimum): distinct
    upper-triangle supports per constraint, bounded-feasible rhs."""
    iu, ju = np.triu_indices(n)
    cons = []
    for k in range(m):
        pos = rng.choice(iu.size, size=min(density, iu.size), replace=False)
        mat = SparseSymMat(n, iu[pos].copy(), ju[pos].copy(),
                           rng.normal(size=pos.size))
        sense = ConstraintSense.LE if k < l else ConstraintSense.EQ
        cons.append(LinearConstraint(mat, float(rng.normal()), sense))
    c = SparseSymMat.from_dense(_random_sym(rng, n))
    return GeneralSdp.make(n, c, cons, sense=Sense.MIN)


def _random_sym(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n))
    return 0.5 * (a + a.T)


# --------------------------------------------------------------------------
# reference implementation: explicit slack-expanded two-block iteration

def reference_slack_expanded_adal(sdp: GeneralSdp, iters: int,
                                  sigma0: float = 1.0,
                                  adaptive_sigma: bool = True) -> list[tuple]:
    """Dense textbook iteration on the slack-expanded problem.

    Inequality slacks become extra diagonal entries of an (n+l) x (n+l)
    PSD block; every operation works on full matrices, nothing is
    decomposed.  Per iteration:

        y   solves  Gbar y = b/sigma - Abar(Xbar/sigma - Cbar + Zbar)
        V   = Cbar - Abar^T y - Xbar/sigma
        Zbar = (V)_+        (PSD part)
        Xbar = sigma ((V)_+ - V)
        sigma -> clip(|Xbar| / |Zbar|, 1e-6, 1e6)   (held when |Zbar| ~ 0)

    Returns one tuple per iteration: (X, s, y, Z, p, sigma_used) where
    X, Z are the core blocks and s, p the slack diagonals.
    """
    n, m, l = sdp.n, sdp.m, sdp.l
    N = n + l
    abar = []
    for k, con in enumerate(sdp.constraints):
        mat = np.zeros((N, N))
        mat[:n, :n] = con.matrix.dense()
        if k < l:
            mat[n + k, n + k] = 1.0
        abar.append(mat)
    cbar = np.zeros((N, N))
    cbar[:n, :n] = sdp.c.dense()
    b = sdp.b
    gbar = np.array([[np.sum(ai * aj) for aj in abar] for ai in abar])

    xbar = np.zeros((N, N))
    zbar = np.zeros((N, N))
    sigma = float(sigma0)
    states = []
    for _ in range(iters):
        inner = xbar / sigma - cbar + zbar
        rhs = b / sigma - np.array([np.sum(ai * inner) for ai in abar])
        y = np.linalg.solve(gbar, rhs)
        v = cbar - sum(yk * ak for yk, ak in zip(y, abar)) - xbar / sigma
        v = 0.5 * (v + v.T)
        vals, vecs = np.linalg.eigh(v)
        pos = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
        pos = 0.5 * (pos + pos.T)
        zbar = pos
        xbar = sigma * (pos - v)
        states.append((xbar[:n, :n].copy(), np.diag(xbar)[n:].copy(), y.copy(),
                       zbar[:n, :n].copy(), np.diag(zbar)[n:].copy(), sigma))
        if adaptive_sigma:
            den = np.linalg.norm(zbar, "fro")
            if den >= 1e-12:
                sigma = float(np.clip(np.linalg.norm(xbar, "fro") / den,
                                      1e-6, 1e6))
    return states


# --------------------------------------------------------------------------
# brute-force performance-profile oracle (pure python counting)

def profile_oracle(times, fail_marker=np.inf) -> list[tuple]:
    """Per-solver breakpoints [(tau, rho), ...] by explicit enumeration."""
    times = np.asarray(times, dtype=float)
    n_inst, n_solv = times.shape
    ratios = [[np.inf] * n_solv for _ in range(n_inst)]
    for p in range(n_inst):
        ok = [np.isfinite(times[p, s]) and not (
                  fail_marker is not None and np.isfinite(fail_marker)
                  and times[p, s] == fail_marker)
              for s in range(n_solv)]
        if any(ok):
            best = min(times[p, s] for s in range(n_solv) if ok[s])
            for s in range(n_solv):
                if ok[s]:
                    ratios[p][s] = times[p, s] / best
    curves = []
    for s in range(n_solv):
        col = [ratios[p][s] for p in range(n_inst)]
        distinct = sorted({r for r in col if np.isfinite(r)})
        pts = []
        for t in distinct:
            count = sum(1 for r in col if r <= t)
            pts.append((t, count / n_inst))
        curves.append(tuple(pts))
    return curves
