"""Random general-form SDP instances with a constructed known optimum.

The generator plants a primal-dual optimal pair instead of solving: draw
an orthogonal basis Q, split it into complementary column blocks to get
X* >= 0 of rank floor(n/2) and Z* >= 0 with Z* X* = 0, draw multipliers
y* that respect the inequality sign convention (y*_i <= 0 on a random
active subset, 0 elsewhere), then *define* the right-hand side b and the
cost C so that every optimality condition holds:

    b = A(X*) + positive slack exactly on inactive inequality rows
    C = A^T y* + Z*

Weak duality then pins the optimal value at <C, X*> = b^T y*, giving
exact ground truth for solver tests.  The multipliers for the slack
nonnegativity are p* = -y*_ineq >= 0.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (ConstraintSense, GeneralSdp, LinearConstraint, Sense,
                   SparseSymMat)
from .solver import FactorizationFailed, factorize_gram


class RankDeficient(RuntimeError):
    """Drawn constraint matrices had linearly dependent rows in every
    resampling attempt, so the multiplier-update factorization fails."""


@dataclass(frozen=True)
class GenSpec:
    """Recipe for one random instance.

    n: matrix order; m: number of constraints; p: fraction of them that
    are inequalities (l = round(p*m), Python rounding); density: number
    of upper-triangle nonzeros drawn per constraint matrix; seed: RNG
    seed (identical specs produce bit-identical instances).
    """

    n: int
    m: int
    p: float
    density: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        nut = self.n * (self.n + 1) // 2
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 1 <= self.m <= nut:
            raise ValueError(f"m must be in [1, {nut}] for n={self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not 1 <= self.density <= nut:
            raise ValueError(f"density must be in [1, {nut}]")

    @property
    def l(self) -> int:
        return int(round(self.p * self.m))


class Witness(NamedTuple):
    X: np.ndarray
    y: np.ndarray
    Z: np.ndarray


class RandomInstance(NamedTuple):
    sdp: GeneralSdp
    known_optimum: float
    witness: Witness


def _draw_constraints(rng: np.random.Generator, n: int, m: int, l: int,
                      density: int) -> list[LinearConstraint]:
    iu, ju = np.triu_indices(n)
    nut = iu.size
    cons = []
    for k in range(m):
        pos = rng.choice(nut, size=density, replace=False)
        vals = rng.normal(size=density)
        mat = SparseSymMat(n, iu[pos].copy(), ju[pos].copy(), vals)
        sense = ConstraintSense.LE if k < l else ConstraintSense.EQ
        cons.append(LinearConstraint(mat, 0.0, sense))
    return cons


def generate(spec: GenSpec, max_retries: int = 20) -> RandomInstance:
    """Draw an instance with planted optimum; resample on rank failure."""
    last_error: Exception | None = None
    for attempt in range(max_retries):
        rng = np.random.default_rng([spec.seed, attempt])
        n, m, l = spec.n, spec.m, spec.l
        cons = _draw_constraints(rng, n, m, l, spec.density)

        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        rank = n // 2
        d_x = rng.uniform(0.5, 1.5, size=rank)
        d_z = rng.uniform(0.5, 1.5, size=n - rank)
        X = (q[:, :rank] * d_x) @ q[:, :rank].T
        X = 0.5 * (X + X.T)
        Z = (q[:, rank:] * d_z) @ q[:, rank:].T
        Z = 0.5 * (Z + Z.T)

        y = np.zeros(m)
        active = rng.random(l) < 0.5
        y[:l][active] = -np.abs(rng.normal(size=int(active.sum()))) - 0.1
        y[l:] = rng.normal(size=m - l)

        # rhs: tight on equalities and active inequalities, slack elsewhere
        ax = np.array([con.matrix.inner(X) for con in cons])
        b = ax.copy()
        bump = rng.uniform(0.1, 1.0, size=l)
        b[:l][~active] += bump[~active]

        aty = np.zeros((n, n))
        for coef, con in zip(y, cons):
            aty += coef * con.matrix.dense()
        C = aty + Z
        C = 0.5 * (C + C.T)

        final_cons = [LinearConstraint(con.matrix, float(bi), con.sense)
                      for con, bi in zip(cons, b)]
        sdp = GeneralSdp.make(n, SparseSymMat.from_dense(C), final_cons,
                              sense=Sense.MIN)
        try:
            factorize_gram(sdp)
        except FactorizationFailed as exc:
            last_error = exc
            continue
        known = float(np.sum(C * X))
        return RandomInstance(sdp=sdp, known_optimum=known,
                              witness=Witness(X=X, y=y, Z=Z))
    raise RankDeficient(
        f"no independent constraint draw in {max_retries} attempts: {last_error}")


def _hash_array(a: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(a, dtype=float).tobytes()).hexdigest()


def witness_hashes(witness: Witness) -> dict[str, str]:
    """Stable content hashes of the planted optimal pair, for sidecar files."""
    return {"X": _hash_array(witness.X), "y": _hash_array(witness.y),
            "Z": _hash_array(witness.Z)}


def sidecar_dict(spec: GenSpec, inst: RandomInstance) -> dict:
    return {
        "generator": {"n": spec.n, "m": spec.m, "p": spec.p,
                      "density": spec.density, "seed": spec.seed},
        "known_optimum": inst.known_optimum,
        "witness_sha256": witness_hashes(inst.witness),
    }


def write_sidecar(path: str, spec: GenSpec, inst: RandomInstance) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sidecar_dict(spec, inst), fh, indent=2)
        fh.write("\n")
