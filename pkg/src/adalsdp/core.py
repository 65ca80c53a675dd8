"""Problem data model for general-form semidefinite programs.

A problem is stored in a canonical internal shape:

    min <C, X>  s.t.  <A_i, X> <= b_i  (i = 1..l),
                      <A_j, X>  = b_j  (j = l+1..m),
                      X >= 0 (PSD),  X_e >= 0 for e in nonneg_mask (optional).

Inequalities always come first in the constraint list.  Maximization
problems are negated on construction; `user_sense` and `objective_offset`
record how to translate internal values back to reported ones.

Symmetric matrices are either dense numpy arrays (iterates) or
`SparseSymMat` upper-triangle triplet collections (constraint data).  The
symmetric inner product <A, X> counts off-diagonal triplets twice, so a
triplet (i, j, c) with i < j contributes c * (X_ij + X_ji).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class Sense(str, Enum):
    MIN = "min"
    MAX = "max"


class ConstraintSense(str, Enum):
    LE = "LE"
    EQ = "EQ"


def triu_index_of(n: int, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Row-major position of (i, j), i <= j, in np.triu_indices(n) order."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    return i * n - (i * (i - 1)) // 2 + (j - i)


def check_symmetric(x: np.ndarray, name: str = "matrix") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError(f"{name} must be square, got shape {x.shape}")
    if not np.allclose(x, x.T, rtol=0.0, atol=1e-8 * (1.0 + np.abs(x).max(initial=0.0))):
        raise ValueError(f"{name} is not symmetric")
    return x


@dataclass(eq=False)
class SparseSymMat:
    """Symmetric matrix stored as upper-triangle triplets (i <= j)."""

    n: int
    i: np.ndarray
    j: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        self.i = np.asarray(self.i, dtype=np.int64).ravel()
        self.j = np.asarray(self.j, dtype=np.int64).ravel()
        self.v = np.asarray(self.v, dtype=float).ravel()
        if not (self.i.shape == self.j.shape == self.v.shape):
            raise ValueError("triplet arrays must have equal length")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.i.size:
            if self.i.min() < 0 or self.j.max() >= self.n:
                raise ValueError("triplet position out of range")
            if np.any(self.i > self.j):
                raise ValueError("triplets must satisfy i <= j (upper triangle)")
            pos = triu_index_of(self.n, self.i, self.j)
            if np.unique(pos).size != pos.size:
                raise ValueError("duplicate triplet positions")
        if not np.all(np.isfinite(self.v)):
            raise ValueError("triplet values must be finite")

    @classmethod
    def from_triplets(cls, n: int, triplets: Iterable[tuple[int, int, float]]) -> "SparseSymMat":
        rows, cols, vals = [], [], []
        for i, j, v in triplets:
            if i > j:
                i, j = j, i
            rows.append(i)
            cols.append(j)
            vals.append(v)
        return cls(n, np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
                   np.array(vals, dtype=float))

    @classmethod
    def from_dense(cls, x: np.ndarray, drop_tol: float = 0.0) -> "SparseSymMat":
        x = check_symmetric(x)
        n = x.shape[0]
        iu, ju = np.triu_indices(n)
        vals = x[iu, ju]
        keep = np.abs(vals) > drop_tol
        return cls(n, iu[keep], ju[keep], vals[keep])

    @property
    def nnz(self) -> int:
        return int(self.v.size)

    def dense(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        m[self.i, self.j] = self.v
        m[self.j, self.i] = self.v
        return m

    def triplets(self) -> list[tuple[int, int, float]]:
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.i, self.j, self.v)]

    def weights(self) -> np.ndarray:
        # factor 2 for off-diagonal positions in the symmetric inner product
        return np.where(self.i == self.j, 1.0, 2.0)

    def norm(self) -> float:
        """Frobenius norm of the full symmetric matrix."""
        return float(np.sqrt(np.sum(self.v * self.v * self.weights())))

    def inner(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n, self.n):
            raise ValueError(f"dimension mismatch: matrix is {self.n}x{self.n}, got {x.shape}")
        return float(np.sum(self.v * x[self.i, self.j] * self.weights()))


def inner(a: "SparseSymMat | np.ndarray", x: np.ndarray) -> float:
    """Symmetric inner product <a, x> = trace(a @ x)."""
    if isinstance(a, SparseSymMat):
        return a.inner(x)
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    if a.shape != x.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {x.shape}")
    return float(np.sum(a * x))


def fro_norm(a: "SparseSymMat | np.ndarray") -> float:
    if isinstance(a, SparseSymMat):
        return a.norm()
    return float(np.linalg.norm(np.asarray(a, dtype=float), "fro"))


@dataclass(eq=False)
class LinearConstraint:
    matrix: SparseSymMat
    rhs: float
    sense: ConstraintSense

    def __post_init__(self) -> None:
        self.rhs = float(self.rhs)
        self.sense = ConstraintSense(self.sense)
        if not np.isfinite(self.rhs):
            raise ValueError("constraint rhs must be finite")


class _Operators:
    """Cached vectorized forms of the constraint operator for one problem."""

    def __init__(self, sdp: "GeneralSdp") -> None:
        n = sdp.n
        self.iu, self.ju = np.triu_indices(n)
        self.nut = self.iu.size
        self.w = np.where(self.iu == self.ju, 1.0, 2.0)
        rows, cols, vals = [], [], []
        for k, con in enumerate(sdp.constraints):
            m = con.matrix
            rows.append(np.full(m.i.size, k, dtype=np.int64))
            cols.append(triu_index_of(n, m.i, m.j))
            vals.append(m.v)
        if sdp.m:
            r = np.concatenate(rows)
            c = np.concatenate(cols)
            v = np.concatenate(vals)
        else:
            r = np.zeros(0, dtype=np.int64)
            c = np.zeros(0, dtype=np.int64)
            v = np.zeros(0)
        # raw matrix entries at upper-triangle positions, one row per constraint
        self.A = sp.csr_matrix((v, (r, c)), shape=(sdp.m, self.nut))
        self.A_weighted = self.A.multiply(self.w).tocsr()
        self.At = self.A.T.tocsr()
        self.b = np.array([con.rhs for con in sdp.constraints], dtype=float)
        self.C_dense = sdp.c.dense()
        self.norm_b = float(np.linalg.norm(self.b))
        self.norm_C = sdp.c.norm()
        if sdp.nonneg_mask is not None:
            mi = np.array([p[0] for p in sdp.nonneg_mask], dtype=np.int64)
            mj = np.array([p[1] for p in sdp.nonneg_mask], dtype=np.int64)
            mask = np.zeros((n, n), dtype=bool)
            mask[mi, mj] = True
            mask[mj, mi] = True
            self.mask_dense = mask
        else:
            self.mask_dense = None

    def ut(self, x: np.ndarray) -> np.ndarray:
        return x[self.iu, self.ju]

    def from_ut(self, v: np.ndarray) -> np.ndarray:
        n = self.C_dense.shape[0]
        m = np.zeros((n, n))
        m[self.iu, self.ju] = v
        m[self.ju, self.iu] = v
        return m


@dataclass(eq=False)
class GeneralSdp:
    """General-form SDP in canonical internal MIN sense.

    `c` is the internal (minimization) objective.  Use `GeneralSdp.make`
    to construct from a user-sense objective.  Instances are treated as
    immutable after construction; solver state never aliases or mutates
    problem data, so one instance can be shared across worker processes.
    """

    n: int
    c: SparseSymMat
    constraints: tuple[LinearConstraint, ...]
    nonneg_mask: tuple[tuple[int, int], ...] | None = None
    user_sense: Sense = Sense.MIN
    objective_offset: float = 0.0

    def __post_init__(self) -> None:
        self.constraints = tuple(self.constraints)
        self.user_sense = Sense(self.user_sense)
        self.objective_offset = float(self.objective_offset)
        if self.c.n != self.n:
            raise ValueError("objective dimension does not match n")
        seen_eq = False
        for con in self.constraints:
            if con.matrix.n != self.n:
                raise ValueError("constraint dimension does not match n")
            if con.sense == ConstraintSense.EQ:
                seen_eq = True
            elif seen_eq:
                raise ValueError("constraints must be ordered inequalities first")
        if self.nonneg_mask is not None:
            mask = []
            for i, j in self.nonneg_mask:
                i, j = int(i), int(j)
                if i > j:
                    i, j = j, i
                if not (0 <= i <= j < self.n):
                    raise ValueError("nonneg_mask position out of range")
                mask.append((i, j))
            self.nonneg_mask = tuple(sorted(set(mask)))

    @classmethod
    def make(cls, n: int, objective: SparseSymMat,
             constraints: Sequence[LinearConstraint],
             sense: Sense = Sense.MIN, offset: float = 0.0,
             nonneg_mask: Sequence[tuple[int, int]] | None = None) -> "GeneralSdp":
        """Build from a user-sense objective (negated internally for MAX)."""
        sense = Sense(sense)
        c = objective
        if sense == Sense.MAX:
            c = SparseSymMat(objective.n, objective.i, objective.j, -objective.v)
        mask = tuple(nonneg_mask) if nonneg_mask is not None else None
        return cls(n=n, c=c, constraints=tuple(constraints), nonneg_mask=mask,
                   user_sense=sense, objective_offset=offset)

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def l(self) -> int:
        return sum(1 for con in self.constraints if con.sense == ConstraintSense.LE)

    @property
    def b(self) -> np.ndarray:
        return self.ops.b

    @cached_property
    def ops(self) -> _Operators:
        return _Operators(self)

    def reported_value(self, internal: float) -> float:
        """Translate an internal MIN-sense value to the user's sense."""
        if self.user_sense == Sense.MAX:
            return -internal + self.objective_offset
        return internal + self.objective_offset


def apply_A(sdp: GeneralSdp, x: np.ndarray) -> np.ndarray:
    """Evaluate the constraint operator: (<A_1, X>, ..., <A_m, X>)."""
    x = check_symmetric(x, "X")
    if x.shape[0] != sdp.n:
        raise ValueError(f"dimension mismatch: problem n={sdp.n}, got {x.shape}")
    ops = sdp.ops
    return ops.A_weighted @ ops.ut(x)


def apply_At(sdp: GeneralSdp, y: np.ndarray) -> np.ndarray:
    """Adjoint of the constraint operator: sum_i y_i A_i as a dense matrix."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size != sdp.m:
        raise ValueError(f"expected {sdp.m} multipliers, got {y.size}")
    ops = sdp.ops
    return ops.from_ut(ops.At @ y)


def gram(sdp: GeneralSdp) -> sp.csr_matrix:
    """Gram matrix of the constraint operator, G_ik = <A_i, A_k>."""
    ops = sdp.ops
    return (ops.A_weighted @ ops.A.T).tocsr()


def with_added_inequalities(sdp: GeneralSdp,
                            cuts: Sequence[LinearConstraint]) -> GeneralSdp:
    """Return a new problem with extra LE constraints appended to the
    inequality block (ordering invariant preserved)."""
    for con in cuts:
        if con.sense != ConstraintSense.LE:
            raise ValueError("can only append LE constraints")
    ineq = [con for con in sdp.constraints if con.sense == ConstraintSense.LE]
    eq = [con for con in sdp.constraints if con.sense == ConstraintSense.EQ]
    return GeneralSdp(n=sdp.n, c=sdp.c,
                      constraints=tuple(ineq) + tuple(cuts) + tuple(eq),
                      nonneg_mask=sdp.nonneg_mask, user_sense=sdp.user_sense,
                      objective_offset=sdp.objective_offset)


# ---------------------------------------------------------------------------
# JSON serialization.  Triplet indices are 1-based on disk (DIMACS habit);
# objective triplets are stored in the user's sense.

def instance_to_dict(sdp: GeneralSdp) -> dict:
    obj = sdp.c
    vals = -obj.v if sdp.user_sense == Sense.MAX else obj.v
    d = {
        "n": sdp.n,
        "sense": sdp.user_sense.value,
        "offset": sdp.objective_offset,
        "objective": {
            "triplets": [[int(i) + 1, int(j) + 1, float(v)]
                         for i, j, v in zip(obj.i, obj.j, vals)],
        },
        "constraints": [
            {
                "triplets": [[int(i) + 1, int(j) + 1, float(v)]
                             for i, j, v in zip(con.matrix.i, con.matrix.j, con.matrix.v)],
                "rhs": con.rhs,
                "sense": con.sense.value,
            }
            for con in sdp.constraints
        ],
        "nonneg_mask": ([[i + 1, j + 1] for i, j in sdp.nonneg_mask]
                        if sdp.nonneg_mask is not None else None),
    }
    return d


def _mat_from_dict(n: int, d: dict) -> SparseSymMat:
    trips = [(int(i) - 1, int(j) - 1, float(v)) for i, j, v in d["triplets"]]
    return SparseSymMat.from_triplets(n, trips)


def instance_from_dict(d: dict) -> GeneralSdp:
    n = int(d["n"])
    objective = _mat_from_dict(n, d["objective"])
    constraints = [
        LinearConstraint(_mat_from_dict(n, cd), float(cd["rhs"]),
                         ConstraintSense(cd["sense"]))
        for cd in d["constraints"]
    ]
    mask = d.get("nonneg_mask")
    mask_t = tuple((int(i) - 1, int(j) - 1) for i, j in mask) if mask is not None else None
    return GeneralSdp.make(n, objective, constraints,
                           sense=Sense(d.get("sense", "min")),
                           offset=float(d.get("offset", 0.0)),
                           nonneg_mask=mask_t)


def write_instance(sdp: GeneralSdp, path: str) -> None:
    with open(path, "w") as f:
        json.dump(instance_to_dict(sdp), f, indent=1)
        f.write("\n")


def read_instance(path: str) -> GeneralSdp:
    with open(path) as f:
        return instance_from_dict(json.load(f))
