"""Theta-family SDP relaxations for stable set and coloring bounds.

Three builders:

  * `build_theta(g)`: the Lovasz theta SDP, max <J, X> with trace(X) = 1
    and X_ij = 0 on edges.  Upper bound on the stability number of g.
  * `build_theta_plus(g)`: theta strengthened with X >= 0 elementwise
    (full nonneg_mask).  Tighter upper bound on the stability number.
  * `build_theta_bar_plus(g)`: the coloring-side relaxation.  For the
    graph g to be colored: min t with X_ii = t - 1, X_ij = -1 on the
    edges of g and X_ij >= -1 elsewhere, X PSD.  The auxiliary t is
    eliminated through t = X_11 + 1, giving a MIN problem with objective
    <e1 e1^T, X>, offset +1, and diagonal-tie equalities.  The solved
    value lower-bounds the chromatic number of g (and equals n on K_n).

`sample_triangle_cuts` draws valid inequalities X_ij + X_ik - X_jk <= t-1
(one per ordered triple with a distinguished apex) for strengthening the
coloring relaxation; in eliminated form the right side becomes X_11.
"""

from __future__ import annotations

import numpy as np

from .core import ConstraintSense, GeneralSdp, LinearConstraint, Sense, SparseSymMat
from .graphs import Graph


class CountExceedsPopulation(ValueError):
    pass


def _edge_matrix(n: int, i: int, j: int, scale: float = 0.5) -> SparseSymMat:
    # coefficient 1/2 on each symmetric position so <A, X> reads X_ij
    return SparseSymMat.from_triplets(n, [(i, j, scale)])


def build_theta(g: Graph) -> GeneralSdp:
    """Lovasz theta as a MAX problem: <J, X>, trace 1, zeros on edges."""
    n = g.n
    iu, ju = np.triu_indices(n)
    objective = SparseSymMat(n, iu, ju, np.ones(iu.size))
    trace_con = LinearConstraint(
        SparseSymMat(n, np.arange(n), np.arange(n), np.ones(n)), 1.0,
        ConstraintSense.EQ)
    cons = [trace_con]
    for i, j in g.edge_list():
        cons.append(LinearConstraint(_edge_matrix(n, i, j), 0.0, ConstraintSense.EQ))
    return GeneralSdp.make(n, objective, cons, sense=Sense.MAX)


def build_theta_plus(g: Graph) -> GeneralSdp:
    """Theta with an elementwise nonnegativity mask over the full matrix."""
    base = build_theta(g)
    iu, ju = np.triu_indices(g.n)
    mask = tuple(zip(iu.tolist(), ju.tolist()))
    return GeneralSdp(n=base.n, c=base.c, constraints=base.constraints,
                      nonneg_mask=mask, user_sense=base.user_sense,
                      objective_offset=base.objective_offset)


def build_theta_bar_plus(g: Graph) -> GeneralSdp:
    """Coloring bound for g with the scalar variable eliminated.

    Inequalities first: -X_ij <= 1 for every non-edge of g.  Equalities:
    X_ii - X_11 = 0 for i >= 2, then X_ij = -1 on the edges of g.
    Objective <e1 e1^T, X> with offset +1, MIN sense.
    """
    n = g.n
    if n < 2:
        raise ValueError("coloring relaxation needs n >= 2")
    objective = SparseSymMat.from_triplets(n, [(0, 0, 1.0)])
    cons: list[LinearConstraint] = []
    for i, j in g.non_edges():
        cons.append(LinearConstraint(_edge_matrix(n, i, j, -0.5), 1.0,
                                     ConstraintSense.LE))
    for i in range(1, n):
        mat = SparseSymMat.from_triplets(n, [(0, 0, -1.0), (i, i, 1.0)])
        cons.append(LinearConstraint(mat, 0.0, ConstraintSense.EQ))
    for i, j in g.edge_list():
        cons.append(LinearConstraint(_edge_matrix(n, i, j), -1.0,
                                     ConstraintSense.EQ))
    return GeneralSdp.make(n, objective, cons, sense=Sense.MIN, offset=1.0)


def triangle_cut_population(n: int) -> int:
    """Number of available cuts: one per (apex, pair) choice."""
    return n * (n - 1) * (n - 2) // 2


def sample_triangle_cuts(g: Graph | int, count: int,
                         seed: int) -> list[LinearConstraint]:
    """Sample distinct triangle inequalities uniformly, deterministically
    per seed.  Each cut is X_ij + X_ik - X_jk - X_11 <= 0 for an apex i
    and a pair j < k over the vertex set (edges play no role in which
    triples are valid), ready to append to the coloring relaxation's
    inequality block."""
    n = g if isinstance(g, int) else g.n
    if n < 3:
        raise ValueError("triangle cuts need n >= 3")
    if count < 0:
        raise ValueError("count must be nonnegative")
    population = triangle_cut_population(n)
    if count > population:
        raise CountExceedsPopulation(
            f"requested {count} cuts, population is {population}")
    rng = np.random.default_rng(seed)
    chosen: set[tuple[int, int, int]] = set()
    if 3 * count > population:
        # dense request: enumerate the population and subsample directly
        triples = [(i, j, k) for i in range(n) for j in range(n)
                   for k in range(j + 1, n) if i != j and i != k]
        picked = rng.choice(len(triples), size=count, replace=False)
        chosen = {triples[t] for t in picked}
    while len(chosen) < count:
        i, j, k = (int(v) for v in rng.integers(0, n, size=3))
        if i == j or i == k or j == k:
            continue
        if j > k:
            j, k = k, j
        chosen.add((i, j, k))
    cuts = []
    for i, j, k in sorted(chosen):
        trips = [(min(i, j), max(i, j), 0.5), (min(i, k), max(i, k), 0.5),
                 (j, k, -0.5), (0, 0, -1.0)]
        cuts.append(LinearConstraint(SparseSymMat.from_triplets(n, trips), 0.0,
                                     ConstraintSense.LE))
    return cuts
