"""Named graph families used in benchmarks and tests.

The classic clique/coloring benchmark graphs that have deterministic
constructions are generated here; each generator has been checked against
the published vertex and edge counts of the corresponding benchmark file.
Graph invariants (independence, clique, theta numbers) do not depend on
vertex order, so these are interchangeable with the historical files.
"""

from __future__ import annotations

import itertools
import re

import numpy as np

from .graphs import Graph


def empty_graph(n: int) -> Graph:
    return Graph.from_edges(n, [], name=f"empty{n}")


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, itertools.combinations(range(n), 2), name=f"k{n}")


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], name=f"c{n}")


def hamming_graph(bits: int, min_dist: int) -> Graph:
    """Binary Hamming graph: words of the given length, adjacent when
    their Hamming distance is at least min_dist (hamming6-2, hamming6-4)."""
    n = 1 << bits
    edges = [(u, v) for u, v in itertools.combinations(range(n), 2)
             if bin(u ^ v).count("1") >= min_dist]
    return Graph.from_edges(n, edges, name=f"hamming{bits}-{min_dist}")


def _keller_adjacent(u: tuple, v: tuple) -> bool:
    # adjacent when some coordinate differs by exactly 2 (mod 4) and the
    # tuples differ in at least two coordinates
    return any((a - b) % 4 == 2 for a, b in zip(u, v)) and \
        sum(a != b for a, b in zip(u, v)) >= 2


def keller_graph(dim: int) -> Graph:
    """Benchmark Keller graph: the dimension-d Keller graph on {0,1,2,3}^d
    induced on the neighborhood of the zero vertex (4^d - 3^d - d
    vertices; 171 and 9435 edges for d=4)."""
    zero = (0,) * dim
    verts = [v for v in itertools.product(range(4), repeat=dim)
             if _keller_adjacent(zero, v)]
    index = {v: k for k, v in enumerate(verts)}
    edges = [(index[u], index[v]) for u, v in itertools.combinations(verts, 2)
             if _keller_adjacent(u, v)]
    return Graph.from_edges(len(verts), edges, name=f"keller{dim}")


def _steiner_triples_9() -> list[tuple]:
    """The unique Steiner triple system on 9 points (lines of AG(2,3))."""
    pts = list(itertools.product(range(3), range(3)))
    lines = set()
    for a in pts:
        for d in [(0, 1), (1, 0), (1, 1), (1, 2)]:
            line = frozenset(((a[0] + k * d[0]) % 3, (a[1] + k * d[1]) % 3)
                             for k in range(3))
            lines.add(line)
    assert len(lines) == 12
    return sorted(tuple(sorted(l)) for l in lines)


def mann_a9_graph() -> Graph:
    """Steiner-triple clique encoding on STS(9): one vertex per
    (triple, point) incidence plus one per point; all pairs adjacent
    except slots of the same triple and a slot with its own point
    (45 vertices, 918 edges)."""
    triples = _steiner_triples_9()
    pts = sorted({p for t in triples for p in t})
    slots = [(t, p) for t in triples for p in t]
    n = len(slots) + len(pts)
    non_edges = set()
    for t_idx, t in enumerate(triples):
        base = 3 * t_idx
        for a, b in itertools.combinations(range(3), 2):
            non_edges.add((base + a, base + b))
    for s_idx, (t, p) in enumerate(slots):
        non_edges.add((s_idx, len(slots) + pts.index(p)))
    edges = [e for e in itertools.combinations(range(n), 2) if e not in non_edges]
    return Graph.from_edges(n, edges, name="MANN_a9")


def mycielski_graph(k: int) -> Graph:
    """Benchmark Mycielski tower indexed as the DIMACS files are:
    myciel1 = K2 and each step applies the Mycielski construction, so
    myciel2 = C5 (5/5), myciel3 = 11/20, myciel4 = 23/71, myciel5 = 47/236;
    the chromatic number of myciel{k} is k + 1."""
    if k < 1:
        raise ValueError("mycielski index starts at 1")
    n, edges = 2, {(0, 1)}
    for _ in range(k - 1):
        new = set(edges)
        for i, j in edges:
            new.add((min(i, n + j), max(i, n + j)))
            new.add((min(j, n + i), max(j, n + i)))
        for i in range(n):
            new.add((n + i, 2 * n))
        n, edges = 2 * n + 1, new
    return Graph.from_edges(n, edges, name=f"myciel{k}")


def queen_graph(rows: int, cols: int) -> Graph:
    """Queens graph: board cells, adjacent when they share a row, column,
    or diagonal (queen5_5 = 25/160, queen6_6 = 36/290)."""
    def cell(r: int, c: int) -> int:
        return r * cols + c

    edges = []
    for (r1, c1), (r2, c2) in itertools.combinations(
            itertools.product(range(rows), range(cols)), 2):
        if r1 == r2 or c1 == c2 or abs(r1 - r2) == abs(c1 - c2):
            edges.append((cell(r1, c1), cell(r2, c2)))
    return Graph.from_edges(rows * cols, edges, name=f"queen{rows}_{cols}")


def random_gnp(n: int, p: float, seed: int) -> Graph:
    """Uniform random graph, deterministic per seed."""
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2)
             if rng.random() < p]
    return Graph.from_edges(n, edges, name=f"gnp{n}_{p}_{seed}")


def random_two_density(n: int, p_lo: float, p_hi: float, seed: int) -> Graph:
    """Random graph with vertex-weighted edge probabilities interpolating
    between p_lo and p_hi, giving the uneven density texture of the
    p_hat benchmark family."""
    rng = np.random.default_rng(seed)
    weight = rng.random(n)
    edges = []
    for i, j in itertools.combinations(range(n), 2):
        prob = p_lo + (p_hi - p_lo) * 0.5 * (weight[i] + weight[j])
        if rng.random() < prob:
            edges.append((i, j))
    return Graph.from_edges(n, edges, name=f"two_density{n}_{seed}")


def by_name(name: str) -> Graph:
    """Resolve a benchmark-style instance name to a generated graph."""
    m = re.fullmatch(r"hamming(\d+)-(\d+)", name)
    if m:
        return hamming_graph(int(m.group(1)), int(m.group(2)))
    m = re.fullmatch(r"keller(\d+)", name)
    if m:
        return keller_graph(int(m.group(1)))
    if name == "MANN_a9":
        return mann_a9_graph()
    m = re.fullmatch(r"myciel(\d+)", name)
    if m:
        return mycielski_graph(int(m.group(1)))
    m = re.fullmatch(r"queen(\d+)_(\d+)", name)
    if m:
        return queen_graph(int(m.group(1)), int(m.group(2)))
    m = re.fullmatch(r"c(\d+)", name)
    if m:
        return cycle_graph(int(m.group(1)))
    m = re.fullmatch(r"k(\d+)", name)
    if m:
        return complete_graph(int(m.group(1)))
    m = re.fullmatch(r"empty(\d+)", name)
    if m:
        return empty_graph(int(m.group(1)))
    raise KeyError(f"no generator for instance name {name!r}")
