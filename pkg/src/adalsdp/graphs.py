"""Undirected simple graphs and DIMACS edge-format i/o.

Vertices are 0-based internally; DIMACS files are 1-based and converted
on the way in and out.  The reader is strict about line grammar (any
unrecognized line type is an error with its line number) but tolerant
about data anomalies that occur in benchmark files: duplicate edges,
self-loops, and a header edge count that disagrees with the body are
each reported as a warning, not an error.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from pathlib import Path


class DimacsError(ValueError):
    pass


class MissingHeader(DimacsError):
    pass


class MalformedLine(DimacsError):
    def __init__(self, line_no: int, text: str, why: str = "") -> None:
        self.line_no = line_no
        msg = f"line {line_no}: malformed DIMACS line {text!r}"
        if why:
            msg += f" ({why})"
        super().__init__(msg)


class VertexOutOfRange(DimacsError):
    def __init__(self, line_no: int, vertex: int, n: int) -> None:
        self.line_no = line_no
        super().__init__(f"line {line_no}: vertex {vertex} outside 1..{n}")


class ParseWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]
    name: str = ""

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("graph must have at least one vertex")
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop on vertex {i}")
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge ({i}, {j}) not canonical for n={self.n}")

    @staticmethod
    def from_edges(n: int, edges, name: str = "") -> "Graph":
        canon = frozenset((min(i, j), max(i, j)) for i, j in edges)
        return Graph(n=n, edges=canon, name=name)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def non_edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j in itertools.combinations(range(self.n), 2)
                if (i, j) not in self.edges]

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def complement(g: Graph) -> Graph:
    """Complement graph on the same vertex set."""
    all_pairs = frozenset(itertools.combinations(range(g.n), 2))
    name = g.name[:-len(".complement")] if g.name.endswith(".complement") \
        else (g.name + ".complement" if g.name else "")
    return Graph(n=g.n, edges=all_pairs - g.edges, name=name)


def parse_dimacs(text: str, name: str = "") -> Graph:
    """Parse DIMACS edge format ("p edge N M" header plus "e i j" lines)."""
    n = None
    declared_m = None
    edges: set[tuple[int, int]] = set()
    dupes = 0
    loops = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].lower()
        if kind == "c":
            continue
        if kind == "p":
            if n is not None:
                raise MalformedLine(line_no, raw, "duplicate problem line")
            if len(parts) != 4 or parts[1].lower() not in ("edge", "edges", "col", "clq"):
                raise MalformedLine(line_no, raw, "expected 'p edge N M'")
            try:
                n = int(parts[2])
                declared_m = int(parts[3])
            except ValueError as exc:
                raise MalformedLine(line_no, raw, "non-integer sizes") from exc
            if n < 1:
                raise MalformedLine(line_no, raw, "vertex count must be positive")
        elif kind == "e":
            if n is None:
                raise MissingHeader(f"line {line_no}: edge before 'p' header")
            if len(parts) != 3:
                raise MalformedLine(line_no, raw, "expected 'e i j'")
            try:
                i, j = int(parts[1]), int(parts[2])
            except ValueError as exc:
                raise MalformedLine(line_no, raw, "non-integer endpoints") from exc
            for v in (i, j):
                if not 1 <= v <= n:
                    raise VertexOutOfRange(line_no, v, n)
            if i == j:
                loops += 1
                continue
            edge = (min(i, j) - 1, max(i, j) - 1)
            if edge in edges:
                dupes += 1
            edges.add(edge)
        else:
            raise MalformedLine(line_no, raw, f"unknown line type {parts[0]!r}")
    if n is None:
        raise MissingHeader("no 'p edge N M' header found")
    if dupes:
        warnings.warn(f"{name or 'graph'}: {dupes} duplicate edge line(s) ignored",
                      ParseWarning, stacklevel=2)
    if loops:
        warnings.warn(f"{name or 'graph'}: {loops} self-loop line(s) ignored",
                      ParseWarning, stacklevel=2)
    if declared_m is not None and declared_m != len(edges):
        warnings.warn(
            f"{name or 'graph'}: header declares {declared_m} edges, body has {len(edges)}",
            ParseWarning, stacklevel=2)
    return Graph(n=n, edges=frozenset(edges), name=name)


def read_dimacs(path: str | Path) -> Graph:
    path = Path(path)
    return parse_dimacs(path.read_text(), name=path.stem)


def write_dimacs(g: Graph, path: str | Path, comment: str = "") -> None:
    lines = []
    if comment:
        lines.append(f"c {comment}")
    lines.append(f"p edge {g.n} {g.edge_count}")
    for i, j in g.edge_list():
        lines.append(f"e {i + 1} {j + 1}")
    Path(path).write_text("\n".join(lines) + "\n")
