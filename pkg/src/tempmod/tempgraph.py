"""Temporal multigraph model and contact-sequence ingestion.

A temporal graph is a multigraph whose edges carry a positive weight and a
finite, strictly positive set of availability times.  Contact-sequence data
(one ``u v t [sigma]`` tuple per line) is aggregated into one edge per vertex
pair, with all timestamps of that pair collected into the edge's time set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class ContactParseError(ValueError):
    """Malformed contact-sequence input; carries the offending line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class EdgeRecord:
    """A (multi)edge with weight ``sigma`` and sorted availability times."""

    id: str
    tail: str
    head: str
    weight: float = 1.0
    times: tuple[float, ...] = ()

    def __post_init__(self):
        if self.weight <= 0:
            raise ValueError(f"edge {self.id}: weight must be positive, got {self.weight}")
        if not self.times:
            raise ValueError(f"edge {self.id}: availability time set is empty")
        if any(t <= 0 for t in self.times):
            raise ValueError(f"edge {self.id}: availability times must be positive")
        if any(a >= b for a, b in zip(self.times, self.times[1:])):
            raise ValueError(f"edge {self.id}: times must be strictly sorted")


@dataclass(frozen=True)
class StaticEdge:
    """An edge of the aggregated graph: same id and weight, no time data."""

    id: str
    tail: str
    head: str
    weight: float = 1.0


class TemporalGraph:
    """Immutable temporal multigraph.

    ``time_offset`` records the shift applied at parse time (raw timestamp =
    stored time + offset); it is zero unless the parser was asked to shift.
    """

    def __init__(self, vertices: Iterable[str], edges: Iterable[EdgeRecord],
                 directed: bool = False, time_offset: float = 0.0):
        self.vertices: tuple[str, ...] = tuple(vertices)
        self.edges: tuple[EdgeRecord, ...] = tuple(edges)
        self.directed = bool(directed)
        self.time_offset = float(time_offset)

        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        self.vertex_index: dict[str, int] = {v: i for i, v in enumerate(self.vertices)}
        seen_ids = set()
        for e in self.edges:
            if e.tail not in self.vertex_index or e.head not in self.vertex_index:
                raise ValueError(f"edge {e.id}: endpoint not a declared vertex")
            if e.id in seen_ids:
                raise ValueError(f"duplicate edge id {e.id}")
            seen_ids.add(e.id)
        self.edge_index: dict[str, int] = {e.id: i for i, e in enumerate(self.edges)}

    def __eq__(self, other):
        return (isinstance(other, TemporalGraph)
                and self.vertices == other.vertices
                and self.edges == other.edges
                and self.directed == other.directed
                and self.time_offset == other.time_offset)

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return (f"TemporalGraph({kind}, {len(self.vertices)} vertices, "
                f"{len(self.edges)} edges, {self.num_contacts()} edge-time pairs)")

    def num_contacts(self) -> int:
        return sum(len(e.times) for e in self.edges)

    def max_time(self) -> float:
        """Largest availability time over all edges (``M`` in scaling bounds)."""
        return max(max(e.times) for e in self.edges)

    def subgraph(self, keep: Sequence[str]) -> "TemporalGraph":
        """Induced subgraph on the given vertices (order preserved)."""
        keep_set = set(keep)
        edges = [e for e in self.edges if e.tail in keep_set and e.head in keep_set]
        return TemporalGraph(keep, edges, self.directed, self.time_offset)


@dataclass(frozen=True)
class StaticGraph:
    """The aggregated graph: identical vertices/edges/weights, no times."""

    vertices: tuple[str, ...]
    edges: tuple[StaticEdge, ...]
    directed: bool = False


def aggregate(g: TemporalGraph) -> StaticGraph:
    """Strip time data, keeping ids, weights and parallel edges intact."""
    return StaticGraph(
        vertices=g.vertices,
        edges=tuple(StaticEdge(e.id, e.tail, e.head, e.weight) for e in g.edges),
        directed=g.directed,
    )


def parse_contact_sequence(text: str, directed: bool, *, shift_times: bool = False,
                           drop_self_loops: bool = True) -> TemporalGraph:
    """Parse ``u v t [sigma]`` lines into an aggregated temporal graph.

    One edge is produced per distinct (u, v) pair (unordered pair when
    undirected); duplicate (u, v, t) triples collapse.  ``#`` starts a
    comment.  With ``shift_times`` the stored times are t - t_min + 1 and the
    offset is recorded on the graph; otherwise timestamps must already be
    positive.  Self-loop contacts are dropped by default.
    """
    pair_times: dict[tuple[str, str], set[float]] = {}
    pair_weight: dict[tuple[str, str], float] = {}
    vertices: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) not in (3, 4):
            raise ContactParseError(lineno, f"expected 3 or 4 tokens, got {len(tokens)}")
        u, v = tokens[0], tokens[1]
        try:
            t = float(tokens[2])
        except ValueError:
            raise ContactParseError(lineno, f"bad timestamp {tokens[2]!r}") from None
        if u == v and drop_self_loops:
            continue
        if directed:
            key = (u, v)
        else:
            key = (u, v) if u <= v else (v, u)
        vertices.update(key)
        pair_times.setdefault(key, set()).add(t)
        if len(tokens) == 4:
            try:
                w = float(tokens[3])
            except ValueError:
                raise ContactParseError(lineno, f"bad weight {tokens[3]!r}") from None
            prev = pair_weight.setdefault(key, w)
            if prev != w:
                raise ContactParseError(lineno, f"conflicting weights for pair {key}")

    offset = 0.0
    if shift_times and pair_times:
        t_min = min(min(ts) for ts in pair_times.values())
        offset = t_min - 1.0

    sep = "->" if directed else "--"
    edges = []
    for key in sorted(pair_times):
        u, v = key
        times = tuple(sorted(t - offset for t in pair_times[key]))
        if times[0] <= 0:
            raise ValueError(
                f"edge {u}{sep}{v}: non-positive availability time {times[0]}"
                " (re-parse with shift_times=True)")
        edges.append(EdgeRecord(f"{u}{sep}{v}", u, v, pair_weight.get(key, 1.0), times))

    return TemporalGraph(sorted(vertices), edges, directed, offset)


def serialize_contact_sequence(g: TemporalGraph) -> str:
    """Canonical contact-sequence text: one line per contact, sorted by (u, v, t).

    Raw timestamps (stored time + offset) are emitted, so a shifted parse
    round-trips to the original data.
    """
    lines = []
    for e in sorted(g.edges, key=lambda e: (e.tail, e.head)):
        for t in e.times:
            raw_t = t + g.time_offset
            if e.weight == 1.0:
                lines.append(f"{e.tail} {e.head} {raw_t!r}")
            else:
                lines.append(f"{e.tail} {e.head} {raw_t!r} {e.weight!r}")
    return "\n".join(lines) + ("\n" if lines else "")


def largest_weakly_connected_component(g: TemporalGraph) -> TemporalGraph:
    """Induced subgraph on the largest component of the undirected skeleton.

    Ties between equal-size components go to the one containing the smallest
    vertex id.  An empty graph is returned unchanged.
    """
    if not g.vertices:
        return g

    adj: dict[str, set[str]] = {v: set() for v in g.vertices}
    for e in g.edges:
        adj[e.tail].add(e.head)
        adj[e.head].add(e.tail)

    seen: set[str] = set()
    best: list[str] = []
    for start in g.vertices:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        stack = [start]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    stack.append(w)
        if len(comp) > len(best) or (len(comp) == len(best) and min(comp) < min(best)):
            best = comp

    keep = sorted(best)
    return g.subgraph(keep)
