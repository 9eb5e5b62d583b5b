"""Undirected graphs with planted community labels.

Vertices are integers ``0..n-1``. Generated instances number vertices so
that each community is a contiguous block, which keeps block structure
visible in any vertex-ordered matrix.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from spikecomm.errors import ParameterError, ParseError


@dataclass(frozen=True)
class LabeledGraph:
    """Simple undirected graph plus one community id per vertex.

    ``edges`` holds ``(u, v)`` tuples with ``u < v``; ``labels[v]`` is the
    community of vertex ``v``. Community ids must be ``0..k-1`` with every
    id used.
    """

    n: int
    edges: frozenset
    labels: tuple

    def __post_init__(self):
        if self.n < 0:
            raise ParameterError(f"vertex count must be >= 0, got {self.n}")
        canon = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ParameterError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ParameterError(f"edge ({u}, {v}) out of range for n={self.n}")
            canon.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(canon))
        labels = tuple(int(c) for c in self.labels)
        if len(labels) != self.n:
            raise ParameterError(f"expected {self.n} labels, got {len(labels)}")
        if labels and set(labels) != set(range(max(labels) + 1)):
            raise ParameterError("community ids must be contiguous integers from 0")
        object.__setattr__(self, "labels", labels)

    @property
    def num_communities(self) -> int:
        return max(self.labels) + 1 if self.labels else 0

    def communities(self) -> list[list[int]]:
        """Vertex ids per community, each list ascending."""
        out: list[list[int]] = [[] for _ in range(self.num_communities)]
        for v, c in enumerate(self.labels):
            out[c].append(v)
        return out

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def adjacency(self) -> np.ndarray:
        """Dense boolean adjacency matrix."""
        a = np.zeros((self.n, self.n), dtype=bool)
        if self.edges:
            e = np.array(self.sorted_edges())
            a[e[:, 0], e[:, 1]] = True
            a[e[:, 1], e[:, 0]] = True
        return a

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        ncomp, _ = connected_components(coo_matrix(self.adjacency()), directed=False)
        return ncomp == 1


@dataclass(frozen=True)
class PartitionSpec:
    """Parameters of a planted-partition benchmark instance.

    Defaults give the classic Girvan-Newman setup: 128 vertices, four
    communities of 32 and mean degree 16, of which ``z_out`` edges per
    vertex (in expectation) leave the vertex's community.
    """

    n: int = 128
    num_communities: int = 4
    z_out: float = 2.0
    avg_degree: float = 16.0
    seed: int = 0

    def __post_init__(self):
        if self.num_communities < 1 or self.n < 1:
            raise ParameterError("n and num_communities must be positive")
        if self.n % self.num_communities:
            raise ParameterError(
                f"n={self.n} is not divisible by num_communities={self.num_communities}"
            )
        if not 0 <= self.z_out <= self.avg_degree:
            raise ParameterError(
                f"z_out={self.z_out} must lie in [0, avg_degree={self.avg_degree}]"
            )
        order = self.community_order
        if order > 1 and self.z_in > order - 1:
            raise ParameterError(
                f"z_in={self.z_in} exceeds community order - 1 = {order - 1}"
            )
        if order == 1 and self.z_in > 0:
            raise ParameterError("singleton communities cannot have intra-community degree")
        if self.num_communities > 1 and self.z_out > self.n - order:
            raise ParameterError(f"z_out={self.z_out} exceeds n - community order")
        if self.num_communities == 1 and self.z_out > 0:
            raise ParameterError("a single community cannot have inter-community degree")

    @property
    def community_order(self) -> int:
        return self.n // self.num_communities

    @property
    def z_in(self) -> float:
        return self.avg_degree - self.z_out

    @property
    def p_in(self) -> float:
        order = self.community_order
        return self.z_in / (order - 1) if order > 1 else 0.0

    @property
    def p_out(self) -> float:
        rest = self.n - self.community_order
        return self.z_out / rest if rest > 0 else 0.0


def generate_planted_partition(spec: PartitionSpec) -> LabeledGraph:
    """Sample a graph with independent Bernoulli edges.

    Each intra-community pair is joined with probability ``spec.p_in`` and
    each inter-community pair with ``spec.p_out``. Vertex ``v`` belongs to
    community ``v // community_order``. Output is deterministic in
    ``spec.seed``. A ``RuntimeWarning`` is emitted for disconnected output.
    """
    rng = np.random.default_rng(spec.seed)
    labels = np.arange(spec.n) // spec.community_order
    iu, ju = np.triu_indices(spec.n, k=1)
    same = labels[iu] == labels[ju]
    prob = np.where(same, spec.p_in, spec.p_out)
    keep = rng.random(iu.size) < prob
    edges = frozenset(zip(iu[keep].tolist(), ju[keep].tolist()))
    g = LabeledGraph(spec.n, edges, tuple(labels.tolist()))
    if not g.is_connected():
        warnings.warn(
            f"generated graph (seed={spec.seed}) is disconnected", RuntimeWarning, stacklevel=2
        )
    return g


def _lines(text: str) -> Iterable[tuple[int, str]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _int_pair(lineno: int, line: str, what: str) -> tuple[int, int]:
    parts = [p.strip() for p in line.split(",")]
    if len(parts) != 2:
        raise ParseError(f"{what} line {lineno}: expected two comma-separated ids, got {line!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"{what} line {lineno}: non-integer value in {line!r}") from None


def load_edge_list(edge_text: str, label_text: str) -> LabeledGraph:
    """Parse ``u,v`` edge lines and ``vertex,community`` label lines.

    The vertex count is the number of labelled vertices; labels must cover
    ``0..n-1`` exactly once each. Blank lines and ``#`` comments are skipped.
    """
    labels: dict[int, int] = {}
    for lineno, line in _lines(label_text):
        v, c = _int_pair(lineno, line, "label")
        if v < 0 or c < 0:
            raise ParseError(f"label line {lineno}: negative id in {line!r}")
        if v in labels:
            raise ParseError(f"label line {lineno}: vertex {v} labelled twice")
        labels[v] = c
    n = len(labels)
    missing = sorted(set(range(n)) - labels.keys())
    if missing:
        raise ParseError(f"labels: missing label for vertex {missing[0]} (ids must be 0..{n - 1})")
    comm_ids = set(labels.values())
    if comm_ids and comm_ids != set(range(max(comm_ids) + 1)):
        raise ParseError("labels: community ids must be contiguous integers from 0")

    edges: set[tuple[int, int]] = set()
    for lineno, line in _lines(edge_text):
        u, v = _int_pair(lineno, line, "edge")
        if u == v:
            raise ParseError(f"edge line {lineno}: self-loop ({u},{v})")
        for x in (u, v):
            if not 0 <= x < n:
                raise ParseError(f"edge line {lineno}: vertex {x} out of range [0, {n})")
        key = (min(u, v), max(u, v))
        if key in edges:
            raise ParseError(f"edge line {lineno}: duplicate edge ({u},{v})")
        edges.add(key)
    return LabeledGraph(n, frozenset(edges), tuple(labels[v] for v in range(n)))


def save_edge_list(g: LabeledGraph) -> tuple[str, str]:
    """Return ``(edge_text, label_text)``, edges ascending with ``u < v``."""
    edge_text = "".join(f"{u},{v}\n" for u, v in g.sorted_edges())
    label_text = "".join(f"{v},{c}\n" for v, c in enumerate(g.labels))
    return edge_text, label_text


def graph_to_json(g: LabeledGraph) -> str:
    return json.dumps({"n": g.n, "edges": [list(e) for e in g.sorted_edges()], "labels": list(g.labels)})


def graph_from_json(text: str) -> LabeledGraph:
    try:
        doc = json.loads(text)
        return LabeledGraph(int(doc["n"]), frozenset(tuple(e) for e in doc["edges"]), tuple(doc["labels"]))
    except (KeyError, TypeError, json.JSONDecodeError, ParameterError) as exc:
        raise ParseError(f"invalid graph JSON: {exc}") from exc


@dataclass(frozen=True)
class DegreeStats:
    mean_degree: float
    intra: tuple = field(default=())
    inter: tuple = field(default=())


def degree_stats(g: LabeledGraph) -> DegreeStats:
    """Mean degree plus per-community mean intra- and inter-community degree."""
    if g.n == 0:
        return DegreeStats(0.0)
    adj = g.adjacency()
    labels = np.asarray(g.labels)
    same = labels[:, None] == labels[None, :]
    intra_deg = (adj & same).sum(axis=1)
    inter_deg = (adj & ~same).sum(axis=1)
    intra = tuple(float(intra_deg[labels == c].mean()) for c in range(g.num_communities))
    inter = tuple(float(inter_deg[labels == c].mean()) for c in range(g.num_communities))
    return DegreeStats(float(adj.sum(axis=1).mean()), intra, inter)
