import io
from collections import deque
from enum import Enum

import numpy as np


class GraphFormatError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphKind(str, Enum):
    PATH = "path"
    STAR = "star"
    COMPLETE = "complete"
    GRID = "grid"
    RANDOM_CONNECTED = "random_connected"


class WeightDistribution(str, Enum):
    UNIFORM_1_TO_N = "uniform_1_to_n"
    ALL_EQUAL = "all_equal"
    DISTINCT_SHUFFLED = "distinct_shuffled"


class WeightedGraph:
    """
    Immutable undirected weighted graph. Nodes are positive integer identifiers,
    weights are positive integers.
    """

    __slots__ = ("_adjacency", "_nodes", "_edges", "max_weight")

    def __init__(self, nodes, edges, max_weight=None):
        nodes = sorted(set(int(v) for v in nodes))
        if not nodes:
            raise ValueError("A graph needs at least one node.")
        if nodes[0] < 1:
            raise ValueError("Node identifiers must be positive integers.")
        n = len(nodes)
        max_weight = n if max_weight is None else max_weight
        adjacency = {v: {} for v in nodes}
        canonical = {}
        for u, v, w in edges:
            u, v, w = int(u), int(v), int(w)
            if u == v:
                raise ValueError(f"Self-loop on node {u}.")
            if u not in adjacency or v not in adjacency:
                raise ValueError(f"Edge ({u}, {v}) references an unknown node.")
            a, b = min(u, v), max(u, v)
            if (a, b) in canonical:
                raise ValueError(f"Duplicate edge ({a}, {b}).")
            if not 1 <= w <= max_weight:
                raise ValueError(f"Weight {w} of edge ({a}, {b}) out of [1, {max_weight}].")
            canonical[(a, b)] = w
            adjacency[a][b] = w
            adjacency[b][a] = w
        self._nodes = tuple(nodes)
        self._adjacency = {v: dict(sorted(adjacency[v].items())) for v in nodes}
        self._edges = tuple((a, b, canonical[(a, b)]) for a, b in sorted(canonical))
        self.max_weight = max_weight
        if not self.is_connected():
            raise ValueError("Graph is not connected.")

    @property
    def n(self):
        return len(self._nodes)

    @property
    def nodes(self):
        return self._nodes

    @property
    def max_id(self):
        return self._nodes[-1]

    def neighbors(self, v):
        return tuple(self._adjacency[v])

    def degree(self, v):
        return len(self._adjacency[v])

    def weight(self, u, v):
        return self._adjacency[u][v]

    def incident(self, v):
        return self._adjacency[v]

    def edges(self):
        return self._edges

    def has_edge(self, u, v):
        return v in self._adjacency.get(u, {})

    def is_connected(self):
        start = self._nodes[0]
        seen = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u in self._adjacency[v]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        return len(seen) == len(self._nodes)

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __hash__(self):
        return hash((self._nodes, self._edges))

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={len(self._edges)})"


def _weights(count, n, weight_dist, rng):
    weight_dist = WeightDistribution(weight_dist)
    if weight_dist == WeightDistribution.ALL_EQUAL:
        return [1] * count
    if weight_dist == WeightDistribution.UNIFORM_1_TO_N:
        return [int(w) for w in rng.integers(1, n + 1, size=count)]
    # distinct where possible, cycling through a shuffled 1..n otherwise
    pool = list(rng.permutation(np.arange(1, n + 1)))
    return [int(pool[i % n]) for i in range(count)]


def generate(kind, n, weight_dist="uniform_1_to_n", seed=0):
    kind = GraphKind(kind)
    if n < 1:
        raise ValueError(f"Invalid n={n}: must be positive.")
    rng = np.random.default_rng(seed)
    nodes = list(range(1, n + 1))
    pairs = []
    if kind == GraphKind.PATH:
        pairs = [(i, i + 1) for i in range(1, n)]
    elif kind == GraphKind.STAR:
        pairs = [(1, i) for i in range(2, n + 1)]
    elif kind == GraphKind.COMPLETE:
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    elif kind == GraphKind.GRID:
        side = int(round(n**0.5))
        if side * side != n:
            raise ValueError(f"Invalid n={n} for grid: must be a perfect square.")
        for r in range(side):
            for c in range(side):
                v = r * side + c + 1
                if c + 1 < side:
                    pairs.append((v, v + 1))
                if r + 1 < side:
                    pairs.append((v, v + side))
    elif kind == GraphKind.RANDOM_CONNECTED:
        order = [int(v) for v in rng.permutation(np.arange(1, n + 1))]
        chosen = set()
        for i in range(1, n):
            u = order[i]
            v = order[int(rng.integers(0, i))]
            chosen.add((min(u, v), max(u, v)))
        extra = int(rng.integers(0, n + 1)) if n > 2 else 0
        for _ in range(extra):
            u, v = (int(x) for x in rng.choice(n, size=2, replace=False) + 1)
            chosen.add((min(u, v), max(u, v)))
        pairs = sorted(chosen)
    weights = _weights(len(pairs), n, weight_dist, rng)
    return WeightedGraph(nodes, [(u, v, w) for (u, v), w in zip(pairs, weights)])


def graph_from_spec(spec, polynomial_weights=False):
    """
    Builds a graph from either a file path or a generator spec
    "gen:kind:n:dist[:seed]".
    """
    if spec.startswith("gen:"):
        parts = spec.split(":")
        if len(parts) not in (4, 5):
            raise ValueError(f"Invalid generator spec: {spec}")
        seed = int(parts[4]) if len(parts) == 5 else 0
        return generate(parts[1], int(parts[2]), parts[3], seed)
    with open(spec, "rb") as f:
        return parse_graph(f.read(), polynomial_weights=polynomial_weights)


def parse_graph(text, polynomial_weights=False):
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    header = None
    edges = []
    seen = set()
    ids = set()
    for number, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            values = [int(x) for x in fields]
        except ValueError:
            raise GraphFormatError(f"expected integers, got {line!r}", number)
        if header is None:
            if len(values) != 2 or values[0] < 1 or values[1] < 0:
                raise GraphFormatError("header must be 'n m' with n >= 1", number)
            header = values
            continue
        if len(values) != 3:
            raise GraphFormatError("edge line must be 'u v w'", number)
        u, v, w = values
        n = header[0]
        if not u < v:
            raise GraphFormatError(f"edge endpoints must satisfy u < v, got {u} {v}", number)
        if u < 1 or v > n**3:
            raise GraphFormatError(f"identifier out of [1, {n ** 3}]", number)
        if (u, v) in seen:
            raise GraphFormatError(f"duplicate edge ({u}, {v})", number)
        max_weight = n**3 if polynomial_weights else n
        if not 1 <= w <= max_weight:
            raise GraphFormatError(f"weight {w} out of [1, {max_weight}]", number)
        seen.add((u, v))
        ids.update((u, v))
        edges.append((u, v, w))
    if header is None:
        raise GraphFormatError("empty graph file")
    n, m = header
    if len(edges) != m:
        raise GraphFormatError(f"header announces {m} edges, found {len(edges)}")
    if n == 1 and not ids:
        ids = {1}
    if len(ids) != n:
        raise GraphFormatError(f"disconnected: {len(ids)} of {n} nodes are covered by edges")
    try:
        return WeightedGraph(
            ids, edges, max_weight=n**3 if polynomial_weights else n
        )
    except ValueError as error:
        raise GraphFormatError(str(error))


def write_graph(g):
    lines = [f"{g.n} {len(g.edges())}"]
    lines.extend(f"{u} {v} {w}" for u, v, w in g.edges())
    return ("\n".join(lines) + "\n").encode("utf-8")
