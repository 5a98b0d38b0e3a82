import json
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum

from ssmst.lib.bits import gamma_length
from ssmst.lib.milestones import transform_index
from ssmst.lib.oracle import edge_key, is_spanning_tree


class InvalidTreeError(ValueError):
    pass


class LabelFormatError(ValueError):
    pass


class Orientation(IntEnum):
    SELF_IS_CENTER = 0
    TOWARD_PARENT = 1
    TOWARD_CHILD = 2


@dataclass(frozen=True)
class LevelRecord:
    subtree_number: int
    max_weight_index: int
    orientation: Orientation

    @property
    def is_center(self):
        return self.orientation == Orientation.SELF_IS_CENTER

    def bits(self, weight_index_width):
        # center records carry only their orientation code
        if self.is_center:
            return 2
        return 2 + gamma_length(self.subtree_number) + weight_index_width


CENTER_RECORD = LevelRecord(0, 0, Orientation.SELF_IS_CENTER)


@dataclass(frozen=True)
class CertificateLabel:
    orient_parent: object
    desc_count: int
    total_n: int
    levels: tuple = field(default_factory=tuple)

    @property
    def is_center_at(self):
        if self.levels and self.levels[-1].is_center:
            return len(self.levels) - 1
        return None

    def subtree_numbers(self):
        return [r.subtree_number for r in self.levels if not r.is_center]


def label_from_state(state):
    return CertificateLabel(
        orient_parent=state.build.orient_parent,
        desc_count=state.build.desc_count,
        total_n=state.build.total_n,
        levels=state.cert.levels,
    )


def label_bits(label, widths):
    """Serialized size of a label: acyclicity part plus the length-prefixed level stack."""
    return (
        widths.node_id
        + 2 * widths.counter
        + widths.counter
        + sum(r.bits(widths.weight_index) for r in label.levels)
    )


def tree_adjacency(nodes, es):
    adjacency = {v: [] for v in nodes}
    for u, v in es:
        adjacency[u].append(v)
        adjacency[v].append(u)
    return {v: sorted(ns) for v, ns in adjacency.items()}


def _component(adjacency, start, scope, blocked=None):
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for u in adjacency[v]:
            if u in scope and u != blocked and u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def find_center(adjacency, scope):
    """
    Node of the scope whose removal leaves pieces of size at most |scope| / 2;
    the smallest identifier wins among several.
    """
    scope = set(scope)
    if not scope:
        raise ValueError("find_center needs a nonempty scope")
    size = len(scope)
    root = min(scope)
    order = []
    parent = {root: None}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        order.append(v)
        for u in adjacency[v]:
            if u in scope and u not in parent:
                parent[u] = v
                queue.append(u)
    below = {v: 1 for v in order}
    for v in reversed(order):
        if parent[v] is not None:
            below[parent[v]] += below[v]
    for v in sorted(order):
        pieces = [below[u] for u in adjacency[v] if u in scope and parent.get(u) == v]
        if parent[v] is not None:
            pieces.append(size - below[v])
        if all(2 * piece <= size for piece in pieces):
            return v
    raise AssertionError("a tree always has a center")


def orient(nodes, es, root=None):
    """Orientation toward root (default: minimum identifier) and descendant counts."""
    adjacency = tree_adjacency(nodes, es)
    root = min(nodes) if root is None else root
    parent = {root: None}
    order = []
    queue = deque([root])
    while queue:
        v = queue.popleft()
        order.append(v)
        for u in adjacency[v]:
            if u not in parent:
                parent[u] = v
                queue.append(u)
    desc = {v: 1 for v in order}
    for v in reversed(order):
        if parent[v] is not None:
            desc[parent[v]] += desc[v]
    return parent, desc


def reference_label(g, tree, ms, root=None):
    """
    Centralized prover: recursive centroid decomposition of the tree, subtrees numbered
    by decreasing size (ties by smaller subtree-root identifier), maximum transformed
    weight toward each center, orientation relative to the rooted tree.
    """
    tree = [edge_key(u, v) for u, v in tree]
    if not is_spanning_tree(g, tree):
        raise InvalidTreeError("reference_label needs a spanning tree of the graph")
    adjacency = tree_adjacency(g.nodes, tree)
    parent, desc = orient(g.nodes, tree, root)
    levels = {v: [] for v in g.nodes}

    pending = [set(g.nodes)]
    while pending:
        scope = pending.pop()
        center = find_center(adjacency, scope)
        levels[center].append(CENTER_RECORD)
        pieces = []
        for x in adjacency[center]:
            if x in scope:
                pieces.append((x, _component(adjacency, x, scope, blocked=center)))
        pieces.sort(key=lambda item: (-len(item[1]), item[0]))
        for number, (x, piece) in enumerate(pieces, start=1):
            toward = {x: center}
            maxw = {x: transform_index(g.weight(x, center), ms)}
            queue = deque([x])
            while queue:
                v = queue.popleft()
                for u in adjacency[v]:
                    if u in piece and u not in toward:
                        toward[u] = v
                        maxw[u] = max(maxw[v], transform_index(g.weight(u, v), ms))
                        queue.append(u)
            for v in piece:
                code = (
                    Orientation.TOWARD_PARENT
                    if toward[v] == parent[v]
                    else Orientation.TOWARD_CHILD
                )
                levels[v].append(LevelRecord(number, maxw[v], code))
            pending.append(piece)

    return {
        v: CertificateLabel(parent[v], desc[v], g.n, tuple(levels[v])) for v in g.nodes
    }


def dump_labels(labels):
    lines = []
    for v in sorted(labels):
        label = labels[v]
        record = {
            "id": v,
            "parent": label.orient_parent,
            "desc": label.desc_count,
            "total": label.total_n,
            "levels": [
                {
                    "num": r.subtree_number,
                    "maxw_index": r.max_weight_index,
                    "orient": r.orientation.name,
                }
                for r in label.levels
            ],
        }
        lines.append(json.dumps(record, sort_keys=True))
    return "\n".join(lines) + "\n"


def load_labels(text):
    labels = {}
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            levels = tuple(
                LevelRecord(
                    int(r["num"]), int(r["maxw_index"]), Orientation[r["orient"]]
                )
                for r in record["levels"]
            )
            parent = record["parent"]
            labels[int(record["id"])] = CertificateLabel(
                None if parent is None else int(parent),
                int(record["desc"]),
                int(record["total"]),
                levels,
            )
        except (KeyError, ValueError, TypeError) as error:
            raise LabelFormatError(f"line {number}: {error}")
    return labels
