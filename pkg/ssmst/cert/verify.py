from dataclasses import dataclass, field

from ssmst.cert.labels import Orientation, label_from_state
from ssmst.lib.milestones import transform_index

CENTER_WEIGHT = -1


@dataclass
class Verdict:
    accepted: bool
    reasons: list = field(default_factory=list)

    def __bool__(self):
        return self.accepted


@dataclass(frozen=True)
class LabelView:
    """What a node sees when verifying: its label, its neighbours' labels and edge weights."""

    node: int
    label: object
    neighbor_labels: dict
    weights: dict
    ms: object
    n: int

    def tw(self, u):
        return transform_index(self.weights[u], self.ms)


def _max_weight(label, level):
    record = label.levels[level]
    return CENTER_WEIGHT if record.is_center else record.max_weight_index


def malformed_reason(label, n, ms):
    levels = label.levels
    if not levels or not levels[-1].is_center:
        return "level stack does not end with a center record"
    if len(levels) > n.bit_length():
        return "more levels than a balanced decomposition allows"
    for record in levels[:-1]:
        if record.is_center:
            return "center record before the last level"
        if record.subtree_number < 1:
            return "subtree number below 1"
        if not 0 <= record.max_weight_index < len(ms):
            return "max weight index out of range"
        if record.orientation not in (Orientation.TOWARD_PARENT, Orientation.TOWARD_CHILD):
            return "unknown orientation code"
    if label.total_n != n:
        return "total node count differs from n"
    if not 1 <= label.desc_count <= n:
        return "descendant count out of range"
    return None


def same_region(a, b, level):
    """Both labels agree on every subtree number strictly above level and have a record at level."""
    if len(a.levels) <= level or len(b.levels) <= level:
        return False
    for i in range(level):
        ra, rb = a.levels[i], b.levels[i]
        if ra.is_center or rb.is_center or ra.subtree_number != rb.subtree_number:
            return False
    return True


def separation_level(a, b):
    level = 0
    while True:
        ra, rb = a.levels[level], b.levels[level]
        if ra.is_center or rb.is_center or ra.subtree_number != rb.subtree_number:
            return level
        level += 1


def check_edge(label, other, weight_index, tree_edge):
    """
    Checks shared by every incident edge: at most one center per region, and for a
    non-tree edge, that it is not lighter than the heaviest tree edge it would replace.
    Both labels must be well formed.
    """
    level = separation_level(label, other)
    ra, rb = label.levels[level], other.levels[level]
    if ra.is_center and rb.is_center:
        return "two centers in one region"
    if tree_edge:
        return None
    heaviest = max(_max_weight(label, level), _max_weight(other, level))
    if weight_index < heaviest:
        return "non-tree edge lighter than the tree path it closes"
    return None


def _pointer_ok(view, level, record, u):
    other = view.neighbor_labels[u]
    if not same_region(view.label, other, level):
        return False
    target = other.levels[level]
    if not target.is_center and target.subtree_number != record.subtree_number:
        return False
    return record.max_weight_index == max(_max_weight(other, level), view.tw(u))


def verify_node(view):
    label = view.label
    reasons = []
    reason = malformed_reason(label, view.n, view.ms)
    if reason:
        return Verdict(False, ["malformed", reason])
    for u, other in view.neighbor_labels.items():
        reason = malformed_reason(other, view.n, view.ms)
        if reason:
            return Verdict(False, ["malformed", f"neighbor {u}: {reason}"])

    parent = label.orient_parent
    if parent is not None and parent not in view.neighbor_labels:
        return Verdict(False, ["acyclicity", "parent is not a neighbor"])
    children = [u for u, other in view.neighbor_labels.items() if other.orient_parent == view.node]
    if label.desc_count != 1 + sum(view.neighbor_labels[c].desc_count for c in children):
        reasons.append("acyclicity: descendant count does not sum")
    if (parent is None) != (label.desc_count == label.total_n):
        reasons.append("acyclicity: root iff descendant count equals total")
    if any(other.total_n != label.total_n for other in view.neighbor_labels.values()):
        reasons.append("acyclicity: total count differs from a neighbor")

    tree_neighbors = set(children)
    if parent is not None:
        tree_neighbors.add(parent)

    for level, record in enumerate(label.levels):
        if record.is_center:
            continue
        if record.orientation == Orientation.TOWARD_PARENT:
            if parent is None or not _pointer_ok(view, level, record, parent):
                reasons.append(f"level {level}: inconsistent pointer toward parent")
            continue
        consistent = False
        for c in children:
            target = view.neighbor_labels[c]
            if len(target.levels) > level:
                code = target.levels[level].orientation
                if code == Orientation.TOWARD_PARENT:
                    continue
            if _pointer_ok(view, level, record, c):
                consistent = True
                break
        if not consistent:
            reasons.append(f"level {level}: no child consistent with the pointer")

    for u in tree_neighbors:
        other = view.neighbor_labels[u]
        for level in range(min(len(label.levels), len(other.levels))):
            if not same_region(label, other, level):
                break
            ra, rb = label.levels[level], other.levels[level]
            if ra.is_center or rb.is_center:
                break
            if ra.subtree_number != rb.subtree_number:
                reasons.append(f"level {level}: tree neighbors in different subtrees")
                break

    for level, record in enumerate(label.levels):
        # a tree edge inside a region carries exactly one pointer, so each region has one center
        away = [
            c
            for c in children
            if same_region(label, view.neighbor_labels[c], level)
            and view.neighbor_labels[c].levels[level].orientation != Orientation.TOWARD_PARENT
        ]
        if len(away) > 1 or (away and record.orientation != Orientation.TOWARD_CHILD):
            reasons.append(f"level {level}: region edge without a pointer")
        if record.is_center:
            numbers = [
                view.neighbor_labels[u].levels[level].subtree_number
                for u in tree_neighbors
                if same_region(label, view.neighbor_labels[u], level)
                and not view.neighbor_labels[u].levels[level].is_center
            ]
            if len(numbers) != len(set(numbers)):
                reasons.append(f"level {level}: two subtrees of the center share a number")

    for u, other in view.neighbor_labels.items():
        reason = check_edge(label, other, view.tw(u), u in tree_neighbors)
        if reason:
            reasons.append(f"edge to {u}: {reason}")

    return Verdict(not reasons, reasons)


def verify_labels(g, labels, ms):
    """Runs verify_node at every node of g; returns the set of rejecting nodes."""
    rejecting = set()
    for v in g.nodes:
        view = LabelView(
            node=v,
            label=labels[v],
            neighbor_labels={u: labels[u] for u in g.neighbors(v)},
            weights=dict(g.incident(v)),
            ms=ms,
            n=g.n,
        )
        if not verify_node(view):
            rejecting.add(v)
    return rejecting


def verify_all(cfg):
    labels = {v: label_from_state(state) for v, state in cfg.states.items()}
    return verify_labels(cfg.graph, labels, cfg.ms)
