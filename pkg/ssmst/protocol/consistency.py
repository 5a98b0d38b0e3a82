"""
The single definition of what a node considers locally inconsistent, plus the small
neighbourhood helpers the rule modules share. Every inconsistency found here makes
the reset trigger enabled.
"""

import logging

from ssmst.cert.labels import Orientation, label_from_state
from ssmst.cert.verify import LabelView, check_edge, malformed_reason, verify_node
from ssmst.sim.state import BLANK_CERT, Phase, PifState, ResetWave, TokenState

logger = logging.getLogger(__name__)

STAGE = {Phase.BUILD: 0, Phase.AUGMENT: 1, Phase.CERTIFY: 2, Phase.DONE: 2}


def in_reset(state):
    return state.phase == Phase.RESET or state.reset.wave != ResetWave.NONE


def quiet(view):
    """No reset activity at the node or around it; protocol rules only run here."""
    if in_reset(view.state):
        return False
    return not any(in_reset(u) for u in view.neighbors.values())


def mutual(view):
    """Tree neighbours: selected edges whose other endpoint selected them too."""
    v = view.node
    return sorted(
        u
        for u in view.state.build.mst_adjacency
        if u in view.neighbors and v in view.neighbors[u].build.mst_adjacency
    )


def backbone_children(view):
    v = view.node
    return sorted(u for u, s in view.neighbors.items() if s.build.backbone_parent == v)


def token_candidates(view):
    """Edges the token holder may add: current weight class, other component."""
    b = view.state.build
    found = []
    for u, other in view.neighbors.items():
        if u in b.mst_adjacency or other.phase != Phase.BUILD:
            continue
        if other.build.component_name == b.component_name:
            continue
        if view.tw(u) == b.token_phase_weight:
            found.append((other.build.component_name, u))
    return sorted(found)


def unvisited_children(view):
    b = view.state.build
    return [
        u
        for u in backbone_children(view)
        if view.neighbors[u].build.token_bit != b.token_bit
        and view.neighbors[u].build.token == TokenState.IDLE
    ]


def selected_idle(view):
    """Every selected neighbour has finished with renaming."""
    return all(
        u in view.neighbors and view.neighbors[u].build.rename_wave == PifState.IDLE
        for u in view.state.build.mst_adjacency
    )


def numbers(levels):
    return tuple(0 if r.is_center else r.subtree_number for r in levels)


def in_progress(levels):
    return not levels or not levels[-1].is_center


def is_mate(state, other):
    """Both nodes sit in the same region of the current recursion level."""
    if other.phase != Phase.CERTIFY or state.phase != Phase.CERTIFY:
        return False
    a, b = state.cert.levels, other.cert.levels
    return len(a) == len(b) and in_progress(a) and numbers(a) == numbers(b)


def is_center(state):
    levels = state.cert.levels
    return bool(levels) and levels[-1].is_center


def awaits(state, center):
    """state is a subtree root of center's region still waiting for its number."""
    if not is_center(center):
        return False
    a, c = state.cert.levels, center.cert.levels
    return len(c) == len(a) + 1 and in_progress(a) and numbers(c[:-1]) == numbers(a)


def confirmed(center, other, number):
    """other already holds subtree number `number` at center's level."""
    depth = len(center.cert.levels) - 1
    levels = other.cert.levels
    return (
        depth >= 0
        and len(levels) > depth
        and numbers(levels[:depth]) == numbers(center.cert.levels[:depth])
        and not levels[depth].is_center
        and levels[depth].subtree_number == number
    )


def _stage_gap(view):
    mine = STAGE.get(view.state.phase)
    for u, other in view.neighbors.items():
        theirs = STAGE.get(other.phase)
        if mine is None or theirs is None or abs(mine - theirs) > 1:
            return f"phase gap with {u}"
    return None


def _backbone(view):
    b, v, n = view.state.build, view.node, view.net.n
    if b.backbone_root_id > v:
        return "backbone root above own identifier"
    if b.backbone_dist > n - 1 or b.count > n:
        return "backbone counter out of range"
    if b.backbone_parent is None:
        if b.backbone_root_id != v or b.backbone_dist != 0:
            return "parentless node is not its own root"
        return None
    parent = view.nbr(b.backbone_parent)
    if parent is None:
        return "backbone parent is not a neighbor"
    if b.backbone_root_id == v:
        return "root with a parent"
    if parent.build.backbone_root_id > b.backbone_root_id:
        return "backbone parent has a larger root"
    if (
        parent.build.backbone_root_id == b.backbone_root_id
        and b.backbone_dist != parent.build.backbone_dist + 1
    ):
        return "backbone distance mismatch"
    return None


def _token(view):
    s, b, v = view.state, view.state.build, view.node
    if b.token_phase_weight > view.net.last_index:
        return "token weight index out of range"
    if b.token == TokenState.IDLE:
        return None
    if s.phase != Phase.BUILD:
        return "token outside BUILD"
    if b.token == TokenState.CHILD:
        child = view.nbr(b.token_child)
        if child is None or child.build.backbone_parent != v:
            return "token handed to a non-child"
    if b.backbone_parent is not None:
        parent = view.nbr(b.backbone_parent)
        if parent.build.token != TokenState.CHILD or parent.build.token_child != v:
            return "token path broken"
        return None
    if b.count != view.net.n:
        return "token started before the backbone was counted"
    if (
        b.token == TokenState.HERE
        and b.rename_wave == PifState.IDLE
        and not b.token_added
        and not b.token_spanning
        and b.token_phase_weight == view.net.last_index
        and selected_idle(view)
        and not token_candidates(view)
        and not unvisited_children(view)
    ):
        return "last weight class exhausted without spanning"
    return None


def _components(view):
    s, b, v = view.state, view.state.build, view.node
    if b.component_name > v:
        return "component name above own identifier"
    setter = (
        b.token == TokenState.HERE
        and b.rename_wave == PifState.BROADCAST
        and b.rename_parent is None
    )
    for u in b.mst_adjacency:
        other = view.nbr(u)
        if other is None:
            return "selected edge to a non-neighbor"
        if v not in other.build.mst_adjacency and not setter:
            return "asymmetric edge selection"
    for u, other in view.neighbors.items():
        ob = other.build
        if v in ob.mst_adjacency and u not in b.mst_adjacency:
            if not (
                ob.token == TokenState.HERE
                and ob.rename_wave == PifState.BROADCAST
                and ob.rename_parent is None
            ):
                return "asymmetric edge selection"
    tree = mutual(view)
    if b.rename_wave != PifState.IDLE:
        if s.phase != Phase.BUILD:
            return "renaming outside BUILD"
        if b.rename_parent is None:
            if b.rename_wave == PifState.FEEDBACK or b.token != TokenState.HERE:
                return "renaming wave without a root"
        elif b.rename_parent not in tree:
            return "renaming parent is not a tree neighbor"
        elif (
            b.rename_wave == PifState.BROADCAST
            and view.neighbors[b.rename_parent].build.rename_wave != PifState.BROADCAST
        ):
            return "broadcast under a finished parent"
    else:
        for u in tree:
            ob = view.neighbors[u].build
            if ob.rename_wave == PifState.IDLE and ob.component_name != b.component_name:
                return "component names differ across a tree edge"
    return None


def _augmentation(view):
    s, b, n = view.state, view.state.build, view.net.n
    if s.phase == Phase.BUILD:
        if b.oriented or b.desc_count or b.total_n or b.augment_ready or s.cert != BLANK_CERT:
            return "augmentation data during BUILD"
        return None
    if not b.oriented:
        return "unoriented node past BUILD"
    if b.token != TokenState.IDLE or b.rename_wave != PifState.IDLE:
        return "construction activity past BUILD"
    if s.phase == Phase.AUGMENT and s.cert != BLANK_CERT:
        return "certificate data during AUGMENT"
    tree = mutual(view)
    if b.orient_parent is None:
        if b.backbone_parent is not None:
            return "orientation root differs from backbone root"
        if b.desc_count and b.desc_count != n:
            return "root does not count every node"
    else:
        if b.orient_parent not in tree:
            return "orientation parent is not a tree neighbor"
        if STAGE[view.neighbors[b.orient_parent].phase] < 1:
            return "orientation parent still in BUILD"
    if b.desc_count > n or b.total_n not in (0, n):
        return "augmentation counters out of range"
    if b.augment_ready and not (b.total_n and b.desc_count):
        return "ready before counting"
    for u in tree:
        other = view.neighbors[u]
        if STAGE[other.phase] >= 1 and other.build.oriented:
            if u != b.orient_parent and other.build.orient_parent != view.node:
                return "oriented tree edge outside the orientation"
    if s.phase in (Phase.CERTIFY, Phase.DONE):
        if not (b.augment_ready and b.total_n == n and b.desc_count >= 1):
            return "certification without a complete augmentation"
    return None


def _levels(view):
    s, c, n = view.state, view.state.cert, view.net.n
    levels = c.levels
    if len(levels) > n.bit_length():
        return "too many levels"
    for i, record in enumerate(levels):
        if record.is_center:
            if i != len(levels) - 1:
                return "center record before the last level"
            continue
        if record.subtree_number < 1 or record.max_weight_index > view.net.last_index:
            return "level record out of range"
        if record.orientation not in (Orientation.TOWARD_PARENT, Orientation.TOWARD_CHILD):
            return "unknown orientation code"
    centered = is_center(s)
    if s.phase == Phase.DONE:
        if not centered or c.announce is not None or c.wave != PifState.IDLE or c.transfer_to is not None:
            return "unfinished DONE node"
    elif centered and c.announce is None:
        return "center without an announcement"
    return None


def _certification(view):
    s, c, v, n = view.state, view.state.cert, view.node, view.net.n
    reason = _levels(view)
    if reason:
        return reason
    tree = mutual(view)
    if not 1 <= c.work_size <= n:
        return "working size out of range"
    if c.work_parent is not None and c.work_parent not in tree:
        return "working parent is not a tree neighbor"
    if c.transfer_to is not None and (c.work_parent is not None or c.transfer_to not in tree):
        return "transfer from a non-root"
    if c.wave == PifState.FEEDBACK and c.work_parent is None:
        return "feedback at a region root"
    if c.announce is not None:
        if not is_center(s):
            return "announcement from a non-center"
        target, number = c.announce
        if target not in tree or not 1 <= number <= len(tree):
            return "announcement out of range"
        other = view.neighbors[target]
        if not confirmed(s, other, number) and not (
            other.cert.work_parent == v and awaits(other, s)
        ):
            return "announcement to a node that cannot take it"
    if c.work_parent is not None:
        parent = view.neighbors[c.work_parent]
        if (
            parent.phase == Phase.CERTIFY
            and parent.cert.wave != PifState.BROADCAST
            and in_progress(parent.cert.levels)
            and len(parent.cert.levels) == len(c.levels) + 1
        ):
            return "missed the working parent's broadcast"
    lagging = c.wave == PifState.IDLE and in_progress(c.levels)
    for u in tree:
        other = view.neighbors[u]
        if lagging and other.phase == Phase.CERTIFY and other.cert.work_parent == v:
            if not is_mate(s, other):
                return "working child outside the region"
    for u in tree:
        other = view.neighbors[u]
        if other.cert.work_parent == v and u != c.transfer_to and is_mate(s, other):
            if other.cert.work_size >= c.work_size:
                return "working size not above a child"
    return None


def _labels(view):
    """Checks of a finished label against finished neighbours."""
    n, ms = view.net.n, view.net.ms
    label = label_from_state(view.state)
    done = {u: o for u, o in view.neighbors.items() if o.phase == Phase.DONE}
    labels = {u: label_from_state(o) for u, o in done.items()}
    for u, other in labels.items():
        if malformed_reason(other, n, ms):
            return f"malformed label at {u}"
    if len(done) == len(view.neighbors):
        verdict = verify_node(LabelView(view.node, label, labels, view.weights, ms, n))
        return None if verdict else "; ".join(verdict.reasons)
    tree = set(mutual(view))
    for u, other in labels.items():
        reason = check_edge(label, other, view.tw(u), u in tree)
        if reason:
            return reason
    return None


def inconsistency(view):
    """First local inconsistency found at the node, or None."""
    s = view.state
    if (s.phase == Phase.RESET) != (s.reset.wave != ResetWave.NONE):
        return "reset flags disagree"
    for check in (_stage_gap, _backbone, _token, _components, _augmentation):
        reason = check(view)
        if reason:
            return reason
    if s.phase in (Phase.CERTIFY, Phase.DONE):
        reason = _certification(view)
        if reason:
            return reason
    if view.bits() > view.net.cap_bits:
        return "memory cap exceeded"
    if s.phase == Phase.DONE:
        return _labels(view)
    return None


def locally_consistent(view):
    return inconsistency(view) is None
