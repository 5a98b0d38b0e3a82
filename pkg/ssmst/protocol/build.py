"""
Tree construction: a backbone spanning tree rooted at the smallest identifier, a
token walking that backbone and adding edges Kruskal-style one transformed weight
class at a time, component renaming waves after each addition, and finally the
augmentation of the selected tree with an orientation and subtree counts.
"""

from dataclasses import replace

from ssmst.cert.labels import InvalidTreeError
from ssmst.lib.oracle import edge_key
from ssmst.protocol.consistency import (
    STAGE,
    backbone_children,
    mutual,
    quiet,
    selected_idle,
    token_candidates,
    unvisited_children,
)
from ssmst.sim.kernel import Rule
from ssmst.sim.state import Phase, PifState, TokenState, certify_start


def _building(view):
    return view.state.phase == Phase.BUILD and quiet(view)


# backbone


def _adoptable(view):
    b, limit = view.state.build, view.net.n - 1
    return sorted(
        (o.build.backbone_root_id, o.build.backbone_dist, u)
        for u, o in view.neighbors.items()
        if o.build.backbone_root_id < b.backbone_root_id and o.build.backbone_dist < limit
    )


def _adopt_guard(view):
    return _building(view) and bool(_adoptable(view))


def _adopt(view):
    root, dist, u = _adoptable(view)[0]
    return view.state.with_build(
        backbone_parent=u, backbone_root_id=root, backbone_dist=dist + 1, count=0
    )


def count_target(view):
    """
    1 + the children's counts once the whole neighbourhood agrees on the backbone
    root and every child has a count; 0 otherwise.
    """
    b = view.state.build
    if any(o.build.backbone_root_id != b.backbone_root_id for o in view.neighbors.values()):
        return 0
    counts = [view.neighbors[u].build.count for u in backbone_children(view)]
    if any(c == 0 for c in counts):
        return 0
    total = 1 + sum(counts)
    return total if total <= view.net.n else 0


def _count_guard(view):
    return _building(view) and count_target(view) != view.state.build.count


def _count(view):
    return view.state.with_build(count=count_target(view))


# renaming waves


def _accept_sources(view):
    v, b = view.node, view.state.build
    return sorted(
        u
        for u, o in view.neighbors.items()
        if v in o.build.mst_adjacency
        and u not in b.mst_adjacency
        and o.build.token == TokenState.HERE
        and o.build.rename_wave == PifState.BROADCAST
        and o.build.rename_parent is None
    )


def _accept_guard(view):
    return _building(view) and bool(_accept_sources(view))


def _accept(view):
    b = view.state.build
    return view.state.with_build(mst_adjacency=b.mst_adjacency | {_accept_sources(view)[0]})


def _join_source(view):
    if view.state.build.rename_wave != PifState.IDLE:
        return None
    tree = mutual(view)
    sources = [u for u in tree if view.neighbors[u].build.rename_wave == PifState.BROADCAST]
    if not sources:
        return None
    others = [u for u in tree if u != sources[0]]
    if all(view.neighbors[u].build.rename_wave == PifState.IDLE for u in others):
        return sources[0]
    return None


def _join_guard(view):
    return _building(view) and _join_source(view) is not None


def _join(view):
    u = _join_source(view)
    return view.state.with_build(
        rename_wave=PifState.BROADCAST,
        rename_parent=u,
        component_name=view.neighbors[u].build.component_name,
    )


def _children_fed_back(view, members):
    v = view.node
    return all(
        u in view.neighbors
        and v in view.neighbors[u].build.mst_adjacency
        and view.neighbors[u].build.rename_wave == PifState.FEEDBACK
        and view.neighbors[u].build.rename_parent == v
        for u in members
    )


def _feedback_guard(view):
    b = view.state.build
    if not _building(view) or b.rename_wave != PifState.BROADCAST or b.rename_parent is None:
        return False
    return _children_fed_back(view, [u for u in mutual(view) if u != b.rename_parent])


def _feedback(view):
    return view.state.with_build(rename_wave=PifState.FEEDBACK)


def _finish_guard(view):
    b = view.state.build
    if not _building(view) or b.rename_wave != PifState.BROADCAST or b.rename_parent is not None:
        return False
    return _children_fed_back(view, b.mst_adjacency)


def _to_idle(view):
    return view.state.with_build(rename_wave=PifState.IDLE)


def _cleanup_guard(view):
    b = view.state.build
    if not _building(view) or b.rename_wave != PifState.FEEDBACK:
        return False
    parent = view.nbr(b.rename_parent)
    return parent is not None and parent.build.rename_wave == PifState.IDLE


# token


def _start_guard(view):
    b = view.state.build
    return (
        _building(view)
        and b.backbone_parent is None
        and b.token == TokenState.IDLE
        and b.count == view.net.n
    )


def _fresh_traversal(view, **changes):
    b = view.state.build
    return view.state.with_build(
        token=TokenState.HERE,
        token_child=None,
        token_bit=not b.token_bit,
        token_added=False,
        token_spanning=b.component_name == view.node,
        **changes,
    )


def _start(view):
    return _fresh_traversal(view, token_phase_weight=0)


def _holding(view):
    b = view.state.build
    return _building(view) and b.token == TokenState.HERE and b.rename_wave == PifState.IDLE


def _add_guard(view):
    return _holding(view) and selected_idle(view) and bool(token_candidates(view))


def _add(view):
    b = view.state.build
    name, u = token_candidates(view)[0]
    return view.state.with_build(
        mst_adjacency=b.mst_adjacency | {u},
        rename_wave=PifState.BROADCAST,
        rename_parent=None,
        component_name=min(name, b.component_name),
        token_added=True,
    )


def _move_guard(view):
    return _holding(view) and not token_candidates(view) and bool(unvisited_children(view))


def _move(view):
    return view.state.with_build(token=TokenState.CHILD, token_child=unvisited_children(view)[0])


def _receive_guard(view):
    b = view.state.build
    if not _building(view) or b.token != TokenState.IDLE:
        return False
    parent = view.nbr(b.backbone_parent)
    return (
        parent is not None
        and parent.build.token == TokenState.CHILD
        and parent.build.token_child == view.node
        and parent.build.token_bit != b.token_bit
    )


def _receive(view):
    b = view.state.build
    parent = view.neighbors[b.backbone_parent].build
    return view.state.with_build(
        token=TokenState.HERE,
        token_child=None,
        token_bit=parent.token_bit,
        token_phase_weight=parent.token_phase_weight,
        token_added=False,
        token_spanning=b.component_name == b.backbone_root_id,
    )


def _merge_guard(view):
    b = view.state.build
    if not _building(view) or b.token != TokenState.CHILD:
        return False
    child = view.nbr(b.token_child)
    return (
        child is not None
        and child.build.token == TokenState.IDLE
        and child.build.token_bit == b.token_bit
    )


def _merge(view):
    b = view.state.build
    child = view.neighbors[b.token_child].build
    return view.state.with_build(
        token=TokenState.HERE,
        token_child=None,
        token_added=b.token_added or child.token_added,
        token_spanning=b.token_spanning and child.token_spanning,
    )


def _traversal_over(view):
    return _holding(view) and not token_candidates(view) and not unvisited_children(view)


def _return_guard(view):
    return view.state.build.backbone_parent is not None and _traversal_over(view)


def _return(view):
    return view.state.with_build(token=TokenState.IDLE)


def build_rules(ms):
    """
    Rules of the construction phase, highest priority first. Weight classes are
    milestone indices of ms; a traversal that adds nothing moves to the next class.
    """
    last_index = len(ms) - 1

    def round_guard(view):
        b = view.state.build
        if b.backbone_parent is not None or not _traversal_over(view):
            return False
        return b.token_added or b.token_spanning or b.token_phase_weight < last_index

    def round_action(view):
        b = view.state.build
        if b.token_added:
            return _fresh_traversal(view)
        if b.token_spanning:
            state = view.state.with_build(
                token=TokenState.IDLE,
                token_child=None,
                orient_parent=None,
                oriented=True,
                desc_count=0,
                total_n=0,
                augment_ready=False,
            )
            return replace(state, phase=Phase.AUGMENT)
        return _fresh_traversal(view, token_phase_weight=b.token_phase_weight + 1)

    return [
        Rule("build_adopt", _adopt_guard, _adopt),
        Rule("build_count", _count_guard, _count),
        Rule("rename_accept", _accept_guard, _accept),
        Rule("rename_join", _join_guard, _join),
        Rule("rename_feedback", _feedback_guard, _feedback),
        Rule("rename_finish", _finish_guard, _to_idle),
        Rule("rename_cleanup", _cleanup_guard, _to_idle),
        Rule("token_start", _start_guard, _start),
        Rule("token_add", _add_guard, _add),
        Rule("token_move", _move_guard, _move),
        Rule("token_receive", _receive_guard, _receive),
        Rule("token_merge", _merge_guard, _merge),
        Rule("token_return", _return_guard, _return),
        Rule("token_round", round_guard, round_action),
    ] + augment_rules()


# augmentation


def _tree_children(view):
    parent = view.state.build.orient_parent
    return [u for u in mutual(view) if u != parent]


def _augmenting(view):
    return view.state.phase == Phase.AUGMENT and quiet(view)


def _orient_sources(view):
    return [
        u
        for u in mutual(view)
        if STAGE.get(view.neighbors[u].phase, 0) >= 1 and view.neighbors[u].build.oriented
    ]


def _orient_guard(view):
    b = view.state.build
    return (
        _building(view)
        and b.rename_wave == PifState.IDLE
        and b.token == TokenState.IDLE
        and bool(_orient_sources(view))
    )


def _orient(view):
    state = view.state.with_build(orient_parent=_orient_sources(view)[0], oriented=True)
    return replace(state, phase=Phase.AUGMENT)


def _desc_total(view):
    v = view.node
    total = 1
    for u in _tree_children(view):
        child = view.neighbors[u]
        if child.phase != Phase.AUGMENT or child.build.orient_parent != v or not child.build.desc_count:
            return 0
        total += child.build.desc_count
    return total if total <= view.net.n else 0


def _desc_guard(view):
    return _augmenting(view) and view.state.build.desc_count == 0 and _desc_total(view) > 0


def _desc(view):
    return view.state.with_build(desc_count=_desc_total(view))


def _total_source(view):
    b = view.state.build
    if b.orient_parent is None:
        return b.desc_count
    return view.neighbors[b.orient_parent].build.total_n


def _total_guard(view):
    b = view.state.build
    if not _augmenting(view) or not b.desc_count or b.total_n:
        return False
    if b.orient_parent is not None and b.orient_parent not in view.neighbors:
        return False
    return _total_source(view) > 0


def _total(view):
    return view.state.with_build(total_n=_total_source(view))


def _ready_guard(view):
    b = view.state.build
    if not _augmenting(view) or not b.total_n or b.augment_ready:
        return False
    return all(
        view.neighbors[u].phase == Phase.AUGMENT and view.neighbors[u].build.augment_ready
        for u in _tree_children(view)
    )


def _ready(view):
    return view.state.with_build(augment_ready=True)


def _certify_guard(view):
    b = view.state.build
    if not _augmenting(view) or not b.augment_ready:
        return False
    if b.orient_parent is None:
        return True
    parent = view.nbr(b.orient_parent)
    return parent is not None and parent.phase in (Phase.CERTIFY, Phase.DONE)


def _certify(view):
    return certify_start(view.state)


def augment_rules():
    return [
        Rule("augment_join", _orient_guard, _orient),
        Rule("augment_desc", _desc_guard, _desc),
        Rule("augment_total", _total_guard, _total),
        Rule("augment_ready", _ready_guard, _ready),
        Rule("augment_certify", _certify_guard, _certify),
    ]


def selected_tree(cfg):
    """Edges selected by both endpoints; an edge selected on one side only is an error."""
    edges = set()
    for v, state in cfg.states.items():
        for u in state.build.mst_adjacency:
            other = cfg.states.get(u)
            if other is None or v not in other.build.mst_adjacency:
                raise InvalidTreeError(f"edge ({v}, {u}) is selected by {v} only")
            edges.add(edge_key(u, v))
    return sorted(edges)
