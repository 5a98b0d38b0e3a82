"""
Distributed construction of the certificate on the augmented tree. Each region of
the current recursion level is a tree rooted at its region root (work_parent None).
The root walks toward the heavy side until it is a center, numbers the subtrees it
leaves behind one at a time, and every numbered subtree root broadcasts its
record down its subtree before starting the next level on its own.
"""

from dataclasses import replace

from ssmst.cert.labels import CENTER_RECORD, LevelRecord, Orientation
from ssmst.lib.milestones import transform_index
from ssmst.protocol.consistency import (
    STAGE,
    awaits,
    confirmed,
    in_progress,
    is_center,
    is_mate,
    mutual,
    numbers,
    quiet,
)
from ssmst.sim.kernel import Rule
from ssmst.sim.state import Phase, PifState


def _certifying(view):
    return view.state.phase == Phase.CERTIFY and quiet(view)


def _room(view):
    return len(view.state.cert.levels) < view.net.n.bit_length()


def _children(view):
    """Tree neighbours whose working pointer designates this node."""
    v = view.node
    return [u for u in mutual(view) if view.neighbors[u].cert.work_parent == v]


def _children_idle(view):
    return all(view.neighbors[u].cert.wave == PifState.IDLE for u in _children(view))


def _tree_certifying(view):
    """Every tree neighbour is in CERTIFY or DONE, so work_parent shows all children."""
    return all(STAGE.get(view.neighbors[u].phase) == 2 for u in mutual(view))


def _ready(view):
    """Region root with a settled region around it."""
    s, c, v = view.state, view.state.cert, view.node
    if c.work_parent is not None or c.transfer_to is not None or c.announce is not None:
        return False
    if c.wave != PifState.IDLE or not in_progress(c.levels):
        return False
    for u in mutual(view):
        other = view.neighbors[u]
        if other.phase not in (Phase.CERTIFY, Phase.DONE):
            return False
        if other.cert.transfer_to == v and is_mate(s, other):
            return False
        if other.cert.work_parent == v:
            if not is_mate(s, other) or other.cert.wave != PifState.IDLE:
                return False
            if other.cert.transfer_to is not None:
                return False
    return True


def _heavy(view):
    size = view.state.cert.work_size
    heavy = [
        (view.neighbors[u].cert.work_size, -u)
        for u in _children(view)
        if size < 2 * view.neighbors[u].cert.work_size < 2 * size
    ]
    if not heavy:
        return None
    return -max(heavy)[1]


def _by_size(view, members):
    return sorted(members, key=lambda u: (-view.neighbors[u].cert.work_size, u))


def _awaiting_children(view):
    s = view.state
    return _by_size(view, [u for u in _children(view) if awaits(view.neighbors[u], s)])


# center migration


def _designate_guard(view):
    return _certifying(view) and _ready(view) and _heavy(view) is not None


def _designate(view):
    x = _heavy(view)
    c = view.state.cert
    return view.state.with_cert(transfer_to=x, work_size=c.work_size - view.neighbors[x].cert.work_size)


def _adopt_guard(view):
    c = view.state.cert
    if not _certifying(view) or c.work_parent is None:
        return False
    root = view.nbr(c.work_parent)
    return (
        root is not None
        and is_mate(view.state, root)
        and root.cert.transfer_to == view.node
        and root.cert.work_size + c.work_size <= view.net.n
    )


def _adopt(view):
    c = view.state.cert
    root = view.neighbors[c.work_parent].cert
    return view.state.with_cert(work_parent=None, work_size=root.work_size + c.work_size)


def _ack_guard(view):
    c = view.state.cert
    if not _certifying(view) or c.transfer_to is None:
        return False
    target = view.nbr(c.transfer_to)
    return target is not None and is_mate(view.state, target) and target.cert.work_parent is None


def _ack(view):
    return view.state.with_cert(work_parent=view.state.cert.transfer_to, transfer_to=None)


# centering and numbering


def _center_guard(view):
    return _certifying(view) and _ready(view) and _heavy(view) is None and _room(view)


def _center(view):
    children = _by_size(view, _children(view))
    levels = view.state.cert.levels + (CENTER_RECORD,)
    if not children:
        state = view.state.with_cert(levels=levels, announce=None)
        return replace(state, phase=Phase.DONE)
    return view.state.with_cert(levels=levels, announce=(children[0], 1))


def _advance_guard(view):
    s, c = view.state, view.state.cert
    if not _certifying(view) or c.announce is None or not is_center(s):
        return False
    target, number = c.announce
    other = view.nbr(target)
    if other is None or not confirmed(s, other, number):
        return False
    pending = _awaiting_children(view)
    return not pending or number < view.net.n


def _advance(view):
    _, number = view.state.cert.announce
    pending = _awaiting_children(view)
    if pending:
        return view.state.with_cert(announce=(pending[0], number + 1))
    state = view.state.with_cert(announce=None)
    return replace(state, phase=Phase.DONE)


def _record(view, toward, number, carried, ms):
    """Level record pointing at `toward`; carried is the max weight index already seen beyond it."""
    weight = transform_index(view.weights[toward], ms)
    code = (
        Orientation.TOWARD_PARENT
        if toward == view.state.build.orient_parent
        else Orientation.TOWARD_CHILD
    )
    return LevelRecord(number, max(carried, weight), code)


def certify_rules(ms):
    """
    Rules of the certification phase, highest priority first. Transformed weights
    are recomputed from the raw incident weights on every use.
    """

    def receive_guard(view):
        s, c, v = view.state, view.state.cert, view.node
        if not _certifying(view) or c.work_parent is None or c.wave != PifState.IDLE:
            return False
        center = view.nbr(c.work_parent)
        if center is None or not awaits(s, center) or center.cert.announce is None:
            return False
        target, _ = center.cert.announce
        return target == v and _room(view) and _tree_certifying(view) and _children_idle(view)

    def receive(view):
        c = view.state.cert
        center = c.work_parent
        _, number = view.neighbors[center].cert.announce
        record = _record(view, center, number, -1, ms)
        return view.state.with_cert(
            levels=c.levels + (record,), wave=PifState.BROADCAST, work_parent=None
        )

    def propagate_guard(view):
        s, c = view.state, view.state.cert
        if not _certifying(view) or c.work_parent is None or c.wave != PifState.IDLE:
            return False
        source = view.nbr(c.work_parent)
        if source is None or source.phase != Phase.CERTIFY:
            return False
        levels = source.cert.levels
        return (
            source.cert.wave == PifState.BROADCAST
            and len(levels) == len(c.levels) + 1
            and in_progress(levels)
            and in_progress(c.levels)
            and numbers(levels[:-1]) == numbers(c.levels)
            and _room(view)
            and _tree_certifying(view)
            and _children_idle(view)
        )

    def propagate(view):
        c = view.state.cert
        source = view.neighbors[c.work_parent].cert.levels[-1]
        record = _record(view, c.work_parent, source.subtree_number, source.max_weight_index, ms)
        return view.state.with_cert(levels=c.levels + (record,), wave=PifState.BROADCAST)

    return [
        Rule("certify_ack", _ack_guard, _ack),
        Rule("certify_adopt", _adopt_guard, _adopt),
        Rule("certify_designate", _designate_guard, _designate),
        Rule("certify_center", _center_guard, _center),
        Rule("certify_advance", _advance_guard, _advance),
        Rule("certify_receive", receive_guard, receive),
        Rule("certify_propagate", propagate_guard, propagate),
        Rule("certify_feedback", _feedback_guard, _feedback),
        Rule("certify_settle", _settle_guard, _settle),
        Rule("certify_cleanup", _cleanup_guard, _cleanup),
    ]


# propagation waves


def _fed_back(view):
    s = view.state
    return all(
        is_mate(s, view.neighbors[u]) and view.neighbors[u].cert.wave == PifState.FEEDBACK
        for u in _children(view)
    )


def _feedback_guard(view):
    c = view.state.cert
    return (
        _certifying(view)
        and c.wave == PifState.BROADCAST
        and c.work_parent is not None
        and _fed_back(view)
    )


def _feedback(view):
    return view.state.with_cert(wave=PifState.FEEDBACK)


def _settle_guard(view):
    c = view.state.cert
    return (
        _certifying(view)
        and c.wave == PifState.BROADCAST
        and c.work_parent is None
        and _fed_back(view)
    )


def _settle(view):
    return view.state.with_cert(wave=PifState.IDLE)


def _cleanup_guard(view):
    c = view.state.cert
    if not _certifying(view) or c.wave != PifState.FEEDBACK:
        return False
    parent = view.nbr(c.work_parent)
    return parent is not None and parent.cert.wave == PifState.IDLE


def _cleanup(view):
    return view.state.with_cert(wave=PifState.IDLE)
