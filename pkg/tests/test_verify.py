from dataclasses import replace
from itertools import product

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ssmst.cert.labels import (
    CENTER_RECORD,
    CertificateLabel,
    LevelRecord,
    Orientation,
    orient,
    reference_label,
)
from ssmst.cert.verify import (
    LabelView,
    check_edge,
    malformed_reason,
    separation_level,
    verify_labels,
    verify_node,
)
from ssmst.harness.trial import resolve_k
from ssmst.lib.graph import WeightedGraph, generate
from ssmst.lib.milestones import milestone_set, transform
from ssmst.lib.oracle import kruskal, spanning_trees, tree_weight

from .strategies import graphs, path_graph


def _mst(g, ms):
    tree, _, _ = kruskal(g, lambda w: transform(w, ms))
    return tree


def _triangle():
    return WeightedGraph([1, 2, 3], [(1, 2, 1), (2, 3, 1), (1, 3, 3)])


def test_accepts_the_mst_of_a_triangle():
    g = _triangle()
    ms = milestone_set(3, 0)
    assert verify_labels(g, reference_label(g, [(1, 2), (2, 3)], ms), ms) == set()


def test_rejects_a_heavier_tree_of_a_triangle():
    g = _triangle()
    ms = milestone_set(3, 0)
    assert verify_labels(g, reference_label(g, [(1, 2), (1, 3)], ms), ms)


def test_malformed_labels():
    ms = milestone_set(4, 0)
    good = CertificateLabel(None, 4, 4, (CENTER_RECORD,))
    assert malformed_reason(good, 4, ms) is None
    assert malformed_reason(replace(good, levels=()), 4, ms)
    assert malformed_reason(replace(good, total_n=5), 4, ms)
    assert malformed_reason(replace(good, desc_count=0), 4, ms)
    deep = (LevelRecord(1, 0, Orientation.TOWARD_PARENT),) * 3 + (CENTER_RECORD,)
    assert "more levels" in malformed_reason(replace(good, levels=deep), 4, ms)
    bad_weight = (LevelRecord(1, 9, Orientation.TOWARD_PARENT), CENTER_RECORD)
    assert malformed_reason(replace(good, levels=bad_weight), 4, ms)


def test_malformed_label_is_rejected_not_raised():
    g = path_graph([1, 1])
    ms = milestone_set(3, 0)
    labels = reference_label(g, [(1, 2), (2, 3)], ms)
    labels[3] = replace(labels[3], levels=())
    rejecting = verify_labels(g, labels, ms)
    assert rejecting == {2, 3}
    view = LabelView(3, labels[3], {2: labels[2]}, {2: 1}, ms, 3)
    assert verify_node(view).reasons[0] == "malformed"


def test_separation_and_edge_checks():
    a = CertificateLabel(None, 3, 3, (LevelRecord(1, 2, Orientation.TOWARD_CHILD), CENTER_RECORD))
    b = CertificateLabel(2, 1, 3, (LevelRecord(2, 1, Orientation.TOWARD_PARENT), CENTER_RECORD))
    center = CertificateLabel(1, 2, 3, (CENTER_RECORD,))
    assert separation_level(a, b) == 0
    assert check_edge(a, b, 2, tree_edge=False) is None
    assert check_edge(a, b, 1, tree_edge=False) is not None
    assert check_edge(center, center, 0, tree_edge=True) == "two centers in one region"
    assert check_edge(a, center, 0, tree_edge=True) is None


@settings(max_examples=60)
@given(graphs(max_n=10), st.sampled_from(["min", 0, "max"]))
def test_reference_labels_of_the_mst_are_accepted(g, k):
    ms = milestone_set(g.n, resolve_k(k, g.n))
    labels = reference_label(g, _mst(g, ms), ms)
    assert verify_labels(g, labels, ms) == set()


@settings(max_examples=40)
@given(graphs(max_n=6))
def test_reference_labels_of_heavier_trees_are_rejected(g):
    ms = milestone_set(g.n, 0)
    weight_fn = lambda w: transform(w, ms)
    optimum = tree_weight(g, _mst(g, ms), weight_fn)
    for tree in spanning_trees(g):
        if tree_weight(g, tree, weight_fn) > optimum:
            assert verify_labels(g, reference_label(g, tree, ms), ms)


@settings(max_examples=60)
@given(graphs(min_n=3, max_n=9), st.data())
def test_tampered_counters_and_weights_are_rejected(g, data):
    ms = milestone_set(g.n, 0)
    labels = reference_label(g, _mst(g, ms), ms)
    v = data.draw(st.sampled_from(g.nodes))
    label = labels[v]
    if data.draw(st.booleans()):
        delta = data.draw(st.sampled_from([-1, 1]))
        assume(1 <= label.desc_count + delta <= g.n)
        labels[v] = replace(label, desc_count=label.desc_count + delta)
    else:
        assume(len(label.levels) > 1)
        level = data.draw(st.integers(min_value=0, max_value=len(label.levels) - 2))
        record = label.levels[level]
        changed = data.draw(st.integers(min_value=0, max_value=len(ms) - 1))
        assume(changed != record.max_weight_index)
        levels = list(label.levels)
        levels[level] = replace(record, max_weight_index=changed)
        labels[v] = replace(label, levels=tuple(levels))
    assert verify_labels(g, labels, ms)


TP, TC = Orientation.TOWARD_PARENT, Orientation.TOWARD_CHILD


def _label(parent, desc, *records):
    return CertificateLabel(parent, desc, 5, tuple(records) + (CENTER_RECORD,))


def test_rejects_two_centers_split_by_an_unpointed_edge():
    # centers 2 and 4 sit in one level-0 region; nothing points across the heavy edge 3-4
    g = WeightedGraph(range(1, 6), [(1, 2, 1), (2, 3, 1), (3, 4, 4), (4, 5, 1), (1, 5, 1)])
    ms = milestone_set(5, 0)
    labels = {
        1: _label(2, 1, LevelRecord(1, 0, TP)),
        2: _label(None, 5),
        3: _label(2, 3, LevelRecord(2, 0, TP)),
        4: _label(3, 2),
        5: _label(4, 1, LevelRecord(3, 0, TP)),
    }
    assert verify_labels(g, labels, ms) == {3}
    view = LabelView(3, labels[3], {2: labels[2], 4: labels[4]}, dict(g.incident(3)), ms, 5)
    assert verify_node(view).reasons == ["level 0: region edge without a pointer"]


def test_rejects_a_center_whose_subtrees_share_a_number():
    # both subtrees of center 1 are numbered 1, so 4 and 5 share a region with two centers
    g = WeightedGraph(range(1, 6), [(1, 2, 4), (1, 3, 1), (2, 4, 1), (3, 5, 1), (4, 5, 1)])
    ms = milestone_set(5, 0)
    labels = {
        1: _label(None, 5),
        2: _label(1, 2, LevelRecord(1, 2, TP)),
        3: _label(1, 2, LevelRecord(1, 0, TP)),
        4: _label(2, 1, LevelRecord(1, 2, TP), LevelRecord(1, 0, TP)),
        5: _label(3, 1, LevelRecord(1, 0, TP), LevelRecord(2, 0, TP)),
    }
    assert verify_labels(g, labels, ms) == {1}
    renumbered = {**labels, 3: _label(1, 2, LevelRecord(2, 0, TP))}
    renumbered[5] = _label(3, 1, LevelRecord(2, 0, TP), LevelRecord(2, 0, TP))
    assert 1 not in verify_labels(g, renumbered, ms)
    assert verify_labels(g, renumbered, ms)


def _stacks(n, ms):
    """
    Every well-formed level stack for n nodes. Verdicts only compare subtree numbers
    for equality at the same level, so numbers 1..n cover every labeling up to renaming.
    """
    records = [LevelRecord(s, w, o) for s in range(1, n + 1) for w in range(len(ms)) for o in (TP, TC)]
    return [
        prefix + (CENTER_RECORD,)
        for depth in range(n.bit_length())
        for prefix in product(records, repeat=depth)
    ]


def _accepted_labeling(g, tree, root, ms):
    """
    Depth-first search for labels that every node accepts and whose parent pointers
    encode tree rooted at root. Descendant counts are the true subtree sizes and
    subtree numbers are taken in first-use order per level. A partial labeling is cut
    as soon as a check that no later node can change fails.
    """
    parent, desc = orient(g.nodes, tree, root)
    order = list(parent)
    children = {v: [u for u in order if parent[u] == v] for v in order}
    stacks = _stacks(g.n, ms)
    labels = {}

    def rejects(w):
        present = {u: labels[u] for u in g.neighbors(w) if u in labels}
        reasons = verify_node(LabelView(w, labels[w], present, dict(g.incident(w)), ms, g.n)).reasons
        if len(present) == g.degree(w):
            return bool(reasons)
        settled = all(c in labels for c in children[w])
        return any(
            not r.startswith("acyclicity") and (settled or "no child consistent" not in r)
            for r in reasons
        )

    def extend(i, used):
        if i == len(order):
            return dict(labels)
        v = order[i]
        for levels in stacks:
            if any(r.subtree_number > used[d] + 1 for d, r in enumerate(levels) if not r.is_center):
                continue
            labels[v] = CertificateLabel(parent[v], desc[v], g.n, levels)
            if rejects(v) or any(rejects(u) for u in g.neighbors(v) if u in labels):
                continue
            grown = tuple(
                max(m, levels[d].subtree_number) if d < len(levels) else m for d, m in enumerate(used)
            )
            found = extend(i + 1, grown)
            if found:
                return found
        del labels[v]
        return None

    return extend(0, (0,) * g.n.bit_length())


def _heavier_trees(g, ms):
    weight_fn = lambda w: transform(w, ms)
    optimum = tree_weight(g, _mst(g, ms), weight_fn)
    return [tree for tree in spanning_trees(g) if tree_weight(g, tree, weight_fn) > optimum]


def _acyclicity_rejects(g, labels, ms):
    for v in g.nodes:
        view = LabelView(v, labels[v], {u: labels[u] for u in g.neighbors(v)}, dict(g.incident(v)), ms, g.n)
        if any(r.startswith("acyclicity") for r in verify_node(view).reasons):
            return True
    return False


def _descendant_counts_are_forced(g, tree, root, ms):
    labels = reference_label(g, tree, ms, root=root)
    for counts in product(range(1, g.n + 1), repeat=g.n):
        if all(labels[v].desc_count == c for v, c in zip(g.nodes, counts)):
            continue
        tampered = {v: replace(labels[v], desc_count=c) for v, c in zip(g.nodes, counts)}
        if not _acyclicity_rejects(g, tampered, ms):
            return False
    return True


def test_search_finds_labels_for_the_mst_of_a_triangle():
    g = _triangle()
    ms = milestone_set(3, 0)
    for root in g.nodes:
        labels = _accepted_labeling(g, [(1, 2), (2, 3)], root, ms)
        assert labels is not None
        assert verify_labels(g, labels, ms) == set()


def test_no_labeling_accepts_a_heavier_tree_of_a_triangle():
    g = _triangle()
    ms = milestone_set(3, 0)
    trees = _heavier_trees(g, ms)
    assert trees
    for tree in trees:
        for root in g.nodes:
            assert _descendant_counts_are_forced(g, tree, root, ms)
            assert _accepted_labeling(g, tree, root, ms) is None


SMALL_GRAPHS = [
    WeightedGraph(range(1, 5), [(1, 2, 1), (2, 3, 4), (3, 4, 1), (1, 4, 2), (1, 3, 3)]),
    WeightedGraph(range(1, 5), [(1, 2, 1), (1, 3, 2), (1, 4, 4), (2, 3, 3), (2, 4, 1), (3, 4, 4)]),
    WeightedGraph(range(1, 6), [(1, 2, 1), (2, 3, 1), (3, 4, 4), (4, 5, 1), (1, 5, 1)]),
    WeightedGraph(range(1, 6), [(1, 2, 4), (1, 3, 1), (2, 4, 1), (3, 5, 1), (4, 5, 1)]),
    WeightedGraph(range(1, 6), [(1, 2, 1), (2, 3, 2), (3, 4, 1), (4, 5, 4), (1, 5, 1), (2, 5, 3)]),
]


@pytest.mark.slow
@pytest.mark.parametrize("g", SMALL_GRAPHS)
def test_no_labeling_accepts_a_heavier_tree_of_a_small_graph(g):
    ms = milestone_set(g.n, 0)
    trees = _heavier_trees(g, ms)
    assert trees
    for tree in trees:
        for root in g.nodes:
            assert _descendant_counts_are_forced(g, tree, root, ms)
            assert _accepted_labeling(g, tree, root, ms) is None, (tree, root)


def _random_stack(rng, n, ms):
    depth = int(rng.integers(0, n.bit_length()))
    records = tuple(
        LevelRecord(int(rng.integers(1, n + 1)), int(rng.integers(len(ms))), Orientation(int(rng.integers(1, 3))))
        for _ in range(depth)
    )
    return records + (CENTER_RECORD,)


def _scrambled(rng, labels, n, ms):
    """Reference labels with the level stacks of a random set of nodes redrawn."""
    nodes = sorted(labels)
    picked = rng.choice(nodes, size=int(rng.integers(1, len(nodes) + 1)), replace=False)
    scrambled = dict(labels)
    for v in picked:
        scrambled[int(v)] = replace(labels[int(v)], levels=_random_stack(rng, n, ms))
    return scrambled


def _graph_with_heavier_trees(n, seed):
    while True:
        g = generate("random_connected", n, seed=seed)
        if _heavier_trees(g, milestone_set(n, 0)):
            return g
        seed += 1


def _random_labelings_are_rejected(n, seed, trees, count):
    g = _graph_with_heavier_trees(n, seed)
    ms = milestone_set(n, 0)
    rng = np.random.default_rng(seed)
    heavier = _heavier_trees(g, ms)
    for index in rng.choice(len(heavier), size=min(trees, len(heavier)), replace=False):
        tree = heavier[int(index)]
        references = [reference_label(g, tree, ms, root=root) for root in g.nodes]
        for _ in range(count):
            labels = references[int(rng.integers(len(references)))]
            assert verify_labels(g, _scrambled(rng, labels, g.n, ms), ms), tree


@pytest.mark.parametrize("seed", range(3))
def test_scrambled_labels_of_heavier_trees_are_rejected(seed):
    _random_labelings_are_rejected(6, seed, trees=2, count=200)


@pytest.mark.slow
@pytest.mark.parametrize("n", range(6, 10))
def test_ten_thousand_scrambled_labelings_per_heavier_tree(n):
    _random_labelings_are_rejected(n, n, trees=3, count=10_000)
