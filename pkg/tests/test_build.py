import pytest

from ssmst.cert.labels import InvalidTreeError
from ssmst.lib.graph import WeightedGraph
from ssmst.lib.milestones import milestone_set, transform
from ssmst.lib.oracle import kruskal, tree_weight
from ssmst.protocol.build import count_target, selected_tree
from ssmst.protocol.reset import TRIGGER
from ssmst.protocol.stack import full_rules
from ssmst.sim.corrupt import clean_configuration
from ssmst.sim.kernel import run_until_silent
from ssmst.sim.scheduler import SchedulerPolicy
from ssmst.sim.state import Phase

from .strategies import path_graph


def _settled_backbone():
    g = path_graph([2, 1])
    cfg = clean_configuration(g, milestone_set(3, 0), 96)
    return cfg.with_states(
        {
            2: cfg.states[2].with_build(backbone_parent=1, backbone_root_id=1, backbone_dist=1),
            3: cfg.states[3].with_build(backbone_parent=2, backbone_root_id=1, backbone_dist=2),
        }
    )


def _run(g, k=0, scheduler="all_enabled", seed=0):
    ms = milestone_set(g.n, k)
    cfg = clean_configuration(g, ms, 96)
    return ms, run_until_silent(cfg, full_rules(ms), SchedulerPolicy(scheduler, seed), 20000)


def test_count_waits_for_the_whole_neighbourhood():
    g = path_graph([2, 1])
    cfg = clean_configuration(g, milestone_set(3, 0), 96)
    assert count_target(cfg.view(1)) == 0


def test_count_is_a_convergecast():
    cfg = _settled_backbone()
    assert count_target(cfg.view(3)) == 1
    assert count_target(cfg.view(2)) == 0
    cfg = cfg.with_states({3: cfg.states[3].with_build(count=1)})
    assert count_target(cfg.view(2)) == 2
    cfg = cfg.with_states({2: cfg.states[2].with_build(count=2)})
    assert count_target(cfg.view(1)) == 3


def test_count_above_n_is_refused():
    cfg = _settled_backbone()
    cfg = cfg.with_states({3: cfg.states[3].with_build(count=3)})
    assert count_target(cfg.view(2)) == 0


def test_one_sided_selection_is_not_a_tree():
    g = path_graph([2, 1])
    cfg = clean_configuration(g, milestone_set(3, 0), 96)
    cfg = cfg.with_states({1: cfg.states[1].with_build(mst_adjacency=frozenset({2}))})
    with pytest.raises(InvalidTreeError):
        selected_tree(cfg)


def test_clean_path_builds_its_only_tree():
    _, trace = _run(path_graph([2, 1]))
    assert trace.silent
    assert trace.rule_counts[TRIGGER] == 0
    assert selected_tree(trace.final) == [(1, 2), (2, 3)]
    assert all(s.phase == Phase.DONE for s in trace.final.states.values())


@pytest.mark.parametrize("scheduler", ["all_enabled", "single_random", "adversarial_stubborn"])
def test_square_with_a_heavy_edge(scheduler):
    g = WeightedGraph([1, 2, 3, 4], [(1, 2, 1), (2, 3, 1), (3, 4, 1), (1, 4, 4)])
    _, trace = _run(g, scheduler=scheduler, seed=3)
    assert trace.silent
    assert selected_tree(trace.final) == [(1, 2), (2, 3), (3, 4)]


def test_tree_is_minimal_under_transformed_weights():
    g = WeightedGraph(
        range(1, 7),
        [(1, 2, 5), (2, 3, 1), (3, 4, 6), (4, 5, 2), (5, 6, 3), (6, 1, 1), (2, 5, 4)],
    )
    ms, trace = _run(g)
    weight_fn = lambda w: transform(w, ms)
    _, optimum, _ = kruskal(g, weight_fn)
    assert trace.silent
    assert tree_weight(g, selected_tree(trace.final), weight_fn) == optimum
