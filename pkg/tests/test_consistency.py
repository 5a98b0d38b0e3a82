from dataclasses import replace
from fractions import Fraction

from ssmst.cert.labels import LevelRecord, Orientation
from ssmst.lib.graph import generate
from ssmst.lib.milestones import milestone_set
from ssmst.protocol.consistency import inconsistency, locally_consistent, mutual, quiet
from ssmst.sim.corrupt import clean_configuration
from ssmst.sim.state import Phase, PifState, ResetWave, TokenState

from .strategies import certifying_path, path_graph


def _path(n=3):
    g = path_graph([1] * (n - 1))
    return clean_configuration(g, milestone_set(n, 0), 96)


def test_clean_configurations_are_consistent():
    for kind, n in [("path", 5), ("star", 6), ("complete", 5), ("grid", 9)]:
        g = generate(kind, n, "uniform_1_to_n", seed=1)
        cfg = clean_configuration(g, milestone_set(n, 0), 96)
        assert all(locally_consistent(cfg.view(v)) for v in g.nodes)


def _with(cfg, v, state):
    return cfg.with_states({v: state})


def test_backbone_checks():
    cfg = _path()
    bad = _with(cfg, 2, cfg.states[2].with_build(backbone_root_id=3))
    assert inconsistency(bad.view(2)) == "backbone root above own identifier"
    orphan = _with(cfg, 2, cfg.states[2].with_build(backbone_root_id=1))
    assert inconsistency(orphan.view(2)) == "parentless node is not its own root"
    far = _with(cfg, 3, cfg.states[3].with_build(backbone_parent=1, backbone_root_id=1, backbone_dist=1))
    assert inconsistency(far.view(3)) == "backbone parent is not a neighbor"


def test_reset_flags_must_agree():
    cfg = _path()
    state = replace(cfg.states[2], phase=Phase.RESET)
    assert inconsistency(_with(cfg, 2, state).view(2)) == "reset flags disagree"


def test_phase_gap():
    cfg = _path()
    state = replace(cfg.states[2], phase=Phase.DONE)
    assert inconsistency(_with(cfg, 2, state).view(1)) == "phase gap with 2"


def test_token_outside_build():
    cfg = _path()
    state = replace(cfg.states[1].with_build(token=TokenState.HERE, count=3, oriented=True), phase=Phase.AUGMENT)
    assert inconsistency(_with(cfg, 1, state).view(1)) == "token outside BUILD"


def test_token_before_counting():
    cfg = _path()
    state = cfg.states[1].with_build(token=TokenState.HERE)
    assert inconsistency(_with(cfg, 1, state).view(1)) == "token started before the backbone was counted"


def test_asymmetric_selection_needs_a_broadcasting_holder():
    cfg = _path()
    state = cfg.states[1].with_build(mst_adjacency=frozenset({2}))
    assert inconsistency(_with(cfg, 1, state).view(1)) == "asymmetric edge selection"
    assert inconsistency(_with(cfg, 1, state).view(2)) == "asymmetric edge selection"


def test_component_names_agree_across_idle_tree_edges():
    cfg = _path()
    cfg = cfg.with_states(
        {
            1: cfg.states[1].with_build(mst_adjacency=frozenset({2})),
            2: cfg.states[2].with_build(mst_adjacency=frozenset({1})),
        }
    )
    assert mutual(cfg.view(1)) == [2]
    assert inconsistency(cfg.view(2)) == "component names differ across a tree edge"
    renamed = cfg.with_states({2: cfg.states[2].with_build(component_name=1)})
    assert locally_consistent(renamed.view(1))
    assert locally_consistent(renamed.view(2))


def test_renaming_needs_a_root():
    cfg = _path()
    state = cfg.states[2].with_build(rename_wave=PifState.FEEDBACK)
    assert inconsistency(_with(cfg, 2, state).view(2)) == "renaming wave without a root"


def test_augmentation_data_during_build():
    cfg = _path()
    state = cfg.states[2].with_build(desc_count=1)
    assert inconsistency(_with(cfg, 2, state).view(2)) == "augmentation data during BUILD"


def test_memory_cap():
    g = path_graph([1, 1])
    cfg = clean_configuration(g, milestone_set(3, 0), Fraction(1, 100))
    assert inconsistency(cfg.view(1)) == "memory cap exceeded"


def test_quiet_sees_neighbouring_resets():
    cfg = _path()
    frozen = replace(cfg.states[1], phase=Phase.RESET).with_reset(wave=ResetWave.FREEZE)
    cfg = _with(cfg, 1, frozen)
    assert not quiet(cfg.view(1))
    assert not quiet(cfg.view(2))
    assert quiet(cfg.view(3))


def test_certifying_path_is_consistent():
    cfg = certifying_path()
    assert all(locally_consistent(cfg.view(v)) for v in cfg.graph.nodes)


def test_region_member_left_behind_a_settled_broadcast():
    cfg = certifying_path()
    numbered = cfg.states[2].with_cert(
        work_parent=None, levels=(LevelRecord(1, 0, Orientation.TOWARD_PARENT),)
    )
    settled = cfg.with_states({2: numbered})
    assert inconsistency(settled.view(2)) == "working child outside the region"
    assert inconsistency(settled.view(3)) == "missed the working parent's broadcast"
    broadcasting = cfg.with_states({2: numbered.with_cert(wave=PifState.BROADCAST)})
    assert locally_consistent(broadcasting.view(2))
    assert locally_consistent(broadcasting.view(3))
