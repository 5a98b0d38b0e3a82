import json
from fractions import Fraction

import numpy as np
import pytest

from ssmst.lib.milestones import milestone_set
from ssmst.sim.kernel import (
    BUDGET_EXHAUSTED,
    SILENT,
    Configuration,
    RoundCounter,
    Rule,
    closure_check,
    enabled,
    enabled_nodes,
    rounds_from_log,
    run_until_silent,
    step,
)
from ssmst.sim.scheduler import AllEnabled, SchedulerError, SchedulerPolicy
from ssmst.sim.state import blank_state

from .strategies import path_graph


def _smaller_root(view):
    return min((o.build.backbone_root_id for o in view.neighbors.values()), default=view.node)


def _adopt_guard(view):
    return _smaller_root(view) < view.state.build.backbone_root_id


def _adopt(view):
    return view.state.with_build(backbone_root_id=_smaller_root(view))


RULES = [Rule("adopt_min", _adopt_guard, _adopt)]


def _path(n):
    g = path_graph([1] * (n - 1))
    return Configuration(g, milestone_set(n, 0), {v: blank_state(v) for v in g.nodes}, 96)


def test_configuration_needs_every_node():
    g = path_graph([1, 1])
    with pytest.raises(ValueError):
        Configuration(g, milestone_set(3, 0), {1: blank_state(1)}, 96)


def test_network_info():
    cfg = _path(16)
    assert cfg.net.n == 16
    assert cfg.net.last_index == 4
    assert cfg.net.cap_bits == Fraction(96) * 4 * 3


def test_actions_read_the_pre_step_configuration():
    cfg = step(_path(3), RULES, AllEnabled(), np.random.default_rng(0))
    assert cfg.states[2].build.backbone_root_id == 1
    assert cfg.states[3].build.backbone_root_id == 2


def test_enabled_lists_rule_names():
    cfg = _path(3)
    assert enabled(cfg, 1, RULES) == []
    assert enabled(cfg, 2, RULES) == ["adopt_min"]
    assert enabled_nodes(cfg, RULES) == [2, 3]


def test_step_on_a_silent_configuration_is_an_error():
    cfg = run_until_silent(_path(3), RULES, SchedulerPolicy("all_enabled"), 10).final
    with pytest.raises(SchedulerError):
        step(cfg, RULES, AllEnabled(), np.random.default_rng(0))


def test_synchronous_run_on_a_path():
    trace = run_until_silent(_path(4), RULES, SchedulerPolicy("all_enabled"), 100, record=True)
    assert trace.cause == SILENT
    assert trace.silent
    assert trace.steps == 3
    assert trace.rounds == 3
    assert trace.rule_counts["adopt_min"] == 6
    assert trace.activations("adopt_min", 4) == 3
    assert rounds_from_log(trace.log, []) == trace.rounds
    assert all(s.build.backbone_root_id == 1 for s in trace.final.states.values())


@pytest.mark.parametrize("kind", ["single_random", "random_subset", "adversarial_stubborn", "adversarial_starve_one"])
def test_every_scheduler_reaches_silence(kind):
    trace = run_until_silent(_path(6), RULES, SchedulerPolicy(kind, seed=4), 1000, record=True)
    assert trace.silent
    assert rounds_from_log(trace.log, []) == trace.rounds
    assert closure_check(trace.final, RULES, SchedulerPolicy(kind, seed=4))


def test_budget_exhaustion_is_reported():
    trace = run_until_silent(_path(4), RULES, SchedulerPolicy("all_enabled"), 1)
    assert trace.cause == BUDGET_EXHAUSTED
    assert trace.rounds == 1
    with pytest.raises(ValueError):
        run_until_silent(_path(4), RULES, SchedulerPolicy("all_enabled"), 0)


def test_peak_bits_never_below_the_initial_size():
    cfg = _path(4)
    trace = run_until_silent(cfg, RULES, SchedulerPolicy("all_enabled"), 100)
    assert all(trace.peak_bits[v] >= cfg.bits(v) for v in cfg.graph.nodes)


def test_trace_dump(tmp_path):
    path = tmp_path / "trace.jsonl"
    trace = run_until_silent(_path(4), RULES, SchedulerPolicy("all_enabled"), 100, trace_path=str(path))
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(lines) == trace.steps
    assert lines[0]["activated"] == [2, 3, 4]
    assert lines[-1]["enabled_count"] == 0


def test_round_counter():
    counter = RoundCounter({1, 2})
    assert not counter.observe([1], {2, 3})
    assert counter.observe([2], {3})
    assert counter.rounds == 1
    assert counter.observe([3], set())
    assert counter.rounds == 2
    assert not counter.observe([], set())


def test_closure_check_detects_enabled_nodes():
    assert not closure_check(_path(3), RULES, SchedulerPolicy("all_enabled"))


def test_no_rules_means_silent():
    trace = run_until_silent(_path(3), [], SchedulerPolicy("all_enabled"), 10)
    assert trace.silent
    assert trace.steps == trace.rounds == 0


def test_closure_check_steps_a_moving_configuration():
    flip = Rule("flip", lambda view: True, lambda view: view.state.with_build(count=1 - view.state.build.count))
    cfg = _path(2)
    assert not closure_check(cfg, [flip], SchedulerPolicy("all_enabled"), attempts=2)
    silent = run_until_silent(_path(3), RULES, SchedulerPolicy("all_enabled"), 10).final
    assert closure_check(silent, RULES, SchedulerPolicy("single_random", seed=2))
