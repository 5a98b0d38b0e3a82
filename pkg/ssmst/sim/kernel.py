import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from ssmst.lib.bits import Widths
from ssmst.lib.milestones import transform_index
from ssmst.sim.scheduler import Scheduler, SchedulerError, SchedulerPolicy
from ssmst.sim.state import serialized_bits

logger = logging.getLogger(__name__)

SILENT = "silent"
BUDGET_EXHAUSTED = "round_budget_exhausted"


@dataclass(frozen=True)
class NetworkInfo:
    """Non-mutable memory every node may read: n, milestones, field widths and the memory cap."""

    n: int
    ms: object
    widths: Widths
    alpha: Fraction

    @property
    def last_index(self):
        return len(self.ms) - 1

    @property
    def cap_bits(self):
        return self.alpha * max((self.n - 1).bit_length(), 1) * self.widths.weight_index


class LocalView:
    __slots__ = ("node", "state", "neighbors", "weights", "net")

    def __init__(self, node, state, neighbors, weights, net):
        self.node = node
        self.state = state
        self.neighbors = neighbors
        self.weights = weights
        self.net = net

    def nbr(self, u):
        return self.neighbors.get(u)

    def tw(self, u):
        return transform_index(self.weights[u], self.net.ms)

    def bits(self):
        return serialized_bits(self.state, self.net.widths, self.weights)


@dataclass(frozen=True)
class Rule:
    name: str
    guard: object
    action: object


class Configuration:
    def __init__(self, graph, ms, states, alpha):
        if set(states) != set(graph.nodes):
            raise ValueError("A configuration needs exactly one state per node.")
        self.graph = graph
        self.ms = ms
        self.states = dict(states)
        self.alpha = Fraction(alpha)

    @cached_property
    def net(self):
        return NetworkInfo(self.graph.n, self.ms, Widths.for_network(self.graph, self.ms), self.alpha)

    def view(self, v):
        return LocalView(
            v,
            self.states[v],
            {u: self.states[u] for u in self.graph.neighbors(v)},
            self.graph.incident(v),
            self.net,
        )

    def with_states(self, changes):
        states = dict(self.states)
        states.update(changes)
        cfg = Configuration(self.graph, self.ms, states, self.alpha)
        cfg.__dict__["net"] = self.net
        return cfg

    def bits(self, v):
        return serialized_bits(self.states[v], self.net.widths, self.graph.incident(v))

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return (self.graph, self.ms, self.states) == (other.graph, other.ms, other.states)

    def __repr__(self):
        return f"Configuration(n={self.graph.n}, k={self.ms.k})"


def _first_enabled(view, rules):
    for rule in rules:
        if rule.guard(view):
            return rule
    return None


def enabled(cfg, v, rules):
    view = cfg.view(v)
    return [rule.name for rule in rules if rule.guard(view)]


def _apply(cfg, chosen, rules):
    # every action reads the pre-step configuration
    changes, fired = {}, {}
    for v in chosen:
        view = cfg.view(v)
        rule = _first_enabled(view, rules)
        if rule is None:
            raise SchedulerError(f"Node {v} was selected but is not enabled.")
        changes[v] = rule.action(view)
        fired[v] = rule.name
    return cfg.with_states(changes), fired


def step(cfg, rules, scheduler, rng):
    ready = sorted(v for v in cfg.graph.nodes if _first_enabled(cfg.view(v), rules))
    if not ready:
        raise SchedulerError("step called on a configuration with no enabled node.")
    new_cfg, _ = _apply(cfg, scheduler(ready, rng), rules)
    return new_cfg


class RoundCounter:
    """
    Online round accounting: a round ends once every node enabled at its start has
    stepped or stopped being enabled.
    """

    def __init__(self, enabled_now):
        self.rounds = 0
        self.pending = set(enabled_now)

    def observe(self, activated, enabled_now):
        if not self.pending:
            return False
        self.pending -= set(activated)
        self.pending &= set(enabled_now)
        if self.pending:
            return False
        self.rounds += 1
        self.pending = set(enabled_now)
        return True


def rounds_from_log(log, final_enabled):
    """
    Reference round count from an activation log of (enabled_before, activated)
    pairs plus the enabled set after the last step.
    """
    rounds = 0
    pending = None
    for i, (enabled_before, activated) in enumerate(log):
        if pending is None:
            pending = set(enabled_before)
        after = log[i + 1][0] if i + 1 < len(log) else final_enabled
        pending = {v for v in pending if v not in activated and v in after}
        if not pending:
            rounds += 1
            pending = None
    return rounds


@dataclass
class ExecutionTrace:
    initial: Configuration
    final: Configuration
    steps: int
    rounds: int
    cause: str
    peak_bits: dict
    rule_counts: Counter = field(default_factory=Counter)
    node_rule_counts: Counter = field(default_factory=Counter)
    round_marks: list = field(default_factory=list)
    log: list = field(default_factory=list)

    @property
    def silent(self):
        return self.cause == SILENT

    def activations(self, rule, v):
        return self.node_rule_counts[(rule, v)]


def run_until_silent(cfg, rules, policy, max_rounds, rng=None, record=False, trace_path=None):
    """
    Runs scheduler steps until no node is enabled or max_rounds rounds have elapsed.

    Args:
        policy: a SchedulerPolicy (its seed seeds the rng) or a Scheduler instance.
        record: keep the (enabled_before, activated) log for rounds_from_log.
        trace_path: optional JSON-lines dump of every step.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1.")
    if isinstance(policy, SchedulerPolicy):
        scheduler = policy.build()
        rng = np.random.default_rng(policy.seed) if rng is None else rng
    elif isinstance(policy, Scheduler):
        scheduler = policy
        rng = np.random.default_rng(0) if rng is None else rng
    else:
        raise TypeError(f"Unsupported scheduler policy {policy!r}.")

    initial = cfg
    active = {}
    for v in cfg.graph.nodes:
        rule = _first_enabled(cfg.view(v), rules)
        if rule is not None:
            active[v] = rule
    peak = {v: cfg.bits(v) for v in cfg.graph.nodes}
    counter = RoundCounter(active)
    rule_counts, node_rule_counts = Counter(), Counter()
    log, round_marks = [], []
    steps = 0
    dump = open(trace_path, "w") if trace_path else None

    try:
        while active and counter.rounds < max_rounds:
            ready = sorted(active)
            chosen = scheduler(ready, rng)
            cfg, fired = _apply(cfg, chosen, rules)
            steps += 1
            for v, name in fired.items():
                rule_counts[name] += 1
                node_rule_counts[(name, v)] += 1
                peak[v] = max(peak[v], cfg.bits(v))

            touched = set(chosen)
            for v in chosen:
                touched.update(cfg.graph.neighbors(v))
            for v in touched:
                rule = _first_enabled(cfg.view(v), rules)
                if rule is None:
                    active.pop(v, None)
                else:
                    active[v] = rule

            if record:
                log.append((frozenset(ready), frozenset(chosen)))
            if counter.observe(chosen, active):
                round_marks.append(steps)
            logger.debug("step %d activated %s round %d", steps, sorted(chosen), counter.rounds)
            if dump:
                dump.write(
                    json.dumps(
                        {
                            "step": steps,
                            "activated": sorted(chosen),
                            "round": counter.rounds,
                            "enabled_count": len(active),
                        }
                    )
                    + "\n"
                )
    finally:
        if dump:
            dump.close()

    cause = SILENT if not active else BUDGET_EXHAUSTED
    logger.info("run ended %s after %d rounds, %d steps", cause, counter.rounds, steps)
    return ExecutionTrace(
        initial=initial,
        final=cfg,
        steps=steps,
        rounds=counter.rounds,
        cause=cause,
        peak_bits=peak,
        rule_counts=rule_counts,
        node_rule_counts=node_rule_counts,
        round_marks=round_marks,
        log=log,
    )


def enabled_nodes(cfg, rules):
    return sorted(v for v in cfg.graph.nodes if _first_enabled(cfg.view(v), rules))


def closure_check(cfg, rules, policy, attempts=100):
    """
    A silent configuration stays bit-identical under further scheduler invocations.
    Enabled nodes are stepped up to `attempts` times before comparing.
    """
    scheduler = policy.build() if isinstance(policy, SchedulerPolicy) else policy
    rng = np.random.default_rng(getattr(policy, "seed", 0))
    snapshot = {v: cfg.bits(v) for v in cfg.graph.nodes}
    current = cfg
    for _ in range(attempts):
        if not enabled_nodes(current, rules):
            break
        current = step(current, rules, scheduler, rng)
    if enabled_nodes(current, rules):
        return False
    return current == cfg and snapshot == {v: current.bits(v) for v in current.graph.nodes}
