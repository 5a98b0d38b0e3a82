import logging
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from ssmst.cert.labels import dump_labels, label_from_state
from ssmst.cert.verify import verify_all
from ssmst.configs.config import Config
from ssmst.lib.milestones import approximation_bound, k_range, milestone_set, transform
from ssmst.lib.oracle import is_spanning_tree, kruskal, tree_weight
from ssmst.protocol.build import selected_tree
from ssmst.protocol.stack import clean_waves, full_rules, reset_count
from ssmst.sim.corrupt import clean_configuration, corrupt
from ssmst.sim.kernel import closure_check, run_until_silent
from ssmst.sim.scheduler import SchedulerPolicy

logger = logging.getLogger(__name__)


def _fraction(value):
    return f"{value.numerator}/{value.denominator}"


@dataclass
class TrialResult:
    graph: str
    n: int
    k: int
    scheduler: str
    corruption: str
    seed: int
    rounds: int = 0
    steps: int = 0
    cause: str = ""
    tree_weight: int = 0
    optimum: int = 0
    ratio: str = ""
    bound: str = ""
    within_bound: bool = False
    transformed_optimal: bool = False
    peak_bits: int = 0
    cap_bits: str = ""
    max_levels: int = 0
    reset_triggers: int = 0
    clean_waves: int = 0
    verified: bool = False
    closure_ok: bool = False
    error: str = None

    @property
    def passed(self):
        return (
            self.error is None
            and self.cause == "silent"
            and self.verified
            and self.closure_ok
            and self.within_bound
            and self.transformed_optimal
            and self.peak_bits <= Fraction(self.cap_bits)
            and self.max_levels <= self.n.bit_length()
        )

    def to_dict(self):
        record = asdict(self)
        record["passed"] = self.passed
        return record


def resolve_k(k, n):
    """Accepts an integer or one of 'min' / 'max' (the ends of k_range(n))."""
    low, high = k_range(n)
    if k == "min":
        return low
    if k == "max":
        return high
    return int(k)


def run_trial(
    g,
    k,
    scheduler,
    corruption="none",
    seed=0,
    max_rounds=None,
    graph_name=None,
    trace_path=None,
    labels_path=None,
):
    """
    One stabilization run of the full rule stack on g, checked against the oracle.
    Budget exhaustion and extraction failures are reported in the result.

    Args:
        k: integer trade-off parameter, or "min" / "max".
        trace_path: JSON-lines dump of every step.
        labels_path: dump of the final certificate labels of a silent run.
    """
    config = Config()
    ms = milestone_set(g.n, resolve_k(k, g.max_weight), top=g.max_weight)
    max_rounds = max_rounds or config.round_budget_for(g.n)
    result = TrialResult(
        graph=graph_name or repr(g),
        n=g.n,
        k=ms.k,
        scheduler=str(getattr(scheduler, "value", scheduler)),
        corruption=str(getattr(corruption, "value", corruption)),
        seed=seed,
    )
    corruption_seed, _ = np.random.SeedSequence(seed).spawn(2)
    cfg = corrupt(
        clean_configuration(g, ms, config.alpha),
        np.random.default_rng(corruption_seed),
        corruption,
    )
    rules = full_rules(ms)
    policy = SchedulerPolicy(scheduler, seed)

    trace = run_until_silent(cfg, rules, policy, max_rounds, trace_path=trace_path)
    final = trace.final
    result.rounds = trace.rounds
    result.steps = trace.steps
    result.cause = trace.cause
    result.peak_bits = max(trace.peak_bits.values())
    result.cap_bits = _fraction(Fraction(final.net.cap_bits))
    result.max_levels = max(len(s.cert.levels) for s in final.states.values())
    result.reset_triggers = reset_count(trace)
    result.clean_waves = clean_waves(trace)

    bound = approximation_bound(ms.k, ms.L)
    result.bound = _fraction(bound)
    _, _, optimum = kruskal(g)
    _, transformed_optimum, _ = kruskal(g, lambda w: transform(w, ms))
    result.optimum = optimum
    if not trace.silent:
        logger.warning("trial %s k=%d seed=%d exhausted its round budget", result.graph, ms.k, seed)
        return result

    try:
        tree = selected_tree(final)
    except ValueError as error:
        result.error = str(error)
        return result
    if not is_spanning_tree(g, tree):
        result.error = "selected edges do not form a spanning tree"
        return result
    result.tree_weight = tree_weight(g, tree)
    ratio = Fraction(result.tree_weight, optimum)
    result.ratio = _fraction(ratio)
    result.within_bound = ratio <= bound
    result.transformed_optimal = tree_weight(g, tree, lambda w: transform(w, ms)) == transformed_optimum
    result.verified = not verify_all(final)
    result.closure_ok = closure_check(final, rules, policy)
    if labels_path:
        with open(labels_path, "w") as f:
            f.write(dump_labels({v: label_from_state(s) for v, s in final.states.items()}))
    return result


def summarize(results):
    """End-of-fleet table: worst ratio per k, peak bits per (n, k), longest run."""
    summary = {
        "trials": len(results),
        "passed": sum(1 for r in results if r.passed),
        "errors": sum(1 for r in results if r.error),
        "budget_exhausted": sum(1 for r in results if r.cause == "round_budget_exhausted"),
        "max_rounds": max((r.rounds for r in results), default=0),
        "max_ratio_per_k": {},
        "max_bits_per_n_k": {},
    }
    for r in results:
        if r.ratio:
            current = summary["max_ratio_per_k"].get(r.k)
            if current is None or Fraction(r.ratio) > Fraction(current):
                summary["max_ratio_per_k"][r.k] = r.ratio
        key = f"{r.n},{r.k}"
        summary["max_bits_per_n_k"][key] = max(summary["max_bits_per_n_k"].get(key, 0), r.peak_bits)
    return summary
