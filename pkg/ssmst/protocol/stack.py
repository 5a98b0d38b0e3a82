from ssmst.protocol.build import build_rules
from ssmst.protocol.certify import certify_rules
from ssmst.protocol.reset import CLEAN, TRIGGER, reset_rules


def full_rules(ms):
    """Reset rules first, then construction, then certification."""
    return reset_rules() + build_rules(ms) + certify_rules(ms)


def reset_count(trace):
    return trace.rule_counts[TRIGGER]


def clean_waves(trace):
    """Largest number of times a single node wiped its state."""
    counts = [n for (rule, _), n in trace.node_rule_counts.items() if rule == CLEAN]
    return max(counts, default=0)
