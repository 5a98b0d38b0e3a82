import logging
from dataclasses import replace

from ssmst.protocol.consistency import in_reset, inconsistency
from ssmst.sim.kernel import Rule
from ssmst.sim.state import EPOCHS, Phase, ResetWave, blank_state

logger = logging.getLogger(__name__)

TRIGGER = "reset_trigger"
PROPAGATE = "reset_propagate"
CLEAN = "reset_clean"
RECEDE = "reset_recede"


def _next_epoch(epoch):
    return (epoch + 1) % EPOCHS


def _trigger_guard(view):
    if view.state.reset.wave != ResetWave.NONE:
        return False
    if any(in_reset(u) for u in view.neighbors.values()):
        return False
    return inconsistency(view) is not None


def _trigger(view):
    logger.info("node %s triggers a reset: %s", view.node, inconsistency(view))
    return replace(view.state, phase=Phase.RESET).with_reset(wave=ResetWave.FREEZE)


def _frozen_sources(view):
    epoch = view.state.reset.epoch
    return sorted(
        u
        for u, other in view.neighbors.items()
        if other.reset.wave == ResetWave.FREEZE and epoch != _next_epoch(other.reset.epoch)
    )


def _propagate_guard(view):
    return view.state.reset.wave == ResetWave.NONE and bool(_frozen_sources(view))


def _propagate(view):
    source = view.neighbors[_frozen_sources(view)[0]]
    return replace(view.state, phase=Phase.RESET).with_reset(
        epoch=source.reset.epoch, wave=ResetWave.FREEZE
    )


def _clean_guard(view):
    reset = view.state.reset
    if reset.wave != ResetWave.FREEZE:
        return False
    after = _next_epoch(reset.epoch)
    for other in view.neighbors.values():
        if other.reset.wave == ResetWave.NONE and other.reset.epoch != after:
            return False
    return True


def _clean(view):
    state = blank_state(view.node, _next_epoch(view.state.reset.epoch))
    return replace(state, phase=Phase.RESET).with_reset(wave=ResetWave.CLEAN)


def _recede_guard(view):
    if view.state.reset.wave != ResetWave.CLEAN:
        return False
    return all(other.reset.wave != ResetWave.FREEZE for other in view.neighbors.values())


def _recede(view):
    return replace(view.state, phase=Phase.BUILD).with_reset(wave=ResetWave.NONE)


def reset_rules():
    """Reset rules, highest priority first; they dominate every other rule group."""
    return [
        Rule(TRIGGER, _trigger_guard, _trigger),
        Rule(PROPAGATE, _propagate_guard, _propagate),
        Rule(CLEAN, _clean_guard, _clean),
        Rule(RECEDE, _recede_guard, _recede),
    ]
