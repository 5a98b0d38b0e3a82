import logging
from dataclasses import replace
from enum import Enum

from ssmst.cert.labels import CENTER_RECORD, LevelRecord, Orientation
from ssmst.sim.kernel import Configuration
from ssmst.sim.state import (
    EPOCHS,
    BuildVars,
    CertifyVars,
    NodeState,
    Phase,
    PifState,
    ResetVars,
    ResetWave,
    TokenState,
    blank_state,
)

logger = logging.getLogger(__name__)


class CorruptionPolicy(str, Enum):
    NONE = "none"
    RANDOM_BITS = "random_bits"
    SWAP_STATES = "swap_states"
    STALE_PHASE = "stale_phase"
    GARBAGE_CERTIFICATES = "garbage_certificates"


def clean_configuration(g, ms, alpha):
    return Configuration(g, ms, {v: blank_state(v) for v in g.nodes}, alpha)


class _Garbage:
    """Draws arbitrary field values that still fit the declared widths."""

    def __init__(self, cfg, rng):
        self.cfg = cfg
        self.rng = rng
        self.nodes = list(cfg.graph.nodes)
        widths = cfg.net.widths
        self.counter_top = 1 << widths.counter
        self.index_top = 1 << widths.weight_index

    def flag(self):
        return bool(self.rng.integers(2))

    def node(self):
        return self.nodes[int(self.rng.integers(len(self.nodes)))]

    def node_or_none(self, v):
        # neighbours are drawn more often than far nodes so guards actually see them
        roll = int(self.rng.integers(4))
        if roll == 0:
            return None
        if roll == 1:
            return self.node()
        neighbors = self.cfg.graph.neighbors(v)
        return neighbors[int(self.rng.integers(len(neighbors)))] if neighbors else None

    def counter(self):
        return int(self.rng.integers(self.counter_top))

    def index(self):
        return int(self.rng.integers(self.index_top))

    def record(self, center=None):
        center = self.flag() if center is None else center
        if center:
            return CENTER_RECORD
        return LevelRecord(
            int(self.rng.integers(1, self.counter_top)),
            self.index(),
            Orientation(int(self.rng.integers(1, 3))),
        )

    def levels(self, well_terminated=False):
        depth = int(self.rng.integers(self.cfg.graph.n.bit_length() + 1))
        if well_terminated:
            depth = max(depth, 1)
            return tuple(self.record(False) for _ in range(depth - 1)) + (CENTER_RECORD,)
        return tuple(self.record() for _ in range(depth))

    def reset_vars(self):
        return ResetVars(int(self.rng.integers(EPOCHS)), ResetWave(int(self.rng.integers(3))))

    def build_vars(self, v):
        neighbors = self.cfg.graph.neighbors(v)
        return BuildVars(
            backbone_parent=self.node_or_none(v),
            backbone_root_id=self.node(),
            backbone_dist=self.counter(),
            count=self.counter(),
            token=TokenState(int(self.rng.integers(3))),
            token_child=self.node_or_none(v),
            token_bit=self.flag(),
            token_phase_weight=self.index(),
            token_added=self.flag(),
            token_spanning=self.flag(),
            component_name=self.node(),
            rename_wave=PifState(int(self.rng.integers(3))),
            rename_parent=self.node_or_none(v),
            mst_adjacency=frozenset(u for u in neighbors if self.flag()),
            orient_parent=self.node_or_none(v),
            oriented=self.flag(),
            desc_count=self.counter(),
            total_n=self.counter(),
            augment_ready=self.flag(),
        )

    def cert_vars(self, v, well_terminated=False):
        announce = None
        if self.flag():
            announce = (self.node(), int(self.rng.integers(1, self.counter_top)))
        return CertifyVars(
            work_parent=self.node_or_none(v),
            work_size=self.counter(),
            transfer_to=self.node_or_none(v),
            announce=announce,
            wave=PifState(int(self.rng.integers(3))),
            levels=self.levels(well_terminated),
        )


def _random_bits(cfg, garbage):
    states = {}
    for v in cfg.graph.nodes:
        states[v] = NodeState(
            Phase(int(garbage.rng.integers(len(Phase)))),
            garbage.reset_vars(),
            garbage.build_vars(v),
            garbage.cert_vars(v),
        )
    return states


def _swap_states(cfg, garbage):
    nodes = list(cfg.graph.nodes)
    order = [nodes[int(i)] for i in garbage.rng.permutation(len(nodes))]
    return {v: cfg.states[u] for v, u in zip(nodes, order)}


def _stale_phase(cfg, garbage):
    states = {}
    for v, state in cfg.states.items():
        states[v] = replace(state, phase=Phase(int(garbage.rng.integers(len(Phase)))))
    return states


def _garbage_certificates(cfg, garbage):
    states = {}
    n = cfg.graph.n
    for v, state in cfg.states.items():
        build = replace(
            state.build,
            orient_parent=garbage.node_or_none(v),
            oriented=True,
            desc_count=int(garbage.rng.integers(1, n + 1)),
            total_n=n,
            augment_ready=True,
        )
        cert = CertifyVars(levels=garbage.levels(well_terminated=True))
        states[v] = NodeState(Phase.DONE, state.reset, build, cert)
    return states


POLICIES = {
    CorruptionPolicy.RANDOM_BITS: _random_bits,
    CorruptionPolicy.SWAP_STATES: _swap_states,
    CorruptionPolicy.STALE_PHASE: _stale_phase,
    CorruptionPolicy.GARBAGE_CERTIFICATES: _garbage_certificates,
}


def corrupt(cfg, rng, policy):
    """
    Replaces the mutable memory of cfg with arbitrary well-formed states; the graph
    and milestones are untouched.
    """
    policy = CorruptionPolicy(policy)
    if policy == CorruptionPolicy.NONE:
        return cfg
    states = POLICIES[policy](cfg, _Garbage(cfg, rng))
    logger.debug("corrupted %d states with %s", len(states), policy.value)
    return Configuration(cfg.graph, cfg.ms, states, cfg.alpha)
