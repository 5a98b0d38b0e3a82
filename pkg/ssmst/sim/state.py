from dataclasses import dataclass, field, replace
from enum import IntEnum

from ssmst.lib.bits import BitWriter

PHASE_BITS = 3
ENUM_BITS = 2
EPOCHS = 4


class Phase(IntEnum):
    RESET = 0
    BUILD = 1
    AUGMENT = 2
    CERTIFY = 3
    DONE = 4


class ResetWave(IntEnum):
    NONE = 0
    FREEZE = 1
    CLEAN = 2


class PifState(IntEnum):
    IDLE = 0
    BROADCAST = 1
    FEEDBACK = 2


class TokenState(IntEnum):
    IDLE = 0
    HERE = 1
    CHILD = 2


@dataclass(frozen=True)
class ResetVars:
    epoch: int = 0
    wave: ResetWave = ResetWave.NONE


@dataclass(frozen=True)
class BuildVars:
    # backbone
    backbone_parent: object
    backbone_root_id: int
    backbone_dist: int
    count: int
    # token
    token: TokenState
    token_child: object
    token_bit: bool
    token_phase_weight: int
    token_added: bool
    token_spanning: bool
    # components
    component_name: int
    rename_wave: PifState
    rename_parent: object
    mst_adjacency: frozenset
    # augmentation
    orient_parent: object
    oriented: bool
    desc_count: int
    total_n: int
    augment_ready: bool


@dataclass(frozen=True)
class CertifyVars:
    work_parent: object = None
    work_size: int = 0
    transfer_to: object = None
    announce: object = None
    wave: PifState = PifState.IDLE
    levels: tuple = field(default_factory=tuple)

    @property
    def recursion_depth(self):
        return len(self.levels)


@dataclass(frozen=True)
class NodeState:
    phase: Phase
    reset: ResetVars
    build: BuildVars
    cert: CertifyVars

    def with_build(self, **changes):
        return replace(self, build=replace(self.build, **changes))

    def with_cert(self, **changes):
        return replace(self, cert=replace(self.cert, **changes))

    def with_reset(self, **changes):
        return replace(self, reset=replace(self.reset, **changes))


def blank_build(v):
    return BuildVars(
        backbone_parent=None,
        backbone_root_id=v,
        backbone_dist=0,
        count=0,
        token=TokenState.IDLE,
        token_child=None,
        token_bit=False,
        token_phase_weight=0,
        token_added=False,
        token_spanning=False,
        component_name=v,
        rename_wave=PifState.IDLE,
        rename_parent=None,
        mst_adjacency=frozenset(),
        orient_parent=None,
        oriented=False,
        desc_count=0,
        total_n=0,
        augment_ready=False,
    )


BLANK_CERT = CertifyVars()


def blank_state(v, epoch=0):
    """State left behind by a reset: phase BUILD, every protocol variable blank."""
    return NodeState(Phase.BUILD, ResetVars(epoch, ResetWave.NONE), blank_build(v), BLANK_CERT)


def certify_start(state):
    """Working copies of the augmented tree taken when a node enters CERTIFY."""
    return replace(
        state,
        phase=Phase.CERTIFY,
        cert=CertifyVars(
            work_parent=state.build.orient_parent,
            work_size=state.build.desc_count,
        ),
    )


def _node_id(value):
    return 0 if value is None else value


def encode_state(state, widths, neighbors):
    """
    Canonical bit encoding of a node's mutable memory. Identifier fields use 0 for
    NONE, mst_adjacency is one bit per incident edge in sorted-neighbour order and
    the level stack carries a counter-width length prefix.
    """
    out = BitWriter()
    idw, cw, s = widths.node_id, widths.counter, widths.weight_index

    out.write(int(state.phase), PHASE_BITS)
    out.write(state.reset.epoch, ENUM_BITS)
    out.write(int(state.reset.wave), ENUM_BITS)

    b = state.build
    out.write(_node_id(b.backbone_parent), idw)
    out.write(b.backbone_root_id, idw)
    out.write(b.backbone_dist, cw)
    out.write(b.count, cw)
    out.write(int(b.token), ENUM_BITS)
    out.write(_node_id(b.token_child), idw)
    out.write_flag(b.token_bit)
    out.write(b.token_phase_weight, s)
    out.write_flag(b.token_added)
    out.write_flag(b.token_spanning)
    out.write(b.component_name, idw)
    out.write(int(b.rename_wave), ENUM_BITS)
    out.write(_node_id(b.rename_parent), idw)
    for u in sorted(neighbors):
        out.write_flag(u in b.mst_adjacency)
    out.write(_node_id(b.orient_parent), idw)
    out.write_flag(b.oriented)
    out.write(b.desc_count, cw)
    out.write(b.total_n, cw)
    out.write_flag(b.augment_ready)

    c = state.cert
    out.write(_node_id(c.work_parent), idw)
    out.write(c.work_size, cw)
    out.write(_node_id(c.transfer_to), idw)
    target, number = c.announce if c.announce is not None else (None, 0)
    out.write(_node_id(target), idw)
    out.write(number, cw)
    out.write(int(c.wave), ENUM_BITS)
    out.write(len(c.levels), cw)
    for record in c.levels:
        out.write(int(record.orientation), ENUM_BITS)
        if not record.is_center:
            out.write_gamma(record.subtree_number)
            out.write(record.max_weight_index, s)
    return out


def serialized_bits(state, widths, neighbors):
    return len(encode_state(state, widths, neighbors))


def fixed_bits(widths, degree):
    """Size of every field except the level records; equals serialized_bits of a state with no levels."""
    idw, cw, s = widths.node_id, widths.counter, widths.weight_index
    reset = 2 * ENUM_BITS
    build = 6 * idw + 4 * cw + 2 * ENUM_BITS + s + 5 + degree
    cert = 3 * idw + 3 * cw + ENUM_BITS
    return PHASE_BITS + reset + build + cert
