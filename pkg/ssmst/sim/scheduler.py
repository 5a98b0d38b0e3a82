from dataclasses import dataclass
from enum import Enum


class SchedulerError(RuntimeError):
    pass


class SchedulerKind(str, Enum):
    ALL_ENABLED = "all_enabled"
    SINGLE_RANDOM = "single_random"
    RANDOM_SUBSET = "random_subset"
    ADVERSARIAL_STUBBORN = "adversarial_stubborn"
    ADVERSARIAL_STARVE_ONE = "adversarial_starve_one"


class Scheduler:
    """Picks a non-empty subset of the enabled nodes (given sorted) at every step."""

    def select(self, enabled, rng):
        raise NotImplementedError

    def __call__(self, enabled, rng):
        if not enabled:
            raise SchedulerError("No node is enabled.")
        chosen = self.select(enabled, rng)
        if not chosen:
            raise SchedulerError(f"{type(self).__name__} selected an empty set.")
        return chosen


class AllEnabled(Scheduler):
    def select(self, enabled, rng):
        return list(enabled)


class SingleRandom(Scheduler):
    def select(self, enabled, rng):
        return [enabled[int(rng.integers(len(enabled)))]]


class RandomSubset(Scheduler):
    def select(self, enabled, rng):
        mask = rng.random(len(enabled)) < 0.5
        if not mask.any():
            mask[int(rng.integers(len(enabled)))] = True
        return [v for v, keep in zip(enabled, mask) if keep]


class AdversarialStubborn(Scheduler):
    """
    Activates one node per step and keeps activating it for as long as it stays
    enabled; otherwise falls back to the smallest enabled identifier.
    """

    def __init__(self):
        self.last = None

    def select(self, enabled, rng):
        if self.last not in enabled:
            self.last = enabled[0]
        return [self.last]


class AdversarialStarveOne(Scheduler):
    """
    Activates every enabled node except a victim, drawn from the enabled set at the
    first step; the victim only moves when nothing else can.
    """

    def __init__(self):
        self.victim = None

    def select(self, enabled, rng):
        if self.victim is None:
            self.victim = enabled[int(rng.integers(len(enabled)))]
        others = [v for v in enabled if v != self.victim]
        return others or list(enabled)


SCHEDULERS = {
    SchedulerKind.ALL_ENABLED: AllEnabled,
    SchedulerKind.SINGLE_RANDOM: SingleRandom,
    SchedulerKind.RANDOM_SUBSET: RandomSubset,
    SchedulerKind.ADVERSARIAL_STUBBORN: AdversarialStubborn,
    SchedulerKind.ADVERSARIAL_STARVE_ONE: AdversarialStarveOne,
}


@dataclass(frozen=True)
class SchedulerPolicy:
    kind: SchedulerKind
    seed: int = 0

    def build(self):
        return SCHEDULERS[SchedulerKind(self.kind)]()
