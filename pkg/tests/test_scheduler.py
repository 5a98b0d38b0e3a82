import numpy as np
import pytest

from ssmst.sim.scheduler import (
    AdversarialStarveOne,
    AdversarialStubborn,
    AllEnabled,
    RandomSubset,
    SchedulerError,
    SchedulerKind,
    SchedulerPolicy,
    SingleRandom,
)


def test_all_enabled():
    assert AllEnabled()([1, 4, 7], np.random.default_rng(0)) == [1, 4, 7]


def test_single_random_picks_one_enabled_node():
    rng = np.random.default_rng(5)
    for _ in range(20):
        chosen = SingleRandom()([2, 3, 9], rng)
        assert len(chosen) == 1 and chosen[0] in (2, 3, 9)


def test_random_subset_is_seeded_and_nonempty():
    first, second = np.random.default_rng(1), np.random.default_rng(1)
    a = [RandomSubset()(list(range(1, 9)), first) for _ in range(10)]
    b = [RandomSubset()(list(range(1, 9)), second) for _ in range(10)]
    assert a == b
    assert all(chosen and set(chosen) <= set(range(1, 9)) for chosen in b)


def test_stubborn_keeps_its_node():
    scheduler, rng = AdversarialStubborn(), np.random.default_rng(0)
    assert scheduler([3, 5], rng) == [3]
    assert scheduler([1, 3, 5], rng) == [3]
    assert scheduler([1, 5], rng) == [1]


def test_starve_one_only_runs_the_victim_alone():
    scheduler, rng = AdversarialStarveOne(), np.random.default_rng(2)
    first = scheduler([1, 2, 3], rng)
    victim = scheduler.victim
    assert victim not in first and len(first) == 2
    assert scheduler([victim], rng) == [victim]


def test_empty_input_is_an_error():
    with pytest.raises(SchedulerError):
        AllEnabled()([], np.random.default_rng(0))


def test_policy_builds_fresh_schedulers():
    policy = SchedulerPolicy("adversarial_stubborn", seed=3)
    assert isinstance(policy.build(), AdversarialStubborn)
    assert policy.build() is not policy.build()
    assert isinstance(SchedulerPolicy(SchedulerKind.SINGLE_RANDOM).build(), SingleRandom)
