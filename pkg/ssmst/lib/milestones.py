from bisect import bisect_left
from fractions import Fraction


class MilestoneRangeError(ValueError):
    pass


def top_milestone(n):
    """Smallest power of two >= n."""
    return 1 << max(n - 1, 0).bit_length()


def k_range(n):
    """Valid trade-off parameters for n, as an inclusive (low, high) pair."""
    p = top_milestone(n).bit_length() - 1
    low = -((p.bit_length() - 1) if p > 0 else 0)
    return low, p - 1


class MilestoneSet:
    """
    Rounding targets for the weight transformation. Built from the powers of two
    1, 2, 4, ..., L by |k| rounds of midpoint insertion (k > 0) or of dropping every
    second milestone while keeping the last one (k < 0).
    """

    __slots__ = ("n", "k", "L", "milestones", "_index")

    def __init__(self, n, k, top=None):
        if n < 2:
            raise MilestoneRangeError(f"n must be at least 2, got {n}")
        self.n = n
        self.k = k
        self.L = top_milestone(top if top is not None else n)
        low, high = k_range(self.L)
        if not low <= k <= high:
            raise MilestoneRangeError(f"k={k} outside [{low}, {high}] for n={n}")
        series = [1 << i for i in range(self.L.bit_length())]
        for _ in range(k):
            refined = [series[0]]
            for a, b in zip(series, series[1:]):
                if b - a >= 2:
                    refined.append((a + b) // 2)
                refined.append(b)
            series = refined
        for _ in range(-k):
            series = series[::2] if len(series) % 2 == 1 else series[::2] + [series[-1]]
        self.milestones = tuple(series)
        self._index = {m: i for i, m in enumerate(series)}

    @property
    def p(self):
        return self.L.bit_length() - 1

    def __len__(self):
        return len(self.milestones)

    def __iter__(self):
        return iter(self.milestones)

    def __contains__(self, w):
        return w in self._index

    def __eq__(self, other):
        if not isinstance(other, MilestoneSet):
            return NotImplemented
        return (self.n, self.k, self.milestones) == (other.n, other.k, other.milestones)

    def __hash__(self):
        return hash((self.n, self.k, self.milestones))

    def __repr__(self):
        return f"MilestoneSet(n={self.n}, k={self.k}, size={len(self)})"


def milestone_set(n, k, top=None):
    return MilestoneSet(n, k, top=top)


def expected_cardinality(n, k):
    """
    Closed-form size of milestone_set(n, k). For k < 0 this is the ceiling form of
    log L / 2^-k + 1, exact whenever 2^-k divides log L.
    """
    L = top_milestone(n)
    p = L.bit_length() - 1
    low, high = k_range(n)
    if not low <= k <= high:
        raise MilestoneRangeError(f"k={k} outside [{low}, {high}] for n={n}")
    if k == high:
        return L
    if k >= 0:
        return (1 << k) * (p - k + 1)
    step = 1 << -k
    return -(-p // step) + 1


def transform(w, ms):
    if not 1 <= w <= ms.L:
        raise MilestoneRangeError(f"weight {w} outside [1, {ms.L}]")
    return ms.milestones[bisect_left(ms.milestones, w)]


def transform_index(w, ms):
    """Index of transform(w, ms); the value nodes store in s bits."""
    if not 1 <= w <= ms.L:
        raise MilestoneRangeError(f"weight {w} outside [1, {ms.L}]")
    return bisect_left(ms.milestones, w)


def approximation_bound(k, n):
    low, high = k_range(n)
    if not low <= k <= high:
        raise MilestoneRangeError(f"k={k} outside [{low}, {high}] for n={n}")
    if k == high:
        return Fraction(1)
    if k >= 0:
        return 1 + Fraction(1, 1 << k)
    return Fraction(2 ** (1 << -k))


def worst_ratio(ms):
    """Largest transform(w)/w over integer weights in [1, L]."""
    worst = Fraction(1)
    for a, b in zip(ms.milestones, ms.milestones[1:]):
        if b > a + 1:
            worst = max(worst, Fraction(b, a + 1))
    return worst


def code_length(ms):
    return max(len(ms.milestones) - 1, 0).bit_length()


def index_of(w, ms):
    try:
        return ms._index[w]
    except KeyError:
        raise MilestoneRangeError(f"{w} is not a milestone of {ms!r}")


def milestone_at(i, ms):
    if not 0 <= i < len(ms.milestones):
        raise MilestoneRangeError(f"index {i} outside [0, {len(ms.milestones) - 1}]")
    return ms.milestones[i]


def transform_all(g, ms):
    return {(u, v): transform(w, ms) for u, v, w in g.edges()}


def describe(ms):
    bound = approximation_bound(ms.k, ms.L)
    return {
        "n": ms.n,
        "k": ms.k,
        "L": ms.L,
        "milestones": list(ms.milestones),
        "cardinality": len(ms),
        "code_length": code_length(ms),
        "approximation_bound": f"{bound.numerator}/{bound.denominator}",
    }
