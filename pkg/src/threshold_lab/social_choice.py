"""Choice functions, voting rules over linear orders, and indeterminacy
experiments: McGarvey profiles for arbitrary tournaments, plurality
realization of arbitrary choice functions, and relation-based rules.

Alternatives are ``0..m-1``.  Subsets of alternatives are bitmasks with bit
``j`` standing for alternative ``j``.
"""

from __future__ import annotations

import dataclasses
import itertools

import numpy as np
from scipy.optimize import LinearConstraint, milp

from .core import DimensionMismatchError, ThresholdLabError
from .families import plurality_winners


class SearchBudgetExceededError(ThresholdLabError):
    """A realizing profile exists but needs more voters than the budget allows."""

    def __init__(self, message: str, minimal_size: int):
        super().__init__(message)
        self.minimal_size = minimal_size


def subset_members(mask: int) -> list[int]:
    return [j for j in range(mask.bit_length()) if mask >> j & 1]


def subset_mask(members) -> int:
    mask = 0
    for j in members:
        mask |= 1 << int(j)
    return mask


def nonempty_subsets(m: int):
    return range(1, 1 << m)


@dataclasses.dataclass(frozen=True)
class LinearOrder:
    """A strict ranking of the ``m`` alternatives, best first."""

    m: int
    ranking: tuple

    def __post_init__(self) -> None:
        ranking = tuple(int(a) for a in self.ranking)
        if sorted(ranking) != list(range(self.m)):
            raise DimensionMismatchError(f"{ranking} is not a ranking of [{self.m})")
        object.__setattr__(self, "ranking", ranking)

    def top_of(self, mask: int) -> int:
        for a in self.ranking:
            if mask >> a & 1:
                return a
        raise DimensionMismatchError("empty subset has no top")

    def prefers(self, a: int, b: int) -> bool:
        return self.ranking.index(a) < self.ranking.index(b)

    def position(self, a: int) -> int:
        return self.ranking.index(a)


@dataclasses.dataclass(frozen=True)
class VoterProfile:
    """A weighted multiset of linear orders.

    The voter sequence is the orders in listed order, each repeated by its
    weight; sequence-sensitive tie breaking refers to that expansion.
    """

    m: int
    orders: tuple  # of (LinearOrder, weight)

    def __post_init__(self) -> None:
        if not self.orders:
            raise DimensionMismatchError("profile must contain at least one voter")
        normalized = []
        for order, weight in self.orders:
            if order.m != self.m:
                raise DimensionMismatchError("order size mismatch")
            weight = int(weight)
            if weight < 1:
                raise DimensionMismatchError("weights must be positive integers")
            normalized.append((order, weight))
        object.__setattr__(self, "orders", tuple(normalized))

    @property
    def total_weight(self) -> int:
        return sum(w for _, w in self.orders)

    @classmethod
    def from_rankings(cls, m: int, rankings, weights=None) -> "VoterProfile":
        rankings = list(rankings)
        if weights is None:
            weights = [1] * len(rankings)
        return cls(m, tuple((LinearOrder(m, r), w) for r, w in zip(rankings, weights)))

    def order_weights(self) -> dict:
        """Aggregated weight per distinct ranking."""
        agg: dict = {}
        for order, weight in self.orders:
            agg[order.ranking] = agg.get(order.ranking, 0) + weight
        return agg


@dataclasses.dataclass(frozen=True)
class ChoiceFunction:
    """An element ``c(S) in S`` for every nonempty subset of alternatives."""

    m: int
    choices: dict  # mask -> alternative

    def __post_init__(self) -> None:
        cleaned = {}
        for mask in nonempty_subsets(self.m):
            if mask not in self.choices:
                raise DimensionMismatchError(f"missing choice for subset mask {mask}")
            a = int(self.choices[mask])
            if not mask >> a & 1:
                raise DimensionMismatchError(f"choice {a} not inside subset mask {mask}")
            cleaned[mask] = a
        for a in range(self.m):
            if cleaned[1 << a] != a:
                raise DimensionMismatchError("singleton subsets must choose their element")
        object.__setattr__(self, "choices", cleaned)

    def get(self, subset) -> int:
        mask = subset if isinstance(subset, int) else subset_mask(subset)
        return self.choices[mask]

    @classmethod
    def from_order(cls, order: LinearOrder) -> "ChoiceFunction":
        return cls(
            order.m, {mask: order.top_of(mask) for mask in nonempty_subsets(order.m)}
        )


@dataclasses.dataclass(frozen=True)
class Tournament:
    """A complete asymmetric relation: one winner per unordered pair."""

    m: int
    beats: np.ndarray  # (m, m) bool, beats[a, b] iff a beats b

    def __post_init__(self) -> None:
        beats = np.asarray(self.beats, dtype=bool)
        if beats.shape != (self.m, self.m):
            raise DimensionMismatchError("beats matrix shape mismatch")
        for a in range(self.m):
            if beats[a, a]:
                raise DimensionMismatchError("no self-beats allowed")
            for b in range(a + 1, self.m):
                if beats[a, b] == beats[b, a]:
                    raise DimensionMismatchError(
                        f"pair ({a}, {b}) must have exactly one winner"
                    )
        beats.setflags(write=False)
        object.__setattr__(self, "beats", beats)

    @classmethod
    def from_pairs(cls, m: int, pairs) -> "Tournament":
        beats = np.zeros((m, m), dtype=bool)
        for winner, loser in pairs:
            beats[int(winner), int(loser)] = True
        return cls(m, beats)

    @classmethod
    def random(cls, m: int, rng: np.random.Generator) -> "Tournament":
        beats = np.zeros((m, m), dtype=bool)
        for a in range(m):
            for b in range(a + 1, m):
                if rng.random() < 0.5:
                    beats[a, b] = True
                else:
                    beats[b, a] = True
        return cls(m, beats)


def is_rational(c: ChoiceFunction) -> LinearOrder | None:
    """A linear order generating ``c`` by maximization, if one exists.

    Tries the order induced by the pairwise choices (sorted by pairwise win
    count) and verifies it against every subset.
    """
    m = c.m
    wins = [0] * m
    for a in range(m):
        for b in range(a + 1, m):
            winner = c.get(subset_mask((a, b)))
            wins[winner] += 1
    if sorted(wins) != list(range(m)):
        return None  # pairwise relation is not a linear order
    ranking = sorted(range(m), key=lambda a: -wins[a])
    order = LinearOrder(m, tuple(ranking))
    for mask in nonempty_subsets(m):
        if c.get(mask) != order.top_of(mask):
            return None
    return order


def _top_sequence(profile: VoterProfile, mask: int):
    """Per-listed-voter tops on the subset, with weights."""
    return [(order.top_of(mask), weight) for order, weight in profile.orders]


def plurality_choice(
    profile: VoterProfile, subset, tie_break: str = "first_occurrence"
) -> int:
    """Plurality over the voters' top choices within the subset.

    Depends only on the individual tops (independence of rejected
    alternatives) and always returns some voter's top (Pareto).
    """
    mask = subset if isinstance(subset, int) else subset_mask(subset)
    if mask == 0:
        raise DimensionMismatchError("subset must be nonempty")
    tops = _top_sequence(profile, mask)
    counts = np.zeros(profile.m, dtype=np.int64)
    first = np.full(profile.m, len(tops) + 1, dtype=np.int64)
    for pos, (top, weight) in enumerate(tops):
        counts[top] += weight
        first[top] = min(first[top], pos)
    best = counts.max()
    tied = np.flatnonzero(counts == best)
    if tie_break == "smallest_index":
        return int(tied[0])
    if tie_break != "first_occurrence":
        raise DimensionMismatchError(f"unknown tie break {tie_break!r}")
    return int(tied[np.argmin(first[tied])])


def plurality_margins(profile: VoterProfile, mask: int, target: int) -> dict:
    """Top-count of ``target`` minus the top-count of every other member."""
    counts = np.zeros(profile.m, dtype=np.int64)
    for top, weight in _top_sequence(profile, mask):
        counts[top] += weight
    return {
        b: int(counts[target] - counts[b])
        for b in subset_members(mask)
        if b != target
    }


def mcgarvey_profile(tournament: Tournament) -> VoterProfile:
    """A profile whose strict pairwise majority relation equals the tournament.

    Uses the classical two-voters-per-pair gadget: for each beat ``a -> b``
    add one voter ranking ``a, b`` on top of the remaining alternatives and
    one ranking them below the reversed remainder; all other pairwise margins
    cancel, leaving a 2-vote margin exactly on ``(a, b)``.
    """
    m = tournament.m
    if m < 2:
        raise DimensionMismatchError("McGarvey construction needs m >= 2")
    rankings = []
    for a in range(m):
        for b in range(m):
            if tournament.beats[a, b]:
                rest = [x for x in range(m) if x not in (a, b)]
                rankings.append((a, b, *rest))
                rankings.append((*reversed(rest), a, b))
    return VoterProfile.from_rankings(m, rankings)


def majority_relation(profile: VoterProfile) -> np.ndarray:
    """Strict pairwise majority matrix of a profile (ties leave both False)."""
    m = profile.m
    margin = np.zeros((m, m), dtype=np.int64)
    for order, weight in profile.orders:
        for a in range(m):
            for b in range(m):
                if a != b and order.prefers(a, b):
                    margin[a, b] += weight
    return margin > margin.T


def all_orders(m: int) -> list[LinearOrder]:
    return [LinearOrder(m, p) for p in itertools.permutations(range(m))]


def saari_search(
    c0: ChoiceFunction, max_profile_size: int = 10_000
) -> VoterProfile | None:
    """Integer weights over all ``m!`` orders making plurality realize ``c0``.

    Solved as an exact integer program minimizing the number of voters,
    requiring the target to win every subset strictly (so no tie break is
    ever consulted).  Returns ``None`` when no profile of any size exists;
    raises :class:`SearchBudgetExceededError` when the minimal realizing
    profile exceeds the budget.
    """
    m = c0.m
    orders = all_orders(m)
    k = len(orders)
    if m == 1:
        return VoterProfile(1, ((orders[0], 1),))
    tops = np.array(
        [[order.top_of(mask) for mask in nonempty_subsets(m)] for order in orders]
    )
    rows = []
    for col, mask in enumerate(nonempty_subsets(m)):
        members = subset_members(mask)
        if len(members) < 2:
            continue
        target = c0.get(mask)
        for b in members:
            if b == target:
                continue
            rows.append(
                (tops[:, col] == target).astype(float) - (tops[:, col] == b)
            )
    matrix = np.array(rows)
    result = milp(
        c=np.ones(k),
        constraints=LinearConstraint(matrix, lb=np.ones(matrix.shape[0])),
        integrality=np.ones(k),
    )
    if result.status == 2:  # proven infeasible
        return None
    if not result.success:
        raise ThresholdLabError(f"integer program failed: {result.message}")
    weights = np.rint(result.x).astype(int)
    total = int(weights.sum())
    if total > max_profile_size:
        raise SearchBudgetExceededError(
            f"minimal realizing profile has {total} voters, budget {max_profile_size}",
            minimal_size=total,
        )
    chosen = [(orders[j], int(w)) for j, w in enumerate(weights) if w > 0]
    profile = VoterProfile(m, tuple(chosen))
    for mask in nonempty_subsets(m):
        if len(subset_members(mask)) < 2:
            continue
        margins = plurality_margins(profile, mask, c0.get(mask))
        if min(margins.values()) < 1:
            raise ThresholdLabError("integer rounding broke a strict margin")
    return profile


@dataclasses.dataclass(frozen=True)
class IndeterminacyReport:
    """Agreement rates between sampled plurality outcomes and the target choices."""

    m: int
    n_voters: int
    trials: int
    seed: int
    per_subset: dict  # mask -> empirical P[c(S) = c0(S)]
    min_subset: float
    joint: float
    weights: dict  # ranking tuple -> sampling probability

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "n_voters": self.n_voters,
            "trials": self.trials,
            "seed": self.seed,
            "per_subset": {str(k): v for k, v in self.per_subset.items()},
            "min_subset": self.min_subset,
            "joint": self.joint,
            "weights": {",".join(map(str, k)): v for k, v in self.weights.items()},
        }


def indeterminacy_experiment(
    c0: ChoiceFunction,
    n_voters: int,
    trials: int,
    seed: int = 0,
    profile: VoterProfile | None = None,
) -> IndeterminacyReport:
    """Sample electorates from the realizing profile's order distribution.

    Each trial draws ``n_voters`` i.i.d. orders with probabilities
    proportional to the realizing profile's weights, then evaluates the
    plurality choice on every nonempty subset.  Reports per-subset agreement
    with ``c0``, the minimum over subsets, and the joint agreement rate.
    With a single voter the outcome law is the top distribution itself, so
    the probabilities are computed in closed form instead of sampled.
    """
    if n_voters < 1 or trials < 1:
        raise DimensionMismatchError("need positive voters and trials")
    if profile is None:
        profile = saari_search(c0)
        if profile is None:
            raise ThresholdLabError("no realizing profile exists for this choice function")
    agg = profile.order_weights()
    rankings = sorted(agg)
    probs = np.array([agg[r] for r in rankings], dtype=float)
    probs /= probs.sum()
    orders = [LinearOrder(c0.m, r) for r in rankings]
    masks = list(nonempty_subsets(c0.m))
    top_table = np.array([[o.top_of(mask) for o in orders] for mask in masks])
    weights_out = {r: float(p) for r, p in zip(rankings, probs)}
    if n_voters == 1:
        agree_matrix = top_table == np.array([[c0.get(mask)] for mask in masks])
        per_subset = {
            mask: float(probs[agree_matrix[row]].sum())
            for row, mask in enumerate(masks)
        }
        joint = float(probs[agree_matrix.all(axis=0)].sum())
        return IndeterminacyReport(
            m=c0.m,
            n_voters=1,
            trials=trials,
            seed=seed,
            per_subset=per_subset,
            min_subset=min(per_subset.values()),
            joint=joint,
            weights=weights_out,
        )
    rng = np.random.default_rng(seed)
    draws = rng.choice(len(orders), size=(trials, n_voters), p=probs)
    per_subset = {}
    joint = np.ones(trials, dtype=bool)
    for row, mask in enumerate(masks):
        tops = top_table[row][draws]
        winners = plurality_winners(tops, c0.m, "first_occurrence")
        agree = winners == c0.get(mask)
        per_subset[mask] = float(agree.mean())
        joint &= agree
    return IndeterminacyReport(
        m=c0.m,
        n_voters=n_voters,
        trials=trials,
        seed=seed,
        per_subset=per_subset,
        min_subset=min(per_subset.values()),
        joint=float(joint.mean()),
        weights=weights_out,
    )


def outdegree_choice(
    profile: VoterProfile, subset, fixed_tie_order: LinearOrder
) -> int:
    """Pick the subset member beating the most others by strict majority.

    Ties in out-degree are broken by the fixed order, realizing a
    single-valued rule from the pairwise-majority correspondence.
    """
    mask = subset if isinstance(subset, int) else subset_mask(subset)
    members = subset_members(mask)
    if not members:
        raise DimensionMismatchError("subset must be nonempty")
    beats = majority_relation(profile)
    out_degree = {a: sum(bool(beats[a, b]) for b in members if b != a) for a in members}
    best = max(out_degree.values())
    tied = [a for a in members if out_degree[a] == best]
    return min(tied, key=fixed_tie_order.position)


def borda_choice(profile: VoterProfile, subset) -> int:
    """Minimal total within-subset rank, weighted by voters.

    Rank 1 is a voter's top among the subset members.  Ties go to the tied
    member whose first appearance as some voter's top is earliest, then to
    the smaller index.
    """
    mask = subset if isinstance(subset, int) else subset_mask(subset)
    members = subset_members(mask)
    if not members:
        raise DimensionMismatchError("subset must be nonempty")
    score = {a: 0 for a in members}
    for order, weight in profile.orders:
        restricted = [a for a in order.ranking if a in score]
        for rank, a in enumerate(restricted, start=1):
            score[a] += weight * rank
    best = min(score.values())
    tied = [a for a in members if score[a] == best]
    if len(tied) == 1:
        return tied[0]
    first = {a: len(profile.orders) + 1 for a in tied}
    for pos, (top, _) in enumerate(_top_sequence(profile, mask)):
        if top in first:
            first[top] = min(first[top], pos)
    return min(tied, key=lambda a: (first[a], a))
