"""Finite games with exhaustive coalition-deviation search.

A profile's stability is summarised by counting, for each coalition size r,
how many of the binomial(n, r) coalitions can jointly change their actions so
that every member strictly gains ("strict" deviations) or no member loses and
at least one gains ("weak" deviations).  All payoff comparisons are exact:
utilities are ints or `fractions.Fraction`, never floats, because the weak
notion is knife-edge (>= everywhere with one >).
"""

import itertools
import json
import os
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Iterable, Optional, Sequence, Union

from .errors import BudgetExceededError, InputError

Rational = Union[int, Fraction]
Profile = tuple  # tuple[int, ...], one action index per player
Coalition = tuple  # tuple[int, ...], strictly increasing player indices

STRICT = "strict"
WEAK = "weak"
_KINDS = (STRICT, WEAK)

MORE_STABLE = "more_stable"
LESS_STABLE = "less_stable"
EQUAL = "equal"

#: Default cap on the number of joint actions an exhaustive search may visit.
DEFAULT_SEARCH_BUDGET = 10**8
_BUDGET_ENV = "COALSTAB_BUDGET"


def search_budget(budget: Optional[int] = None) -> Optional[int]:
    """Resolve the effective search budget (argument > env > default)."""
    if budget is not None:
        return budget
    raw = os.environ.get(_BUDGET_ENV)
    if raw:
        return int(raw)
    return DEFAULT_SEARCH_BUDGET


@dataclass(frozen=True)
class FiniteGame:
    """A normal-form game given by an exact utility oracle.

    `utility(i, profile)` must be defined for every player `i` and every
    profile with `profile[j] < action_counts[j]`, must be deterministic, and
    must return an int or Fraction.

    `deviation_search_factory` is an optional performance hook.  When set, it
    is called as `factory(members, profile, kind)` and must return a callable
    `search() -> joint | None` that exhaustively scans the coalition's joint
    actions in lexicographic order and returns the first deviation of the
    given kind (a tuple aligned with `members`), or None.  It must agree
    exactly with the generic utility-based search; the package's tests
    cross-check the two routes.
    """

    player_count: int
    action_counts: tuple
    utility: Callable[[int, Profile], Rational]
    deviation_search_factory: Optional[Callable] = None

    def __post_init__(self):
        if self.player_count < 1:
            raise InputError("player_count must be positive")
        counts = tuple(self.action_counts)
        object.__setattr__(self, "action_counts", counts)
        if len(counts) != self.player_count:
            raise InputError("action_counts length must equal player_count")
        if any(c < 1 for c in counts):
            raise InputError("every player needs at least one action")

    @property
    def n(self) -> int:
        return self.player_count

    def validate_profile(self, profile: Sequence) -> Profile:
        profile = tuple(profile)
        if len(profile) != self.player_count:
            raise InputError(
                f"profile has {len(profile)} entries, expected {self.player_count}"
            )
        for i, (a, c) in enumerate(zip(profile, self.action_counts)):
            if not (isinstance(a, int) and 0 <= a < c):
                raise InputError(f"action {a!r} out of range for player {i}")
        return profile

    def validate_coalition(self, members: Iterable) -> Coalition:
        members = tuple(members)
        if not members:
            raise InputError("coalition must be nonempty")
        if list(members) != sorted(set(members)):
            raise InputError("coalition members must be strictly increasing")
        for i in members:
            if not (isinstance(i, int) and 0 <= i < self.player_count):
                raise InputError(f"player index {i!r} out of range")
        return members


@dataclass(frozen=True)
class ScoreVector:
    """Per-size deviation counts; entry r-1 counts coalitions of size r."""

    kind: str
    counts: tuple
    player_count: int

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InputError(f"kind must be one of {_KINDS}")
        counts = tuple(self.counts)
        object.__setattr__(self, "counts", counts)
        if len(counts) > self.player_count:
            raise InputError("more entries than coalition sizes")
        for r, cnt in enumerate(counts, start=1):
            if not 0 <= cnt <= comb(self.player_count, r):
                raise InputError(
                    f"count {cnt} for size {r} exceeds binomial({self.player_count},{r})"
                )

    @property
    def r_max(self) -> int:
        return len(self.counts)

    def count(self, r: int) -> int:
        """Number of deviating coalitions of size exactly r."""
        if not 1 <= r <= self.r_max:
            raise InputError(f"size {r} outside 1..{self.r_max}")
        return self.counts[r - 1]


@dataclass(frozen=True)
class Classification:
    """Solution-concept flags derived from a strict/weak score pair."""

    is_nash: bool
    se_level: int  # largest r with zero strict counts up to r (strong eq. depth)
    sse_level: int  # same for weak counts (super-strong depth)
    is_pareto_efficient: bool


def _generic_search(game: FiniteGame, members: Coalition, profile: Profile,
                    kind: str):
    """Plain product scan driven by the utility oracle."""
    utility = game.utility
    base = [utility(i, profile) for i in members]
    work = list(profile)
    positions = list(members)
    strict = kind == STRICT
    ranges = [range(game.action_counts[i]) for i in members]
    # every member slot of `work` is overwritten per candidate, so the joint
    # assignment left behind by the previous candidate never leaks through
    for joint in itertools.product(*ranges):
        for pos, a in zip(positions, joint):
            work[pos] = a
        prof = tuple(work)
        improved = False
        ok = True
        for i, old in zip(positions, base):
            new = utility(i, prof)
            if strict:
                if not new > old:
                    ok = False
                    break
            else:
                if new < old:
                    ok = False
                    break
                if new > old:
                    improved = True
        if ok and (strict or improved):
            return joint
    return None


def joint_action_space(game: FiniteGame, members: Coalition) -> int:
    size = 1
    for i in members:
        size *= game.action_counts[i]
    return size


def find_deviation(game: FiniteGame, profile: Sequence, coalition: Iterable,
                   kind: str = STRICT, budget: Optional[int] = None):
    """Exhaustively search the coalition's joint actions for a deviation.

    Returns the lexicographically first improving joint action (a tuple
    aligned with the coalition's members), or None when no deviation exists.
    Raises BudgetExceededError when the joint action space is larger than the
    effective budget; that outcome is deliberately distinct from None.
    """
    if kind not in _KINDS:
        raise InputError(f"kind must be one of {_KINDS}")
    profile = game.validate_profile(profile)
    members = game.validate_coalition(coalition)
    space = joint_action_space(game, members)
    limit = search_budget(budget)
    if limit is not None and space > limit:
        raise BudgetExceededError(space, limit)
    if game.deviation_search_factory is not None:
        return game.deviation_search_factory(members, profile, kind)()
    return _generic_search(game, members, profile, kind)


def has_deviation(game: FiniteGame, profile: Sequence, coalition: Iterable,
                  kind: str = STRICT, budget: Optional[int] = None) -> bool:
    return find_deviation(game, profile, coalition, kind, budget) is not None


def iter_coalitions(n: int, r: int):
    """All size-r coalitions of players 0..n-1 in lexicographic order."""
    return itertools.combinations(range(n), r)


def score_vector(game: FiniteGame, profile: Sequence, kind: str = STRICT,
                 r_max: Optional[int] = None,
                 budget: Optional[int] = None) -> ScoreVector:
    """Count deviating coalitions of every size 1..r_max.

    r_max defaults to the player count; capping it avoids the binomial blowup
    when only small coalitions are of interest.
    """
    profile = game.validate_profile(profile)
    n = game.player_count
    if r_max is None:
        r_max = n
    if not 1 <= r_max <= n:
        raise InputError(f"r_max {r_max} outside 1..{n}")
    counts = []
    for r in range(1, r_max + 1):
        hits = 0
        for members in iter_coalitions(n, r):
            if has_deviation(game, profile, members, kind, budget):
                hits += 1
        counts.append(hits)
    return ScoreVector(kind, tuple(counts), n)


def compare_scores(a: ScoreVector, b: ScoreVector) -> str:
    """Lexicographic comparison: fewer deviating coalitions at the first
    differing size wins.  Returns "more_stable", "less_stable" or "equal"
    describing `a` relative to `b`."""
    if a.kind != b.kind:
        raise InputError("cannot compare score vectors of different kinds")
    if a.r_max != b.r_max:
        raise InputError("cannot compare score vectors of different lengths")
    for x, y in zip(a.counts, b.counts):
        if x < y:
            return MORE_STABLE
        if x > y:
            return LESS_STABLE
    return EQUAL


def classify(first: ScoreVector, second: ScoreVector) -> Classification:
    """Derive equilibrium flags from one strict and one weak score vector.

    Both vectors must cover every coalition size 1..n.  A profile is a Nash
    equilibrium iff no single player deviates under either notion; the strict
    vector's leading zeros give the strong-equilibrium depth; the weak
    vector's give the super-strong depth; Pareto efficiency is the absence of
    a weak deviation by the grand coalition.
    """
    by_kind = {v.kind: v for v in (first, second)}
    if set(by_kind) != {STRICT, WEAK}:
        raise InputError("expected one strict and one weak score vector")
    strict, weak = by_kind[STRICT], by_kind[WEAK]
    if strict.player_count != weak.player_count:
        raise InputError("score vectors describe different games")
    n = strict.player_count
    if strict.r_max != n or weak.r_max != n:
        raise InputError("classification needs counts for every size 1..n")

    def leading_zero_depth(counts):
        depth = 0
        for cnt in counts:
            if cnt:
                break
            depth += 1
        return depth

    return Classification(
        is_nash=strict.counts[0] == 0 and weak.counts[0] == 0,
        se_level=leading_zero_depth(strict.counts),
        sse_level=leading_zero_depth(weak.counts),
        is_pareto_efficient=weak.counts[n - 1] == 0,
    )


def is_nash_profile(game: FiniteGame, profile: Sequence) -> bool:
    """Independent best-response scan: no unilateral strictly improving move."""
    profile = game.validate_profile(profile)
    work = list(profile)
    for i in range(game.player_count):
        current = game.utility(i, profile)
        original = work[i]
        for a in range(game.action_counts[i]):
            if a == original:
                continue
            work[i] = a
            if game.utility(i, tuple(work)) > current:
                work[i] = original
                return False
        work[i] = original
    return True


# ---------------------------------------------------------------------------
# Game exchange documents
#
# A self-describing JSON object with the player count, per-player action
# counts and either an explicit utility table (exact rationals as "p/q"
# strings) or a named generator reference resolved by the caller.  Named
# profiles ride along so CLI invocations can refer to them.
# ---------------------------------------------------------------------------

GAME_FORMAT = "coalstab-game"


def rational_to_str(value: Rational) -> str:
    f = Fraction(value)
    return f"{f.numerator}/{f.denominator}"


def rational_from_str(text: str) -> Rational:
    f = Fraction(str(text))
    if f.denominator == 1:
        return f.numerator
    return f


def game_to_document(game: FiniteGame, profiles: Optional[dict] = None) -> dict:
    """Serialise a game as an explicit utility table (small games only)."""
    entries = []
    for profile in itertools.product(*(range(c) for c in game.action_counts)):
        payoffs = [rational_to_str(game.utility(i, profile))
                   for i in range(game.player_count)]
        entries.append({"profile": list(profile), "payoffs": payoffs})
    doc = {
        "format": GAME_FORMAT,
        "version": 1,
        "players": game.player_count,
        "action_counts": list(game.action_counts),
        "utilities": {"kind": "table", "entries": entries},
    }
    if profiles:
        doc["profiles"] = {name: list(p) for name, p in profiles.items()}
    return doc


def game_from_document(doc: dict, generator_resolvers: Optional[dict] = None):
    """Build (game, named_profiles) from an exchange document.

    Generator references are resolved through `generator_resolvers`, a mapping
    from generator name to a callable `params -> (FiniteGame, extra_profiles)`.
    """
    if doc.get("format") != GAME_FORMAT:
        raise InputError(f"not a {GAME_FORMAT} document")
    utilities = doc.get("utilities")
    if not isinstance(utilities, dict):
        raise InputError("document lacks a utilities section")

    if utilities.get("kind") == "generator":
        name = utilities.get("name")
        resolvers = generator_resolvers or {}
        if name not in resolvers:
            raise InputError(f"no resolver for generator {name!r}")
        game, extra = resolvers[name](utilities.get("params", {}))
        profiles = dict(extra)
    elif utilities.get("kind") == "table":
        n = doc["players"]
        action_counts = tuple(doc["action_counts"])
        table = {}
        for entry in utilities["entries"]:
            prof = tuple(entry["profile"])
            table[prof] = tuple(rational_from_str(p) for p in entry["payoffs"])
        expected = 1
        for c in action_counts:
            expected *= c
        if len(table) != expected:
            raise InputError(
                f"utility table has {len(table)} entries, expected {expected}"
            )

        def utility(i, profile, _table=table):
            return _table[tuple(profile)][i]

        game = FiniteGame(n, action_counts, utility)
        profiles = {}
    else:
        raise InputError("utilities.kind must be 'table' or 'generator'")

    for name, prof in (doc.get("profiles") or {}).items():
        profiles[name] = game.validate_profile(prof)
    return game, profiles


def save_game(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_game(path, generator_resolvers: Optional[dict] = None):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return game_from_document(doc, generator_resolvers)
