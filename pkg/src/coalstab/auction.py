"""Position auctions: second-price-per-slot outcomes and collusion counts.

Slots carry strictly decreasing click rates, bidders strictly decreasing
per-click values.  Two benchmark outcomes are covered: the truthful
welfare-payment auction ("VCG") and the rank-by-bid next-price auction
("GSP") at the two boundary envy-free equilibria, the lower (LE, revenue
equivalent to the truthful auction) and upper (UE) equilibria.

Bidder and slot positions are 1-based ranks throughout the public API, which
keeps the payment and deviation formulas auditable; storage is 0-based.  All
arithmetic is exact, and a deviation exists only on a strict inequality.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Optional, Sequence

from .errors import ContractError, InputError, TieError

LE = "le"
UE = "ue"
_EQUILIBRIA = (LE, UE)


def _as_fraction_tuple(values) -> tuple:
    return tuple(Fraction(v) for v in values)


def _strictly_decreasing(values) -> bool:
    return all(a > b for a, b in zip(values, values[1:]))


@dataclass(frozen=True)
class AuctionInstance:
    """s slots with CTRs `ctrs`, n bidders with per-click values `values`.

    Both vectors are strictly decreasing and positive; values are pairwise
    distinct by construction.  n may be smaller than s (the randomized-reserve
    analysis needs surplus slots); operations that require competition for
    slots check n > s themselves.
    """

    slot_count: int
    values: tuple
    ctrs: tuple

    def __post_init__(self):
        values = _as_fraction_tuple(self.values)
        ctrs = _as_fraction_tuple(self.ctrs)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ctrs", ctrs)
        if self.slot_count < 1:
            raise InputError("need at least one slot")
        if len(ctrs) != self.slot_count:
            raise InputError("one CTR per slot required")
        if len(values) < 2:
            raise InputError("need at least two bidders")
        if ctrs[-1] <= 0 or not _strictly_decreasing(ctrs):
            raise InputError("CTRs must be positive and strictly decreasing")
        if values[-1] <= 0 or not _strictly_decreasing(values):
            raise InputError("values must be positive, strictly decreasing "
                             "and pairwise distinct")

    @property
    def s(self) -> int:
        return self.slot_count

    @property
    def n(self) -> int:
        return len(self.values)

    def value(self, rank: int) -> Fraction:
        """v_rank, with v_rank = 0 beyond the last bidder."""
        return self.values[rank - 1] if 1 <= rank <= self.n else Fraction(0)

    def ctr(self, slot: int) -> Fraction:
        """x_slot, with x_slot = 0 beyond the last slot."""
        return self.ctrs[slot - 1] if 1 <= slot <= self.s else Fraction(0)

    def require_competition(self) -> None:
        if self.n <= self.s:
            raise InputError("this operation needs more bidders than slots")


def bid_at(bids: Sequence, rank: int) -> Fraction:
    """rank-th entry of a rank-sorted bid vector, 0 beyond the end."""
    return Fraction(bids[rank - 1]) if 1 <= rank <= len(bids) else Fraction(0)


# ---------------------------------------------------------------------------
# Truthful welfare payments
# ---------------------------------------------------------------------------

def vcg_payments(inst: AuctionInstance, reports: Optional[Sequence] = None) -> tuple:
    """Per-click welfare price of each winner: the CTR-difference-weighted
    sum of the values ranked below, p_i = sum_{j=i+1..s+1} (x_{j-1}-x_j) v_j / x_i.
    `reports` (rank-sorted) replace the true values when given."""
    if reports is None:
        vals = inst.values
    else:
        vals = _as_fraction_tuple(reports)

    def val(rank):
        return vals[rank - 1] if 1 <= rank <= len(vals) else Fraction(0)

    winners = min(inst.s, len(vals))
    payments = []
    for i in range(1, winners + 1):
        total = Fraction(0)
        for j in range(i + 1, inst.s + 2):
            total += (inst.ctr(j - 1) - inst.ctr(j)) * val(j)
        payments.append(total / inst.ctr(i))
    return tuple(payments)


def vcg_payments_recursive(inst: AuctionInstance) -> tuple:
    """Independent route to the same prices: bottom-up averaging
    b_{s+1} = v_{s+1}, b_i = (1-x_i/x_{i-1}) v_i + (x_i/x_{i-1}) b_{i+1},
    then p_j = b_{j+1}.  (Peeling one term off the direct sum shows the drop
    share of x_{i-1} carries v_i and the rest carries the previous price.)"""
    bids = {inst.s + 1: inst.value(inst.s + 1)}
    for i in range(inst.s, 1, -1):
        alpha = inst.ctr(i) / inst.ctr(i - 1)
        bids[i] = (1 - alpha) * inst.value(i) + alpha * bids[i + 1]
    winners = min(inst.s, inst.n)
    return tuple(bids[j + 1] for j in range(1, winners + 1))


# ---------------------------------------------------------------------------
# GSP and its boundary envy-free equilibria
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GspOutcome:
    """Allocation, per-click prices and utilities of one bid profile.

    `ranking[j-1]` is the 0-based index of the bidder holding rank j;
    `payments[j-1]` is the per-click price of slot j; `utilities[i]` is the
    exact utility of bidder i (0 for losers).
    """

    ranking: tuple
    payments: tuple
    utilities: tuple
    revenue: Fraction


def gsp_outcome(inst: AuctionInstance, bids: Sequence) -> GspOutcome:
    """Rank by bid, charge every slot the next bid down.

    Tied bids are rejected: the analysis assumes generic profiles, and no
    deterministic tie-break is neutral here.
    """
    bids = _as_fraction_tuple(bids)
    if len(bids) != inst.n:
        raise InputError("one bid per bidder required")
    if len(set(bids)) != len(bids):
        raise TieError("tied bids cannot be ranked")
    ranking = tuple(sorted(range(inst.n), key=lambda i: bids[i], reverse=True))
    payments = []
    for slot in range(1, min(inst.s, inst.n) + 1):
        nxt = bids[ranking[slot]] if slot < inst.n else Fraction(0)
        payments.append(nxt)
    utilities = [Fraction(0)] * inst.n
    revenue = Fraction(0)
    for slot, bidder in enumerate(ranking[:len(payments)], start=1):
        utilities[bidder] = (inst.values[bidder] - payments[slot - 1]) * inst.ctr(slot)
        revenue += payments[slot - 1] * inst.ctr(slot)
    return GspOutcome(ranking, tuple(payments), tuple(utilities), revenue)


def _boundary_bids(inst: AuctionInstance, upper: bool) -> tuple:
    """Shared construction of the boundary envy-free bid vectors.

    Ranks 2..s+1 follow the defining recursion; rank 1 bids its value (any
    bid above rank 2 is equilibrium-equivalent), falling back to twice the
    rank-2 bid in the single-slot upper corner where the recursion reaches
    v_1 itself.  Bidders below rank s+1 bid their values, rescaled if that
    would break strict order (it cannot for these two profiles, but the
    guard keeps the constructor total).
    """
    inst.require_competition()
    s = inst.s
    shift = 1 if upper else 0  # UE averages the values one rank higher
    bids = {}
    acc = Fraction(0)  # running sum of the recursion's tail terms
    for i in range(s + 1, 1, -1):
        acc += inst.value(i - shift) * (inst.ctr(i - 1) - inst.ctr(i))
        bids[i] = acc / inst.ctr(i - 1)
    top = inst.value(1)
    if top <= bids[2]:
        top = 2 * bids[2]
    bids[1] = top
    out = [bids[i] for i in range(1, s + 2)]
    if inst.n > s + 1:
        scale = Fraction(1)
        if inst.value(s + 2) >= bids[s + 1]:
            scale = bids[s + 1] / (2 * inst.value(s + 2))
        out.extend(scale * inst.value(i) for i in range(s + 2, inst.n + 1))
    if not _strictly_decreasing(out):
        raise AssertionError("boundary bid construction lost strict order")
    return tuple(out)


def le_bids(inst: AuctionInstance) -> tuple:
    """Lower boundary equilibrium: b_i x_{i-1} = sum_{j=i..s+1} v_j (x_{j-1}-x_j)."""
    return _boundary_bids(inst, upper=False)


def ue_bids(inst: AuctionInstance) -> tuple:
    """Upper boundary equilibrium: b_i x_{i-1} = sum_{j=i..s+1} v_{j-1} (x_{j-1}-x_j)."""
    return _boundary_bids(inst, upper=True)


def equilibrium_bids(inst: AuctionInstance, eq: str) -> tuple:
    if eq not in _EQUILIBRIA:
        raise InputError(f"equilibrium must be one of {_EQUILIBRIA}")
    return le_bids(inst) if eq == LE else ue_bids(inst)


def verify_symmetric_ne(inst: AuctionInstance, bids: Sequence) -> bool:
    """Envy-freeness: no bidder prefers any slot at that slot's current price,
    and no loser would profit from any slot."""
    outcome = gsp_outcome(inst, bids)
    slots = len(outcome.payments)
    for position, bidder in enumerate(outcome.ranking, start=1):
        value = inst.values[bidder]
        current = outcome.utilities[bidder]
        for slot in range(1, slots + 1):
            if (value - outcome.payments[slot - 1]) * inst.ctr(slot) > current:
                return False
    return True


# ---------------------------------------------------------------------------
# Pair deviations from the boundary equilibria
#
# The only joint move available to a pair (k, j), k < j <= s+1, is k taking
# slot j-1 while j shades her bid down to the bid below her; j's utility is
# untouched and k trades slot k's margin for slot j-1's.  Whether that trade
# helps is a closed-form comparison of two CTR-difference-weighted value
# sums; prefix sums make every pair O(1).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairContext:
    """Diagnostics for a target pair (k, j): the slot-(j-1) CTR drop `a`,
    normalised CTR-difference weights, rank distance h = j-1-k and value gap
    z = v_k - v_{j-1}."""

    a: Fraction
    weights: tuple
    h: int
    z: Fraction


def pair_context(inst: AuctionInstance, k: int, j: int) -> PairContext:
    _check_pair(inst, k, j)
    a = inst.ctr(j - 1) - inst.ctr(j)
    if j <= inst.s:
        xj = inst.ctr(j)
        weights = tuple((inst.ctr(i - 1) - inst.ctr(i)) / xj
                        for i in range(j + 1, inst.s + 2))
    else:
        weights = ()
    return PairContext(a, weights, j - 1 - k, inst.value(k) - inst.value(j - 1))


def _check_pair(inst: AuctionInstance, k: int, j: int) -> None:
    if not (1 <= k < j <= inst.s + 1):
        raise InputError(f"pair ({k},{j}) out of range for s={inst.s}")


def _value_for(inst: AuctionInstance, eq: str, rank: int) -> Fraction:
    """The value the boundary recursion attaches to rank `rank`."""
    return inst.value(rank - 1) if eq == UE else inst.value(rank)


def pair_gain(inst: AuctionInstance, eq: str, k: int, j: int) -> Fraction:
    """Exact utility change of agent k when the pair (k, j) plays its one
    available joint move (j shades to the bid below, k takes slot j-1).

    Positive means the pair deviates.  Equals simulation exactly; the j = s+1
    case treats the shaded bid as escapable to zero, which is exact when no
    bidder holds rank s+2.
    """
    if eq not in _EQUILIBRIA:
        raise InputError(f"equilibrium must be one of {_EQUILIBRIA}")
    _check_pair(inst, k, j)
    loss = Fraction(0)  # forfeited margin over slots k..j-2
    for t in range(k + 1, j):
        loss += (inst.ctr(t - 1) - inst.ctr(t)) * (inst.value(k) - _value_for(inst, eq, t))
    a = inst.ctr(j - 1) - inst.ctr(j)
    tail = Fraction(0)
    if j <= inst.s:
        acc = Fraction(0)
        for i in range(j + 1, inst.s + 2):
            acc += (inst.ctr(i - 1) - inst.ctr(i)) * _value_for(inst, eq, i)
        tail = acc / inst.ctr(j)
    gain = a * (_value_for(inst, eq, j) - tail) - loss
    return gain


def le_utility_delta(inst: AuctionInstance, k: int, j: int, eps) -> Fraction:
    """u(k) - u'(k) for the pair move at the lower equilibrium when j shades
    to (next bid + eps); the optimal move is eps = 0."""
    return -pair_gain(inst, LE, k, j) + Fraction(eps) * inst.ctr(j - 1)


def le_pair_deviates(inst: AuctionInstance, k: int, j: int) -> bool:
    """Neighbour pairs always have a (weak) deviation; distant pairs deviate
    exactly when the forfeited margin is strictly outweighed."""
    _check_pair(inst, k, j)
    if j == k + 1:
        return True
    return pair_gain(inst, LE, k, j) > 0


def ue_pair_deviates(inst: AuctionInstance, k: int, j: int) -> bool:
    _check_pair(inst, k, j)
    if j == k + 1:
        return True
    return pair_gain(inst, UE, k, j) > 0


def simulate_pair_deviation(inst: AuctionInstance, eq: str, k: int, j: int,
                            eps=0) -> Fraction:
    """Direct route to agent k's post-move utility: build the deviated bid
    vector's outcome by construction (k holds slot j-1 and pays what j bids).
    Returns u'(k)."""
    bids = equilibrium_bids(inst, eq)
    _check_pair(inst, k, j)
    new_price = bid_at(bids, j + 1) + Fraction(eps)
    return (inst.value(k) - new_price) * inst.ctr(j - 1)


def deviating_pairs(inst: AuctionInstance, eq: str) -> list:
    """All pairs (k, j), 1 <= k < j <= s+1, with a joint deviation.

    Prefix sums over the CTR differences make each test O(1), which keeps
    scale sweeps (s in the hundreds) cheap.
    """
    if eq not in _EQUILIBRIA:
        raise InputError(f"equilibrium must be one of {_EQUILIBRIA}")
    s = inst.s
    x = [inst.ctr(i) for i in range(0, s + 2)]  # x[i] = ctr of slot i, x[0] unused
    v = [_value_for(inst, eq, i) for i in range(0, s + 2)]
    vk = [inst.value(i) for i in range(0, s + 2)]
    # W[t] = sum_{u=2..t} (x_{u-1}-x_u) v_u
    W = [Fraction(0)] * (s + 2)
    for u in range(2, s + 2):
        W[u] = W[u - 1] + (x[u - 1] - x[u]) * v[u]
    pairs = []
    for k in range(1, s + 1):
        pairs.append((k, k + 1))
    for k in range(1, s + 1):
        for j in range(k + 2, s + 2):
            loss = vk[k] * (x[k] - x[j - 1]) - (W[j - 1] - W[k])
            a = x[j - 1] - x[j]
            tail = (W[s + 1] - W[j]) / x[j] if j <= s else Fraction(0)
            if a * (v[j] - tail) - loss > 0:
                pairs.append((k, j))
    pairs.sort()
    return pairs


def count_pair_deviations(inst: AuctionInstance, eq: str) -> int:
    return len(deviating_pairs(inst, eq))


# ---------------------------------------------------------------------------
# Coalitions worth counting
#
# Only coalitions made of winners, possibly padded by the first loser and the
# block of losers directly after her, can contribute anything to a joint
# move; everything else contains permanently idle members.
# ---------------------------------------------------------------------------

def is_potential_coalition(members: Sequence, s: int, n: int) -> bool:
    """Winners only, or winners plus the consecutive loser block s+1..s+t."""
    members = tuple(members)
    if not members or list(members) != sorted(set(members)):
        raise InputError("coalition must be a strictly increasing rank tuple")
    if members[0] < 1 or members[-1] > n:
        raise InputError("rank out of range")
    winners = [r for r in members if r <= s]
    losers = [r for r in members if r > s]
    if not winners:
        return False
    if not losers:
        return True
    return losers == list(range(s + 1, s + 1 + len(losers)))


def potential_count(s: int, r: int) -> int:
    """M_r = sum_{t=1..r} C(s, t): winner subsets padded with loser blocks."""
    if r < 1:
        raise InputError("coalition size must be positive")
    return sum(comb(s, t) for t in range(1, r + 1))


def iter_potential_coalitions(s: int, n: int, r: int):
    """Potential coalitions of size r as rank tuples, winners-only first."""
    for winners in itertools.combinations(range(1, s + 1), r):
        yield winners
    for t in range(r - 1, 0, -1):
        block = tuple(range(s + 1, s + 1 + (r - t)))
        if block and block[-1] > n:
            continue
        for winners in itertools.combinations(range(1, s + 1), t):
            yield winners + block


def vcg_coalition_deviation(inst: AuctionInstance, members: Sequence) -> tuple:
    """Construct the canonical joint misreport for a potential coalition under
    the truthful auction: every member shades to the midpoint of its own value
    gap.  Verifies that the allocation is unchanged, the cheapest member is
    exactly unharmed and every other winning member strictly gains; returns
    the full report vector."""
    members = tuple(members)
    if not is_potential_coalition(members, inst.s, inst.n):
        raise ContractError("construction applies to potential coalitions only")
    reports = list(inst.values)
    for rank in members:
        below = inst.value(rank + 1)
        reports[rank - 1] = (inst.value(rank) + below) / 2
    if not _strictly_decreasing(reports):
        raise AssertionError("midpoint shading must preserve the ranking")
    before = vcg_payments(inst)
    after = vcg_payments(inst, reports)
    indifferent = max(members)  # values decrease with rank
    for rank in members:
        if rank > inst.s:
            continue  # losers stay at zero utility either way
        gain = (before[rank - 1] - after[rank - 1]) * inst.ctr(rank)
        if rank == indifferent:
            if gain != 0:
                raise AssertionError("cheapest member must be exactly unharmed")
        elif gain <= 0:
            raise AssertionError("every other winning member must strictly gain")
    return tuple(reports)


def count_vcg_coalition_deviations(inst: AuctionInstance, r: int) -> int:
    """Number of size-r potential coalitions whose canonical misreport
    verifies as a weak deviation."""
    count = 0
    for members in iter_potential_coalitions(inst.s, inst.n, r):
        vcg_coalition_deviation(inst, members)  # raises if not a deviation
        count += 1
    return count


def coalition_deviates(inst: AuctionInstance, eq: str, members: Sequence) -> bool:
    """A coalition moves exactly when some pair inside it moves: the cheapest
    member is always indifferent and any extra member can free-ride, so joint
    gains reduce to pair gains."""
    members = tuple(members)
    if not is_potential_coalition(members, inst.s, inst.n):
        raise ContractError("only potential coalitions are counted")
    predicate = le_pair_deviates if eq == LE else ue_pair_deviates
    if eq not in _EQUILIBRIA:
        raise InputError(f"equilibrium must be one of {_EQUILIBRIA}")
    eligible = [r for r in members if r <= inst.s + 1]
    for k, j in itertools.combinations(eligible, 2):
        if predicate(inst, k, j):
            return True
    return False


def count_coalition_deviations(inst: AuctionInstance, eq: str, r: int) -> int:
    pairs = set(deviating_pairs(inst, eq))
    count = 0
    for members in iter_potential_coalitions(inst.s, inst.n, r):
        eligible = [rank for rank in members if rank <= inst.s + 1]
        if any(p in pairs for p in itertools.combinations(eligible, 2)):
            count += 1
    return count


# ---------------------------------------------------------------------------
# Exhaustive discretized joint-bid search (validation oracle)
# ---------------------------------------------------------------------------

def bid_grid(inst: AuctionInstance, bids: Sequence, refine: int = 4) -> tuple:
    """Candidate bids: the profile's own bids plus evenly spaced interior
    points of every gap, including a gap below the lowest bid and one above
    the highest.  Deviation regions are finite unions of boxes whose walls
    sit at the original bids, so interior points witness every box."""
    if refine < 1:
        raise InputError("refine must be at least 1")
    anchors = sorted({Fraction(b) for b in bids})
    lo = [Fraction(0)] + anchors
    hi = anchors + [2 * anchors[-1]]
    points = set(anchors)
    steps = 2 * refine
    for a, b in zip(lo, hi):
        gap = b - a
        for t in range(1, steps):
            points.add(a + gap * t / steps)
    return tuple(sorted(points))


def exhaustive_bid_search(inst: AuctionInstance, bids: Sequence,
                          members: Sequence, kind: str = "weak",
                          refine: int = 4):
    """Scan all grid rebids of the coalition for a joint deviation, judged by
    exact GSP utilities against the starting profile.  Tied candidate
    profiles are skipped (generic-profile assumption).  Returns the first
    witnessing bid vector or None."""
    if kind not in ("weak", "strict"):
        raise InputError("kind must be 'weak' or 'strict'")
    bids = _as_fraction_tuple(bids)
    base = gsp_outcome(inst, bids)
    members = tuple(members)
    indices = [rank - 1 for rank in members]
    others = [bids[i] for i in range(inst.n) if i not in set(indices)]
    grid = bid_grid(inst, bids, refine)
    strict = kind == "strict"
    work = list(bids)
    for combo in itertools.product(grid, repeat=len(indices)):
        if len(set(combo)) != len(combo):
            continue
        if any(c in others for c in combo):
            continue
        for i, b in zip(indices, combo):
            work[i] = b
        outcome = gsp_outcome(inst, work)
        ok = True
        improved = False
        for i in indices:
            new, old = outcome.utilities[i], base.utilities[i]
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
            return tuple(work)
    return None


# ---------------------------------------------------------------------------
# Value / CTR shape families
# ---------------------------------------------------------------------------

SHAPE_KINDS = ("linear", "convex", "concave", "beta_convex", "beta_concave")


@dataclass(frozen=True)
class ShapeSpec:
    """A named decreasing-vector family.

    beta_convex: consecutive drops shrink by exactly `beta` per step (rapidly
    flattening tail); beta_concave: drops grow by exactly `beta` (late cliff),
    offset high enough that late values dwarf early differences.  `high`
    rescales the vector when given.
    """

    kind: str
    length: int
    beta: Optional[Fraction] = None
    high: Optional[Fraction] = None
    low: Optional[Fraction] = None

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise InputError(f"unknown shape kind {self.kind!r}")
        if self.length < 2:
            raise InputError("shapes need at least two entries")
        for name in ("beta", "high", "low"):
            raw = getattr(self, name)
            if raw is not None:
                object.__setattr__(self, name, Fraction(raw))
        if self.kind.startswith("beta_"):
            if self.beta is None or self.beta <= 1:
                raise InputError("beta shapes need beta > 1")
        if self.high is not None and self.high <= 0:
            raise InputError("high endpoint must be positive")


def make_shape(spec: ShapeSpec) -> tuple:
    """Generate a strictly decreasing positive vector satisfying the family's
    defining inequalities exactly."""
    L = spec.length
    if spec.kind == "linear":
        high = spec.high if spec.high is not None else Fraction(L)
        low = spec.low if spec.low is not None else high / L
        if low <= 0 or low >= high:
            raise InputError("linear shape needs 0 < low < high")
        step = (high - low) / (L - 1)
        return tuple(high - step * i for i in range(L))
    if spec.low is not None:
        raise InputError("only linear shapes take a low endpoint")
    if spec.kind == "convex":
        # harmonic-style drops: d_i = 1/(i+1), strictly shrinking
        vec = [Fraction(0)] * L
        vec[L - 1] = Fraction(1)
        for i in range(L - 2, -1, -1):
            vec[i] = vec[i + 1] + Fraction(1, i + 2)
    elif spec.kind == "concave":
        vec = [Fraction(0)] * L
        vec[L - 1] = Fraction(L)
        for i in range(L - 2, -1, -1):
            vec[i] = vec[i + 1] + Fraction(1, L - i)  # drops grow toward the end
    elif spec.kind == "beta_convex":
        beta = spec.beta
        vec = [Fraction(0)] * L
        vec[L - 1] = Fraction(1)
        drop = Fraction(1)
        for i in range(L - 2, -1, -1):
            vec[i] = vec[i + 1] + drop
            drop *= beta
    else:  # beta_concave
        beta = spec.beta
        tail = beta ** L  # keeps late values far above every early difference
        vec = [Fraction(0)] * L
        vec[L - 1] = tail
        drop = beta ** (L - 2)
        for i in range(L - 2, -1, -1):
            vec[i] = vec[i + 1] + drop
            drop /= beta
    if spec.high is not None:
        scale = spec.high / vec[0]
        vec = [scale * v for v in vec]
    if not (_strictly_decreasing(vec) and vec[-1] > 0):
        raise InputError("shape parameters produce an invalid vector")
    return tuple(vec)


@dataclass(frozen=True)
class ShapeInfo:
    is_convex: bool
    is_concave: bool
    convex_beta: Optional[Fraction]  # largest certified shrink factor
    concave_beta: Optional[Fraction]  # largest certified growth factor

    @property
    def kind(self) -> str:
        if self.is_convex and self.is_concave:
            return "linear"
        if self.is_convex:
            return "convex"
        if self.is_concave:
            return "concave"
        return "neither"


def classify_shape(vector: Sequence) -> ShapeInfo:
    """Exact convexity/concavity flags of a decreasing positive vector plus
    the largest beta each direction certifies."""
    vec = _as_fraction_tuple(vector)
    if len(vec) < 2:
        raise InputError("need at least two entries to classify")
    if vec[-1] <= 0 or not _strictly_decreasing(vec):
        raise InputError("classification expects a strictly decreasing "
                         "positive vector")
    drops = [a - b for a, b in zip(vec, vec[1:])]
    is_convex = all(a >= b for a, b in zip(drops, drops[1:]))
    is_concave = all(a <= b for a, b in zip(drops, drops[1:]))
    convex_beta = None
    concave_beta = None
    if len(drops) >= 2:  # a single drop constrains nothing
        if is_convex:
            convex_beta = min(a / b for a, b in zip(drops, drops[1:]))
        if is_concave:
            concave_beta = min(b / a for a, b in zip(drops, drops[1:]))
    return ShapeInfo(is_convex, is_concave, convex_beta, concave_beta)


def make_instance(s: int, value_spec: ShapeSpec, ctr_spec: ShapeSpec,
                  n: Optional[int] = None) -> AuctionInstance:
    """Instance with shape-generated values (length n, default 2s) and CTRs
    (length s)."""
    if n is None:
        n = 2 * s
    values = make_shape(ShapeSpec(value_spec.kind, n, value_spec.beta,
                                  value_spec.high, value_spec.low))
    ctrs = make_shape(ShapeSpec(ctr_spec.kind, s, ctr_spec.beta,
                                ctr_spec.high, ctr_spec.low))
    return AuctionInstance(s, values, ctrs)


# ---------------------------------------------------------------------------
# Reserve-price instability witness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReserveWitness:
    bidder_rank: int
    case: str  # "raise": value above the reserve but bid below; "lower": converse
    value: Fraction
    bid: Fraction


def gsp_reserve_witness(inst: AuctionInstance, bids: Sequence, c) -> Optional[ReserveWitness]:
    """First bidder whose (bid, value) pair straddles the reserve c, i.e. who
    would rebid once the reserve binds; None when c separates no pair."""
    c = Fraction(c)
    bids = _as_fraction_tuple(bids)
    if len(bids) != inst.n:
        raise InputError("one bid per bidder required")
    for rank in range(1, inst.n + 1):
        v, b = inst.value(rank), bids[rank - 1]
        if v > c > b:
            return ReserveWitness(rank, "raise", v, b)
        if v < c < b:
            return ReserveWitness(rank, "lower", v, b)
    return None
