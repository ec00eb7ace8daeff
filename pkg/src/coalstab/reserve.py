"""Reserve-price variants of the truthful position auction.

A fixed reserve c filters out low reports and props every payment up to at
least c; two independent computations of that mechanism (shift-and-rerun vs
clamp-the-values) are kept side by side and must agree exactly.  Randomising
the reserve (drawn uniformly from [0, v_max] with probability q_reserve,
otherwise 0) makes *joint* misreporting unprofitable: whoever lowers her
report risks the reserve landing inside the gap she opened.  With at least
as many slots as bidders, truth-telling then resists every coalition's weak
deviation; a small slot-randomisation parameter manufactures the missing
slots when bidders outnumber them.

Expected utilities are integrated exactly: for fixed reports the utility is
piecewise affine in the reserve with breakpoints at the reports, so each
piece contributes its length times its midpoint value.
"""

import itertools
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .auction import AuctionInstance
from .errors import ContractWarning, InputError

FILTERED = "filtered"
CLAMPED = "clamped"
_MODES = (FILTERED, CLAMPED)


@dataclass(frozen=True)
class ReserveConfig:
    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        if self.c < 0:
            raise InputError("reserve price must be nonnegative")


@dataclass(frozen=True)
class VcgStarConfig:
    """Randomised reserve: with probability q_reserve the reserve is uniform
    on [0, v_max], otherwise 0.  q_reserve = 0 is allowed as the degenerate
    no-reserve control.  v_max = None defers to twice the top value of the
    instance at hand."""

    q_reserve: Fraction
    v_max: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "q_reserve", Fraction(self.q_reserve))
        if not 0 <= self.q_reserve <= 1:
            raise InputError("q_reserve must lie in [0, 1]")
        if self.v_max is not None:
            object.__setattr__(self, "v_max", Fraction(self.v_max))
            if self.v_max <= 0:
                raise InputError("v_max must be positive")

    def resolved_v_max(self, inst: AuctionInstance) -> Fraction:
        return self.v_max if self.v_max is not None else 2 * inst.values[0]


@dataclass(frozen=True)
class LambdaConfig:
    """Slot-randomisation weight; must stay below 1/n to preserve slot order."""

    lam: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lam", Fraction(self.lam))
        if self.lam <= 0:
            raise InputError("lambda must be positive")

    def validate_for(self, inst: AuctionInstance) -> None:
        if self.lam >= Fraction(1, inst.n):
            raise InputError("lambda must be smaller than 1/n")


@dataclass(frozen=True)
class ReserveOutcome:
    """Slots in report order: allocation[j-1] is the 0-based bidder in slot j."""

    allocation: tuple
    payments: tuple
    utilities: tuple


def _ranked_reports(inst: AuctionInstance, reports: Optional[Sequence]):
    if reports is None:
        reports = inst.values
    reports = tuple(Fraction(r) for r in reports)
    if len(reports) != inst.n:
        raise InputError("one report per bidder required")
    if len(set(reports)) != len(reports):
        raise InputError("reports must be pairwise distinct")
    order = sorted(range(inst.n), key=lambda i: reports[i], reverse=True)
    return reports, order


def reserve_vcg(inst: AuctionInstance, c, mode: str = FILTERED,
                reports: Optional[Sequence] = None) -> ReserveOutcome:
    """Fixed-reserve auction, computed by one of two equivalent routes.

    filtered: drop reports below c, shift the survivors down by c, run the
    plain payment rule (absent ranks are worth 0) and add c back.
    clamped: keep everybody, lift every report to at least c, run the plain
    payment rule, then allocate only to survivors.
    """
    if mode not in _MODES:
        raise InputError(f"mode must be one of {_MODES}")
    c = c.c if isinstance(c, ReserveConfig) else Fraction(c)
    if c < 0:
        raise InputError("reserve price must be nonnegative")
    reports, order = _ranked_reports(inst, reports)
    survivors = [i for i in order if reports[i] >= c]
    winners = survivors[:min(inst.s, len(survivors))]

    def ranked_value(rank: int) -> Fraction:
        if mode == FILTERED:
            if rank <= len(survivors):
                return reports[survivors[rank - 1]] - c
            return Fraction(0)
        # clamped route: the reserve also stands in for empty ranks, exactly
        # as the seller's outside option does in the filtered route
        if rank <= len(order):
            return max(reports[order[rank - 1]], c)
        return c

    offset = c if mode == FILTERED else Fraction(0)
    payments = []
    for i in range(1, len(winners) + 1):
        total = Fraction(0)
        for j in range(i + 1, inst.s + 2):
            total += (inst.ctr(j - 1) - inst.ctr(j)) * ranked_value(j)
        payments.append(offset + total / inst.ctr(i))
    utilities = [Fraction(0)] * inst.n
    for slot, bidder in enumerate(winners, start=1):
        utilities[bidder] = (inst.values[bidder] - payments[slot - 1]) * inst.ctr(slot)
    return ReserveOutcome(tuple(winners), tuple(payments), tuple(utilities))


# ---------------------------------------------------------------------------
# Randomised reserve: exact expected utilities and the coalition checker
# ---------------------------------------------------------------------------

def _reserve_breakpoints(reports, v_max: Fraction) -> list:
    points = {Fraction(0), v_max}
    for r in reports:
        if 0 < r < v_max:
            points.add(Fraction(r))
    return sorted(points)


def _utilities_at(inst: AuctionInstance, reports, c: Fraction) -> tuple:
    return reserve_vcg(inst, c, FILTERED, reports).utilities


def expected_utilities_vcg_star(inst: AuctionInstance, cfg: VcgStarConfig,
                                reports: Optional[Sequence] = None) -> tuple:
    """Exact expected utility of every bidder under the randomised reserve.

    Utility is affine in the reserve between consecutive report values, so
    the integral over [0, v_max] is a finite sum of midpoint evaluations.
    """
    reports, _ = _ranked_reports(inst, reports)
    v_max = cfg.resolved_v_max(inst)
    if any(r >= v_max for r in reports):
        raise InputError("every report must stay below v_max")
    q = cfg.q_reserve
    base = _utilities_at(inst, reports, Fraction(0))
    if q == 0:
        return base
    acc = [Fraction(0)] * inst.n
    points = _reserve_breakpoints(reports, v_max)
    for lo, hi in zip(points, points[1:]):
        mid = (lo + hi) / 2
        piece = _utilities_at(inst, reports, mid)
        width = hi - lo
        for i in range(inst.n):
            acc[i] += width * piece[i]
    return tuple((1 - q) * base[i] + q * acc[i] / v_max for i in range(inst.n))


def expected_utility_vcg_star(inst: AuctionInstance, cfg: VcgStarConfig,
                              reports: Optional[Sequence], agent: int) -> Fraction:
    if not 0 <= agent < inst.n:
        raise InputError(f"agent {agent} out of range")
    return expected_utilities_vcg_star(inst, cfg, reports)[agent]


@dataclass(frozen=True)
class ExpectedUtilityReport:
    """Per-agent expected utilities together with the integration breakpoints.

    Between consecutive breakpoints each utility is affine in the reserve, so
    the midpoint evaluations behind `utilities` are exact."""

    utilities: tuple
    breakpoints: tuple


def expected_utility_report(inst: AuctionInstance, cfg: VcgStarConfig,
                            reports: Optional[Sequence] = None) -> ExpectedUtilityReport:
    checked, _ = _ranked_reports(inst, reports)
    v_max = cfg.resolved_v_max(inst)
    return ExpectedUtilityReport(
        expected_utilities_vcg_star(inst, cfg, reports),
        tuple(_reserve_breakpoints(checked, v_max)),
    )


def misreport_grid(inst: AuctionInstance, agent: int, refine: int = 1,
                   v_max: Optional[Fraction] = None) -> tuple:
    """Candidate misreports for one agent: evenly spaced interior points of
    every cell between consecutive true values (2^refine pieces per cell)
    plus two probes just beside the agent's own value.  Expected utility as a
    function of one report is piecewise affine with breakpoints at the
    others' reports, so cell-interior points witness every cell."""
    if not 0 <= agent < inst.n:
        raise InputError(f"agent {agent} out of range")
    if refine < 1:
        raise InputError("refine must be at least 1")
    top = v_max if v_max is not None else 2 * inst.values[0]
    anchors = sorted(set(inst.values) | {Fraction(0), Fraction(top)})
    pieces = 2 ** refine
    points = set()
    for lo, hi in zip(anchors, anchors[1:]):
        gap = hi - lo
        for t in range(1, pieces):
            points.add(lo + gap * t / pieces)
    gaps = [b - a for a, b in zip(anchors, anchors[1:])]
    delta = min(gaps) / 4 / 2 ** (refine - 1)
    own = inst.values[agent]
    points.add(own - delta)
    points.add(own + delta)
    points.discard(own)
    return tuple(sorted(p for p in points if 0 < p < top))


def _lean_expected_utility(inst: AuctionInstance, q: Fraction, v_max: Fraction,
                           reports, ranked, points, agent: int) -> Fraction:
    """Filtered-route expected utility of one agent, skipping outcome objects.

    `ranked` is the report-descending bidder order, `points` the reserve
    breakpoints.  Must agree exactly with expected_utilities_vcg_star (the
    tests compare the two paths)."""
    own = reports[agent]
    rank = ranked.index(agent) + 1
    if rank > inst.s:
        return Fraction(0)
    x_i = inst.ctr(rank)
    true_value = inst.values[agent]

    def utility_at(c: Fraction) -> Fraction:
        if own < c:
            return Fraction(0)
        total = (true_value - c) * x_i
        for j in range(rank + 1, inst.s + 2):
            if j > inst.n:
                break
            below = reports[ranked[j - 1]]
            if below < c:
                break
            total -= (inst.ctr(j - 1) - inst.ctr(j)) * (below - c)
        return total

    expected = (1 - q) * utility_at(Fraction(0))
    if q == 0:
        return expected
    acc = Fraction(0)
    for lo, hi in zip(points, points[1:]):
        acc += (hi - lo) * utility_at((lo + hi) / 2)
    return expected + q * acc / v_max


@dataclass(frozen=True)
class SseVerdict:
    """Outcome of the truth-telling coalition search.

    `certified` means no weak deviation exists among the searched coalitions
    and grid misreports (a grid-relative statement); otherwise `members`
    (0-based) and `reports` describe the first deviation found in the fixed
    search order.
    """

    certified: bool
    members: Optional[tuple] = None
    reports: Optional[tuple] = None
    combos_checked: int = 0


def check_truthful_sse(inst: AuctionInstance, cfg: VcgStarConfig,
                       refine: int = 1,
                       max_coalition: Optional[int] = None) -> SseVerdict:
    """Search every coalition and grid misreport for a weak deviation in
    expected utility from truthful reporting.

    Certification is meaningful only with at least as many slots as bidders;
    with fewer slots the first loser is a free indifferent member and a
    deviation is expected (a ContractWarning flags that regime).
    """
    if inst.s < inst.n:
        warnings.warn("certification requires at least as many slots as "
                      "bidders; expect a deviation", ContractWarning,
                      stacklevel=2)
    if max_coalition is None:
        max_coalition = inst.n if inst.n <= 4 else 4
    v_max = cfg.resolved_v_max(inst)
    truthful = expected_utilities_vcg_star(inst, cfg, None)
    grids = [misreport_grid(inst, i, refine, v_max) for i in range(inst.n)]
    values = list(inst.values)
    checked = 0
    q = cfg.q_reserve
    for size in range(1, max_coalition + 1):
        for members in itertools.combinations(range(inst.n), size):
            member_set = set(members)
            others = [values[i] for i in range(inst.n) if i not in member_set]
            for combo in itertools.product(*(grids[i] for i in members)):
                if len(set(combo)) != size:
                    continue
                if any(c in others for c in combo):
                    continue
                reports = list(values)
                for i, rep in zip(members, combo):
                    reports[i] = rep
                checked += 1
                ranked = sorted(range(inst.n), key=reports.__getitem__,
                                reverse=True)
                points = _reserve_breakpoints(reports, v_max)
                improved = False
                ok = True
                for i in members:  # most combos die on their first member
                    expected = _lean_expected_utility(inst, q, v_max, reports,
                                                      ranked, points, i)
                    if expected < truthful[i]:
                        ok = False
                        break
                    if expected > truthful[i]:
                        improved = True
                if ok and improved:
                    return SseVerdict(False, members, tuple(reports), checked)
    return SseVerdict(True, combos_checked=checked)


# ---------------------------------------------------------------------------
# Slot randomisation: manufacture one expected slot per bidder
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LambdaExtension:
    """Expected-CTR view of the slot-randomised auction: the first s-1 slots
    are untouched, slot s keeps (1-(n-s)*lam) of its rate and each of the
    n-s synthetic slots carries lam * x_s."""

    extended_ctrs: tuple
    payments: tuple


def vcg_star_lambda(inst: AuctionInstance, cfg: LambdaConfig) -> LambdaExtension:
    """Build the n-slot expected-CTR vector and its truthful payments.

    The original slot order survives because lam < 1/n forces
    (1-(n-s)*lam) * x_s > lam * x_s; the synthetic slots share one expected
    rate, which the payment rule tolerates (their pairwise CTR differences
    vanish from every sum).
    """
    cfg.validate_for(inst)
    if inst.n <= inst.s:
        raise InputError("slot randomisation only applies when bidders "
                         "outnumber slots")
    lam = cfg.lam
    extra = inst.n - inst.s
    shrunk = (1 - extra * lam) * inst.ctrs[-1]
    synthetic = lam * inst.ctrs[-1]
    if not (shrunk > synthetic > 0):
        raise AssertionError("lambda below 1/n must preserve slot order")
    extended = inst.ctrs[:-1] + (shrunk,) + (synthetic,) * extra

    def ctr(slot: int) -> Fraction:
        return extended[slot - 1] if 1 <= slot <= inst.n else Fraction(0)

    payments = []
    for i in range(1, inst.n + 1):
        total = Fraction(0)
        for j in range(i + 1, inst.n + 2):
            total += (ctr(j - 1) - ctr(j)) * inst.value(j)
        payments.append(total / ctr(i))
    return LambdaExtension(extended, tuple(payments))


def lambda_payment_gap_bound(inst: AuctionInstance, cfg: LambdaConfig) -> Fraction:
    """v_1 * n * lam, the advertised ceiling on any winner's payment shift."""
    return inst.values[0] * inst.n * cfg.lam
