"""Equal-share cost allocation for a single optimization, and its
per-optimization composition for additive offline games.

The serviced set is the fixed point of: start with all bidders, split the
cost evenly, drop everyone whose bid is below the share, repeat.  A bidder
exactly at the share stays serviced (comparison is ``bid >= share``).  The
result is the unique maximal set whose members can all cover an equal split.

The loop runs on integers after rescaling all amounts to a common
denominator, which keeps it exact and cheap inside the Monte Carlo harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .core import (
    AdditiveOfflineBid,
    AdditiveOfflineGame,
    GameError,
    Optimization,
    Outcome,
    PaymentLedger,
    UserId,
)
from .money import ZERO, Bid, Money, is_infinite


@dataclass(frozen=True)
class ShapleyResult:
    serviced: frozenset[UserId]
    share: Money | None  # equal split, set iff anyone is serviced
    payments: dict[UserId, Money]


def _fixed_point(cost_scaled: int, finite_scaled: Iterable[tuple[UserId, int]], n_pinned: int) -> list[UserId]:
    """Fixed-point eviction loop over integer-scaled bids.

    ``bid >= cost/k`` is evaluated as ``bid * k >= cost`` so no divisions
    happen until the final share is reported.  Pinned users (infinite bids)
    always stay and only contribute to the head count.
    """
    kept = [(u, b) for u, b in finite_scaled if b > 0]  # zero bids never survive
    while True:
        k = n_pinned + len(kept)
        if k == 0:
            return []
        survivors = [(u, b) for u, b in kept if b * k >= cost_scaled]
        if len(survivors) == len(kept):
            return [u for u, _ in kept]
        kept = survivors


def common_scale(values: Iterable[Money]) -> int:
    """Least common denominator; 1 for an empty collection."""
    return math.lcm(*(v.denominator for v in values))


def shapley(cost: Money, bids: Mapping[UserId, Bid]) -> ShapleyResult:
    """Run the equal-share mechanism for one optimization.

    ``bids`` maps users to finite amounts or to :data:`INFINITE_BID`
    (the online mechanisms use infinite bids to pin already-serviced users).
    Serviced users all pay ``cost / |serviced|`` exactly; everyone else pays 0.
    """
    if cost <= 0:
        raise GameError("optimization cost must be positive")
    pinned: list[UserId] = []
    finite: dict[UserId, Money] = {}
    for user, bid in bids.items():
        if is_infinite(bid):
            pinned.append(user)
            continue
        if isinstance(bid, int):
            bid = Fraction(bid)
        if bid < 0:
            raise GameError(f"user {user}: bid must be >= 0")
        finite[user] = bid

    scale = common_scale([cost, *finite.values()])
    cost_s = cost.numerator * (scale // cost.denominator)
    finite_s = [(u, b.numerator * (scale // b.denominator)) for u, b in finite.items()]

    serviced = set(pinned) | set(_fixed_point(cost_s, finite_s, len(pinned)))
    share = cost / len(serviced) if serviced else None
    payments = {u: (share if u in serviced else ZERO) for u in bids}
    return ShapleyResult(frozenset(serviced), share, payments)


def add_off(
    catalog: Iterable[Optimization], bids: Iterable[AdditiveOfflineBid]
) -> tuple[Outcome, PaymentLedger]:
    """Additive offline mechanism: one independent equal-share run per
    optimization; an optimization is implemented iff its serviced set is
    non-empty."""
    game = AdditiveOfflineGame(tuple(catalog), tuple(bids))  # validates bid/catalog fit
    implemented: set[int] = set()
    grants: set[tuple[UserId, int]] = set()
    entries: dict[tuple[UserId, int], Money] = {}
    for opt in game.catalog:
        column = {b.user: b.value_for(opt.id) for b in game.bids if b.value_for(opt.id) > 0}
        result = shapley(opt.cost, column)
        if result.serviced:
            implemented.add(opt.id)
            for user in result.serviced:
                grants.add((user, opt.id))
                entries[(user, opt.id)] = result.share
    return Outcome(frozenset(implemented), frozenset(grants)), PaymentLedger(entries)
