"""Mechanisms for substitutable optimizations.

Offline: repeated phases.  Each phase runs the equal-share mechanism for
every not-yet-implemented optimization over the not-yet-serviced users who
want it, implements the feasible optimization with the smallest cost share,
and charges its serviced users that share.  Ties break deterministically on
the lowest optimization id (the tie is recorded in the phase log so strategy
studies can explore the randomized variant).

Online: the offline mechanism re-runs each slot on residual values.  The
first time a user is granted an optimization she is pinned to it (infinite
bid there, zero elsewhere), so she can never switch and stays in the pool,
even after leaving, to keep later users' shares honest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .core import (
    GameError,
    OptId,
    Optimization,
    Outcome,
    PaymentLedger,
    ServiceSchedule,
    Slot,
    SlotHorizon,
    SubstOfflineGame,
    SubstOnlineGame,
    SubstitutableOfflineBid,
    SubstitutableOnlineBid,
    UserId,
)
from .money import ZERO, Money
from .shapley import _fixed_point, common_scale


@dataclass(frozen=True)
class Phase:
    opt: OptId
    serviced: frozenset[UserId]
    share: Money
    tied_with: tuple[OptId, ...] = ()  # other optimizations at the same share


@dataclass(frozen=True)
class SubstOffResult:
    outcome: Outcome
    payments: PaymentLedger
    phases: tuple[Phase, ...]


def _phases_scaled(
    costs_scaled: Mapping[OptId, int],
    finite_scaled: Mapping[UserId, Mapping[OptId, int]],
    pinned: Mapping[UserId, OptId],
) -> list[tuple[OptId, frozenset[UserId], tuple[OptId, ...]]]:
    """Phase loop over integer-scaled bids; returns (opt, serviced, ties) per
    phase in selection order.  Pinned users always count for their pinned
    optimization and nothing else.  Shares are compared by integer
    cross-multiplication (cost_j * |S_k| vs cost_k * |S_j|)."""
    unserved = set(finite_scaled) | set(pinned)
    remaining = sorted(costs_scaled)
    pins_by_opt: dict[OptId, list[UserId]] = {}
    for user, opt in pinned.items():
        pins_by_opt.setdefault(opt, []).append(user)
    bidders_by_opt: dict[OptId, list[UserId]] = {}
    for user, bids in finite_scaled.items():
        for j, v in bids.items():
            if v > 0:
                bidders_by_opt.setdefault(j, []).append(user)

    phases = []
    while remaining and unserved:
        best = None  # (cost_scaled, serviced count, opt id)
        candidates: dict[OptId, tuple[frozenset[UserId], int]] = {}
        for j in remaining:  # ascending ids: strict < keeps the lowest id on ties
            pins = [u for u in pins_by_opt.get(j, ()) if u in unserved]
            finite = [(u, finite_scaled[u][j]) for u in bidders_by_opt.get(j, ()) if u in unserved]
            if not pins and not finite:
                continue
            kept = _fixed_point(costs_scaled[j], finite, len(pins))
            count = len(pins) + len(kept)
            if count == 0:
                continue
            candidates[j] = (frozenset(pins).union(kept), count)
            if best is None or costs_scaled[j] * best[1] < best[0] * count:
                best = (costs_scaled[j], count, j)
        if best is None:
            break
        best_cost, best_count, best_opt = best
        ties = tuple(
            j
            for j, (_, count) in sorted(candidates.items())
            if j != best_opt and costs_scaled[j] * best_count == best_cost * count
        )
        serviced = candidates[best_opt][0]
        phases.append((best_opt, serviced, ties))
        unserved -= serviced
        remaining.remove(best_opt)
    return phases


def _run_phases(
    catalog: Iterable[Optimization],
    finite_matrix: Mapping[UserId, Mapping[OptId, Money]],
    pinned: Mapping[UserId, OptId],
) -> list[Phase]:
    costs = {o.id: o.cost for o in catalog}
    scale = common_scale(
        [*costs.values(), *(v for bids in finite_matrix.values() for v in bids.values())]
    )
    costs_s = {j: c.numerator * (scale // c.denominator) for j, c in costs.items()}
    finite_s = {
        u: {j: v.numerator * (scale // v.denominator) for j, v in bids.items()}
        for u, bids in finite_matrix.items()
    }
    raw = _phases_scaled(costs_s, finite_s, pinned)
    return [
        Phase(opt, serviced, costs[opt] / len(serviced), ties) for opt, serviced, ties in raw
    ]


def subst_off(
    catalog: Iterable[Optimization], bids: Iterable[SubstitutableOfflineBid]
) -> SubstOffResult:
    """Offline mechanism for substitutable optimizations."""
    game = SubstOfflineGame(tuple(catalog), tuple(bids))
    users = [b.user for b in game.bids]
    if len(users) != len(set(users)):
        raise GameError("one bid per user per game")
    matrix = {b.user: {j: b.value for j in b.substitutes} for b in game.bids}
    phases = _run_phases(game.catalog, matrix, {})
    return _phases_to_result(phases)


def _phases_to_result(phases: list[Phase]) -> SubstOffResult:
    implemented = frozenset(p.opt for p in phases)
    grants = frozenset((u, p.opt) for p in phases for u in p.serviced)
    entries = {(u, p.opt): p.share for p in phases for u in p.serviced}
    return SubstOffResult(Outcome(implemented, grants), PaymentLedger(entries), tuple(phases))


# ---------------------------------------------------------------------------
# Online variant


@dataclass(frozen=True)
class SubstOnlineTrace:
    schedule: ServiceSchedule
    payments: dict[UserId, Money]
    granted: dict[UserId, OptId]  # final pinning of each serviced user
    grant_slot: dict[UserId, Slot]
    implemented: frozenset[OptId]
    slot_phases: dict[Slot, tuple[Phase, ...]]

    def outcome(self) -> Outcome:
        return Outcome(self.implemented, frozenset(self.granted.items()))


def subst_on(
    catalog: Iterable[Optimization],
    horizon: SlotHorizon,
    bids: Iterable[SubstitutableOnlineBid],
) -> SubstOnlineTrace:
    """Online mechanism for substitutable optimizations."""
    game = SubstOnlineGame(tuple(catalog), horizon, tuple(bids))
    users = [b.user for b in game.bids]
    if len(users) != len(set(users)):
        raise GameError("one bid per user per game")
    costs = {o.id: o.cost for o in game.catalog}

    scale = common_scale([*costs.values(), *(v for b in game.bids for v in b.per_slot)])
    costs_s = {j: c.numerator * (scale // c.denominator) for j, c in costs.items()}
    suffix: dict[UserId, list[int]] = {}
    for bid in game.bids:
        acc = [0]
        for v in reversed(bid.per_slot):
            acc.append(acc[-1] + v.numerator * (scale // v.denominator))
        suffix[bid.user] = acc[::-1]

    granted: dict[UserId, OptId] = {}
    grant_slot: dict[UserId, Slot] = {}
    served: dict[tuple[OptId, Slot], frozenset[UserId]] = {}
    payments: dict[UserId, Money] = {b.user: ZERO for b in game.bids}
    slot_phases: dict[Slot, tuple[Phase, ...]] = {}

    for t in horizon.slots():
        finite_s: dict[UserId, dict[OptId, int]] = {}
        for bid in game.bids:
            if bid.user in granted or t < bid.start:
                continue
            residual = suffix[bid.user][t - bid.start] if t <= bid.end else 0
            if residual > 0:
                finite_s[bid.user] = {j: residual for j in bid.substitutes}
        raw = _phases_scaled(costs_s, finite_s, granted)
        phases = tuple(
            Phase(opt, serviced, costs[opt] / len(serviced), ties) for opt, serviced, ties in raw
        )
        slot_phases[t] = phases

        share_of: dict[UserId, Money] = {}
        for phase in phases:
            for u in phase.serviced:
                share_of[u] = phase.share
                if u not in granted:
                    granted[u] = phase.opt
                    grant_slot[u] = t
        by_opt: dict[OptId, set[UserId]] = {}
        for bid in game.bids:
            u = bid.user
            if u in granted and grant_slot[u] <= t <= bid.end:
                by_opt.setdefault(granted[u], set()).add(u)
        for j, members in by_opt.items():
            served[(j, t)] = frozenset(members)
        for bid in game.bids:
            if bid.end == t:
                payments[bid.user] = share_of.get(bid.user, ZERO)

    return SubstOnlineTrace(
        ServiceSchedule(served),
        payments,
        granted,
        grant_slot,
        frozenset(p.opt for phases in slot_phases.values() for p in phases),
        slot_phases,
    )
