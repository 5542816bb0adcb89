"""Online mechanism for one additive optimization over a slot horizon.

Each slot re-runs the equal-share mechanism on *residual* bids (declared
value from the current slot onward).  Users already serviced are pinned with
infinite bids, so the cumulative serviced set never shrinks and the share
only falls as newcomers join.  A user pays exactly once, when her bid
expires, at the share computed in that slot; users who left stay pinned and
keep lowering later arrivals' shares.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

from .core import (
    AdditiveOnlineBid,
    GameError,
    OnlineAdditiveGame,
    Optimization,
    RevisionError,
    RevisionViolation,
    ServiceSchedule,
    SlotHorizon,
    SlotOrderError,
    Slot,
    UserId,
    validate_revision,
)
from .money import ZERO, Money
from .shapley import _fixed_point, common_scale


@dataclass(frozen=True)
class OnlineTrace:
    schedule: ServiceSchedule
    payments: dict[UserId, Money]
    share_history: dict[Slot, Money]  # slot -> cost/|cumulative| once non-empty


def add_on(game: OnlineAdditiveGame) -> OnlineTrace:
    """Run the online additive mechanism for the whole horizon."""
    users = [b.user for b in game.bids]
    if len(users) != len(set(users)):
        raise GameError("one bid per user per game")
    cost = game.optimization.cost
    opt = game.optimization.id

    # One rescale for the whole game; per-slot loops are pure integer math.
    scale = common_scale([cost, *(v for b in game.bids for v in b.per_slot)])
    cost_s = cost.numerator * (scale // cost.denominator)
    suffix: dict[UserId, list[int]] = {}
    for bid in game.bids:
        # suffix[u][k] = scaled residual from slot (start + k); trailing 0.
        acc = [0]
        for v in reversed(bid.per_slot):
            acc.append(acc[-1] + v.numerator * (scale // v.denominator))
        suffix[bid.user] = acc[::-1]

    cs: set[UserId] = set()
    served: dict[tuple[int, Slot], frozenset[UserId]] = {}
    share_history: dict[Slot, Money] = {}
    payments: dict[UserId, Money] = {b.user: ZERO for b in game.bids}

    for t in game.horizon.slots():
        candidates = []
        for bid in game.bids:
            if bid.user in cs or t < bid.start:
                continue
            residual = suffix[bid.user][t - bid.start] if t <= bid.end else 0
            candidates.append((bid.user, residual))
        cs.update(_fixed_point(cost_s, candidates, len(cs)))
        share = cost / len(cs) if cs else None
        if share is not None:
            share_history[t] = share
        active = frozenset(b.user for b in game.bids if b.user in cs and t <= b.end)
        if active:
            served[(opt, t)] = active
        for bid in game.bids:
            if bid.end == t and bid.user in cs:
                payments[bid.user] = share
    return OnlineTrace(ServiceSchedule(served), payments, share_history)


# ---------------------------------------------------------------------------
# Incremental session driver (slot-by-slot feed with bid revisions)


@dataclass(frozen=True)
class SessionState:
    optimization: Optimization
    horizon: SlotHorizon
    next_slot: Slot
    declared: dict[UserId, AdditiveOnlineBid]
    cumulative: frozenset[UserId]
    served: dict[tuple[int, Slot], frozenset[UserId]]
    payments: dict[UserId, Money]
    share_history: dict[Slot, Money]

    def trace(self) -> OnlineTrace:
        payments = {u: self.payments.get(u, ZERO) for u in self.declared}
        return OnlineTrace(ServiceSchedule(dict(self.served)), payments, dict(self.share_history))


def new_session(optimization: Optimization, horizon: SlotHorizon) -> SessionState:
    return SessionState(optimization, horizon, 1, {}, frozenset(), {}, {}, {})


def step_session(
    state: SessionState, slot: Slot, bids: Iterable[AdditiveOnlineBid] = ()
) -> tuple[frozenset[UserId], dict[UserId, Money], SessionState]:
    """Advance the session to ``slot``, absorbing new or revised bids first.

    Slots must be fed in strictly increasing order; skipped slots are played
    out with no new arrivals.  New bids must not start in the past and
    revisions must leave past slots untouched and only move future values
    upward.  Returns (serviced set at ``slot``, departures with their
    payments, new state).
    """
    if not (1 <= slot <= state.horizon.z):
        raise SlotOrderError(f"slot {slot} outside horizon 1..{state.horizon.z}")
    if slot < state.next_slot:
        raise SlotOrderError(f"slot {slot} already processed (next is {state.next_slot})")

    declared = dict(state.declared)
    for bid in bids:
        if bid.opt != state.optimization.id:
            raise GameError(f"user {bid.user} bids optimization {bid.opt}, session has {state.optimization.id}")
        if bid.end > state.horizon.z:
            raise GameError(f"user {bid.user}: bid window ends past the horizon")
        old = declared.get(bid.user)
        if old is None:
            if bid.start < slot:
                raise RevisionError(RevisionViolation("retroactive", bid.start))
        else:
            if old.end < slot:
                # the user already departed and settled; nothing may reopen
                raise RevisionError(RevisionViolation("expired", old.end))
            violation = validate_revision(old, bid, slot)
            if violation is not None:
                raise RevisionError(violation)
        declared[bid.user] = bid

    cost = state.optimization.cost
    cs = set(state.cumulative)
    served = dict(state.served)
    payments = dict(state.payments)
    share_history = dict(state.share_history)
    serviced_now: frozenset[UserId] = frozenset()
    departures: dict[UserId, Money] = {}

    for t in range(state.next_slot, slot + 1):
        residuals = {
            u: b.residual_from(t)
            for u, b in declared.items()
            if u not in cs and b.start <= t
        }
        scale = common_scale([cost, *residuals.values()])
        cost_s = cost.numerator * (scale // cost.denominator)
        finite = [(u, r.numerator * (scale // r.denominator)) for u, r in residuals.items()]
        cs.update(_fixed_point(cost_s, finite, len(cs)))
        share = cost / len(cs) if cs else None
        if share is not None:
            share_history[t] = share
        active = frozenset(u for u in cs if t <= declared[u].end)
        if active:
            served[(state.optimization.id, t)] = active
        if t == slot:
            serviced_now = active
        for u, b in declared.items():
            if b.end == t:
                paid = share if u in cs else ZERO
                payments[u] = paid
                if t == slot:
                    departures[u] = paid

    new_state = replace(
        state,
        next_slot=slot + 1,
        declared=declared,
        cumulative=frozenset(cs),
        served=served,
        payments=payments,
        share_history=share_history,
    )
    return serviced_now, departures, new_state
