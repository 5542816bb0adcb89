"""Regret-accumulation baseline with an oracle posted price.

The comparator implements an optimization greedily once the value it *would*
have delivered so far (its regret) covers the cost.  Value accrued while
regret builds up is wasted: users are only serviced from the trigger slot
on.  Users active in the trigger slot ride free; later access is sold at a
single posted price chosen, with perfect knowledge of future values, to
minimize the provider's loss (so the baseline is evaluated at its best).

The baseline trusts bids to be true values; the simulator always feeds it
the truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .core import (
    AdditiveOnlineBid,
    GameError,
    OptId,
    Optimization,
    ServiceSchedule,
    Slot,
    SlotHorizon,
    SubstitutableOnlineBid,
    UserId,
)
from .money import ZERO, Money
from .shapley import common_scale


def optimal_posted_price(cost: Money, future_residuals: Sequence[Money]) -> tuple[Money, Money]:
    """Price minimizing max(cost - price * buyers, 0); smallest price on ties.

    Buyers at price p are the residuals >= p.  With residuals sorted
    descending, prices with k buyers are (r_{k+1}, r_k], so cost recovery is
    possible iff k * r_k >= cost for some k, and the smallest recovering
    price is cost/k for the largest such k.  If no price recovers the cost,
    revenue p * buyers is maximized at some residual value; the smallest
    maximizer wins the tie.
    """
    if any(r < 0 for r in future_residuals):
        raise GameError("residuals must be >= 0")
    residuals = sorted((r for r in future_residuals if r > 0), reverse=True)
    recovering = 0
    for k, r in enumerate(residuals, start=1):
        if r * k >= cost:
            recovering = k
    if recovering:
        return cost / recovering, ZERO
    best_price, best_revenue = ZERO, ZERO
    for k, r in enumerate(residuals, start=1):
        revenue = r * k
        if revenue > best_revenue or (revenue == best_revenue and r < best_price):
            best_price, best_revenue = r, revenue
    return best_price, cost - best_revenue


@dataclass(frozen=True)
class RegretTrace:
    implement_slot: dict[OptId, Slot]
    posted_price: dict[OptId, Money]
    price_loss: dict[OptId, Money]
    serviced: ServiceSchedule
    payments: dict[UserId, Money]
    cloud_balance: Money  # total payments minus implemented costs (< 0 = loss)
    realized_value: Money
    total_cost: Money
    _series_scaled: dict[tuple[OptId, Slot], int]
    _scale: int

    @cached_property
    def regret_series(self) -> dict[tuple[OptId, Slot], Money]:
        return {k: Fraction(v, self._scale) for k, v in self._series_scaled.items()}

    @property
    def total_utility(self) -> Money:
        return self.realized_value - self.total_cost


def regret_run(
    catalog: Iterable[Optimization],
    horizon: SlotHorizon,
    values: Sequence[AdditiveOnlineBid] | Sequence[SubstitutableOnlineBid],
) -> RegretTrace:
    """Run the baseline on truthful per-slot values.

    Additive bids contribute to every optimization they name, independently.
    Substitutable bids contribute their value to every optimization in the
    substitute set until the user is first serviced by one of them, at which
    point she stops benefiting from (and stops accruing regret for) the rest.
    """
    catalog = tuple(catalog)
    costs = {o.id: o.cost for o in catalog}
    bids = tuple(values)
    if not bids:
        return _empty_trace()
    additive = isinstance(bids[0], AdditiveOnlineBid)
    for b in bids:
        if isinstance(b, AdditiveOnlineBid) != additive:
            raise GameError("cannot mix additive and substitutable bids")
        if b.end > horizon.z:
            raise GameError(f"user {b.user}: bid window ends past the horizon")

    if additive:
        seen = set()
        for b in bids:
            if b.opt not in costs:
                raise GameError(f"user {b.user} bids unknown optimization {b.opt}")
            if (b.user, b.opt) in seen:
                raise GameError(f"duplicate bid for user {b.user}, optimization {b.opt}")
            seen.add((b.user, b.opt))
        interest = [frozenset([b.opt]) for b in bids]
    else:
        users = [b.user for b in bids]
        if len(users) != len(set(users)):
            raise GameError("one bid per user per game")
        for b in bids:
            if not b.substitutes <= costs.keys():
                raise GameError(f"user {b.user} wants unknown optimizations")
        interest = [b.substitutes for b in bids]

    scale = common_scale([*costs.values(), *(v for b in bids for v in b.per_slot)])
    costs_s = {j: c.numerator * (scale // c.denominator) for j, c in costs.items()}
    opt_ids = sorted(costs)
    vals: list[list[int]] = []  # scaled per-slot values, indexed like each bid window
    suffix: list[list[int]] = []  # suffix[i][k]: value of bid i from slot start+k on
    for b in bids:
        row = [v.numerator * (scale // v.denominator) for v in b.per_slot]
        vals.append(row)
        acc = [0]
        for v in reversed(row):
            acc.append(acc[-1] + v)
        suffix.append(acc[::-1])

    def residual_after(i: int, t: Slot) -> int:
        """Scaled declared value strictly after slot t."""
        b = bids[i]
        tau = max(t + 1, b.start)
        if tau > b.end:
            return 0
        return suffix[i][tau - b.start]

    def value_at(i: int, t: Slot) -> int:
        b = bids[i]
        if b.start <= t <= b.end:
            return vals[i][t - b.start]
        return 0

    regret: dict[OptId, int] = {j: 0 for j in costs}
    series: dict[tuple[OptId, Slot], int] = {}
    implement_slot: dict[OptId, Slot] = {}
    posted_price: dict[OptId, Money] = {}
    price_loss: dict[OptId, Money] = {}
    served: dict[tuple[OptId, Slot], set[UserId]] = {}
    payments: dict[UserId, Money] = {b.user: ZERO for b in bids}
    bound: dict[UserId, OptId] = {}  # substitutable: first optimization that serviced the user
    realized_s = 0

    def is_open(i: int) -> bool:
        """Whether the user still benefits from, and accrues regret for,
        not-yet-implemented optimizations (substitutable users stop once
        serviced by any member of their set)."""
        return additive or bids[i].user not in bound

    for t in horizon.slots():
        for j in opt_ids:
            if j not in implement_slot:
                series[(j, t)] = regret[j]
        # greedy trigger, lowest optimization id first
        for j in opt_ids:
            if j in implement_slot or regret[j] < costs_s[j]:
                continue
            implement_slot[j] = t
            pool = [i for i in range(len(bids)) if j in interest[i] and is_open(i)]
            # users active in the trigger slot are serviced for free
            for i in pool:
                b = bids[i]
                if b.start <= t <= b.end:
                    served.setdefault((j, t), set()).add(b.user)
                    realized_s += value_at(i, t)
                    if not additive:
                        bound[b.user] = j
            # one posted price for everything after the trigger slot
            future = [(i, residual_after(i, t)) for i in pool]
            price, loss = optimal_posted_price(
                costs[j], [Fraction(r, scale) for _, r in future if r > 0]
            )
            posted_price[j] = price
            price_loss[j] = loss
            p_num, p_den = price.numerator, price.denominator
            for i, r in future:
                if r <= 0:
                    continue
                b = bids[i]
                # r/scale >= price, cross-multiplied to stay in integers
                if r * p_den >= p_num * scale and (additive or b.user not in bound or bound[b.user] == j):
                    payments[b.user] += price
                    realized_s += r
                    if not additive:
                        bound[b.user] = j
                    for tau in range(max(b.start, t + 1), b.end + 1):
                        served.setdefault((j, tau), set()).add(b.user)
        # accumulate regret for still-unimplemented optimizations
        for i, b in enumerate(bids):
            if b.start <= t <= b.end and is_open(i):
                v = value_at(i, t)
                if v:
                    for j in interest[i]:
                        if j not in implement_slot:
                            regret[j] += v

    total_cost = sum((costs[j] for j in implement_slot), ZERO)
    total_paid = sum(payments.values(), ZERO)
    return RegretTrace(
        implement_slot,
        posted_price,
        price_loss,
        ServiceSchedule({k: frozenset(v) for k, v in served.items()}),
        payments,
        total_paid - total_cost,
        Fraction(realized_s, scale),
        total_cost,
        series,
        scale,
    )


def _empty_trace() -> RegretTrace:
    return RegretTrace({}, {}, {}, ServiceSchedule({}), {}, ZERO, ZERO, ZERO, {}, 1)
