from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from optshare.core import (
    GameError,
    Optimization,
    SlotHorizon,
    SubstitutableOfflineBid,
    SubstitutableOnlineBid,
)
from optshare.shapley import add_off
from optshare.core import AdditiveOfflineBid
from optshare.substitutable import subst_off, subst_on

F = Fraction


def off_bid(user, subs, value):
    return SubstitutableOfflineBid(user, frozenset(subs), F(value))


def on_bid(user, subs, start, end, *values):
    return SubstitutableOnlineBid(user, frozenset(subs), start, end, tuple(F(v) for v in values))


CATALOG_3 = (Optimization(1, F(60)), Optimization(2, F(180)), Optimization(3, F(100)))
BIDS_3 = (off_bid(1, {1, 2}, 100), off_bid(2, {3}, 101), off_bid(3, {1, 2, 3}, 60), off_bid(4, {2}, 70))


def test_phased_selection():
    r = subst_off(CATALOG_3, BIDS_3)
    assert r.outcome.implemented == {1, 3}
    assert [p.opt for p in r.phases] == [1, 3]
    assert r.phases[0].serviced == {1, 3} and r.phases[0].share == F(30)
    assert r.phases[1].serviced == {2} and r.phases[1].share == F(100)
    assert [r.payments.total_for(u) for u in (1, 2, 3, 4)] == [F(30), F(100), F(30), F(0)]


def test_cheap_overlapping_pair():
    catalog = (Optimization(1, F(6)), Optimization(2, F(5)))
    bids = (off_bid(1, {1}, 5), off_bid(2, {1, 2}, "2.51"), off_bid(3, {2}, 7))
    r = subst_off(catalog, bids)
    assert r.outcome.implemented == {2}
    assert r.phases[0].serviced == {2, 3} and r.phases[0].share == F("2.5")


def test_cheap_pair_with_split_identities():
    catalog = (Optimization(1, F(6)), Optimization(2, F(5)))
    bids = (
        off_bid(10, {1}, "2.5"),
        off_bid(11, {1}, "2.5"),
        off_bid(2, {1, 2}, "2.51"),
        off_bid(3, {2}, 7),
    )
    r = subst_off(catalog, bids)
    assert r.phases[0].opt == 1 and r.phases[0].serviced == {10, 11, 2} and r.phases[0].share == F(2)
    assert r.phases[1].opt == 2 and r.phases[1].serviced == {3} and r.phases[1].share == F(5)


def test_no_bids():
    r = subst_off(CATALOG_3, ())
    assert r.outcome.implemented == frozenset()
    assert r.phases == ()


def test_tie_breaks_to_lowest_id_and_is_recorded():
    catalog = (Optimization(3, F(10)), Optimization(7, F(10)))
    r = subst_off(catalog, (off_bid(1, {3, 7}, 20),))
    assert r.phases[0].opt == 3
    assert r.phases[0].tied_with == (7,)


def test_unknown_optimization_rejected():
    with pytest.raises(GameError):
        subst_off(CATALOG_3[:1], (off_bid(1, {9}, 5),))


@st.composite
def subst_offline_games(draw, max_users=5, max_opts=3):
    n = draw(st.integers(1, max_opts))
    m = draw(st.integers(1, max_users))
    catalog = tuple(Optimization(j, F(draw(st.integers(1, 500)), 100)) for j in range(1, n + 1))
    bids = []
    for u in range(1, m + 1):
        subs = draw(st.sets(st.integers(1, n), min_size=1, max_size=n))
        bids.append(SubstitutableOfflineBid(u, frozenset(subs), F(draw(st.integers(1, 300)), 100)))
    return catalog, tuple(bids)


@given(subst_offline_games())
@settings(max_examples=300, deadline=None)
def test_offline_invariants(args):
    catalog, bids = args
    r = subst_off(catalog, bids)
    costs = {o.id: o.cost for o in catalog}
    # disjoint phases, exact recovery per phase, non-decreasing shares
    seen_users: set = set()
    seen_opts: set = set()
    prev_share = None
    for phase in r.phases:
        assert not (phase.serviced & seen_users)
        assert phase.opt not in seen_opts
        seen_users |= phase.serviced
        seen_opts.add(phase.opt)
        assert phase.share * len(phase.serviced) == costs[phase.opt]
        if prev_share is not None:
            assert phase.share >= prev_share
        prev_share = phase.share
        for u in phase.serviced:
            assert r.payments.entries[(u, phase.opt)] == phase.share
    assert r.outcome.implemented == seen_opts
    # a serviced user's bid covers her share
    values = {b.user: b.value for b in bids}
    for phase in r.phases:
        for u in phase.serviced:
            assert values[u] >= phase.share


@given(subst_offline_games())
@settings(max_examples=200, deadline=None)
def test_singleton_partition_degenerates_to_additive(args):
    catalog, bids = args
    singles = tuple(SubstitutableOfflineBid(b.user, frozenset({min(b.substitutes)}), b.value) for b in bids)
    r = subst_off(catalog, singles)
    additive = tuple(AdditiveOfflineBid(b.user, {min(b.substitutes): b.value}) for b in bids)
    outcome, ledger = add_off(catalog, additive)
    assert r.outcome == outcome
    assert r.payments.entries == ledger.entries


def test_online_no_switching_keeps_departed_users_counted():
    catalog = (Optimization(1, F(60)), Optimization(2, F(100)), Optimization(3, F(50)))
    bids = (
        on_bid(1, {1, 2}, 1, 2, 100, 100),
        on_bid(2, {1, 2, 3}, 2, 3, 100, 100),
        on_bid(3, {3}, 3, 3, 100),
    )
    t = subst_on(catalog, SlotHorizon(3), bids)
    assert t.payments == {1: F(30), 2: F(30), 3: F(50)}
    assert t.granted == {1: 1, 2: 1, 3: 3}
    assert t.implemented == {1, 3}
    # user 2 is still pinned to optimization 1 in the final slot
    assert t.schedule.serviced_at(1, 3) == {2}
    assert t.schedule.serviced_at(3, 3) == {3}


def test_online_newcomer_cannot_force_a_switch():
    catalog = (Optimization(1, F(60)), Optimization(2, F(100)), Optimization(3, F(50)))
    bids = (
        on_bid(1, {1, 2}, 1, 2, 100, 100),
        on_bid(2, {1, 2, 3}, 2, 3, 100, 100),
        on_bid(3, {3}, 3, 3, 100),
        on_bid(4, {3}, 3, 3, 100),
    )
    t = subst_on(catalog, SlotHorizon(3), bids)
    assert t.payments[2] == F(30)
    assert t.payments[3] == F(25) and t.payments[4] == F(25)


@st.composite
def subst_online_games(draw, max_users=5, max_opts=3, max_slots=3):
    n = draw(st.integers(1, max_opts))
    z = draw(st.integers(1, max_slots))
    m = draw(st.integers(1, max_users))
    catalog = tuple(Optimization(j, F(draw(st.integers(1, 500)), 100)) for j in range(1, n + 1))
    bids = []
    for u in range(1, m + 1):
        subs = draw(st.sets(st.integers(1, n), min_size=1, max_size=n))
        s = draw(st.integers(1, z))
        e = draw(st.integers(s, z))
        vals = tuple(F(draw(st.integers(0, 300)), 100) for _ in range(e - s + 1))
        bids.append(SubstitutableOnlineBid(u, frozenset(subs), s, e, vals))
    return catalog, SlotHorizon(z), tuple(bids)


@given(subst_online_games())
@settings(max_examples=250, deadline=None)
def test_online_invariants(args):
    catalog, horizon, bids = args
    t = subst_on(catalog, horizon, bids)
    costs = {o.id: o.cost for o in catalog}
    # nobody is ever granted two optimizations
    assert len(t.granted) == len(set(t.granted))
    for user, opt in t.granted.items():
        assert opt in t.implemented
    # per-optimization recovery and non-negative balance
    per_opt: dict = {}
    for user, opt in t.granted.items():
        per_opt[opt] = per_opt.get(opt, F(0)) + t.payments[user]
    for opt in t.implemented:
        assert per_opt.get(opt, F(0)) >= costs[opt]
    paid = sum(t.payments.values(), F(0))
    total_cost = sum((costs[j] for j in t.implemented), F(0))
    assert paid >= total_cost
    # grants only to optimizations the user actually asked for
    wants = {b.user: b.substitutes for b in bids}
    for user, opt in t.granted.items():
        assert opt in wants[user]


@given(subst_online_games(max_slots=1))
@settings(max_examples=200, deadline=None)
def test_single_slot_equals_offline(args):
    catalog, horizon, bids = args
    t = subst_on(catalog, horizon, bids)
    offline = tuple(
        SubstitutableOfflineBid(b.user, b.substitutes, b.per_slot[0]) for b in bids if b.per_slot[0] > 0
    )
    r = subst_off(catalog, offline)
    assert t.payments == {b.user: r.payments.total_for(b.user) for b in bids}
    assert t.implemented == r.outcome.implemented
    assert set(t.granted.items()) == set(r.outcome.grants)
