"""JSON round-tripping for games and results (versioned, exact money).

Money is written as an exact decimal string when the value terminates
(denominator of the form 2^a * 5^b) and as "numerator/denominator" otherwise;
both forms parse back exactly.
"""

from __future__ import annotations

import json

from .core import (
    AdditiveOfflineBid,
    AdditiveOfflineGame,
    AdditiveOnlineBid,
    AdditiveOnlineMultiGame,
    GameError,
    OnlineAdditiveGame,
    Optimization,
    SlotHorizon,
    SubstOfflineGame,
    SubstOnlineGame,
    SubstitutableOfflineBid,
    SubstitutableOnlineBid,
)
from .money import Money, parse_money

SCHEMA = 1

KINDS = ("additive_offline", "additive_online", "substitutable_offline", "substitutable_online")


def money_str(value: Money) -> str:
    den, two, five = value.denominator, 0, 0
    while den % 2 == 0:
        den //= 2
        two += 1
    while den % 5 == 0:
        den //= 5
        five += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(two, five)
    scaled = value * 10**digits  # exact integer for terminating decimals
    text = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    sign = "-" if value < 0 else ""
    return f"{sign}{text[:-digits]}.{text[-digits:]}" if digits else f"{sign}{text}"


def game_kind(game) -> str:
    if isinstance(game, AdditiveOfflineGame):
        return "additive_offline"
    if isinstance(game, (OnlineAdditiveGame, AdditiveOnlineMultiGame)):
        return "additive_online"
    if isinstance(game, SubstOfflineGame):
        return "substitutable_offline"
    if isinstance(game, SubstOnlineGame):
        return "substitutable_online"
    raise TypeError(f"unknown game type {type(game).__name__}")


def game_to_dict(game) -> dict:
    kind = game_kind(game)
    if isinstance(game, OnlineAdditiveGame):
        catalog = (game.optimization,)
        slots = game.horizon.z
    elif kind == "additive_offline" or kind == "substitutable_offline":
        catalog, slots = game.catalog, 1
    else:
        catalog, slots = game.catalog, game.horizon.z
    data = {
        "schema": SCHEMA,
        "kind": kind,
        "catalog": [{"id": o.id, "cost": money_str(o.cost)} for o in catalog],
        "slots": slots,
        "bids": [_bid_to_dict(b) for b in game.bids],
    }
    return data


def _bid_to_dict(bid) -> dict:
    if isinstance(bid, AdditiveOfflineBid):
        return {"user": bid.user, "values": {str(j): money_str(v) for j, v in sorted(bid.values.items())}}
    if isinstance(bid, AdditiveOnlineBid):
        return {
            "user": bid.user,
            "opt": bid.opt,
            "start": bid.start,
            "end": bid.end,
            "per_slot": [money_str(v) for v in bid.per_slot],
        }
    if isinstance(bid, SubstitutableOfflineBid):
        return {"user": bid.user, "substitutes": sorted(bid.substitutes), "value": money_str(bid.value)}
    if isinstance(bid, SubstitutableOnlineBid):
        return {
            "user": bid.user,
            "substitutes": sorted(bid.substitutes),
            "start": bid.start,
            "end": bid.end,
            "per_slot": [money_str(v) for v in bid.per_slot],
        }
    raise TypeError(f"unknown bid type {type(bid).__name__}")


def game_from_dict(data: dict):
    kind = data.get("kind")
    if kind not in KINDS:
        raise GameError(f"kind: expected one of {KINDS}, got {kind!r}")
    catalog = tuple(Optimization(int(o["id"]), parse_money(o["cost"])) for o in data.get("catalog", ()))
    slots = int(data.get("slots", 1))
    bids = data.get("bids", ())
    if kind == "additive_offline":
        return AdditiveOfflineGame(
            catalog,
            tuple(
                AdditiveOfflineBid(int(b["user"]), {int(j): parse_money(v) for j, v in b.get("values", {}).items()})
                for b in bids
            ),
        )
    if kind == "additive_online":
        parsed = tuple(
            AdditiveOnlineBid(
                int(b["user"]),
                int(b.get("opt", catalog[0].id if catalog else 1)),
                int(b["start"]),
                int(b["end"]),
                tuple(parse_money(v) for v in b["per_slot"]),
            )
            for b in bids
        )
        if len(catalog) == 1:
            return OnlineAdditiveGame(catalog[0], SlotHorizon(slots), parsed)
        return AdditiveOnlineMultiGame(catalog, SlotHorizon(slots), parsed)
    if kind == "substitutable_offline":
        return SubstOfflineGame(
            catalog,
            tuple(
                SubstitutableOfflineBid(int(b["user"]), frozenset(int(j) for j in b["substitutes"]), parse_money(b["value"]))
                for b in bids
            ),
        )
    return SubstOnlineGame(
        catalog,
        SlotHorizon(slots),
        tuple(
            SubstitutableOnlineBid(
                int(b["user"]),
                frozenset(int(j) for j in b["substitutes"]),
                int(b["start"]),
                int(b["end"]),
                tuple(parse_money(v) for v in b["per_slot"]),
            )
            for b in bids
        ),
    )


def dump_game(game, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(game_to_dict(game), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_game(path):
    with open(path, encoding="utf-8") as fh:
        return game_from_dict(json.load(fh))


def game_json(game) -> str:
    return json.dumps(game_to_dict(game), sort_keys=True)
