"""Canonical experiment definitions for the simulated comparisons.

These are the configurations behind the shipped result reproductions: small
and large additive collaborations over a cost sweep, arrival skew at a
mid-range cost, and substitute selectivity at two catalog sizes.  The
acceptance suite runs them at full scale; ``scripts/`` writes them out as
CLI config files.
"""

from __future__ import annotations

from fractions import Fraction

from .harness import ExperimentConfig
from .scenarios import ScenarioSpec

F = Fraction

TRIALS = 10_000

# Mid-range cost point for the arrival-skew comparison; at this cost the
# uniform-vs-early and late-vs-early utility gaps are stable and wide.
SKEW_COST = F(54, 100)


def small_group_config(trials: int = TRIALS) -> ExperimentConfig:
    return ExperimentConfig(
        scenario=ScenarioSpec(family="collab_size", users=6, slots=12, cost=F(6, 100), seed=101, trials=trials),
        mechanisms=("add_on", "regret"),
        cost_sweep=tuple(F(6 * k, 100) for k in range(1, 26)),  # 0.06 .. 1.50
        output="collab_small",
    )


def large_group_config(trials: int = TRIALS) -> ExperimentConfig:
    return ExperimentConfig(
        scenario=ScenarioSpec(family="collab_size", users=24, slots=12, cost=F(24, 100), seed=202, trials=trials),
        mechanisms=("add_on", "regret"),
        cost_sweep=tuple(F(24 * k, 100) for k in range(1, 22)),  # 0.24 .. 5.04
        output="collab_large",
    )


def arrival_skew_config(skew: str, trials: int = TRIALS) -> ExperimentConfig:
    return ExperimentConfig(
        scenario=ScenarioSpec(
            family="arrival_skew", users=6, slots=12, skew=skew, cost=SKEW_COST, seed=303, trials=trials
        ),
        mechanisms=("add_on", "regret"),
        cost_sweep=(F(30, 100), SKEW_COST, F(90, 100)),
        output=f"arrival_skew_{skew}",
    )


def selectivity_config(opt_count: int, trials: int = TRIALS) -> ExperimentConfig:
    return ExperimentConfig(
        scenario=ScenarioSpec(
            family="selectivity",
            users=6,
            slots=12,
            opt_count=opt_count,
            substitutes_per_user=3,
            cost=F(6, 100),
            seed=404,
            trials=trials,
        ),
        mechanisms=("subst_on", "regret"),
        cost_sweep=tuple(F(6 * k, 100) for k in (1, 3, 6, 9, 12, 15, 18, 21, 24)),  # 0.06 .. 1.44
        output=f"selectivity_3of{opt_count}",
    )


def trend_configs(trials: int = TRIALS) -> dict[str, ExperimentConfig]:
    configs = {
        "collab_small": small_group_config(trials),
        "collab_large": large_group_config(trials),
        "selectivity_3of4": selectivity_config(4, trials),
        "selectivity_3of12": selectivity_config(12, trials),
    }
    for skew in ("uniform", "early", "late"):
        configs[f"arrival_skew_{skew}"] = arrival_skew_config(skew, trials)
    return configs


def config_to_dict(config: ExperimentConfig) -> dict:
    from .gamefiles import money_str

    return {
        "schema": 1,
        "scenario": config.scenario.to_dict(),
        "mechanisms": list(config.mechanisms),
        "cost_sweep": [money_str(c) for c in config.cost_sweep],
        "output": config.output,
        "details": config.details,
    }
