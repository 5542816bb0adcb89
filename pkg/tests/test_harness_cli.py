import json
import os
from fractions import Fraction

import pytest

from optshare.cli import main
from optshare.core import AdditiveOnlineBid, OnlineAdditiveGame, Optimization, SlotHorizon
from optshare.gamefiles import dump_game, game_from_dict, game_to_dict, load_game, money_str
from optshare.harness import ConfigError, config_from_dict, run_experiment
from optshare.scenarios import ScenarioSpec
from optshare.verification import run_suite

F = Fraction


def config_dict(**kw):
    base = {
        "schema": 1,
        "scenario": {"family": "collab_size", "users": 4, "slots": 6, "cost": "0.3", "seed": 11, "trials": 40},
        "mechanisms": ["add_on", "regret"],
        "cost_sweep": ["0.1", "0.3"],
        "output": "exp",
    }
    base.update(kw)
    return base


def test_money_str_forms():
    assert money_str(F("2.51")) == "2.51"
    assert money_str(F(100)) == "100"
    assert money_str(F(1, 3)) == "1/3"
    assert money_str(F(-5, 2)) == "-2.5"


def test_game_file_round_trip(tmp_path):
    game = OnlineAdditiveGame(
        Optimization(1, F(100)),
        SlotHorizon(3),
        (AdditiveOnlineBid(1, 1, 1, 3, (F("0.5"), F(0), F("1.25"))),),
    )
    path = tmp_path / "game.json"
    dump_game(game, path)
    assert load_game(path) == game
    assert game_from_dict(game_to_dict(game)) == game


def test_config_validation_errors():
    with pytest.raises(ConfigError, match="schema"):
        config_from_dict({"scenario": {}})
    with pytest.raises(ConfigError, match="scenario.family"):
        config_from_dict({"schema": 1, "scenario": {}})
    with pytest.raises(ConfigError, match=r"mechanisms\[0\]"):
        config_from_dict(config_dict(mechanisms=["subst_on", "regret"]))
    with pytest.raises(ConfigError, match=r"cost_sweep\[1\]"):
        config_from_dict(config_dict(cost_sweep=["0.1", "zorp"]))
    with pytest.raises(ConfigError, match="trials"):
        config_from_dict(config_dict(scenario={"family": "collab_size", "trials": 0}))


def test_cost_sweep_range_form():
    cfg = config_from_dict(config_dict(cost_sweep={"start": "0.1", "stop": "0.3", "step": "0.1"}))
    assert cfg.cost_sweep == (F("0.1"), F("0.2"), F("0.3"))


def test_run_experiment_deterministic(tmp_path):
    cfg = config_from_dict(config_dict())
    out1 = run_experiment(cfg, tmp_path / "a")
    out2 = run_experiment(cfg, tmp_path / "b")
    data1 = open(out1[0], "rb").read()
    data2 = open(out2[0], "rb").read()
    assert data1 == data2
    lines = data1.decode().strip().splitlines()
    assert lines[0].startswith("mechanism,cost,trials,mean_total_utility")
    assert len(lines) == 1 + 2 * 2  # two mechanisms x two cost points
    assert lines[1].split(",")[0] == "add_on"
    assert lines[1].split(",")[2] == "40"


def test_run_experiment_details_are_exact(tmp_path):
    cfg = config_from_dict(config_dict(details=True))
    paths = run_experiment(cfg, tmp_path)
    detail_lines = open(paths[1]).read().strip().splitlines()
    assert len(detail_lines) == 2 * 2 * 40
    row = json.loads(detail_lines[0])
    assert set(row) == {"mechanism", "cost", "trial", "total_utility", "cloud_balance", "implemented"}
    num, den = row["total_utility"].split("/")
    int(num), int(den)


def test_cli_run_and_replay(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config_dict()))
    assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out[0].endswith("exp.csv")
    assert os.path.exists(out[0])

    game = OnlineAdditiveGame(
        Optimization(1, F(100)),
        SlotHorizon(3),
        (
            AdditiveOnlineBid(1, 1, 1, 1, (F(101),)),
            AdditiveOnlineBid(2, 1, 1, 3, (F(16), F(16), F(16))),
            AdditiveOnlineBid(3, 1, 2, 2, (F(26),)),
            AdditiveOnlineBid(4, 1, 2, 2, (F(26),)),
        ),
    )
    game_path = tmp_path / "game.json"
    dump_game(game, game_path)
    assert main(["replay", "--game", str(game_path), "--mechanism", "add_on"]) == 0
    out = capsys.readouterr().out
    assert "user 1 pays 100" in out
    assert "user 2 pays 25" in out
    assert "user 3 pays 25" in out and "user 4 pays 25" in out
    assert "cloud balance 75" in out

    # wrong mechanism for the game kind -> config error
    assert main(["replay", "--game", str(game_path), "--mechanism", "subst_on"]) == 2


def test_cli_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(config_dict(cost_sweep=["nope"])))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "cost_sweep[0]" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    capsys.readouterr()


def test_cli_verify_golden(capsys):
    assert main(["verify", "--suite", "golden_examples"]) == 0
    assert "PASS golden_examples" in capsys.readouterr().out


def test_cli_verify_catches_naive_mechanism(capsys):
    code = main(["verify", "--suite", "truthfulness", "--games", "5", "--mechanism", "naive_pay_bid"])
    assert code == 1
    out = capsys.readouterr().out
    assert "FAIL truthfulness" in out
    assert "game:" in out  # offending game serialized for replay


def test_verify_cost_recovery_small():
    assert run_suite("cost_recovery", seed=3, games=150) == []


def test_verify_degeneration_small():
    assert run_suite("degeneration", seed=3, games=60) == []


def test_verify_oracle_dominance_small():
    assert run_suite("oracle_dominance", seed=3, games=60) == []


def test_verify_multi_identity_small():
    assert run_suite("multi_identity", seed=3, games=25) == []


def test_verify_truthfulness_small():
    assert run_suite("truthfulness", seed=3, games=8) == []


def test_verify_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("bogus")


def test_parallel_sweep_matches_sequential():
    from optshare.harness import sweep

    spec = ScenarioSpec(family="collab_size", users=4, slots=6, cost=F("0.3"), seed=5, trials=30)
    points = (F("0.2"), F("0.4"))
    seq = sweep(spec, ("add_on", "regret"), points, trials=30, workers=1)
    par = sweep(spec, ("add_on", "regret"), points, trials=30, workers=2)
    for key, cell in seq.items():
        assert par[key].sum_u == cell.sum_u
        assert par[key].sum_b == cell.sum_b
        assert par[key].implemented == cell.implemented


def test_workers_env_respected(tmp_path, monkeypatch):
    monkeypatch.setenv("OPTSHARE_WORKERS", "not-a-number")
    from optshare.harness import default_workers

    with pytest.raises(ConfigError):
        default_workers()
    monkeypatch.setenv("OPTSHARE_WORKERS", "2")
    assert default_workers() == 2
    monkeypatch.delenv("OPTSHARE_WORKERS")
    assert default_workers() == 1
