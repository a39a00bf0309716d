import json
from fractions import Fraction

import pytest
from hypothesis import given, settings

from reprep.cli import run
from reprep.fixtures import chsh, plant8
from reprep.io import (
    cg_from_dict,
    cg_to_dict,
    dumps,
    game_from_dict,
    game_to_dict,
    rep_from_dict,
    rep_strategy_from_dict,
    rep_strategy_to_dict,
    rep_to_dict,
    save_json,
    to_jsonable,
)
from reprep.errors import InvalidGame
from reprep.nogo import trivial_strategy
from reprep.powering import compose, repetition_code
from reprep.repetition import full_power
from strategies import games


# ---------------------------------------------------------------- formats


@settings(max_examples=50)
@given(games())
def test_game_round_trip(g):
    d = game_to_dict(g)
    assert game_from_dict(json.loads(json.dumps(d))) == g


def test_rational_encoding():
    assert to_jsonable(Fraction(3, 4)) == {"num": 3, "den": 4}
    assert dumps({"b": Fraction(1, 2), "a": 1}) == '{"a":1,"b":{"den":2,"num":1}}'


def test_bad_format_rejected():
    with pytest.raises(InvalidGame):
        game_from_dict({"format": "tpg-0"})
    with pytest.raises(InvalidGame):
        game_from_dict({"format": "tpg-1", "num_x": 1})


def test_rep_round_trip(tmp_path):
    H = full_power(chsh(), 2)
    assert rep_from_dict(json.loads(json.dumps(rep_to_dict(H)))) == H
    save_json(tmp_path / "base.json", game_to_dict(chsh()))
    by_ref = {"format": "tpg-rep-1", "base": "base.json", "k": 2, "tuples": [list(t) for t in H.tuples]}
    assert rep_from_dict(by_ref, tmp_path) == H
    psi = trivial_strategy(chsh(), H, 1)
    assert rep_strategy_from_dict(json.loads(json.dumps(rep_strategy_to_dict(psi)))) == psi


def test_cg_round_trip():
    g = compose(chsh(), repetition_code(2, 2)).graph
    assert cg_from_dict(json.loads(json.dumps(cg_to_dict(g)))) == g


# ---------------------------------------------------------------- CLI


@pytest.fixture
def chsh_file(tmp_path):
    path = tmp_path / "chsh.json"
    save_json(path, game_to_dict(chsh()))
    return str(path)


def test_value_chsh(chsh_file, capsys):
    assert run(["value", "--in", chsh_file]) == 0
    assert capsys.readouterr().out.strip() == "3/4"


def test_fortify_chsh_fails(chsh_file, capsys):
    assert run(["fortify", "--in", chsh_file, "--delta", "1/2", "--eps", "1/10"]) == 1
    out = capsys.readouterr().out
    assert "S=[0] T=[0]" in out and "FAIL" in out


def test_fortify_sampled_not_refuted(tmp_path, capsys):
    assert run(["fortify", "--fixture", "all-full", "--delta", "1/2", "--eps", "1/10", "--mode", "sampled", "--samples", "20"]) == 0
    assert "not refuted" in capsys.readouterr().out


def test_bounds(capsys, tmp_path):
    out = tmp_path / "b.json"
    assert run(["bounds", "--z", "4", "--eps", "1/100", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "94/12800" in text and "9108/10100" in text
    d = json.loads(out.read_text())
    assert d["class_fraction"] == {"num": 47, "den": 6400}


def test_decimal_rejected(capsys):
    assert run(["bounds", "--z", "4", "--eps", "0.01"]) == 2


def test_usage_errors(capsys):
    assert run([]) == 2
    assert run(["value"]) == 2
    assert run(["value", "--in", "/nonexistent.json"]) == 2
    assert run(["bounds", "--z", "4", "--eps", "1/10"]) == 2


def test_cap_exceeded_exit(chsh_file, monkeypatch, capsys):
    assert run(["--cap-power", "10", "repeat", "--in", chsh_file, "--k", "2"]) == 3
    assert run(["repeat", "--in", chsh_file, "--k", "2"]) == 0
    monkeypatch.setenv("REPREP_CAP_OVERRIDE", "4")
    assert run(["--cap-power", "10000", "repeat", "--in", chsh_file, "--k", "2"]) == 3


def test_repeat_and_marginals(chsh_file, tmp_path, capsys):
    rep = tmp_path / "h.json"
    assert run(["repeat", "--in", chsh_file, "--k", "2", "--scheme", "permutation-union", "--z", "3", "--seed", "7", "--out", str(rep)]) == 0
    assert run(["marginals", "--in", str(rep)]) == 0
    d = json.loads(rep.read_text())
    d["tuples"] = d["tuples"][:1]
    rep.write_text(json.dumps(d))
    assert run(["marginals", "--in", str(rep)]) == 1


def test_gen_random_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(["gen-random", "--t", "6", "--d", "3", "--seed", "42", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert run(["value", "--in", str(a)]) == 0
    assert capsys.readouterr().out.strip().endswith("13/18")


def test_mix_check(tmp_path, capsys):
    p = tmp_path / "g.json"
    run(["gen-random", "--t", "6", "--d", "3", "--seed", "42", "--out", str(p)])
    assert run(["mix-check", "--in", str(p), "--delta", "1/3", "--eta", "1/4"]) == 1
    assert run(["mix-check", "--in", str(p), "--delta", "1/3", "--eta", "3/2"]) == 0
    assert run(["mix-check", "--fixture", "chsh", "--delta", "1/2", "--eta", "1/4"]) == 0


def test_compose_power_project(chsh_file, tmp_path, capsys):
    cg = tmp_path / "cg.json"
    assert run(["compose", "--in", chsh_file, "--out", str(cg)]) == 0
    assert run(["power", "--in", str(cg), "--t", "2"]) == 0
    out = capsys.readouterr().out
    assert "bits powered" in out
    assert run(["project", "--in", chsh_file, "--search", "500"]) == 0
    assert "3/4" in capsys.readouterr().out


def test_nogo_experiment_exit_codes(capsys):
    assert run(["nogo-experiment", "--fixture", "plant8", "--k", "2", "--eps", "1/100", "--gamma", "1/2", "--emb", "planted"]) == 1
    assert "FORTIFICATION_VIOLATED" in capsys.readouterr().out
    assert run(["nogo-experiment", "--fixture", "all-full", "--k", "2", "--eps", "1/100"]) == 1
    assert "HYPOTHESES_UNMET" in capsys.readouterr().out


def test_nogo_extract(tmp_path, capsys):
    g = plant8()
    H = full_power(g, 2)
    save_json(tmp_path / "g.json", game_to_dict(g))
    save_json(tmp_path / "h.json", rep_to_dict(H))
    fx = [[x % 2, x] for x in range(8)]
    save_json(tmp_path / "emb.json", {"fX": fx, "fY": fx, "i": 2})
    argv = ["nogo-extract", "--in", str(tmp_path / "g.json"), "--rep", str(tmp_path / "h.json"),
            "--emb", str(tmp_path / "emb.json"), "--s", "1", "--eps", "1/100"]
    assert run(argv) == 0
    assert "M_s" in capsys.readouterr().out
    save_json(tmp_path / "emb.json", {"fX": [[x, x] for x in range(8)], "fY": [[x, x] for x in range(8)], "i": 2})
    assert run(argv) == 1  # diagonal embedding is not robust: refuted


def test_concentration_cli(capsys):
    assert run(["concentration", "--t", "6", "--d", "3", "--rows", "6", "--cols", "6", "--rho", "1/10", "--trials", "20"]) == 0
    assert "0/20" in capsys.readouterr().out


def test_campaign_cli(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"kind": "random-game", "trials": 2, "seed": 1}))
    assert run(["campaign", "--config", str(cfg), "--out", str(tmp_path / "o.jsonl")]) == 0
    cfg.write_text("{not json")
    assert run(["campaign", "--config", str(cfg)]) == 2
    cfg.write_text(json.dumps({"kind": "nope", "trials": 1, "seed": 0}))
    assert run(["campaign", "--config", str(cfg)]) == 2
