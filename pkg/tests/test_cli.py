import json

import pytest
from click.testing import CliRunner

from revchor.cli import main, replay
from revchor.syntax import load


@pytest.fixture
def cli():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)
    return invoke


def script(tmp_path, *steps):
    p = tmp_path / "steps.txt"
    p.write_text("\n".join(steps) + "\n")
    return p


def test_parse_echoes_source(cli):
    res = cli("parse", "buyer_seller")
    assert res.exit_code == 0 and "global G" in res.output


def test_project(cli):
    res = cli("project", "three_buyer", "--role", "C")
    assert res.output.strip() == "B?<share>. B?<{{end}}>. end"


def test_missing_file_is_input_error(cli):
    assert cli("parse", "/no/such/file.rc").exit_code == 3


def test_step_script_reaches_the_golden_state(cli, tmp_path):
    res = cli("step", "three_buyer", "--script", script(tmp_path, "init", "out@A", "in@S"), "--quiet")
    assert res.exit_code == 0
    assert "s0: ((A,S,'Logicomix') * e)" in res.output
    assert "[t->'Logicomix', x->d]" in res.output


def test_empty_script_echoes_the_initial_state(cli, tmp_path):
    res = cli("step", "buyer_seller", "--script", script(tmp_path, ""))
    assert "l1{ a!(x: G.S)" in res.output and "[0] Init@l1,l2" in res.output


def test_undo_in_both_granularities(cli, tmp_path):
    res = cli("step", "buyer_seller", "--atomic", "--script", script(tmp_path, "init", "ac", "undo"))
    assert "undone via RAC@B,S" in res.output
    res = cli("step", "buyer_seller", "--script", script(tmp_path, "init", "undo"))
    assert "undone via RInit@l1,l2" in res.output


def test_in_flight_send_is_not_undoable(cli, tmp_path):
    res = cli("step", "buyer_seller", "--script", script(tmp_path, "init", "out@B", "undo"))
    assert res.exit_code == 3 and "cannot be undone" in res.output


def test_explicit_rollback_reaches_the_start_of_the_session(cli, tmp_path):
    back = cli("step", "buyer_seller", "--quiet", "--script",
               script(tmp_path, "init", "out@B", "in@S", "rollS", "rIn@S", "rOut@B"))
    fresh = cli("step", "buyer_seller", "--quiet", "--script", script(tmp_path, "init"))
    assert back.exit_code == 0 and back.output == fresh.output


def test_unknown_step_is_reported(cli, tmp_path):
    res = cli("step", "buyer_seller", "--script", script(tmp_path, "init", "in@S"))
    assert res.exit_code == 3


def test_dumps_replay_and_repeat(cli, tmp_path):
    steps = script(tmp_path, "init", "out@A", "in@S", "rollS", "rIn@S")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cli("step", "three_buyer", "--script", steps, "--dump", a)
    cli("step", "three_buyer", "--script", steps, "--dump", b)
    assert a.read_bytes() == b.read_bytes()
    dump = json.loads(a.read_text())
    assert dump["schema"] == "revchor.trace/1" and len(dump["steps"]) == 5
    final = replay(load("three_buyer").initial_config(), dump)
    from revchor.runtime import state_hash
    assert state_hash(final) == dump["final"]["hash"]


def test_explore_writes_json_and_figure(cli, tmp_path):
    out, fig = tmp_path / "lts.json", tmp_path / "lts.png"
    res = cli("explore", "buyer_seller", "--depth", 4, "--json", out, "--figure", fig)
    assert res.exit_code == 0
    data = json.loads(out.read_text())
    assert data["schema"] == "revchor.lts/1" and data["states"][0]["depth"] == 0
    assert fig.read_bytes()[:4] == b"\x89PNG"


@pytest.mark.parametrize("prop,depth,code", [
    ("causal", 4, 0), ("loop", 0, 0), ("loop", 4, 0), ("square", 4, 0), ("theorem1", 4, 0),
    ("wf", 0, 0), ("correspondence", 6, 1)])
def test_check_exit_codes(cli, tmp_path, prop, depth, code):
    out = tmp_path / "r.json"
    res = cli("check", "buyer_seller", "--property", prop, "--depth", depth, "--json", out)
    assert res.exit_code == code
    assert json.loads(out.read_text())["property"] == prop


def test_check_higher_order_wf_exits_2(cli):
    res = cli("check", "three_buyer", "--property", "wf")
    assert res.exit_code == 2 and "not first-order" in res.output


def test_check_budget_exits_2(cli, monkeypatch):
    monkeypatch.setenv("REVCHOR_STATE_BUDGET", "3")
    assert cli("check", "four_party", "--property", "loop", "--depth", 5).exit_code == 2


def test_check_figure(cli, tmp_path):
    fig = tmp_path / "c.png"
    cli("check", "four_party", "--property", "square", "--depth", 3, "--json", tmp_path / "c.json",
        "--figure", fig)
    assert fig.stat().st_size > 0
