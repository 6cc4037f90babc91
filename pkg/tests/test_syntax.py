import pytest

from revchor.errors import SourceError
from revchor.runtime import Service, SharedName
from revchor.syntax import BUNDLED, bundled_source, load, parse, show_source
from revchor.types import GChoice, participants


@pytest.mark.parametrize("name", BUNDLED)
def test_print_then_parse_round_trips(name):
    unit = load(name)
    again = parse(show_source(unit))
    assert again.globals == unit.globals
    assert again.services == unit.services
    assert show_source(again) == show_source(unit)


def test_empty_file_has_no_system():
    with pytest.raises(SourceError, match="no system declared"):
        parse("")


def test_syntax_error_has_position():
    with pytest.raises(SourceError) as e:
        parse("global G = A -> B : <nat> end;")
    assert e.value.line == 1 and e.value.column > 1


def test_unknown_role_rejected():
    src = "global G = A -> B : <nat>. end;\nsystem { l1: request a(x) role G.Z = 0; }"
    with pytest.raises(SourceError, match="not a participant"):
        parse(src)


def test_unknown_global_rejected():
    with pytest.raises(SourceError, match="unknown global"):
        parse("system { l1: request a(x) role H.A = 0; }")


def test_one_request_per_shared_name():
    src = ("global G = A -> B : <nat>. end;\n"
           "system { l1: accept a(x) role G.A = 0; l2: accept a(y) role G.B = 0; }")
    with pytest.raises(SourceError, match="exactly one request"):
        parse(src)


def test_bad_alias_kind():
    with pytest.raises(SourceError, match="must alias"):
        parse("type money = float;\nsystem { }")


def test_buyer_seller_shape():
    unit = load("buyer_seller")
    g = unit.globals["G"]
    assert participants(g) == {"B", "S"}
    assert len(unit.services) == 2
    t = g
    while not isinstance(t, GChoice):
        t = t.cont
    assert t.labels == ("ok", "quit")


def test_three_buyer_has_thunk_and_shared_names():
    unit = load("three_buyer")
    assert {s.loc for s in unit.services} == {"l1", "l2", "l3", "l4"}
    bob = next(s for s in unit.services if s.role == "B")
    assert "Abstraction" in repr(bob.body)
    assert all(isinstance(s, Service) for s in unit.services)


def test_free_shared_names_resolve():
    src = ("global G = A -> B : <nat>. end;\n"
           "system { l1: request a(x) role G.A = x!<a>. 0; l2: accept a(y) role G.B = y?(v). 0; }")
    unit = parse(src)
    req = next(s for s in unit.services if s.kind == "request")
    assert req.body.value == SharedName("a")


def test_bundled_sources_are_text():
    for name in BUNDLED:
        assert "system" in bundled_source(name)
