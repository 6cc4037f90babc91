"""Global types with a cursor: every step can be undone, and going back restores the type."""
from hypothesis import given, settings

from revchor.globalsem import (MidEx, global_backward, global_forward, global_reachable,
                               is_finished, plug, start)
from revchor.types import GChoice, GEnd, GExchange, GRec, GVar, NAT, STR

from test_types import global_types


def test_exchange_takes_two_steps_each_way():
    g = GExchange("A", "B", NAT, GEnd())
    (lab1, h1), = global_forward(start(g))
    assert lab1.rule == "FVal1" and isinstance(h1.focus, MidEx)
    (lab2, h2), = global_forward(h1)
    assert lab2.rule == "FVal2" and is_finished(h2)
    (back, h3), = global_backward(h2)
    assert back.rule == "BVal2" and h3 == h1
    (back, h4), = global_backward(h3)
    assert back.rule == "BVal1" and h4 == start(g)


def test_choice_offers_each_label():
    g = GChoice("A", "B", (("ok", GEnd()), ("quit", GEnd())))
    labs = [lab.label for lab, _ in global_forward(start(g))]
    assert labs == ["ok", "quit"]


def test_recursion_refolds_when_going_back():
    g = GRec("X", GExchange("A", "B", NAT, GVar("X")))
    h = start(g)
    for _ in range(4):
        (_, h), = global_forward(h)
    assert plug(h) == g
    for _ in range(4):
        (_, h), = global_backward(h)
    assert h == start(g)


def test_reachable_grows_with_depth():
    g = GExchange("A", "B", NAT, GExchange("B", "A", STR, GEnd()))
    sizes = [len(global_reachable(g, d)) for d in range(6)]
    assert sizes == [1, 2, 3, 4, 5, 5]


@settings(max_examples=200, deadline=None)
@given(global_types())
def test_every_step_has_its_inverse(g):
    for h in global_reachable(g, 6):
        for lab, h2 in global_forward(h) + global_backward(h):
            assert (lab.inverse(), h) in global_backward(h2) + global_forward(h2)


@settings(max_examples=200, deadline=None)
@given(global_types())
def test_plug_forgets_the_cursor(g):
    for h in global_reachable(g, 5):
        assert plug(h) == g
