"""Well-formedness, queue equivalence, implementation of global types, and the barbed game."""
from collections import deque

import pytest
from hypothesis import given, settings, strategies as st

from revchor import decoupled as dc
from revchor.cli import Stepper
from revchor.conformance import (WfContext, bf_bisimilar, check_correspondence, check_wf_config,
                                 check_wf_process, check_wf_running, check_wf_unit, implements,
                                 implements_witness, initially_implements, queue_equiv)
from revchor.errors import NotFirstOrder
from revchor.globalsem import global_forward, start
from revchor.history import initial
from revchor.runtime import (NIL, Const, Endpoint, Input, NameVar, Output, ProcVar, Rec, Select,
                             StackEntry, VarRef)
from revchor.syntax import load
from revchor.types import LEnd, LRec, LRecv, LSend, LVar, NAT, project


def run(m, script, atomic=False):
    st_ = Stepper(m, atomic)
    for cmd in script:
        st_.take(cmd)
    return st_.current


# ------------------------------------------------------------ processes against local types

def test_nil_implements_end_only():
    assert check_wf_process(None, NIL, "x", LEnd())
    assert not check_wf_process(None, NIL, "x", LSend("q", NAT, LEnd()))


def test_output_value_must_match_payload():
    t = LSend("q", NAT, LEnd())
    assert check_wf_process(None, Output(NameVar("x"), Const(3), NIL), "x", t)
    assert not check_wf_process(None, Output(NameVar("x"), Const("three"), NIL), "x", t)
    assert not check_wf_process(None, Output(NameVar("y"), Const(3), NIL), "x", t)


def test_input_binds_its_variable():
    t = LRecv("q", NAT, LSend("q", NAT, LEnd()))
    echo = Input(NameVar("x"), "v", Output(NameVar("x"), VarRef("v"), NIL))
    assert check_wf_process(None, echo, "x", t)
    wrong = Input(NameVar("x"), "v", Output(NameVar("x"), VarRef("w"), NIL))
    assert not check_wf_process(None, wrong, "x", t)


def test_recursive_process_against_recursive_type():
    t = LRec("X", LSend("q", NAT, LVar("X")))
    p = Rec("Y", Output(NameVar("x"), Const(1), ProcVar("Y")))
    assert check_wf_process(WfContext(), p, "x", t)


def test_selection_offers_exactly_the_type_labels():
    t = project(load("buyer_seller").globals["G"], "B")
    while not hasattr(t, "branches"):
        t = t.cont
    both = Select(NameVar("y"), (("ok", Output(NameVar("y"), Const("addr"),
                                                 Input(NameVar("y"), "d", NIL))), ("quit", NIL)))
    only = Select(NameVar("y"), (("quit", NIL),))
    assert check_wf_process(None, both, "y", t)
    assert not check_wf_process(None, only, "y", t)


@pytest.mark.parametrize("name", ["buyer_seller", "three_buyer_prefix", "four_party", "relay"])
def test_bundled_first_order_services_are_well_formed(name):
    assert all(check_wf_unit(load(name)).values())


def test_thunk_passing_is_outside_the_fragment():
    with pytest.raises(NotFirstOrder):
        check_wf_unit(load("three_buyer"))


# ------------------------------------------------------------ threads against histories

def test_untouched_thread_reduces_to_the_process_check():
    svc = next(s for s in load("buyer_seller").services if s.role == "B")
    assert check_wf_config((), svc.body, initial(svc.annot), svc.var)


def test_mid_protocol_seller_is_well_formed():
    m = run(load("buyer_seller").initial_config(), ["init", "out@B", "in@S", "out@S", "in@B"])
    seller = next(r for r in m.running() if r.role == "S")
    mon = m.monitor(seller.session, "S")
    assert len(mon.history.frames) == 2
    assert check_wf_config(seller.stack, seller.body, mon.history, Endpoint(seller.session, "S"))


def test_missing_choice_frame_is_not_well_formed():
    m = run(load("buyer_seller").initial_config(),
            ["init", "out@B", "in@S", "out@S", "in@B", "sel@B:ok"])
    buyer = next(r for r in m.running() if r.role == "B")
    mon = m.monitor(buyer.session, "B")
    ep = Endpoint(buyer.session, "B")
    assert check_wf_config(buyer.stack, buyer.body, mon.history, ep)
    assert not check_wf_config((), buyer.body, mon.history, ep)
    extra = buyer.stack + (StackEntry("+", ep, (("quit", NIL),), ("ok", "quit")),)
    assert not check_wf_config(extra, buyer.body, mon.history, ep)


@pytest.mark.parametrize("name", ["buyer_seller", "three_buyer_prefix", "four_party"])
def test_well_formedness_is_preserved_by_reduction(name):
    lts = dc.explore(load(name).initial_config(), 10)
    for m in lts.states:
        assert all(check_wf_running(m).values()), m


# ------------------------------------------------------------ queues

ROLES = "ABC"
triples = st.tuples(st.sampled_from(ROLES), st.sampled_from(ROLES), st.integers(0, 1))


def _swaps(h):
    seen = {h}
    todo = deque([h])
    while todo:
        cur = todo.popleft()
        for i in range(len(cur) - 1):
            (p1, q1, _), (p2, q2, _) = cur[i], cur[i + 1]
            if p1 != p2 and q1 != q2:
                nxt = cur[:i] + (cur[i + 1], cur[i]) + cur[i + 2:]
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
    return seen


def test_queue_equivalence_examples():
    assert queue_equiv([("A", "S", 1), ("B", "C", 2)], [("B", "C", 2), ("A", "S", 1)])
    assert queue_equiv([("A", "S", 1)], [("A", "S", 1)])
    assert not queue_equiv([("A", "S", 1), ("A", "C", 2)], [("A", "C", 2), ("A", "S", 1)])


@settings(max_examples=300, deadline=None)
@given(st.lists(triples, max_size=5).map(tuple), st.lists(triples, max_size=5).map(tuple))
def test_queue_equivalence_matches_brute_force(h1, h2):
    assert queue_equiv(h1, h2) == (h2 in _swaps(h1))


@settings(max_examples=200, deadline=None)
@given(st.lists(triples, max_size=5).map(tuple))
def test_queue_equivalence_keeps_each_pair_in_order(h):
    for h2 in _swaps(h):
        assert queue_equiv(h, h2)
        for p in ROLES:
            for q in ROLES:
                assert [m for m in h if m[:2] == (p, q)] == [m for m in h2 if m[:2] == (p, q)]


# ------------------------------------------------------------ implements

@pytest.fixture(scope="module")
def bs():
    unit = load("buyer_seller")
    m = unit.initial_config()
    return unit.globals["G"], m, run(m, ["init"])


def test_set_up_session_initially_implements(bs):
    g, m, m1 = bs
    assert initially_implements(m1, g)
    assert not initially_implements(m, g)
    assert implements(m1, start(g))


def test_running_session_implements_a_moved_history(bs):
    g, _, m1 = bs
    (_, h1), = global_forward(start(g))
    n = run(m1, ["out@B", "in@S"])
    w = implements_witness(n, h1, depth=6)
    assert w is not None and w.origin == m1
    assert len(w.provenance) == 2 and len(w.global_path) == 1


def test_other_protocol_does_not_implement(bs):
    g, _, _ = bs
    relay = run(load("relay").initial_config(), ["init"])
    assert not implements(relay, start(g), depth=4)


# ------------------------------------------------------------ global/local correspondence

def test_end_only_protocol_is_vacuous():
    src = ("global G = A -> B : <nat>. end;\nglobal E = end;\n"
           "system { l1: request a(x) role G.A = x!<1>. 0; l2: accept a(y) role G.B = y?(v). 0; }")
    from revchor.syntax import parse
    rep = check_correspondence(parse(src).initial_config(), 0)
    assert rep.origins == 1 and rep.transitions_checked == 0 and rep.ok


def test_forward_transitions_fail_only_after_a_redo():
    """Forward transitions are matched one to one, except after an exchange was rolled back and
    then redone: the sender's monitor keeps its full tag and cannot output again."""
    rep = check_correspondence(load("four_party").initial_config(), 8, part_b=False, limit=10_000)
    forward = [v for v in rep.violations if v["transition"].startswith("F")]
    assert forward
    for v in forward:
        assert any(step.startswith("B") for step in v["trail"])


def test_shallow_run_reports_partial_coverage():
    rep = check_correspondence(load("relay").initial_config(), 1)
    assert rep.pairs == 2 and rep.transitions_checked == 1 and rep.ok


def test_output_in_flight_cannot_be_undone_alone():
    """An exchange whose message has not been read yet can go back globally, but no reduction
    rolls back a lone output: the roll step needs both sides to have acted."""
    rep = check_correspondence(load("buyer_seller").initial_config(), 2, part_b=False)
    (v,) = rep.violations
    assert v["transition"] == "BVal1(B,S)" and v["matches"] == []


# ------------------------------------------------------------ back-and-forth barbed game

def test_configuration_is_bisimilar_to_itself(bs):
    _, _, m1 = bs
    assert bf_bisimilar(m1, m1, 3)


def test_pending_output_is_bisimilar_to_its_source(bs):
    _, _, m1 = bs
    n = run(m1, ["out@B"])
    assert bf_bisimilar(m1, n, 3)


def test_weak_moves_reach_back_to_the_start(bs):
    """Weak answers may also go backwards, so a finished run can still show the initial barbs."""
    _, _, m1 = bs
    lts = dc.explore(m1, 20, "fwd")
    done = next(m for m in lts.states if not dc.forward_steps(m))
    assert bf_bisimilar(m1, done, 2)


def test_different_protocols_are_told_apart(bs):
    _, _, m1 = bs
    relay = run(load("relay").initial_config(), ["init"])
    assert not bf_bisimilar(m1, relay, 1)
