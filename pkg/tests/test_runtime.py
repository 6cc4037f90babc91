from collections import deque

import pytest
from hypothesis import given, settings, strategies as st

from revchor.errors import DuplicateBinding, UnboundVariable
from revchor.runtime import (Call, Config, Const, Message, Store, VarRef, barbs, canonical_queue,
                             _rename_node_sessions, eval_value, is_stable, normalize, show_config,
                             state_hash, store_reverse, store_update)

ROLES = "ABC"
messages = st.builds(Message, st.sampled_from(ROLES), st.sampled_from(ROLES), st.integers(0, 2).map(Const))
queues = st.lists(messages, max_size=6).map(tuple)


def _swap_class(h):
    """Every queue reachable from h by swapping adjacent independent messages (brute force)."""
    seen = {h}
    todo = deque([h])
    while todo:
        cur = todo.popleft()
        for i in range(len(cur) - 1):
            a, b = cur[i], cur[i + 1]
            if a.sender != b.sender and a.receiver != b.receiver:
                nxt = cur[:i] + (b, a) + cur[i + 2:]
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
    return seen


@settings(max_examples=300, deadline=None)
@given(queues)
def test_canonical_queue_is_constant_on_swap_classes(h):
    cls = _swap_class(h)
    forms = {canonical_queue(x) for x in cls}
    assert len(forms) == 1
    assert forms.pop() in cls


@settings(max_examples=300, deadline=None)
@given(queues, queues)
def test_canonical_queue_separates_classes(h1, h2):
    same = h2 in _swap_class(h1)
    assert same == (canonical_queue(h1) == canonical_queue(h2))


def test_store_binds_once():
    s = store_update(Store(), "x", Const(1))
    with pytest.raises(DuplicateBinding):
        store_update(s, "x", Const(2))
    assert store_reverse(s, "x") == Store()


def test_eval_resolves_through_store():
    s = Store.of({"t": Const("Logicomix")})
    assert eval_value(Call("price", (VarRef("t"),)), s) == Call("price", (Const("Logicomix"),))
    with pytest.raises(UnboundVariable):
        eval_value(VarRef("u"), s)


def test_initial_configuration_is_stable_without_barbs(m0):
    m = m0("buyer_seller")
    assert is_stable(m) and barbs(m) == set()
    assert normalize(m) == m


def test_session_names_do_not_matter(m0):
    from revchor import decoupled as dc
    m1 = dc.forward_steps(m0("three_buyer"))[0][1]
    renamed = Config(("zz",), tuple(_rename_node_sessions(n, {"s0": "zz"}) for n in m1.nodes))
    assert "zz" in show_config(renamed)
    assert normalize(renamed) == m1
    assert state_hash(normalize(renamed)) == state_hash(m1)


def test_show_config_of_empty():
    assert show_config(normalize(Config((), ()))) == "0"
