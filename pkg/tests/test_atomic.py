"""Atomic steps: composition of decoupled steps, exact inverses, and the size of the space."""
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from revchor import decoupled as dc
from revchor.atomic import (ATOMIC_FORWARD, INVERSE, apply_atomic, atomic_steps, decompose,
                            enumerate_atomic, explore_atomic)
from revchor.runtime import is_stable
from revchor.syntax import load
from revchor.types import GEnd


def test_decomposition_table():
    assert decompose("AC") == ("Out", "In")
    assert decompose("RAS") == ("RollC", "RBra", "RSel")
    assert decompose("Init") == ("Init",)
    assert all(INVERSE[INVERSE[r]] == r for r in INVERSE)


def test_exchange_is_out_then_in(m0):
    (_, m1), = atomic_steps(m0("three_buyer"))
    (ac, m3), = [x for x in atomic_steps(m1) if x[0].rule == "AC"]
    assert ac.subjects == ("A", "S")
    out = [n for r, n in dc.forward_steps(m1) if str(r) == "Out@A"][0]
    assert m3 == [n for r, n in dc.forward_steps(out) if str(r) == "In@S"][0]
    rac = [x for x in atomic_steps(m3) if x[0].rule == "RAC"]
    assert [n for _, n in rac] == [m1]


def test_choice_is_select_then_branch(m0):
    m = m0("buyer_seller")
    for rule in ("Init", "AC", "AC"):
        m = next(n for r, n in atomic_steps(m) if r.rule == rule)
    labels = sorted(r.label for r in enumerate_atomic(m) if r.rule == "AS")
    assert labels == ["ok", "quit"]
    quit_ = next(r for r in enumerate_atomic(m) if r.label == "quit")
    n = apply_atomic(m, quit_)
    back = [x for x in atomic_steps(n) if x[0].rule == "RAS"]
    assert [y for _, y in back] == [m]


def _exchanges(g):
    out = []
    while not isinstance(g, GEnd):
        out.append((g.sender, g.receiver))
        g = g.cont
    return out


def _downsets(exchanges):
    """Sets of exchanges that can have happened: prefixes of the orders that keep every
    participant's own exchanges in sequence (brute force over all permutations)."""
    n = len(exchanges)

    def respects(order):
        pos = {e: i for i, e in enumerate(order)}
        return all(pos[i] < pos[j] for i in range(n) for j in range(i + 1, n)
                   if set(exchanges[i]) & set(exchanges[j]))
    seen = set()
    for order in permutations(range(n)):
        if respects(order):
            for k in range(n + 1):
                seen.add(frozenset(order[:k]))
    return seen


@pytest.mark.parametrize("name", ["four_party", "relay", "three_buyer_prefix"])
def test_atomic_space_counts_causal_cuts(name):
    unit = load(name)
    g = next(iter(unit.globals.values()))
    expected = 1 + len(_downsets(_exchanges(g)))  # the services before set-up, then every cut
    lts = explore_atomic(unit.initial_config(), 50)
    assert len(lts.states) == expected
    assert all(is_stable(m) for m in lts.states)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["buyer_seller", "four_party", "relay", "three_buyer_prefix"]),
       st.lists(st.integers(0, 7), max_size=10))
def test_random_walks_retrace_exactly(name, picks):
    m = load(name).initial_config()
    path = [m]
    taken = []
    for k in picks:
        opts = atomic_steps(m)
        if not opts:
            break
        r, m = opts[k % len(opts)]
        taken.append(r)
        path.append(m)
    for r in reversed(taken):
        back = "bwd" if r.rule in ATOMIC_FORWARD else "fwd"
        prev = path[-2]
        assert any(r2.rule == INVERSE[r.rule] and n == prev for r2, n in atomic_steps(m, back))
        m = prev
        path.pop()
    assert m == load(name).initial_config()
