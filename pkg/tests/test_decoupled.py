"""Decoupled reductions: the worked three-buyer run, rollback, and state-space regressions."""
import pytest

from revchor import decoupled as dc
from revchor.cli import Stepper
from revchor.errors import StaleRedex
from revchor.history import facing
from revchor.runtime import Const, SharedName, is_stable, show_config
from revchor.types import LEnd


def run(m, script):
    st = Stepper(m, atomic=False)
    for cmd in script:
        st.take(cmd)
    return st.current


@pytest.fixture
def m1(m0):
    return run(m0("three_buyer"), ["init"])


def test_init_opens_one_session(m1):
    assert m1.names == ("s0",)
    assert len(m1.monitors()) == 4 and len(m1.running()) == 4
    assert all(not mon.history.frames for mon in m1.monitors())
    assert [str(r) for r in dc.enumerate_forward(m1) + dc.enumerate_backward(m1)] == \
        ["Out@A", "RInit@l1,l2,l3,l4"]


def test_seller_receives_the_title(m1):
    m3 = run(m1, ["out@A", "in@S"])
    q = m3.queue("s0")
    assert [m.triple() for m in q.past] == [("A", "S", Const("Logicomix"))]
    assert q.future == ()
    seller = m3.monitor("s0", "S")
    assert seller.store.as_dict() == {"x": SharedName("d"), "t": Const("Logicomix")}
    assert seller.tracked == ("x", "t")
    assert is_stable(m3)


def test_undoing_the_exchange_restores_the_state(m1):
    m3 = run(m1, ["out@A", "in@S"])
    m4 = run(m3, ["rollS"])
    assert {mon.role for mon in m4.monitors() if mon.full} == {"A", "S"}
    assert not is_stable(m4)
    m6 = run(m4, ["rIn@S", "rOut@A"])
    assert m6 == m1
    assert show_config(m6) == show_config(m1)


def test_undo_input_and_output_in_either_interleaving(m1):
    m4 = run(m1, ["out@A", "in@S", "rollS", "rIn@S"])
    # the output can be undone now, or the input redone first
    names = [str(r) for r in dc.enumerate_forward(m4) + dc.enumerate_backward(m4)]
    assert "ROut@A" in names and "In@S" in names


def test_session_teardown_returns_the_services(m0, m1):
    back = run(m1, ["rInit"])
    assert back == m0("three_buyer")


def test_stale_redex_is_rejected(m1):
    (r, _), = [x for x in dc.forward_steps(m1) if x[0].rule == "Out"]
    m2 = dc.apply(m1, r)
    with pytest.raises(StaleRedex):
        dc.apply_forward(m2, r)


def test_thunk_is_delegated_and_run(m0):
    lts = dc.explore(m0("three_buyer"), 60, "fwd")
    assert {r.rule for _, _, r in lts.edges} == {"Init", "Out", "In", "Beta"}
    done = [m for m in lts.states if not dc.forward_steps(m)
            and all(isinstance(facing(mon.history), LEnd) for mon in m.monitors())]
    assert len(done) == 1


def test_three_buyer_can_block_forward(m0):
    """With a single queue where messages to the same receiver never overtake each other, Alice's
    share can reach Bob before the Seller's quote, and Bob waits for the quote first. Neither
    message has been read, so no exchange can be rolled back either."""
    lts = dc.explore(m0("three_buyer"), 60, "fwd")
    stuck = [m for m in lts.states if not dc.forward_steps(m)
             and not all(isinstance(facing(mon.history), LEnd) for mon in m.monitors())]
    assert len(stuck) == 1
    fut = [(x.sender, x.receiver) for x in stuck[0].queue("s0").future]
    assert fut == [("A", "B"), ("S", "B")]
    assert dc.backward_steps(stuck[0]) == []


# regression values: (states, edges, terminal states) of the forward decoupled state space
FORWARD_SPACE = {"three_buyer": (33, 40, 2), "buyer_seller": (15, 15, 2), "four_party": (26, 41, 1),
                 "relay": (8, 7, 1), "three_buyer_prefix": (23, 27, 2)}


@pytest.mark.parametrize("name", sorted(FORWARD_SPACE))
def test_forward_state_space_regression(m0, name):
    lts = dc.explore(m0(name), 100, "fwd")
    terminal = sum(1 for i in range(len(lts.states)) if not lts.successors(i))
    assert (len(lts.states), len(lts.edges), terminal) == FORWARD_SPACE[name]


def test_exploration_is_deterministic(m0):
    a = dc.explore(m0("buyer_seller"), 6).to_json()
    b = dc.explore(m0("buyer_seller"), 6).to_json()
    assert a == b


def test_state_budget(m0, monkeypatch):
    monkeypatch.setenv("REVCHOR_STATE_BUDGET", "5")
    from revchor.errors import BudgetExhausted
    with pytest.raises(BudgetExhausted):
        dc.explore(m0("four_party"), 10)
