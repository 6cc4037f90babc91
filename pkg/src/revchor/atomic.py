"""Atomic semantics: a synchronisation and its undoing as single steps.

Every atomic step is built by composing decoupled steps, so the correspondence between the two
relations holds by construction wherever the composition is defined.
"""
from __future__ import annotations

from . import decoupled as dc
from .errors import StaleRedex
from .runtime import Config

ATOMIC_FORWARD = ("Init", "AC", "AS", "Beta", "Spawn")
ATOMIC_BACKWARD = ("RInit", "RAC", "RAS", "RBeta", "RSpawn")
ATOMIC_RULES = ATOMIC_FORWARD + ATOMIC_BACKWARD
INVERSE = {"AC": "RAC", "AS": "RAS", "Init": "RInit", "Beta": "RBeta", "Spawn": "RSpawn"}
INVERSE.update({v: k for k, v in INVERSE.items()})

# the decoupled pieces each atomic rule is made of
COMPOSITION = {"AC": ("Out", "In"), "AS": ("Sel", "Bra"),
               "RAC": ("RollS", "RIn", "ROut"), "RAS": ("RollC", "RBra", "RSel")}


def _sort_key(r: dc.Redex):
    return (ATOMIC_RULES.index(r.rule), r.session, r.subjects, r.label or "", r.locs)


def _future(m: Config, session: str):
    q = m.queue(session)
    return q.future if q else None


def _sync_forward(m: Config, send_fn, recv_fn, rule: str) -> list:
    out = []
    for r1, n1 in send_fn(m):
        sender = r1.subjects[0]
        for r2, n2 in recv_fn(n1):
            if r2.session != r1.session:
                continue
            if _future(n2, r1.session) != _future(m, r1.session):
                continue  # the receive consumed some other message
            red = dc.Redex(rule, r1.session, (sender, r2.subjects[0]), r1.label, r1.locs + r2.locs)
            out.append((red, n2))
    return out


def _sync_backward(m: Config, roll_fn, undo_in, undo_out, rule: str) -> list:
    out = []
    for r0, n1 in roll_fn(m):
        receiver, sender = r0.subjects
        for r1, n2 in undo_in(n1):
            if r1.session != r0.session or r1.subjects != (receiver,):
                continue
            for r2, n3 in undo_out(n2):
                if r2.session != r0.session or r2.subjects != (sender,):
                    continue
                if _future(n3, r0.session) != _future(m, r0.session):
                    continue
                if any(mon.full for mon in n3.monitors() if mon.session == r0.session
                       and mon.role in (sender, receiver)):
                    continue
                red = dc.Redex(rule, r0.session, (sender, receiver), r0.label, r2.locs + r1.locs)
                out.append((red, n3))
    return out


def _shared(m: Config, names) -> list:
    wanted = set(names)
    return [(r, n) for r, n in dc.steps(m) if r.rule in wanted]


def atomic_forward(m: Config) -> list:
    steps = (_shared(m, ("Init", "Beta", "Spawn"))
             + _sync_forward(m, dc._out, dc._in, "AC")
             + _sync_forward(m, dc._sel, dc._bra, "AS"))
    return sorted(steps, key=lambda rs: _sort_key(rs[0]))


def atomic_backward(m: Config) -> list:
    steps = (_shared(m, ("RInit", "RBeta", "RSpawn"))
             + _sync_backward(m, lambda c: dc._rolls(c, False), dc._rin, dc._rout, "RAC")
             + _sync_backward(m, lambda c: dc._rolls(c, True),
                              lambda c: dc._undo_choice(c, "&"), lambda c: dc._undo_choice(c, "+"), "RAS"))
    return sorted(steps, key=lambda rs: _sort_key(rs[0]))


def atomic_steps(m: Config, direction: str = "both") -> list:
    if direction == "fwd":
        return atomic_forward(m)
    if direction == "bwd":
        return atomic_backward(m)
    return atomic_forward(m) + atomic_backward(m)


def enumerate_atomic(m: Config, direction: str = "both") -> list:
    return [r for r, _ in atomic_steps(m, direction)]


def apply_atomic(m: Config, r: dc.Redex) -> Config:
    for red, n in atomic_steps(m, "fwd" if r.rule in ATOMIC_FORWARD else "bwd"):
        if red == r:
            return n
    raise StaleRedex(f"{r} is not enabled")


def explore_atomic(m0: Config, depth: int, direction: str = "both", budget: int | None = None) -> dc.LTS:
    return dc.explore(m0, depth, step_fn=lambda m: atomic_steps(m, direction), budget=budget)


def decompose(rule: str) -> tuple:
    """The decoupled rules an atomic rule stands for (a shared rule stands for itself)."""
    return COMPOSITION.get(rule, (rule,))
