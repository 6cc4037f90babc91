"""Decoupled forward and backward reductions over configurations, and bounded exploration."""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import product

from .errors import StaleRedex, StateBudgetExceeded, UnboundVariable
from .history import (Committed, KeyMark, Prefix, SpawnMark, advance, facing, initial,
                      push_mark, retreat)
from .runtime import (NIL, Abstraction, Branch, Config, Endpoint, Input, Label, Message, Monitor,
                      NameVar, Nil, Output, Par, Queue, Reader, RunFun, Running, Select, Service,
                      SharedName, StackEntry, Store, THUNK_PARAM, can_lead, can_trail, eval_name,
                      eval_value, free_vars, is_stable, normalize, roles_in_queue, state_hash,
                      store_reverse, store_update, subst_channel, subst_name, unfold_head,
                      unsubst_endpoint, barbs)
from .types import (LBranch, LRecv, LSelect, LSend, participants, project, type_equal,
                    value_type_equal)

FORWARD_RULES = ("Init", "Out", "In", "Sel", "Bra", "Beta", "Spawn")
BACKWARD_RULES = ("RInit", "RollS", "RollC", "ROut", "RIn", "RBra", "RSel", "RBeta", "RSpawn")
RULES = FORWARD_RULES + BACKWARD_RULES

DEFAULT_STATE_BUDGET = 100_000


def state_budget() -> int:
    return int(os.environ.get("REVCHOR_STATE_BUDGET", DEFAULT_STATE_BUDGET))


@dataclass(frozen=True, slots=True)
class Redex:
    """One enabled rule instance. `subjects` are participants, or locations for Init/RInit."""
    rule: str
    session: str
    subjects: tuple
    label: str | None = None
    locs: tuple = ()

    @property
    def forward(self) -> bool:
        return self.rule in FORWARD_RULES

    def sort_key(self):
        return (RULES.index(self.rule), self.session, self.subjects, self.label or "", self.locs)

    def __str__(self):
        subj = ",".join(self.subjects)
        lab = f":{self.label}" if self.label else ""
        return f"{self.rule}@{subj}{lab}"


@lru_cache(maxsize=None)
def _projection(g, role):
    return project(g, role)


def _rebuild(m: Config, remove=(), add=(), names=()) -> Config:
    drop = set(id(n) for n in remove)
    nodes = [n for n in m.nodes if id(n) not in drop] + list(add)
    return normalize(Config(tuple(m.names) + tuple(names), tuple(nodes)))


def _fresh(prefix: str, taken: set) -> str:
    i = 0
    while f"{prefix}{i}" in taken:
        i += 1
    return f"{prefix}{i}"


def _taken_names(m: Config) -> set:
    out = set(m.names)
    for n in m.nodes:
        for attr in ("session", "loc", "key"):
            v = getattr(n, attr, None)
            if isinstance(v, str):
                out.add(v)
    return out


def _may_act(m: Config, r: Running, ep: Endpoint) -> bool:
    """The location premise: p = r, or p was received by r through the session queue."""
    if ep.role == r.role:
        return True
    q = m.queue(ep.session)
    return q is not None and ep.role in roles_in_queue(r.role, q.past)


def _endpoint_prefix(m: Config, r: Running, cls):
    body = unfold_head(r.body)
    if not isinstance(body, cls) or not isinstance(body.chan, Endpoint):
        return None
    ep = body.chan
    mon, q = m.monitor(ep.session, ep.role), m.queue(ep.session)
    if mon is None or q is None or mon.full or not _may_act(m, r, ep):
        return None
    return body, ep, mon, q


def _first_from(h: tuple, sender: str, receiver: str, lead=True):
    idx = range(len(h)) if lead else range(len(h) - 1, -1, -1)
    for i in idx:
        msg = h[i]
        if msg.sender == sender and msg.receiver == receiver:
            ok = can_lead(h, i) if lead else can_trail(h, i)
            return i if ok else None
    return None


def _refold(prev, rebuilt):
    return prev if prev is not None and unfold_head(prev) == rebuilt else rebuilt


# ---------------------------------------------------------------- forward rules


def _init(m: Config):
    out = []
    services = m.services()
    for req in (s for s in services if s.kind == "request"):
        g = req.protocol
        roles = sorted(participants(g))
        if req.role not in roles or not type_equal(req.annot, _projection(g, req.role)):
            continue
        options = []
        for role in roles:
            if role == req.role:
                options.append([req])
                continue
            options.append([s for s in services if s.kind == "accept" and s.shared == req.shared
                            and s.role == role and s.protocol == g
                            and type_equal(s.annot, _projection(g, role))])
        for combo in product(*options):
            if len({s.loc for s in combo}) != len(combo):
                continue
            s = _fresh("s", _taken_names(m))
            add = [Queue(s, (), (), req.role, g, req.protocol_name, req.shared)]
            for svc in combo:
                ep = Endpoint(s, svc.role)
                add.append(Running(svc.loc, svc.role, s, (), subst_channel(svc.body, svc.var, ep)))
                add.append(Monitor(s, svc.role, initial(svc.annot), (svc.var,),
                                   Store.of({svc.var: SharedName(svc.shared)})))
            locs = tuple(sorted(svc.loc for svc in combo))
            out.append((Redex("Init", req.shared, locs, None, locs), _rebuild(m, combo, add, (s,))))
    return out


def _out(m: Config):
    out = []
    for r in m.running():
        found = _endpoint_prefix(m, r, Output)
        if not found:
            continue
        body, ep, mon, q = found
        t = facing(mon.history)
        if not isinstance(t, LSend):
            continue
        try:
            v = eval_value(body.value, mon.store)
        except UnboundVariable:
            continue
        msg = Message(ep.role, t.peer, v, body.value, r.loc, r.body)
        new_mon = replace(mon, history=advance(mon.history, Prefix("!", t.peer, t.payload), t.cont))
        new_q = replace(q, future=q.future + (msg,))
        new_r = replace(r, body=body.cont)
        out.append((Redex("Out", ep.session, (ep.role,), None, (r.loc,)),
                    _rebuild(m, (r, mon, q), (new_r, new_mon, new_q))))
    return out


def _fresh_var(y: str, taken: set) -> str:
    i = 1
    while f"{y}_{i}" in taken:
        i += 1
    return f"{y}_{i}"


def _in(m: Config):
    out = []
    for r in m.running():
        found = _endpoint_prefix(m, r, Input)
        if not found:
            continue
        body, ep, mon, q = found
        t = facing(mon.history)
        if not isinstance(t, LRecv):
            continue
        i = _first_from(q.future, t.peer, ep.role)
        if i is None or q.future[i].is_label:
            continue
        msg = q.future[i]
        y = body.var
        used = y
        if y in mon.store:
            used = _fresh_var(y, {k for k, _ in mon.store.items} | free_vars(body.cont))
        cont = body.cont if used == y else subst_name(body.cont, y, NameVar(used))
        new_mon = replace(mon, history=advance(mon.history, Prefix("?", t.peer, t.payload), t.cont),
                          tracked=mon.tracked + (used,), store=store_update(mon.store, used, msg.payload))
        read = replace(msg, reader=Reader(r.loc, y, used, r.body))
        new_q = replace(q, past=q.past + (read,), future=q.future[:i] + q.future[i + 1:])
        out.append((Redex("In", ep.session, (ep.role,), None, (r.loc,)),
                    _rebuild(m, (r, mon, q), (replace(r, body=cont), new_mon, new_q))))
    return out


def _sel(m: Config):
    out = []
    for r in m.running():
        found = _endpoint_prefix(m, r, Select)
        if not found:
            continue
        body, ep, mon, q = found
        t = facing(mon.history)
        if not isinstance(t, LSelect):
            continue
        proc_labels, type_labels = set(body.labels), set(t.labels)
        if not type_labels <= proc_labels:
            continue
        for w in t.labels:
            rest = tuple((l, p) for l, p in body.branches if l != w)
            entry = StackEntry("+", ep, rest, body.labels, r.body)
            new_r = replace(r, stack=r.stack + (entry,), body=dict(body.branches)[w])
            new_mon = replace(mon, history=advance(mon.history, Committed("+", t.peer, t.branches, w),
                                                   t.branch(w)))
            msg = Message(ep.role, t.peer, Label(w), None, r.loc, r.body)
            new_q = replace(q, future=q.future + (msg,))
            out.append((Redex("Sel", ep.session, (ep.role,), w, (r.loc,)),
                        _rebuild(m, (r, mon, q), (new_r, new_mon, new_q))))
    return out


def _bra(m: Config):
    out = []
    for r in m.running():
        found = _endpoint_prefix(m, r, Branch)
        if not found:
            continue
        body, ep, mon, q = found
        t = facing(mon.history)
        if not isinstance(t, LBranch):
            continue
        i = _first_from(q.future, t.peer, ep.role)
        if i is None or not q.future[i].is_label:
            continue
        msg = q.future[i]
        w = msg.payload.name
        if w not in body.labels or not set(body.labels) <= set(t.labels):
            continue
        rest = tuple((l, p) for l, p in body.branches if l != w)
        entry = StackEntry("&", ep, rest, body.labels, r.body)
        new_r = replace(r, stack=r.stack + (entry,), body=dict(body.branches)[w])
        new_mon = replace(mon, history=advance(mon.history, Committed("&", t.peer, t.branches, w),
                                               t.branch(w)))
        read = replace(msg, reader=Reader(r.loc, None, None, r.body))
        new_q = replace(q, past=q.past + (read,), future=q.future[:i] + q.future[i + 1:])
        out.append((Redex("Bra", ep.session, (ep.role,), w, (r.loc,)),
                    _rebuild(m, (r, mon, q), (new_r, new_mon, new_q))))
    return out


def _beta(m: Config):
    out = []
    from .runtime import Apply
    for r in m.running():
        body = unfold_head(r.body)
        if not isinstance(body, Apply):
            continue
        mon = m.monitor(r.session, r.role)
        if mon is None or mon.full:
            continue
        try:
            fun = eval_value(body.fun, mon.store)
            arg = eval_name(body.arg, mon.store)
        except UnboundVariable:
            continue
        if not isinstance(fun, Abstraction):
            continue
        new_body = fun.body if fun.param == THUNK_PARAM else subst_name(fun.body, fun.param, arg)
        k = _fresh("k", _taken_names(m) | _keys_in(m))
        new_mon = replace(mon, history=push_mark(mon.history, KeyMark(k)))
        out.append((Redex("Beta", r.session, (r.role,), None, (r.loc,)),
                    _rebuild(m, (r, mon), (replace(r, body=new_body), RunFun(k, r.body, r.loc), new_mon),
                             (k,))))
    return out


def _keys_in(m: Config) -> set:
    return {f.key for mon in m.monitors() for f in mon.history.frames if isinstance(f, KeyMark)}


def _spawn(m: Config):
    out = []
    taken = None
    for r in m.running():
        body = unfold_head(r.body)
        if not isinstance(body, Par):
            continue
        mon = m.monitor(r.session, r.role)
        if mon is None or mon.full:
            continue
        taken = taken or _taken_names(m)
        n = 1
        while f"{r.loc}.{n}" in taken or f"{r.loc}.{n + 1}" in taken:
            n += 2
        l1, l2 = f"{r.loc}.{n}", f"{r.loc}.{n + 1}"
        new_mon = replace(mon, history=push_mark(mon.history, SpawnMark(r.loc, l1, l2, r.body)))
        add = (replace(r, body=NIL), Running(l1, r.role, r.session, (), body.left),
               Running(l2, r.role, r.session, (), body.right), new_mon)
        out.append((Redex("Spawn", r.session, (r.role,), None, (r.loc,)), _rebuild(m, (r, mon), add)))
    return out


# ---------------------------------------------------------------- backward rules


def _mentions(node, s: str) -> bool:
    return f"Endpoint(session={s!r}" in repr(node)


def _rinit(m: Config):
    out = []
    for q in m.queues():
        if q.past or q.future or q.protocol is None:
            continue
        s = q.session
        mons = [n for n in m.monitors() if n.session == s]
        runs = [n for n in m.running() if n.session == s]
        roles = set(participants(q.protocol))
        if {n.role for n in mons} != roles or sorted(n.role for n in runs) != sorted(roles):
            continue
        ok = all(not n.full and not n.history.frames and len(n.tracked) == 1
                 and n.store.items == ((n.tracked[0], SharedName(q.shared)),) for n in mons)
        ok = ok and all(not n.stack for n in runs)
        if not ok:
            continue
        involved = set(map(id, mons + runs + [q]))
        if any(_mentions(n, s) for n in m.nodes if id(n) not in involved):
            continue
        add = []
        for mon in mons:
            r = next(n for n in runs if n.role == mon.role)
            x = mon.tracked[0]
            add.append(Service(r.loc, "request" if mon.role == q.requester else "accept", q.shared, x,
                               mon.history.focus, unsubst_endpoint(r.body, Endpoint(s, mon.role), x),
                               mon.role, q.protocol, q.protocol_name))
        locs = tuple(sorted(r.loc for r in runs))
        out.append((Redex("RInit", q.shared, locs, None, locs), _rebuild(m, mons + runs + [q], add)))
    return out


def _rolls(m: Config, choice: bool):
    out = []
    mons = [n for n in m.monitors() if not n.full]
    for mp in mons:
        lp = mp.history.last
        for mq in mons:
            if mq.session != mp.session or mq.role == mp.role:
                continue
            lq = mq.history.last
            if choice:
                if not (isinstance(lp, Committed) and lp.kind == "&" and lp.peer == mq.role
                        and isinstance(lq, Committed) and lq.kind == "+" and lq.peer == mp.role
                        and lp.chosen == lq.chosen
                        and set(l for l, _ in lp.branches) == set(l for l, _ in lq.branches)):
                    continue
                red = Redex("RollC", mp.session, (mp.role, mq.role), lp.chosen)
            else:
                if not (isinstance(lp, Prefix) and lp.dir == "?" and lp.peer == mq.role
                        and isinstance(lq, Prefix) and lq.dir == "!" and lq.peer == mp.role
                        and value_type_equal(lp.payload, lq.payload)):
                    continue
                red = Redex("RollS", mp.session, (mp.role, mq.role))
            out.append((red, _rebuild(m, (mp, mq), (replace(mp, full=True), replace(mq, full=True)))))
    return out


def _full_monitors(m: Config, frame_test):
    for mon in m.monitors():
        if mon.full and mon.history.frames and frame_test(mon.history.last):
            q = m.queue(mon.session)
            if q is not None:
                yield mon, q, mon.history.last


def _rout(m: Config):
    out = []
    for mon, q, f in _full_monitors(m, lambda f: isinstance(f, Prefix) and f.dir == "!"):
        i = _first_from(q.future, mon.role, f.peer)
        if i is None or q.future[i].is_label:
            continue
        msg = q.future[i]
        r = m.running_at(msg.send_loc)
        ep = Endpoint(mon.session, mon.role)
        if r is None or not _may_act(m, r, ep):
            continue
        value = msg.src if msg.src is not None else msg.payload
        body = _refold(msg.send_fold, Output(ep, value, r.body))
        new_mon = replace(mon, history=retreat(mon.history), full=False)
        new_q = replace(q, future=q.future[:i] + q.future[i + 1:])
        out.append((Redex("ROut", mon.session, (mon.role,), None, (r.loc,)),
                    _rebuild(m, (r, mon, q), (replace(r, body=body), new_mon, new_q))))
    return out


def _rin(m: Config):
    out = []
    for mon, q, f in _full_monitors(m, lambda f: isinstance(f, Prefix) and f.dir == "?"):
        i = _first_from(q.past, f.peer, mon.role, lead=False)
        if i is None or q.past[i].is_label or q.past[i].reader is None:
            continue
        msg = q.past[i]
        rd = msg.reader
        r = m.running_at(rd.loc)
        ep = Endpoint(mon.session, mon.role)
        if r is None or not _may_act(m, r, ep) or not mon.tracked or mon.tracked[-1] != rd.used:
            continue
        cont = r.body if rd.used == rd.var else subst_name(r.body, rd.used, NameVar(rd.var))
        body = _refold(rd.fold, Input(ep, rd.var, cont))
        new_mon = replace(mon, history=retreat(mon.history), full=False, tracked=mon.tracked[:-1],
                          store=store_reverse(mon.store, rd.used))
        new_q = replace(q, past=q.past[:i] + q.past[i + 1:], future=(replace(msg, reader=None),) + q.future)
        out.append((Redex("RIn", mon.session, (mon.role,), None, (r.loc,)),
                    _rebuild(m, (r, mon, q), (replace(r, body=body), new_mon, new_q))))
    return out


def _undo_choice(m: Config, kind: str):
    out = []
    rule = "RSel" if kind == "+" else "RBra"
    for mon, q, f in _full_monitors(m, lambda f: isinstance(f, Committed) and f.kind == kind):
        if kind == "+":
            i = _first_from(q.future, mon.role, f.peer)
            h = q.future
        else:
            i = _first_from(q.past, f.peer, mon.role, lead=False)
            h = q.past
        if i is None or not h[i].is_label or h[i].payload.name != f.chosen:
            continue
        msg = h[i]
        loc = msg.send_loc if kind == "+" else (msg.reader.loc if msg.reader else None)
        r = m.running_at(loc) if loc else None
        ep = Endpoint(mon.session, mon.role)
        if r is None or not r.stack or not _may_act(m, r, ep):
            continue
        top = r.stack[-1]
        if top.kind != kind or top.chan != ep:
            continue
        w = f.chosen
        full_labels = {l for l, _ in top.branches} | {w}
        if not full_labels <= {l for l, _ in f.branches}:
            continue
        alts = dict(top.branches)
        alts[w] = r.body
        cls = Select if kind == "+" else Branch
        rebuilt = cls(ep, tuple((l, alts[l]) for l in top.order if l in alts))
        body = _refold(top.fold, rebuilt)
        new_r = replace(r, stack=r.stack[:-1], body=body)
        new_mon = replace(mon, history=retreat(mon.history), full=False)
        if kind == "+":
            new_q = replace(q, future=q.future[:i] + q.future[i + 1:])
        else:
            new_q = replace(q, past=q.past[:i] + q.past[i + 1:],
                            future=(replace(msg, reader=None),) + q.future)
        out.append((Redex(rule, mon.session, (mon.role,), w, (r.loc,)),
                    _rebuild(m, (r, mon, q), (new_r, new_mon, new_q))))
    return out


def _rbeta(m: Config):
    out = []
    for mon in m.monitors():
        f = mon.history.last
        if mon.full or not isinstance(f, KeyMark):
            continue
        rf = next((n for n in m.runfuns() if n.key == f.key), None)
        if rf is None:
            continue
        r = m.running_at(rf.loc)
        if r is None or r.role != mon.role or r.session != mon.session:
            continue
        new_mon = replace(mon, history=retreat(mon.history))
        out.append((Redex("RBeta", mon.session, (mon.role,), None, (r.loc,)),
                    _rebuild(m, (r, rf, mon), (replace(r, body=rf.saved), new_mon))))
    return out


def _rspawn(m: Config):
    out = []
    for mon in m.monitors():
        f = mon.history.last
        if mon.full or not isinstance(f, SpawnMark):
            continue
        r, r1, r2 = m.running_at(f.loc), m.running_at(f.left), m.running_at(f.right)
        if None in (r, r1, r2) or not isinstance(r.body, Nil) or r1.stack or r2.stack:
            continue
        if any(x.role != mon.role for x in (r, r1, r2)):
            continue
        body = _refold(f.prev, Par(r1.body, r2.body))
        new_mon = replace(mon, history=retreat(mon.history))
        out.append((Redex("RSpawn", mon.session, (mon.role,), None, (r.loc,)),
                    _rebuild(m, (r, r1, r2, mon), (replace(r, body=body), new_mon))))
    return out


# ---------------------------------------------------------------- public interface


def forward_steps(m: Config) -> list:
    """All (Redex, successor) pairs of the forward reduction, in deterministic order."""
    steps = _init(m) + _out(m) + _in(m) + _sel(m) + _bra(m) + _beta(m) + _spawn(m)
    return sorted(steps, key=lambda rs: rs[0].sort_key())


def backward_steps(m: Config) -> list:
    steps = (_rinit(m) + _rolls(m, False) + _rolls(m, True) + _rout(m) + _rin(m)
             + _undo_choice(m, "&") + _undo_choice(m, "+") + _rbeta(m) + _rspawn(m))
    return sorted(steps, key=lambda rs: rs[0].sort_key())


def steps(m: Config, direction: str = "both") -> list:
    if direction == "fwd":
        return forward_steps(m)
    if direction == "bwd":
        return backward_steps(m)
    return forward_steps(m) + backward_steps(m)


def enumerate_forward(m: Config) -> list:
    return [r for r, _ in forward_steps(m)]


def enumerate_backward(m: Config) -> list:
    return [r for r, _ in backward_steps(m)]


def _apply(m: Config, r: Redex, table) -> Config:
    for red, n in table(m):
        if red == r:
            return n
    raise StaleRedex(f"{r} is not enabled")


def apply_forward(m: Config, r: Redex) -> Config:
    return _apply(m, r, forward_steps)


def apply_backward(m: Config, r: Redex) -> Config:
    return _apply(m, r, backward_steps)


def apply(m: Config, r: Redex) -> Config:
    return apply_forward(m, r) if r.forward else apply_backward(m, r)


@dataclass
class LTS:
    states: list = field(default_factory=list)
    index: dict = field(default_factory=dict)
    edges: list = field(default_factory=list)
    depth_of: list = field(default_factory=list)
    complete: bool = True

    def add(self, m: Config, depth: int) -> tuple:
        if m in self.index:
            return self.index[m], False
        self.index[m] = len(self.states)
        self.states.append(m)
        self.depth_of.append(depth)
        return self.index[m], True

    def successors(self, i: int):
        return [(r, d) for s, d, r in self.edges if s == i]

    def to_json(self) -> dict:
        return {
            "schema": "revchor.lts/1",
            "states": [{"id": i, "hash": state_hash(m), "stable": is_stable(m), "barbs": sorted(barbs(m)),
                        "depth": self.depth_of[i]} for i, m in enumerate(self.states)],
            "edges": [{"src": s, "dst": d, "rule": r.rule, "subjects": list(r.subjects),
                       **({"label": r.label} if r.label else {})} for s, d, r in self.edges],
            "complete": self.complete,
        }


def explore(m0: Config, depth: int, direction: str = "both", step_fn=None, budget: int | None = None) -> LTS:
    """Breadth-first reachable sub-LTS up to depth; states deduplicated by normal form."""
    step_fn = step_fn or (lambda m: steps(m, direction))
    budget = state_budget() if budget is None else budget
    lts = LTS()
    lts.add(normalize(m0), 0)
    frontier = deque([0])
    while frontier:
        i = frontier.popleft()
        d = lts.depth_of[i]
        if d >= depth:
            continue
        for r, n in step_fn(lts.states[i]):
            j, new = lts.add(n, d + 1)
            if new:
                if len(lts.states) > budget:
                    raise StateBudgetExceeded(f"more than {budget} states")
                frontier.append(j)
            lts.edges.append((i, j, r))
    return lts


step_closure = explore
