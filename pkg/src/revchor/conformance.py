"""Static well-formedness, the implements relation, and the semantic conformance checks.

The checks here relate the layers of the engine to each other: processes to local types,
configurations to global types with history, atomic steps to decoupled ones, and configurations
to themselves under the back-and-forth barbed game.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

from . import decoupled as dc
from .atomic import ATOMIC_FORWARD, INVERSE, atomic_steps, explore_atomic
from .errors import BudgetExhausted, NotFirstOrder
from .globalsem import (ExFrame, HistoryGlobal, MidEx, Start, global_backward,
                        global_forward, plug, start)
from .history import Committed, HistoryLocal, Prefix, Unfolded, advance, facing, retreat
from .runtime import (Abstraction, Branch, Call, Config, Const, Endpoint, Input, NameVar,
                      Nil, Output, ProcVar, Rec, Select, SharedName, StackEntry,
                      VarRef, barbs, canonical_queue, free_vars, is_stable, normalize, state_hash,
                      unfold_head)
from .types import (Arrow, Base, LBranch, LEnd, LRec, LRecv, LSelect, LSend, LVar, children,
                    is_first_order, participants, payloads, project, substitute, swap_closure,
                    type_equal, value_type_equal)

# ---------------------------------------------------------------- well-formed processes


@dataclass(frozen=True)
class WfContext:
    """Types of value variables and of process variables in scope."""
    vars: dict = field(default_factory=dict)
    procvars: dict = field(default_factory=dict)

    def __post_init__(self):
        if set(self.vars) & set(self.procvars):
            raise ValueError("value and process variables must not share names")

    def with_var(self, y: str, u) -> "WfContext":
        return WfContext({**self.vars, y: u}, self.procvars)

    def with_procvar(self, x: str, t) -> "WfContext":
        return WfContext(self.vars, {**self.procvars, x: t})


def require_first_order(t) -> None:
    """Raise NotFirstOrder if any payload anywhere in t carries a process abstraction."""
    todo, seen = [t], set()
    while todo:
        cur = todo.pop()
        if cur in seen:
            continue
        seen.add(cur)
        for u in payloads(cur):
            if not is_first_order(u):
                raise NotFirstOrder(f"payload {u} is higher-order")
        todo.extend(children(cur))


_KIND_OF = {bool: "bool", int: "nat", str: "str"}


def value_wf(ctx: WfContext, v, u) -> bool:
    """The value judgement for first-order payloads."""
    if isinstance(u, Arrow) or isinstance(v, Abstraction):
        raise NotFirstOrder(f"value {v} at type {u} is higher-order")
    if isinstance(v, Const):
        return isinstance(u, Base) and _KIND_OF[type(v.value)] == u.kind
    if isinstance(v, VarRef):
        return v.name in ctx.vars and value_type_equal(ctx.vars[v.name], u)
    if isinstance(v, SharedName):
        return isinstance(u, Base)
    if isinstance(v, Call):
        # an uninterpreted operation on data; its arguments only need to be in scope
        return isinstance(u, Base) and all(_arg_in_scope(ctx, a) for a in v.args)
    return False


def _arg_in_scope(ctx: WfContext, a) -> bool:
    if isinstance(a, VarRef):
        return a.name in ctx.vars
    if isinstance(a, Call):
        return all(_arg_in_scope(ctx, b) for b in a.args)
    return isinstance(a, (Const, SharedName))


def _on(chan, x) -> bool:
    return chan == x if isinstance(x, Endpoint) else chan == NameVar(x)


def check_wf_process(ctx: WfContext | None, p, x, t) -> bool:
    """Does p implement local type t along x? x is a variable name or a session endpoint."""
    require_first_order(t)
    return _wf(ctx or WfContext(), p, x, t)


def _wf(ctx, p, x, t) -> bool:
    if isinstance(p, ProcVar):
        return p.name in ctx.procvars and type_equal(ctx.procvars[p.name], t)
    if isinstance(p, Rec):
        return _wf(ctx.with_procvar(p.var, t), p.body, x, t)
    if isinstance(t, LRec):
        return _wf(ctx, p, x, substitute(t.body, t.var, t))
    if isinstance(p, Nil):
        return isinstance(t, LEnd)
    if isinstance(t, LVar):
        return False
    if isinstance(p, Output):
        return (isinstance(t, LSend) and _on(p.chan, x) and value_wf(ctx, p.value, t.payload)
                and _wf(ctx, p.cont, x, t.cont))
    if isinstance(p, Input):
        return (isinstance(t, LRecv) and _on(p.chan, x)
                and _wf(ctx.with_var(p.var, t.payload), p.cont, x, t.cont))
    if isinstance(p, (Select, Branch)):
        cls = LSelect if isinstance(p, Select) else LBranch
        if not isinstance(t, cls) or not _on(p.chan, x) or set(p.labels) != set(t.labels):
            return False
        return all(_wf(ctx, q, x, t.branch(l)) for l, q in p.branches)
    return False  # parallel composition, application and restriction are not single-threaded


# ---------------------------------------------------------------- well-formed configurations

_DEFAULT = {"bool": Const(True), "nat": Const(0), "str": Const("")}


def check_wf_config(stack: tuple, body, h: HistoryLocal, x, ctx: WfContext | None = None,
                    budget: int = 10_000) -> bool:
    """Is the thread (stack, body) well formed against the local type with history h along x?

    The rules come in pairs: one moves the cursor back over a performed action while rebuilding
    the prefix, the other moves it forward over a prefix the process still has. Derivability is
    decided by a search over both kinds of move; a judgement is derivable exactly when some
    sequence of moves reaches a cursor at the very beginning with an empty stack and a process
    that implements the whole type."""
    require_first_order(h.focus)
    for f in h.frames:
        if isinstance(f, Prefix) and not is_first_order(f.payload):
            raise NotFirstOrder(f"payload {f.payload} is higher-order")
    ctx = ctx or WfContext()
    start_j = (tuple(stack), body, h)
    seen = {start_j}
    todo = [start_j]
    while todo:
        st, p, hist = todo.pop()
        if not hist.frames and not st and _wf(ctx, p, x, hist.focus):
            return True
        for nxt in _back_moves(st, p, hist, x) + _forward_moves(ctx, st, p, hist, x):
            if nxt not in seen:
                if len(seen) >= budget:
                    raise BudgetExhausted(f"well-formedness search exceeded {budget} judgements")
                seen.add(nxt)
                todo.append(nxt)
    return False


def _fresh_binder(p) -> str:
    taken = free_vars(p)
    i = 0
    while f"y{i}" in taken:
        i += 1
    return f"y{i}"


def _back_moves(st, p, h, x) -> list:
    if not h.frames:
        return []
    last = h.frames[-1]
    if isinstance(last, Unfolded):
        return [(st, p, HistoryLocal(h.frames[:-1], last.rec))]
    if isinstance(last, Prefix):
        prev = retreat(h)
        if last.dir == "!":
            return [(st, Output(x, _DEFAULT[last.payload.kind], p), prev)]
        binders = sorted(free_vars(p)) + [_fresh_binder(p)]
        return [(st, Input(x, y, p), prev) for y in binders]
    if isinstance(last, Committed):
        if not st:
            return []
        top = st[-1]
        if top.kind != last.kind or top.chan != x or last.chosen in dict(top.branches):
            return []
        alts = dict(top.branches)
        alts[last.chosen] = p
        order = top.order if set(top.order) == set(alts) else tuple(sorted(alts))
        cls = Select if last.kind == "+" else Branch
        rebuilt = cls(x, tuple((l, alts[l]) for l in order))
        return [(st[:-1], rebuilt, retreat(h))]
    return []  # session keys and spawn marks belong to higher-order runs


def _forward_moves(ctx, st, p, h, x) -> list:
    t = facing(h)
    p = unfold_head(p)
    if isinstance(p, Output) and isinstance(t, LSend) and _on(p.chan, x):
        if value_wf(ctx, p.value, t.payload):
            return [(st, p.cont, advance(h, Prefix("!", t.peer, t.payload), t.cont))]
    elif isinstance(p, Input) and isinstance(t, LRecv) and _on(p.chan, x):
        if _wf(ctx.with_var(p.var, t.payload), p.cont, x, t.cont):
            return [(st, p.cont, advance(h, Prefix("?", t.peer, t.payload), t.cont))]
    elif isinstance(p, (Select, Branch)) and _on(p.chan, x):
        kind, cls = ("+", LSelect) if isinstance(p, Select) else ("&", LBranch)
        if isinstance(t, cls):
            out = []
            for w in set(p.labels) & set(t.labels):
                rest = tuple((l, q) for l, q in p.branches if l != w)
                entry = StackEntry(kind, x, rest, p.labels, None)
                out.append((st + (entry,), dict(p.branches)[w],
                            advance(h, Committed(kind, t.peer, t.branches, w), t.branch(w))))
            return out
    return []


def check_wf_running(m: Config) -> dict:
    """Well-formedness of every thread against the monitor of the endpoint it runs on."""
    out = {}
    for r in m.running():
        mon = m.monitor(r.session, r.role)
        if mon is None:
            out[r.loc] = False
            continue
        out[r.loc] = check_wf_config(r.stack, r.body, mon.history, Endpoint(r.session, r.role))
    return out


def check_wf_unit(unit) -> dict:
    """Check every declared service body against its participant's projection."""
    return {s.loc: check_wf_process(WfContext(), s.body, s.var, project(s.protocol, s.role))
            for s in unit.services}


# ---------------------------------------------------------------- queues


def _as_msg(x):
    if hasattr(x, "sender"):
        return x
    from .runtime import Message
    s, r, v = x
    return Message(s, r, v)


def queue_equiv(h1, h2) -> bool:
    """Same queue up to swapping adjacent messages with distinct senders and distinct receivers."""
    a, b = tuple(map(_as_msg, h1)), tuple(map(_as_msg, h2))
    if len(a) != len(b):
        return False
    key = lambda h: tuple(m.triple() for m in canonical_queue(h))  # noqa: E731
    return key(a) == key(b)


# ---------------------------------------------------------------- implements


def initially_implements(m: Config, g) -> bool:
    """Does m consist of exactly one fresh session of g, every thread well formed and untouched?"""
    m = normalize(m)
    if len(m.names) != 1:
        return False
    s = m.names[0]
    roles = participants(g)
    runs, mons, queues = m.running(), m.monitors(), m.queues()
    if len(m.nodes) != len(runs) + len(mons) + len(queues) or len(queues) != 1:
        return False
    q = queues[0]
    if q.session != s or q.past or q.future or q.protocol is None or not type_equal(q.protocol, g):
        return False
    if sorted(r.role for r in runs) != sorted(roles) or sorted(n.role for n in mons) != sorted(roles):
        return False
    for r in runs:
        mon = m.monitor(s, r.role)
        proj = project(g, r.role)
        if r.session != s or r.stack or mon is None or mon.full or mon.history.frames:
            return False
        if not type_equal(mon.history.focus, proj):
            return False
        if not check_wf_process(WfContext(), r.body, Endpoint(s, r.role), proj):
            return False
    return True


@dataclass(frozen=True)
class ImplementsWitness:
    global_: HistoryGlobal
    config: Config
    origin: Config
    provenance: tuple  # redexes leading from origin to config
    global_path: tuple  # global labels leading from the start of the protocol to global_


def _path(frm, goal, succ, depth: int, budget: int):
    """Shortest path of labels from frm to a state satisfying goal, within depth."""
    prev = {frm: None}
    frontier = deque([(frm, 0)])
    while frontier:
        cur, d = frontier.popleft()
        if goal(cur):
            labels = []
            while prev[cur] is not None:
                lab, cur = prev[cur]
                labels.append(lab)
            return tuple(reversed(labels)), cur
        if d >= depth:
            continue
        for lab, nxt in succ(cur):
            if nxt not in prev:
                if len(prev) >= budget:
                    raise BudgetExhausted(f"implements search exceeded {budget} states")
                prev[nxt] = (lab, cur)
                frontier.append((nxt, d + 1))
    return None


def _global_succ(h):
    return global_forward(h) + global_backward(h)


def implements_witness(n: Config, h: HistoryGlobal, depth: int, budget: int | None = None):
    """Find an initially implementing configuration from which n is reachable, and a path of
    global transitions from the start of the protocol to h; None if the bounded search fails."""
    budget = dc.state_budget() if budget is None else budget
    n = normalize(n)
    g = plug(h)
    gpath = _path(start(g), lambda x: x == h, _global_succ, depth, budget)
    if gpath is None:
        return None
    found = _path(n, lambda c: initially_implements(c, g), lambda c: [(r, x) for r, x in dc.steps(c)],
                  depth, budget)
    if found is None:
        return None
    origin = None
    back, _ = found
    # replay from n to locate the origin, then search forward from it for a provenance path
    cur = n
    for r in back:
        cur = dc.apply(cur, r)
    origin = cur
    prov = _path(origin, lambda c: c == n, lambda c: [(r, x) for r, x in dc.steps(c)], depth, budget)
    return ImplementsWitness(h, n, origin, prov[0], gpath[0])


def implements(n: Config, h: HistoryGlobal, depth: int = 8, budget: int | None = None) -> bool:
    return implements_witness(n, h, depth, budget) is not None


# ---------------------------------------------------------------- global/local correspondence

# which decoupled rule and participant realise each global transition
_MATCH = {"FVal1": ("Out", 0), "FVal2": ("In", 1), "FCho1": ("Sel", 0), "FCho2": ("Bra", 1),
          "BVal1": ("ROut", 0), "BVal2": ("RIn", 1), "BCho1": ("RSel", 0), "BCho2": ("RBra", 1)}
_ROLL = {"Val": "RollS", "Cho": "RollC"}
_GLOBAL_OF = {v[0]: k for k, v in _MATCH.items()}


def _realises(r: dc.Redex, lab) -> bool:
    rule, who = _MATCH[lab.rule]
    actor = (lab.sender, lab.receiver)[who]
    return r.rule == rule and r.subjects == (actor,) and (lab.label is None or r.label == lab.label)


def _matches(m: Config, lab) -> list:
    """Decoupled reductions realising a global transition: one forward step, or for backward
    transitions one undo step optionally preceded by the roll step of the same pair."""
    if lab.forward:
        return [((r,), n) for r, n in dc.forward_steps(m) if _realises(r, lab)]
    out = [((r,), n) for r, n in dc.backward_steps(m) if _realises(r, lab)]
    roll = _ROLL[lab.rule[1:4]]
    for r0, n0 in dc.backward_steps(m):
        if r0.rule == roll and set(r0.subjects) == {lab.sender, lab.receiver}:
            out.extend(((r0, r), n) for r, n in dc.backward_steps(n0) if _realises(r, lab))
    return out


@dataclass
class CorrespondenceReport:
    pairs: int = 0
    transitions_checked: int = 0
    reductions_checked: int = 0
    violations: list = field(default_factory=list)
    part_b_violations: list = field(default_factory=list)
    origins: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations and not self.part_b_violations

    def to_json(self) -> dict:
        return {"schema": "revchor.correspondence/1", "origins": self.origins, "pairs": self.pairs,
                "transitions_checked": self.transitions_checked,
                "reductions_checked": self.reductions_checked,
                "violations": self.violations, "part_b_violations": self.part_b_violations}


def _history_variants(h: HistoryGlobal, budget: int) -> list:
    """h together with the histories obtained by swapping independent exchanges after the cursor."""
    if isinstance(h.focus, Start):
        closure, _ = swap_closure(h.focus.g, budget)
        return [HistoryGlobal(h.frames, Start(g)) for g in sorted(closure, key=str)]
    if isinstance(h.focus, MidEx):
        f = h.focus
        closure, _ = swap_closure(f.cont, budget)
        return [HistoryGlobal(h.frames, MidEx(f.sender, f.receiver, f.payload, g))
                for g in sorted(closure, key=str)]
    return [h]


def _swap_context(h: HistoryGlobal, budget: int) -> list:
    """h together with the histories whose performed exchanges are reordered by swapping."""
    seen = {h.frames}
    todo = deque([h.frames])
    while todo:
        fr = todo.popleft()
        for i in range(len(fr) - 1):
            a, b = fr[i], fr[i + 1]
            if isinstance(a, ExFrame) and isinstance(b, ExFrame) and \
                    not ({a.sender, a.receiver} & {b.sender, b.receiver}):
                nxt = fr[:i] + (b, a) + fr[i + 2:]
                if nxt not in seen and len(seen) < budget:
                    seen.add(nxt)
                    todo.append(nxt)
    return [HistoryGlobal(fr, h.focus) for fr in sorted(seen, key=repr)]


def check_correspondence(m0: Config, depth: int, swap_budget: int = 256, limit: int = 50,
                         part_b: bool = True) -> CorrespondenceReport:
    """Walk global histories and configurations in lock-step from every initially implementing
    configuration reachable by session set-up from m0.

    Part (a): each global transition must be matched by exactly one forward reduction, or by one or
    two backward reductions. Part (b): each forward or undo reduction of the configuration must
    be matched by a transition of a swap-equivalent history. Implementation is preserved by
    construction: every visited pair is connected to its origin by recorded steps."""
    rep = CorrespondenceReport()
    m0 = normalize(m0)
    origins = []
    for r, n in dc.forward_steps(m0):
        if r.rule == "Init":
            q = n.queues()[0] if len(n.queues()) == 1 else None
            if q is not None and initially_implements(n, q.protocol):
                origins.append((n, q.protocol))
    rep.origins = len(origins)
    for origin, g in origins:
        h0 = start(g)
        seen = {(origin, h0)}
        frontier = deque([(origin, h0, 0, ())])
        while frontier:
            m, h, d, trail = frontier.popleft()
            rep.pairs += 1
            if part_b:
                _check_part_b(m, h, trail, rep, swap_budget, limit)
            if d >= depth:
                continue
            for lab, h2 in global_forward(h) + global_backward(h):
                rep.transitions_checked += 1
                found = _matches(m, lab)
                targets = {n for _, n in found}
                bad = (len(targets) != 1) if lab.forward else not targets
                if bad and len(rep.violations) < limit:
                    rep.violations.append({
                        "trail": [str(x) for x in trail], "transition": _show_label(lab),
                        "state": state_hash(m), "global": str(h),
                        "matches": [";".join(map(str, rs)) for rs, _ in found]})
                for rs, n in found:
                    if (n, h2) not in seen:
                        seen.add((n, h2))
                        frontier.append((n, h2, d + 1, trail + (_show_label(lab),)))
    return rep


def _show_label(lab) -> str:
    extra = f":{lab.label}" if lab.label else ""
    return f"{lab.rule}({lab.sender},{lab.receiver}){extra}"


def _check_part_b(m, h, trail, rep, swap_budget, limit):
    variants = None
    for r, n in dc.steps(m):
        if r.rule not in _GLOBAL_OF:
            continue  # set-up, roll steps and higher-order steps have no global counterpart
        rep.reductions_checked += 1
        if variants is None:
            variants = {v for c in _swap_context(h, swap_budget) for v in _history_variants(c, swap_budget)}
        ok = any(_realises(r, lab) for v in variants for lab, _ in _global_succ(v))
        if not ok and len(rep.part_b_violations) < limit:
            rep.part_b_violations.append({"trail": list(trail), "reduction": str(r),
                                          "state": state_hash(m), "global": str(h)})


# ---------------------------------------------------------------- loop and decomposition checks


def check_loop(m0: Config, depth: int, limit: int = 20) -> dict:
    """Every atomic step between stable reachable states can be undone by its inverse, and
    every backward step redone by its forward counterpart."""
    lts = explore_atomic(m0, depth)
    checked, violations = 0, []
    for m in lts.states:
        if not is_stable(m):
            continue
        for r, n in atomic_steps(m):
            checked += 1
            inv = INVERSE[r.rule]
            back = "bwd" if r.rule in ATOMIC_FORWARD else "fwd"
            if not any(r2.rule == inv and n2 == m for r2, n2 in atomic_steps(n, back)):
                if len(violations) < limit:
                    violations.append({"state": state_hash(m), "step": str(r), "missing": inv})
    return {"schema": "revchor.loop/1", "states": len(lts.states), "steps_checked": checked,
            "violations": violations}


def _within(m: Config, direction: str, lengths) -> set:
    """States reachable from m in exactly one of the given numbers of decoupled steps."""
    out, layer = set(), {m}
    for k in range(1, max(lengths) + 1):
        layer = {n for x in layer for _, n in dc.steps(x, direction)}
        if k in lengths:
            out |= layer
    return out


def check_theorem1(m0: Config, depth: int, limit: int = 20, budget: int | None = None) -> dict:
    """Atomic steps against decoupled reductions.

    Every atomic forward step is one or two decoupled forward steps between the same normal
    forms, every atomic backward step one or three decoupled backward steps; and the stable
    states of the two semantics coincide on the explored space."""
    lts = explore_atomic(m0, depth, budget=budget)
    violations, checked = [], 0
    for i, r, j in ((s, r, d) for s, d, r in lts.edges):
        m, n = lts.states[i], lts.states[j]
        checked += 1
        fwd = r.rule in ATOMIC_FORWARD
        ok = n in _within(m, "fwd" if fwd else "bwd", (1, 2) if fwd else (1, 3))
        if not ok and len(violations) < limit:
            violations.append({"state": state_hash(m), "step": str(r)})
    dlts = dc.explore(m0, 3 * depth, budget=budget)
    atomic_states = set(lts.states)
    stable_decoupled = {m for m in dlts.states if is_stable(m)}
    inner = {m for i, m in enumerate(lts.states) if lts.depth_of[i] < depth}
    missing_in_decoupled = [state_hash(m) for m in atomic_states - set(dlts.states)]
    # a stable decoupled state one synchronisation beyond an inner atomic state must be atomic
    extra = []
    for m in inner:
        for n in _within(m, "both", (1, 2, 3)):
            if n in stable_decoupled and n not in atomic_states:
                extra.append(state_hash(n))
    return {"schema": "revchor.theorem1/1", "atomic_states": len(lts.states),
            "decoupled_states": len(dlts.states), "steps_checked": checked,
            "violations": violations, "atomic_not_decoupled": sorted(missing_in_decoupled),
            "stable_decoupled_not_atomic": sorted(set(extra))}


# ---------------------------------------------------------------- back-and-forth barbed game


@lru_cache(maxsize=None)
def _decoupled_succ(m: Config) -> tuple:
    return tuple(dc.steps(m))


@lru_cache(maxsize=None)
def _reach(m: Config) -> frozenset:
    """All configurations reachable from m by decoupled steps in either direction."""
    budget = dc.state_budget()
    seen = {m}
    todo = [m]
    while todo:
        cur = todo.pop()
        for _, n in _decoupled_succ(cur):
            if n not in seen:
                if len(seen) >= budget:
                    raise BudgetExhausted(f"weak closure exceeded {budget} states")
                seen.add(n)
                todo.append(n)
    return frozenset(seen)


@lru_cache(maxsize=None)
def _weak_barbs(m: Config) -> frozenset:
    return frozenset(p for n in _reach(m) for p in barbs(n))


@lru_cache(maxsize=None)
def _weak_answers(n: Config, forward: bool) -> frozenset:
    rules = dc.FORWARD_RULES if forward else dc.BACKWARD_RULES
    return frozenset(y for x in _reach(n) for r, y in _decoupled_succ(x) if r.rule in rules)


def bf_bisimilar(m: Config, n: Config, depth: int) -> bool:
    """Bounded back-and-forth barbed bisimulation game of `depth` rounds.

    Atomic steps on one side are answered by decoupled weak steps on the other. Weak closures
    range over the whole reachable space; only the number of rounds is bounded."""
    m, n = normalize(m), normalize(n)
    memo = {}

    def sim(a, b, k) -> bool:
        key = (a, b, k)
        if key in memo:
            return memo[key]
        memo[key] = True  # coinductive assumption
        ok = barbs(a) <= _weak_barbs(b)
        if ok and k > 0:
            for r, a1 in atomic_steps(a):
                answers = _weak_answers(b, r.rule in ATOMIC_FORWARD)
                if not any(sim(a1, b1, k - 1) and sim(b1, a1, k - 1) for b1 in sorted(answers, key=state_hash)):
                    ok = False
                    break
        memo[key] = ok
        return ok

    return sim(m, n, depth) and sim(n, m, depth)
