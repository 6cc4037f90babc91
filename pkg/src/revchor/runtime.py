"""Processes, values, stores, configurations and their normal form."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Iterable, Union

from .errors import DuplicateBinding, UnboundVariable
from .history import HistoryLocal, KeyMark, SpawnMark, facing
from .types import GlobalType, LocalType, LSelect, LSend

# ---------------------------------------------------------------- names and values


@dataclass(frozen=True, slots=True)
class SharedName:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    value: Union[bool, int, str]

    def __str__(self):
        v = self.value
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, str):
            return "'" + v.replace("\\", "\\\\").replace("'", "\\'") + "'"
        return str(v)


@dataclass(frozen=True, slots=True)
class Abstraction:
    """\\x.P; a thunk {{P}} is an abstraction whose parameter is THUNK_PARAM."""
    param: str
    body: "Process"

    def __str__(self):
        if self.param == THUNK_PARAM:
            return "{{ " + show_process(self.body) + " }}"
        return f"(\\{self.param}. {show_process(self.body)})"


@dataclass(frozen=True, slots=True)
class VarRef:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Star:
    def __str__(self):
        return "*"


@dataclass(frozen=True, slots=True)
class Call:
    """An uninterpreted function applied to values, e.g. price(t); evaluation substitutes arguments."""
    fn: str
    args: tuple

    def __str__(self):
        return f"{self.fn}(" + ", ".join(map(str, self.args)) + ")"


@dataclass(frozen=True, slots=True)
class NameVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Endpoint:
    session: str
    role: str

    def __str__(self):
        return f"{self.session}[{self.role}]"


@dataclass(frozen=True, slots=True)
class Label:
    name: str

    def __str__(self):
        return self.name


THUNK_PARAM = "_"

ValueExpr = Union[SharedName, Const, Abstraction, VarRef, Star, Call, Endpoint]
NameExpr = Union[NameVar, Endpoint, SharedName, Star]


def thunk(body) -> Abstraction:
    return Abstraction(THUNK_PARAM, body)


# ---------------------------------------------------------------- processes


@dataclass(frozen=True, slots=True)
class Output:
    chan: NameExpr
    value: ValueExpr
    cont: "Process"


@dataclass(frozen=True, slots=True)
class Input:
    chan: NameExpr
    var: str
    cont: "Process"


@dataclass(frozen=True, slots=True)
class Select:
    chan: NameExpr
    branches: tuple

    @property
    def labels(self):
        return tuple(l for l, _ in self.branches)


@dataclass(frozen=True, slots=True)
class Branch:
    chan: NameExpr
    branches: tuple

    @property
    def labels(self):
        return tuple(l for l, _ in self.branches)


@dataclass(frozen=True, slots=True)
class Par:
    left: "Process"
    right: "Process"


@dataclass(frozen=True, slots=True)
class Rec:
    var: str
    body: "Process"


@dataclass(frozen=True, slots=True)
class ProcVar:
    name: str


@dataclass(frozen=True, slots=True)
class Apply:
    fun: ValueExpr
    arg: NameExpr


@dataclass(frozen=True, slots=True)
class Restrict:
    name: str
    body: "Process"


@dataclass(frozen=True, slots=True)
class Nil:
    pass


Process = Union[Output, Input, Select, Branch, Par, Rec, ProcVar, Apply, Restrict, Nil]

NIL = Nil()


def show_process(p) -> str:
    if isinstance(p, Nil):
        return "0"
    if isinstance(p, Output):
        return f"{p.chan}!<{p.value}>.{_show_cont(p.cont)}"
    if isinstance(p, Input):
        return f"{p.chan}?({p.var}).{_show_cont(p.cont)}"
    if isinstance(p, (Select, Branch)):
        op = "+" if isinstance(p, Select) else "&"
        return f"{p.chan}{op}{{" + ", ".join(f"{l}: {show_process(q)}" for l, q in p.branches) + "}"
    if isinstance(p, Par):
        return f"({show_process(p.left)} | {show_process(p.right)})"
    if isinstance(p, Rec):
        return f"rec {p.var}. {show_process(p.body)}"
    if isinstance(p, ProcVar):
        return p.name
    if isinstance(p, Apply):
        fun = str(p.fun)
        return f"{fun}({p.arg})"
    if isinstance(p, Restrict):
        return f"(new {p.name}) {_show_cont(p.body)}"
    raise TypeError(p)


def _show_cont(p):
    s = show_process(p)
    return s if not isinstance(p, (Rec, Restrict)) else f"({s})"


# ---------------------------------------------------------------- substitution

def _map_value(v, on_var, on_chan, bound_vars):
    """Rebuild a value, rewriting free variables via on_var and channels via on_chan."""
    if isinstance(v, VarRef):
        if v.name in bound_vars:
            return v
        r = on_var(v.name)
        return v if r is None else r
    if isinstance(v, Abstraction):
        body = _map_proc(v.body, on_var, on_chan, bound_vars | {v.param})
        return v if body is v.body else Abstraction(v.param, body)
    if isinstance(v, Call):
        args = tuple(_map_value(a, on_var, on_chan, bound_vars) for a in v.args)
        return Call(v.fn, args)
    if isinstance(v, Endpoint):
        r = on_chan(v)
        return v if r is None else r
    return v


def _map_name(n, on_var, on_chan, bound_vars):
    if isinstance(n, NameVar):
        if n.name in bound_vars:
            return n
        r = on_chan(n)
        return n if r is None else r
    if isinstance(n, Endpoint):
        r = on_chan(n)
        return n if r is None else r
    return n


def _map_proc(p, on_var, on_chan, bound_vars):
    if isinstance(p, Output):
        return Output(_map_name(p.chan, on_var, on_chan, bound_vars),
                      _map_value(p.value, on_var, on_chan, bound_vars),
                      _map_proc(p.cont, on_var, on_chan, bound_vars))
    if isinstance(p, Input):
        return Input(_map_name(p.chan, on_var, on_chan, bound_vars), p.var,
                     _map_proc(p.cont, on_var, on_chan, bound_vars | {p.var}))
    if isinstance(p, (Select, Branch)):
        return type(p)(_map_name(p.chan, on_var, on_chan, bound_vars),
                       tuple((l, _map_proc(q, on_var, on_chan, bound_vars)) for l, q in p.branches))
    if isinstance(p, Par):
        return Par(_map_proc(p.left, on_var, on_chan, bound_vars),
                   _map_proc(p.right, on_var, on_chan, bound_vars))
    if isinstance(p, Rec):
        return Rec(p.var, _map_proc(p.body, on_var, on_chan, bound_vars))
    if isinstance(p, Apply):
        return Apply(_map_value(p.fun, on_var, on_chan, bound_vars),
                     _map_name(p.arg, on_var, on_chan, bound_vars))
    if isinstance(p, Restrict):
        return Restrict(p.name, _map_proc(p.body, on_var, on_chan, bound_vars | {p.name}))
    return p


def subst_channel(p, x: str, n) -> Process:
    """P{n/x} on channel and argument positions only (values keep x; the store resolves it)."""
    return _map_proc(p, lambda _: None,
                     lambda c: n if isinstance(c, NameVar) and c.name == x else None, frozenset())


def subst_name(p, x: str, n) -> Process:
    """P{n/x} everywhere: channel, argument and value positions."""
    as_value = n if not isinstance(n, NameVar) else VarRef(n.name)
    return _map_proc(p, lambda y: as_value if y == x else None,
                     lambda c: n if isinstance(c, NameVar) and c.name == x else None, frozenset())


def unsubst_endpoint(p, ep: Endpoint, x: str) -> Process:
    """Inverse of Init's substitution: P{x/s[p]}."""
    return _map_proc(p, lambda _: None, lambda c: NameVar(x) if c == ep else None, frozenset())


def rename_sessions(obj, mapping: dict):
    if not mapping:
        return obj

    def on_chan(c):
        if isinstance(c, Endpoint) and c.session in mapping:
            return Endpoint(mapping[c.session], c.role)
        return None
    if isinstance(obj, (Output, Input, Select, Branch, Par, Rec, ProcVar, Apply, Restrict, Nil)):
        return _map_proc(obj, lambda _: None, on_chan, frozenset())
    return _map_value(obj, lambda _: None, on_chan, frozenset())


def subst_procvar(p, X: str, repl) -> Process:
    if isinstance(p, ProcVar):
        return repl if p.name == X else p
    if isinstance(p, Rec):
        return p if p.var == X else Rec(p.var, subst_procvar(p.body, X, repl))
    if isinstance(p, Output):
        return Output(p.chan, p.value, subst_procvar(p.cont, X, repl))
    if isinstance(p, Input):
        return Input(p.chan, p.var, subst_procvar(p.cont, X, repl))
    if isinstance(p, (Select, Branch)):
        return type(p)(p.chan, tuple((l, subst_procvar(q, X, repl)) for l, q in p.branches))
    if isinstance(p, Par):
        return Par(subst_procvar(p.left, X, repl), subst_procvar(p.right, X, repl))
    if isinstance(p, Restrict):
        return Restrict(p.name, subst_procvar(p.body, X, repl))
    return p


def unfold_head(p) -> Process:
    """Unfold recursion at the head so that a prefix (or other constructor) is exposed."""
    n = 0
    while isinstance(p, Rec):
        p = subst_procvar(p.body, p.var, p)
        n += 1
        if n > 64:
            raise ValueError("unguarded process recursion")
    return p


def free_vars_value(v, bound=frozenset()) -> set:
    out = set()
    _map_value(v, lambda y: out.add(y), lambda c: out.add(c.name) if isinstance(c, NameVar) else None,
               frozenset(bound))
    return out


def free_vars(p) -> set:
    out = set()
    _map_proc(p, lambda y: out.add(y), lambda c: out.add(c.name) if isinstance(c, NameVar) else None,
              frozenset())
    return out


def endpoint_roles(obj) -> set:
    """Participant identities occurring as endpoints s[p] inside a process or value."""
    out = set()

    def on_chan(c):
        if isinstance(c, Endpoint):
            out.add(c.role)
    if isinstance(obj, (Output, Input, Select, Branch, Par, Rec, ProcVar, Apply, Restrict, Nil)):
        _map_proc(obj, lambda _: None, on_chan, frozenset())
    else:
        _map_value(obj, lambda _: None, on_chan, frozenset())
    return out


# ---------------------------------------------------------------- stores


@dataclass(frozen=True, slots=True)
class Store:
    items: tuple = ()

    @classmethod
    def of(cls, mapping: dict) -> "Store":
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self) -> dict:
        return dict(self.items)

    def __contains__(self, x):
        return any(k == x for k, _ in self.items)

    def get(self, x):
        for k, v in self.items:
            if k == x:
                return v
        raise UnboundVariable(x)

    def __str__(self):
        return "[" + ", ".join(f"{k}->{v}" for k, v in self.items) + "]"


def store_update(sigma: Store, x: str, v) -> Store:
    if x in sigma:
        raise DuplicateBinding(f"{x} is already bound")
    return Store(tuple(sorted(sigma.items + ((x, v),))))


def store_reverse(sigma: Store, x: str) -> Store:
    return Store(tuple(kv for kv in sigma.items if kv[0] != x))


def eval_value(v, sigma: Store):
    """sigma(V): resolve variables through the store, also inside abstraction bodies."""
    if isinstance(v, VarRef):
        return sigma.get(v.name)
    if isinstance(v, (Const, SharedName, Star, Endpoint, Label)):
        return v
    if isinstance(v, Call):
        return Call(v.fn, tuple(eval_value(a, sigma) for a in v.args))
    if isinstance(v, Abstraction):
        env = sigma.as_dict()
        return _map_value(v, lambda y: env.get(y), lambda _: None, frozenset())
    raise TypeError(v)


def eval_name(n, sigma: Store):
    """sigma(w) for the argument of an application."""
    if isinstance(n, NameVar):
        return sigma.get(n.name)
    return n


# ---------------------------------------------------------------- queues


@dataclass(frozen=True, slots=True)
class Reader:
    """Bookkeeping left on a consumed message so the input can be reinstated verbatim."""
    loc: str
    var: str | None = None
    used: str | None = None
    fold: Process | None = None


@dataclass(frozen=True, slots=True)
class Message:
    sender: str
    receiver: str
    payload: object
    src: object = None
    send_loc: str = ""
    send_fold: Process | None = None
    reader: Reader | None = None

    def __str__(self):
        return f"({self.sender},{self.receiver},{self.payload})"

    @property
    def is_label(self):
        return isinstance(self.payload, Label)

    def triple(self):
        return (self.sender, self.receiver, self.payload)


def _independent(m1: Message, m2: Message) -> bool:
    return m1.sender != m2.sender and m1.receiver != m2.receiver


def can_lead(h: tuple, i: int) -> bool:
    """Can h[i] be moved to the front by swapping independent neighbours?"""
    return all(_independent(h[j], h[i]) for j in range(i))


def can_trail(h: tuple, i: int) -> bool:
    return all(_independent(h[j], h[i]) for j in range(i + 1, len(h)))


def canonical_queue(h: tuple) -> tuple:
    """Lexicographic normal form of h modulo swapping independent adjacent messages."""
    rest = list(h)
    out = []
    while rest:
        best = None
        for i, m in enumerate(rest):
            if can_lead(rest, i) and (best is None or (m.sender, m.receiver) < (rest[best].sender, rest[best].receiver)):
                best = i
        out.append(rest.pop(best))
    return tuple(out)


def roles_in_queue(p: str, h: Iterable[Message]) -> set:
    out = set()
    for m in h:
        if m.receiver == p and isinstance(m.payload, Abstraction):
            out |= endpoint_roles(m.payload.body)
    return out


# ---------------------------------------------------------------- configuration nodes


@dataclass(frozen=True, slots=True)
class StackEntry:
    """Discarded alternatives of a committed select ('+') or branch ('&')."""
    kind: str
    chan: NameExpr
    branches: tuple
    order: tuple
    fold: Process | None = None

    def __str__(self):
        op = "+" if self.kind == "+" else "&"
        return f"{self.chan}{op}{{" + ", ".join(f"{l}: {show_process(q)}" for l, q in self.branches) + "}"


@dataclass(frozen=True, slots=True)
class Service:
    loc: str
    kind: str
    shared: str
    var: str
    annot: LocalType
    body: Process
    role: str
    protocol: GlobalType
    protocol_name: str = ""


@dataclass(frozen=True, slots=True)
class Running:
    loc: str
    role: str
    session: str
    stack: tuple
    body: Process


@dataclass(frozen=True, slots=True)
class Monitor:
    session: str
    role: str
    history: HistoryLocal
    tracked: tuple
    store: Store
    full: bool = False


@dataclass(frozen=True, slots=True)
class Queue:
    session: str
    past: tuple
    future: tuple
    requester: str = ""
    protocol: GlobalType | None = None
    protocol_name: str = ""
    shared: str = ""


@dataclass(frozen=True, slots=True)
class RunFun:
    key: str
    saved: Process
    loc: str


Node = Union[Service, Running, Monitor, Queue, RunFun]

_RANK = {Service: 0, Running: 1, Monitor: 2, Queue: 3, RunFun: 4}


@dataclass(frozen=True, slots=True)
class CPar:
    left: object
    right: object


@dataclass(frozen=True, slots=True)
class CRestrict:
    names: tuple
    body: object


@dataclass(frozen=True, slots=True)
class CNil:
    pass


@dataclass(frozen=True, slots=True)
class Config:
    """Normal form: restricted names, then parallel nodes in canonical order."""
    names: tuple
    nodes: tuple
    _hash: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.names, self.nodes)))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return show_config(self)

    # lookups used by the semantics
    def running(self):
        return [n for n in self.nodes if isinstance(n, Running)]

    def monitors(self):
        return [n for n in self.nodes if isinstance(n, Monitor)]

    def queues(self):
        return [n for n in self.nodes if isinstance(n, Queue)]

    def services(self):
        return [n for n in self.nodes if isinstance(n, Service)]

    def runfuns(self):
        return [n for n in self.nodes if isinstance(n, RunFun)]

    def monitor(self, session, role):
        for n in self.nodes:
            if isinstance(n, Monitor) and n.session == session and n.role == role:
                return n
        return None

    def queue(self, session):
        for n in self.nodes:
            if isinstance(n, Queue) and n.session == session:
                return n
        return None

    def running_at(self, loc):
        for n in self.nodes:
            if isinstance(n, Running) and n.loc == loc:
                return n
        return None


def node_key(n) -> tuple:
    rank = _RANK[type(n)]
    loc = getattr(n, "loc", "")
    role = getattr(n, "role", "")
    session = getattr(n, "session", "")
    return (rank, loc, role, session, repr(n))


def _node_sessions(n) -> set:
    out = set()
    if isinstance(n, (Running, Monitor, Queue)):
        out.add(n.session)
    return out


def _collect(m, names, nodes):
    if isinstance(m, Config):
        names.extend(m.names)
        nodes.extend(m.nodes)
    elif isinstance(m, CPar):
        _collect(m.left, names, nodes)
        _collect(m.right, names, nodes)
    elif isinstance(m, CRestrict):
        names.extend(m.names)
        _collect(m.body, names, nodes)
    elif isinstance(m, CNil) or m is None:
        pass
    elif isinstance(m, (list, tuple)):
        for x in m:
            _collect(x, names, nodes)
    else:
        nodes.append(m)


def _used_names(nodes) -> set:
    used = set()
    for n in nodes:
        if isinstance(n, (Running, Monitor, Queue)):
            used.add(n.session)
        if isinstance(n, Running):
            used.add(n.loc)
        if isinstance(n, RunFun):
            used.update((n.key, n.loc))
        if isinstance(n, Monitor):
            for f in n.history.frames:
                if isinstance(f, KeyMark):
                    used.add(f.key)
                elif isinstance(f, SpawnMark):
                    used.update((f.loc, f.left, f.right))
    return used


def normalize(m) -> Config:
    """Structural normal form: hoist and prune restrictions, flatten, canonical queues, sort,
    and rename restricted sessions and keys canonically."""
    names, nodes = [], []
    _collect(m, names, nodes)
    nodes = [_canon_node(n) for n in nodes]
    used = _used_names(nodes)
    names = sorted(set(x for x in names if x in used))
    nodes = _canonical_rename(names, nodes)
    names = sorted(set(names) & _used_names(nodes)) if names else []
    nodes.sort(key=node_key)
    return Config(tuple(names), tuple(nodes))


def _canon_node(n):
    if isinstance(n, Queue):
        past, fut = canonical_queue(n.past), canonical_queue(n.future)
        if past != n.past or fut != n.future:
            return replace(n, past=past, future=fut)
    return n


def _session_key(s, nodes):
    locs = sorted(n.loc for n in nodes if isinstance(n, Running) and n.session == s)
    q = next((n for n in nodes if isinstance(n, Queue) and n.session == s), None)
    shared = q.shared if q else ""
    return (shared, locs[0] if locs else "", s)


def _canonical_rename(names, nodes):
    restricted = set(names)
    sessions = sorted({s for n in nodes for s in _node_sessions(n) if s in restricted},
                      key=lambda s: _session_key(s, nodes))
    smap = {s: f"s{i}" for i, s in enumerate(sessions)}
    smap = {a: b for a, b in smap.items() if a != b}
    if smap:
        if set(smap.values()) & (set(names) - set(smap)):
            raise RuntimeError("session renaming collides with another restricted name")
        nodes = [_rename_node_sessions(n, smap) for n in nodes]
        names[:] = [smap.get(x, x) for x in names]
    keys = []
    mons = sorted((n for n in nodes if isinstance(n, Monitor)), key=lambda n: (n.session, n.role))
    for mon in mons:
        for f in mon.history.frames:
            if isinstance(f, KeyMark) and f.key in restricted and f.key not in keys:
                keys.append(f.key)
    for rf in sorted((n for n in nodes if isinstance(n, RunFun)), key=lambda n: (n.loc, n.key)):
        if rf.key not in keys and rf.key in restricted:
            keys.append(rf.key)
    kmap = {k: f"k{i}" for i, k in enumerate(keys)}
    kmap = {a: b for a, b in kmap.items() if a != b}
    if kmap:
        nodes = [_rename_node_keys(n, kmap) for n in nodes]
        names[:] = [kmap.get(x, x) for x in names]
    return nodes


def _rename_msg(m: Message, smap):
    return replace(m, payload=rename_sessions(m.payload, smap) if not isinstance(m.payload, Label) else m.payload,
                   src=rename_sessions(m.src, smap) if m.src is not None else None,
                   send_fold=rename_sessions(m.send_fold, smap) if m.send_fold is not None else None,
                   reader=replace(m.reader, fold=rename_sessions(m.reader.fold, smap))
                   if m.reader is not None and m.reader.fold is not None else m.reader)


def _rename_entry(e: StackEntry, smap):
    return replace(e, chan=rename_sessions(Output(e.chan, Star(), NIL), smap).chan,
                   branches=tuple((l, rename_sessions(q, smap)) for l, q in e.branches),
                   fold=rename_sessions(e.fold, smap) if e.fold is not None else None)


def _rename_node_sessions(n, smap):
    if isinstance(n, Running):
        return replace(n, session=smap.get(n.session, n.session), body=rename_sessions(n.body, smap),
                       stack=tuple(_rename_entry(e, smap) for e in n.stack))
    if isinstance(n, Monitor):
        store = Store(tuple((k, rename_sessions(v, smap)) for k, v in n.store.items))
        return replace(n, session=smap.get(n.session, n.session), store=store)
    if isinstance(n, Queue):
        return replace(n, session=smap.get(n.session, n.session),
                       past=tuple(_rename_msg(m, smap) for m in n.past),
                       future=tuple(_rename_msg(m, smap) for m in n.future))
    if isinstance(n, RunFun):
        return replace(n, saved=rename_sessions(n.saved, smap))
    return n


def _rename_node_keys(n, kmap):
    if isinstance(n, Monitor):
        return replace(n, history=n.history.rename(kmap))
    if isinstance(n, RunFun):
        return replace(n, key=kmap.get(n.key, n.key))
    return n


def par(*parts) -> Config:
    return normalize(list(parts))


def restrict(names, body) -> Config:
    return normalize(CRestrict(tuple(names), body))


def state_hash(m: Config) -> str:
    return hashlib.sha256(show_config(m).encode()).hexdigest()[:16]


# ---------------------------------------------------------------- observations


def is_stable(m) -> bool:
    m = m if isinstance(m, Config) else normalize(m)
    return all(not mon.full for mon in m.monitors()) and all(not q.future for q in m.queues())


def _top_components(p):
    p = unfold_head(p)
    if isinstance(p, Par):
        return _top_components(p.left) + _top_components(p.right)
    return [p]


def barbs(m) -> set:
    """Participants ready to output or select under an empty-tagged monitor facing that action."""
    m = m if isinstance(m, Config) else normalize(m)
    out = set()
    for r in m.running():
        for comp in _top_components(r.body):
            if isinstance(comp, (Output, Select)) and isinstance(comp.chan, Endpoint):
                ep = comp.chan
                mon = m.monitor(ep.session, ep.role)
                if mon is None or mon.full:
                    continue
                t = facing(mon.history)
                if (isinstance(comp, Output) and isinstance(t, LSend)) or \
                        (isinstance(comp, Select) and isinstance(t, LSelect)):
                    out.add(ep.role)
    return out


def session_roles(m: Config) -> set:
    return {mon.role for mon in m.monitors()}


# ---------------------------------------------------------------- printing


def _tag(full):
    return "<*>" if full else "<>"


def show_node(n) -> str:
    if isinstance(n, Service):
        op = "!" if n.kind == "request" else "?"
        proto = f"{n.protocol_name}." if n.protocol_name else ""
        return f"{n.loc}{{ {n.shared}{op}({n.var}: {proto}{n.role}).{show_process(n.body)} }}"
    if isinstance(n, Running):
        stack = ", ".join(str(e) for e in n.stack) or "0"
        return f"{n.loc}[{n.role}]< {stack} ; {show_process(n.body)} >"
    if isinstance(n, Monitor):
        tracked = ",".join(n.tracked)
        return f"{n.session}_{n.role}|_ {n.history} . {tracked} . {n.store} _|{_tag(n.full)}"
    if isinstance(n, Queue):
        past = " o ".join(map(str, n.past)) or "e"
        fut = " o ".join(map(str, n.future)) or "e"
        return f"{n.session}: ({past} * {fut})"
    if isinstance(n, RunFun):
        return f"{n.key}|_ {show_process(n.saved)}, {n.loc} _|"
    raise TypeError(n)


def show_config(m: Config) -> str:
    lines = []
    if m.names:
        lines.append("(new " + " ".join(m.names) + ")")
    lines.extend("  " + show_node(n) for n in m.nodes)
    return "\n".join(lines) if lines else "0"
