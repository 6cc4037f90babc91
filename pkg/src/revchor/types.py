"""Global and local session types: syntax, projection, regular-tree equality, swapping."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import BudgetExhausted, MalformedType, ProjectionUndefined

BASE_KINDS = ("bool", "nat", "str")


# ---------------------------------------------------------------- value types

@dataclass(frozen=True, slots=True)
class Base:
    """A first-order payload type. `name` is what the source wrote (possibly an alias),
    `kind` is the underlying carrier."""
    name: str
    kind: str = ""

    def __post_init__(self):
        if not self.kind:
            object.__setattr__(self, "kind", self.name)
        if self.kind not in BASE_KINDS:
            raise MalformedType(f"unknown base kind {self.kind!r}")

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Arrow:
    """Higher-order payload T -> <>; the thunk type is Arrow(LEnd())."""
    arg: "LocalType"

    def __str__(self):
        return "{{" + str(self.arg) + "}}"


ValueType = Union[Base, Arrow]

NAT, BOOL, STR = Base("nat"), Base("bool"), Base("str")


def is_first_order(u: ValueType) -> bool:
    return isinstance(u, Base)


# ---------------------------------------------------------------- helpers

def _check_branches(branches, what):
    if not branches:
        raise MalformedType(f"{what}: empty branch map")
    labels = [l for l, _ in branches]
    if len(set(labels)) != len(labels):
        raise MalformedType(f"{what}: duplicate labels {labels}")


def _show_branches(branches):
    return "{" + ", ".join(f"{l}: {t}" for l, t in branches) + "}"


class _Branching:
    __slots__ = ()

    @property
    def labels(self) -> tuple:
        return tuple(l for l, _ in self.branches)

    def branch(self, label):
        for l, t in self.branches:
            if l == label:
                return t
        raise KeyError(label)


# ---------------------------------------------------------------- global types

@dataclass(frozen=True, slots=True)
class GExchange:
    sender: str
    receiver: str
    payload: ValueType
    cont: "GlobalType"

    def __post_init__(self):
        if self.sender == self.receiver:
            raise MalformedType(f"self-exchange on {self.sender}")

    def __str__(self):
        return f"{self.sender} -> {self.receiver} : <{self.payload}>. {self.cont}"


@dataclass(frozen=True, slots=True)
class GChoice(_Branching):
    sender: str
    receiver: str
    branches: tuple

    def __post_init__(self):
        if self.sender == self.receiver:
            raise MalformedType(f"self-choice on {self.sender}")
        _check_branches(self.branches, "choice")

    def __str__(self):
        return f"{self.sender} -> {self.receiver} : {_show_branches(self.branches)}"


@dataclass(frozen=True, slots=True)
class GRec:
    var: str
    body: "GlobalType"

    def __str__(self):
        return f"rec {self.var}. {self.body}"


@dataclass(frozen=True, slots=True)
class GVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class GEnd:
    def __str__(self):
        return "end"


GlobalType = Union[GExchange, GChoice, GRec, GVar, GEnd]


# ---------------------------------------------------------------- local types

@dataclass(frozen=True, slots=True)
class LSend:
    peer: str
    payload: ValueType
    cont: "LocalType"

    def __str__(self):
        return f"{self.peer}!<{self.payload}>. {self.cont}"


@dataclass(frozen=True, slots=True)
class LRecv:
    peer: str
    payload: ValueType
    cont: "LocalType"

    def __str__(self):
        return f"{self.peer}?<{self.payload}>. {self.cont}"


@dataclass(frozen=True, slots=True)
class LSelect(_Branching):
    peer: str
    branches: tuple

    def __post_init__(self):
        _check_branches(self.branches, "select")

    def __str__(self):
        return f"{self.peer}+{_show_branches(self.branches)}"


@dataclass(frozen=True, slots=True)
class LBranch(_Branching):
    peer: str
    branches: tuple

    def __post_init__(self):
        _check_branches(self.branches, "branch")

    def __str__(self):
        return f"{self.peer}&{_show_branches(self.branches)}"


@dataclass(frozen=True, slots=True)
class LRec:
    var: str
    body: "LocalType"

    def __str__(self):
        return f"rec {self.var}. {self.body}"


@dataclass(frozen=True, slots=True)
class LVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class LEnd:
    def __str__(self):
        return "end"


LocalType = Union[LSend, LRecv, LSelect, LBranch, LRec, LVar, LEnd]

THUNK = Arrow(LEnd())

_REC = (GRec, LRec)
_VAR = (GVar, LVar)


# ---------------------------------------------------------------- structure

def children(t):
    """Immediate sub-types (continuations and branches), not payloads."""
    if isinstance(t, (GExchange, LSend, LRecv)):
        return (t.cont,)
    if isinstance(t, (GChoice, LSelect, LBranch)):
        return tuple(b for _, b in t.branches)
    if isinstance(t, _REC):
        return (t.body,)
    return ()


def rebuild(t, kids):
    if isinstance(t, GExchange):
        return GExchange(t.sender, t.receiver, t.payload, kids[0])
    if isinstance(t, LSend):
        return LSend(t.peer, t.payload, kids[0])
    if isinstance(t, LRecv):
        return LRecv(t.peer, t.payload, kids[0])
    if isinstance(t, GChoice):
        return GChoice(t.sender, t.receiver, tuple(zip(t.labels, kids)))
    if isinstance(t, LSelect):
        return LSelect(t.peer, tuple(zip(t.labels, kids)))
    if isinstance(t, LBranch):
        return LBranch(t.peer, tuple(zip(t.labels, kids)))
    if isinstance(t, GRec):
        return GRec(t.var, kids[0])
    if isinstance(t, LRec):
        return LRec(t.var, kids[0])
    return t


def participants(g: GlobalType) -> frozenset:
    out = set()
    stack = [g]
    while stack:
        t = stack.pop()
        if isinstance(t, (GExchange, GChoice)):
            out.update((t.sender, t.receiver))
        stack.extend(children(t))
    return frozenset(out)


def free_type_vars(t) -> frozenset:
    if isinstance(t, _VAR):
        return frozenset((t.name,))
    if isinstance(t, _REC):
        return free_type_vars(t.body) - {t.var}
    out = frozenset()
    for k in children(t):
        out |= free_type_vars(k)
    return out


def substitute(t, var: str, repl):
    """t{repl/var}. Recursion binders shadow; repl is closed in practice so no capture."""
    if isinstance(t, _VAR):
        return repl if t.name == var else t
    if isinstance(t, _REC) and t.var == var:
        return t
    kids = children(t)
    if not kids:
        return t
    return rebuild(t, [substitute(k, var, repl) for k in kids])


def unfold(t):
    """Unfold top-level recursion until the head is a communication, a variable or end."""
    seen = 0
    while isinstance(t, _REC):
        t = substitute(t.body, t.var, t)
        seen += 1
        if seen > 64:
            raise MalformedType("unguarded recursion")
    return t


def check_guarded(t, _unguarded=frozenset()):
    """Raise MalformedType if some recursion variable occurs unguarded or free."""
    def walk(t, bound, unguarded):
        if isinstance(t, _VAR):
            if t.name not in bound:
                raise MalformedType(f"free type variable {t.name}")
            if t.name in unguarded:
                raise MalformedType(f"unguarded recursion variable {t.name}")
            return
        if isinstance(t, _REC):
            walk(t.body, bound | {t.var}, unguarded | {t.var})
            return
        for k in children(t):
            walk(k, bound, frozenset())
        for u in payloads(t):
            if isinstance(u, Arrow):
                check_guarded(u.arg)
    walk(t, frozenset(), frozenset())


def payloads(t):
    if isinstance(t, (GExchange, LSend, LRecv)):
        return (t.payload,)
    return ()


# ---------------------------------------------------------------- projection

def project(g: GlobalType, r: str) -> LocalType:
    if isinstance(g, GExchange):
        cont = project(g.cont, r)
        if r == g.sender:
            return LSend(g.receiver, g.payload, cont)
        if r == g.receiver:
            return LRecv(g.sender, g.payload, cont)
        return cont
    if isinstance(g, GChoice):
        projs = [(l, project(b, r)) for l, b in g.branches]
        if r == g.sender:
            return LSelect(g.receiver, tuple(projs))
        if r == g.receiver:
            return LBranch(g.sender, tuple(projs))
        first = projs[0][1]
        for l, t in projs[1:]:
            if not type_equal(first, t):
                raise ProjectionUndefined(
                    f"{r} is not involved in the choice {g.sender}->{g.receiver} "
                    f"but its behaviour differs between {projs[0][0]} and {l}")
        return first
    if isinstance(g, GRec):
        if r in participants(g.body):
            return LRec(g.var, project(g.body, r))
        return LEnd()
    if isinstance(g, GVar):
        return LVar(g.name)
    if isinstance(g, GEnd):
        return LEnd()
    raise TypeError(g)


# ---------------------------------------------------------------- equality

def value_type_equal(a: ValueType, b: ValueType) -> bool:
    if isinstance(a, Base) and isinstance(b, Base):
        return a == b
    if isinstance(a, Arrow) and isinstance(b, Arrow):
        return type_equal(a.arg, b.arg)
    return False


def _head(t):
    """Constructor signature used by the bisimulation: everything but the continuations."""
    if isinstance(t, GExchange):
        return ("gx", t.sender, t.receiver)
    if isinstance(t, GChoice):
        return ("gc", t.sender, t.receiver, frozenset(t.labels))
    if isinstance(t, LSend):
        return ("!", t.peer)
    if isinstance(t, LRecv):
        return ("?", t.peer)
    if isinstance(t, LSelect):
        return ("+", t.peer, frozenset(t.labels))
    if isinstance(t, LBranch):
        return ("&", t.peer, frozenset(t.labels))
    if isinstance(t, _VAR):
        return ("var", t.name)
    return ("end",)


def _paired_children(a, b):
    if isinstance(a, (GChoice, LSelect, LBranch)):
        return [(ta, b.branch(l)) for l, ta in a.branches]
    return list(zip(children(a), children(b)))


def type_equal(a, b) -> bool:
    """Equality of the regular trees denoted by two (global or local) types."""
    seen = set()
    todo = [(a, b)]
    while todo:
        x, y = todo.pop()
        if (x, y) in seen:
            continue
        seen.add((x, y))
        x, y = unfold(x), unfold(y)
        if _head(x) != _head(y):
            return False
        for u, v in zip(payloads(x), payloads(y)):
            if not value_type_equal(u, v):
                return False
        todo.extend(_paired_children(x, y))
    return True


# ---------------------------------------------------------------- swapping

def _disjoint(t1, t2):
    return not ({t1.sender, t1.receiver} & {t2.sender, t2.receiver})


def _swap_roots(g) -> Iterator:
    """All results of applying one swapping axiom (either direction) at the root of g."""
    if isinstance(g, GExchange):
        inner = g.cont
        if isinstance(inner, GExchange) and _disjoint(g, inner):
            yield GExchange(inner.sender, inner.receiver, inner.payload,
                            GExchange(g.sender, g.receiver, g.payload, inner.cont))
        if isinstance(inner, GChoice) and _disjoint(g, inner):
            yield GChoice(inner.sender, inner.receiver, tuple(
                (l, GExchange(g.sender, g.receiver, g.payload, b)) for l, b in inner.branches))
    if isinstance(g, GChoice):
        firsts = [b for _, b in g.branches]
        # an exchange common to every branch can be pulled in front of the choice
        f0 = firsts[0]
        if isinstance(f0, GExchange) and _disjoint(g, f0) and all(
                isinstance(b, GExchange) and (b.sender, b.receiver, b.payload)
                == (f0.sender, f0.receiver, f0.payload) for b in firsts):
            yield GExchange(f0.sender, f0.receiver, f0.payload, GChoice(
                g.sender, g.receiver, tuple((l, b.cont) for l, b in g.branches)))
        # nested choices between disjoint pairs commute when every branch agrees on the inner choice
        if isinstance(f0, GChoice) and _disjoint(g, f0) and all(
                isinstance(b, GChoice) and (b.sender, b.receiver) == (f0.sender, f0.receiver)
                and b.labels == f0.labels for b in firsts):
            yield GChoice(f0.sender, f0.receiver, tuple(
                (lj, GChoice(g.sender, g.receiver, tuple(
                    (li, bi.branch(lj)) for li, bi in g.branches)))
                for lj in f0.labels))


def swap_neighbours(g) -> Iterator:
    """One swapping step anywhere in g (congruence closure)."""
    yield from _swap_roots(g)
    kids = children(g)
    for i, k in enumerate(kids):
        for k2 in swap_neighbours(k):
            yield rebuild(g, kids[:i] + (k2,) + kids[i + 1:])


def swap_closure(g, budget: int = 256):
    """Breadth-first closure of g under swapping. Returns (states, complete)."""
    seen = {g}
    queue = deque([g])
    while queue:
        cur = queue.popleft()
        for nxt in swap_neighbours(cur):
            if nxt not in seen:
                if len(seen) >= budget:
                    return seen, False
                seen.add(nxt)
                queue.append(nxt)
    return seen, True


def swap_equivalent(a, b, budget: int = 256) -> bool:
    if a == b:
        return True
    seen = {a}
    queue = deque([a])
    while queue:
        cur = queue.popleft()
        for nxt in swap_neighbours(cur):
            if nxt == b:
                return True
            if nxt not in seen:
                if len(seen) >= budget:
                    raise BudgetExhausted(f"swap closure exceeded {budget} states")
                seen.add(nxt)
                queue.append(nxt)
    return False
