"""Forward and backward steps of global types carrying a cursor.

A history is a stack of frames describing how the cursor got where it is, plus a focus:
`Start(g)` is `^^g`, `MidEx` is `p->^^q:<U>.g`, `MidChoice` is `p->^^q:{...}` with a chosen label.
Exchange frames record finished exchanges, choice frames record committed choices with their
discarded alternatives, unfold frames record where a recursion was opened so that going back
folds it again.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Union

from .types import GChoice, GEnd, GExchange, GRec, GlobalType, ValueType, substitute


@dataclass(frozen=True, slots=True)
class ExFrame:
    sender: str
    receiver: str
    payload: ValueType


@dataclass(frozen=True, slots=True)
class ChoiceFrame:
    sender: str
    receiver: str
    branches: tuple
    chosen: str


@dataclass(frozen=True, slots=True)
class UnfoldFrame:
    rec: GRec


Frame = Union[ExFrame, ChoiceFrame, UnfoldFrame]


@dataclass(frozen=True, slots=True)
class Start:
    g: GlobalType


@dataclass(frozen=True, slots=True)
class MidEx:
    sender: str
    receiver: str
    payload: ValueType
    cont: GlobalType


@dataclass(frozen=True, slots=True)
class MidChoice:
    sender: str
    receiver: str
    branches: tuple
    chosen: str


Focus = Union[Start, MidEx, MidChoice]


@dataclass(frozen=True, slots=True)
class HistoryGlobal:
    frames: tuple
    focus: Focus

    def __str__(self):
        return show_history(self)


@dataclass(frozen=True, slots=True)
class GlobalLabel:
    rule: str
    sender: str
    receiver: str
    label: str | None = None

    @property
    def forward(self) -> bool:
        return self.rule.startswith("F")

    def inverse(self) -> "GlobalLabel":
        flip = {"F": "B", "B": "F"}
        return GlobalLabel(flip[self.rule[0]] + self.rule[1:], self.sender, self.receiver, self.label)


def start(g: GlobalType) -> HistoryGlobal:
    return HistoryGlobal((), Start(g))


def _open(frames, g):
    """Expose the head of g, pushing unfold frames for every recursion opened."""
    while isinstance(g, GRec):
        frames = frames + (UnfoldFrame(g),)
        g = substitute(g.body, g.var, g)
    return frames, g


def _close(frames, focus):
    """Canonical form: never leave the cursor right after an unfold frame."""
    while frames and isinstance(frames[-1], UnfoldFrame) and isinstance(focus, Start):
        focus = Start(frames[-1].rec)
        frames = frames[:-1]
    return HistoryGlobal(frames, focus)


def global_forward(h: HistoryGlobal) -> list:
    out = []
    f = h.focus
    if isinstance(f, Start):
        frames, g = _open(h.frames, f.g)
        if isinstance(g, GExchange):
            out.append((GlobalLabel("FVal1", g.sender, g.receiver),
                        HistoryGlobal(frames, MidEx(g.sender, g.receiver, g.payload, g.cont))))
        elif isinstance(g, GChoice):
            for l in g.labels:
                out.append((GlobalLabel("FCho1", g.sender, g.receiver, l),
                            HistoryGlobal(frames, MidChoice(g.sender, g.receiver, g.branches, l))))
    elif isinstance(f, MidEx):
        out.append((GlobalLabel("FVal2", f.sender, f.receiver),
                    HistoryGlobal(h.frames + (ExFrame(f.sender, f.receiver, f.payload),), Start(f.cont))))
    elif isinstance(f, MidChoice):
        nxt = dict(f.branches)[f.chosen]
        out.append((GlobalLabel("FCho2", f.sender, f.receiver, f.chosen),
                    HistoryGlobal(h.frames + (ChoiceFrame(f.sender, f.receiver, f.branches, f.chosen),),
                                  Start(nxt))))
    return out


def global_backward(h: HistoryGlobal) -> list:
    out = []
    f = h.focus
    if isinstance(f, MidEx):
        g = GExchange(f.sender, f.receiver, f.payload, f.cont)
        out.append((GlobalLabel("BVal1", f.sender, f.receiver), _close(h.frames, Start(g))))
    elif isinstance(f, MidChoice):
        g = GChoice(f.sender, f.receiver, f.branches)
        out.append((GlobalLabel("BCho1", f.sender, f.receiver, f.chosen), _close(h.frames, Start(g))))
    elif isinstance(f, Start) and h.frames:
        last = h.frames[-1]
        if isinstance(last, ExFrame):
            out.append((GlobalLabel("BVal2", last.sender, last.receiver),
                        HistoryGlobal(h.frames[:-1], MidEx(last.sender, last.receiver, last.payload, f.g))))
        elif isinstance(last, ChoiceFrame):
            out.append((GlobalLabel("BCho2", last.sender, last.receiver, last.chosen),
                        HistoryGlobal(h.frames[:-1],
                                      MidChoice(last.sender, last.receiver, last.branches, last.chosen))))
    return out


def global_reachable(g: GlobalType, depth: int) -> set:
    init = start(g)
    seen = {init}
    frontier = deque([(init, 0)])
    while frontier:
        h, d = frontier.popleft()
        if d >= depth:
            continue
        for _, h2 in global_forward(h) + global_backward(h):
            if h2 not in seen:
                seen.add(h2)
                frontier.append((h2, d + 1))
    return seen


def is_finished(h: HistoryGlobal) -> bool:
    return isinstance(h.focus, Start) and isinstance(h.focus.g, GEnd)


# ---------------------------------------------------------------- reading back

def plug(h: HistoryGlobal, hole: GlobalType | None = None) -> GlobalType:
    """Forget the cursor: rebuild the global type, optionally replacing what follows the cursor.

    With hole=None the original type is rebuilt; with hole=GEnd() this is the context filled
    with end, used when comparing histories up to swapping."""
    f = h.focus
    if isinstance(f, Start):
        g = f.g if hole is None else hole
    elif isinstance(f, MidEx):
        g = GExchange(f.sender, f.receiver, f.payload, f.cont) if hole is None else hole
    else:
        g = GChoice(f.sender, f.receiver, f.branches) if hole is None else hole
    for fr in reversed(h.frames):
        if isinstance(fr, ExFrame):
            g = GExchange(fr.sender, fr.receiver, fr.payload, g)
        elif isinstance(fr, ChoiceFrame):
            g = GChoice(fr.sender, fr.receiver,
                        tuple((l, g if l == fr.chosen else b) for l, b in fr.branches))
        else:
            g = fr.rec if hole is None else g
    return g


def future(h: HistoryGlobal) -> GlobalType | None:
    """The global type after the cursor when the cursor sits between actions."""
    return h.focus.g if isinstance(h.focus, Start) else None


def show_history(h: HistoryGlobal) -> str:
    f = h.focus
    if isinstance(f, Start):
        inner = f"^^{f.g}"
    elif isinstance(f, MidEx):
        inner = f"{f.sender} -> ^^{f.receiver} : <{f.payload}>. {f.cont}"
    else:
        alts = ", ".join(f"{l}: {b}" for l, b in f.branches if l != f.chosen)
        chosen = f"{f.chosen}: {dict(f.branches)[f.chosen]}"
        inner = f"{f.sender} -> ^^{f.receiver} : {{{alts}; {chosen}}}" if alts else \
            f"{f.sender} -> ^^{f.receiver} : {{{chosen}}}"
    for fr in reversed(h.frames):
        if isinstance(fr, ExFrame):
            inner = f"{fr.sender} -> {fr.receiver} : <{fr.payload}>. {inner}"
        elif isinstance(fr, ChoiceFrame):
            alts = ", ".join(f"{l}: {b}" for l, b in fr.branches if l != fr.chosen)
            sep = f"{alts}; " if alts else ""
            inner = f"{fr.sender} -> {fr.receiver} : {{{sep}{fr.chosen}: {inner}}}"
        else:
            inner = f"[{fr.rec.var}] {inner}"
    return inner
