"""Local types with history: a type context (frames, outermost first) and the type after the cursor."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .types import LBranch, LRec, LRecv, LSelect, LSend, LocalType, ValueType, substitute


@dataclass(frozen=True, slots=True)
class Prefix:
    """A performed action: '!' output or '?' input."""
    dir: str
    peer: str
    payload: ValueType

    def __str__(self):
        return f"{self.peer}{self.dir}<{self.payload}>"


@dataclass(frozen=True, slots=True)
class Committed:
    """A committed choice: '+' select or '&' branch, with all alternatives and the chosen label."""
    kind: str
    peer: str
    branches: tuple
    chosen: str


@dataclass(frozen=True, slots=True)
class KeyMark:
    key: str

    def __str__(self):
        return self.key


@dataclass(frozen=True, slots=True)
class SpawnMark:
    loc: str
    left: str
    right: str
    prev: object = None

    def __str__(self):
        return f"({self.loc},{self.left},{self.right})"


@dataclass(frozen=True, slots=True)
class Unfolded:
    rec: LRec


LFrame = Union[Prefix, Committed, KeyMark, SpawnMark, Unfolded]


@dataclass(frozen=True, slots=True)
class HistoryLocal:
    frames: tuple
    focus: LocalType

    def __str__(self):
        return show_local_history(self)

    @property
    def at_start(self) -> bool:
        return not self.frames

    @property
    def last(self):
        return self.frames[-1] if self.frames else None

    def rename(self, mapping: dict) -> "HistoryLocal":
        if not mapping:
            return self
        frames = tuple(KeyMark(mapping.get(f.key, f.key)) if isinstance(f, KeyMark) else f
                       for f in self.frames)
        return HistoryLocal(frames, self.focus)


def initial(t: LocalType) -> HistoryLocal:
    return HistoryLocal((), t)


def opened(h: HistoryLocal):
    """(frames, head) with recursion at the cursor unfolded; frames gain unfold marks."""
    frames, t = h.frames, h.focus
    while isinstance(t, LRec):
        frames = frames + (Unfolded(t),)
        t = substitute(t.body, t.var, t)
    return frames, t


def facing(h: HistoryLocal) -> LocalType:
    """The action the cursor currently faces (after unfolding)."""
    return opened(h)[1]


def advance(h: HistoryLocal, frame, rest: LocalType) -> HistoryLocal:
    frames, _ = opened(h)
    return HistoryLocal(frames + (frame,), rest)


def push_mark(h: HistoryLocal, mark) -> HistoryLocal:
    return HistoryLocal(h.frames + (mark,), h.focus)


def retreat(h: HistoryLocal) -> HistoryLocal:
    """Move the cursor back over the last frame, re-folding recursion; inverse of advance/push_mark."""
    last = h.frames[-1]
    frames = h.frames[:-1]
    if isinstance(last, Prefix):
        cls = LSend if last.dir == "!" else LRecv
        focus = cls(last.peer, last.payload, h.focus)
    elif isinstance(last, Committed):
        focus = (LSelect if last.kind == "+" else LBranch)(last.peer, last.branches)
    else:
        focus = h.focus
    while frames and isinstance(frames[-1], Unfolded):
        focus = frames[-1].rec
        frames = frames[:-1]
    return HistoryLocal(frames, focus)


def committed_count(h: HistoryLocal) -> int:
    return sum(1 for f in h.frames if isinstance(f, Committed))


def show_local_history(h: HistoryLocal) -> str:
    inner = f"^^{h.focus}"
    for fr in reversed(h.frames):
        if isinstance(fr, Committed):
            alts = ", ".join(f"{l}: {b}" for l, b in fr.branches if l != fr.chosen)
            sep = f"{alts}; " if alts else ""
            inner = f"{fr.peer}{fr.kind}{{{sep}{fr.chosen}: {inner}}}"
        elif isinstance(fr, Unfolded):
            inner = f"[{fr.rec.var}] {inner}"
        else:
            inner = f"{fr}. {inner}"
    return inner
