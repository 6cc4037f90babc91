"""Transitions with stamps, concurrency, residuals, trace equivalence and causal consistency."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations_with_replacement

from .atomic import ATOMIC_FORWARD, INVERSE, atomic_steps, explore_atomic
from .decoupled import Redex
from .errors import BudgetExhausted, NotCoinitial, ResidualMissing, RevchorError
from .runtime import Config, normalize, state_hash

DEFAULT_REWRITE_BUDGET = 100_000
_SYNC = ("AC", "AS", "RAC", "RAS")


def stamp(r: Redex, with_locations: bool = True) -> frozenset:
    """The set of locations and participants a step touches.

    Session set-up touches the locations of all parties, synchronisations touch the two
    participants, applications and spawns touch the location and the participant. With
    `with_locations`, synchronisations also touch the two threads that perform them; without it
    a session set-up and the first exchange of that session look independent although one
    disables the other (see tests)."""
    if r.rule in ("Init", "RInit"):
        return frozenset(("loc", l) for l in r.subjects)
    if r.rule in _SYNC:
        out = {("role", p) for p in r.subjects}
        if with_locations:
            out |= {("loc", l) for l in r.locs}
        return frozenset(out)
    return frozenset({("loc", l) for l in r.locs} | {("role", p) for p in r.subjects})


@dataclass(frozen=True)
class Transition:
    source: Config
    redex: Redex
    target: Config

    @property
    def rule(self):
        return self.redex.rule

    @property
    def forward(self) -> bool:
        return self.redex.rule in ATOMIC_FORWARD

    def stamp(self, with_locations: bool = True) -> frozenset:
        return stamp(self.redex, with_locations)

    def __str__(self):
        return str(self.redex)


def transitions_from(m: Config) -> list:
    return [Transition(m, r, n) for r, n in atomic_steps(m)]


def _inverse_redex(r: Redex) -> Redex:
    return Redex(INVERSE[r.rule], r.session, r.subjects, r.label, r.locs)


def reverse(t: Transition) -> Transition:
    """The inverse step leading back to the source, which the loop property guarantees."""
    inv = _inverse_redex(t.redex)
    for r, n in atomic_steps(t.target):
        if r == inv and n == t.source:
            return Transition(t.target, r, n)
    raise RevchorError(f"no inverse of {t} from its target")


def concurrent(t1: Transition, t2: Transition, with_locations: bool = True) -> bool:
    if t1.source != t2.source:
        raise NotCoinitial("transitions do not share a source")
    return not (t1.stamp(with_locations) & t2.stamp(with_locations))


def residual(t2: Transition, t1: Transition) -> Transition:
    """t2 after t1: the step with t2's identity enabled at the target of t1."""
    if t1.source != t2.source:
        raise NotCoinitial("transitions do not share a source")
    for r, n in atomic_steps(t1.target):
        if r == t2.redex:
            return Transition(t1.target, r, n)
    raise ResidualMissing(f"{t2} is not enabled after {t1}")


@dataclass(frozen=True)
class Trace:
    start: Config
    steps: tuple = ()

    @property
    def target(self) -> Config:
        return self.steps[-1].target if self.steps else self.start

    def then(self, t: Transition) -> "Trace":
        if t.source != self.target:
            raise RevchorError("transition does not compose with the trace")
        return Trace(self.start, self.steps + (t,))

    def reversed(self) -> "Trace":
        return Trace(self.target, tuple(reverse(t) for t in reversed(self.steps)))

    def __len__(self):
        return len(self.steps)

    def __str__(self):
        return "; ".join(map(str, self.steps)) or "e"


def _cancels(a: Transition, b: Transition) -> bool:
    return b.target == a.source and b.redex == _inverse_redex(a.redex)


def _swaps(a: Transition, b: Transition):
    """Rewrite a;b into b';a' when b is the residual of a concurrent step after a."""
    if a.stamp() & b.stamp():
        return None
    for r, n in atomic_steps(a.source):
        if r != b.redex:
            continue
        for r2, n2 in atomic_steps(n):
            if r2 == a.redex and n2 == b.target:
                return Transition(a.source, r, n), Transition(n, r2, n2)
    return None


def _key(word):
    return tuple((state_hash(t.source), t.redex) for t in word)


def reduces_to_empty(word: tuple, budget: int = DEFAULT_REWRITE_BUDGET) -> bool:
    """Can the loop `word` be rewritten to the empty trace by swaps of concurrent neighbours and
    cancellations of a step followed by its inverse? The search never lengthens the word."""
    if not word:
        return True
    seen = {_key(word)}
    frontier = deque([word])
    while frontier:
        w = frontier.popleft()
        for i in range(len(w) - 1):
            a, b = w[i], w[i + 1]
            candidates = []
            if _cancels(a, b):
                candidates.append(w[:i] + w[i + 2:])
            sw = _swaps(a, b)
            if sw is not None:
                candidates.append(w[:i] + sw + w[i + 2:])
            for c in candidates:
                if not c:
                    return True
                k = _key(c)
                if k not in seen:
                    if len(seen) >= budget:
                        raise BudgetExhausted(f"trace equivalence needed more than {budget} rewrites")
                    seen.add(k)
                    frontier.append(c)
    return False


def trace_equivalent(r1: Trace, r2: Trace, budget: int = DEFAULT_REWRITE_BUDGET) -> bool:
    if r1.start != r2.start:
        raise NotCoinitial("traces do not share a start")
    if r1.target != r2.target:
        return False
    return reduces_to_empty(r1.steps + r2.reversed().steps, budget)


def rearrange(r: Trace) -> tuple:
    """Split r into a backward-only trace followed by a forward-only one, r ~ backward;forward.

    Repeatedly takes the first forward step immediately followed by a backward step and either
    cancels the pair or commutes it."""
    steps = list(r.steps)
    while True:
        for i in range(len(steps) - 1):
            a, b = steps[i], steps[i + 1]
            if a.forward and not b.forward:
                if _cancels(a, b):
                    steps[i:i + 2] = []
                else:
                    sw = _swaps(a, b)
                    if sw is None:
                        raise ResidualMissing(f"cannot move {b} before {a}")
                    steps[i:i + 2] = list(sw)
                break
        else:
            break
    split = next((i for i, t in enumerate(steps) if t.forward), len(steps))
    back = Trace(r.start, tuple(steps[:split]))
    fwd = Trace(back.target, tuple(steps[split:]))
    return back, fwd


def all_traces(m0: Config, maxlen: int) -> list:
    m0 = normalize(m0)
    out = [Trace(m0)]
    layer = [Trace(m0)]
    cache = {}
    for _ in range(maxlen):
        nxt = []
        for tr in layer:
            m = tr.target
            if m not in cache:
                cache[m] = transitions_from(m)
            for t in cache[m]:
                nxt.append(Trace(tr.start, tr.steps + (t,)))
        out.extend(nxt)
        layer = nxt
    return out


@dataclass
class CausalReport:
    pairs_checked: int = 0
    equivalent_and_cofinal: int = 0
    violations: list = None

    def to_json(self) -> dict:
        return {"schema": "revchor.causal/1", "pairs_checked": self.pairs_checked,
                "equivalent_and_cofinal": self.equivalent_and_cofinal, "violations": self.violations}


def check_causal_consistency(m0: Config, maxlen: int = 4, budget: int = DEFAULT_REWRITE_BUDGET,
                             limit: int = 20) -> CausalReport:
    """Every pair of coinitial traces up to maxlen: equivalent exactly when cofinal."""
    traces = all_traces(m0, maxlen)
    rep = CausalReport(violations=[])
    memo = {}
    for a, b in combinations_with_replacement(range(len(traces)), 2):
        r1, r2 = traces[a], traces[b]
        rep.pairs_checked += 1
        cofinal = r1.target == r2.target
        if cofinal:
            word = r1.steps + r2.reversed().steps
            k = _key(word)
            if k not in memo:
                memo[k] = reduces_to_empty(word, budget)
            equiv = memo[k]
        else:
            equiv = False
        if equiv and cofinal:
            rep.equivalent_and_cofinal += 1
        if equiv != cofinal and len(rep.violations) < limit:
            rep.violations.append({"left": str(r1), "right": str(r2), "equivalent": equiv,
                                   "cofinal": cofinal})
    return rep


def check_square(m0: Config, depth: int, with_locations: bool = True, limit: int = 20) -> dict:
    """For every explored state, every pair of distinct concurrent steps closes into a square."""
    lts = explore_atomic(m0, depth)
    pairs, violations = 0, []
    for m in lts.states:
        ts = transitions_from(m)
        for i in range(len(ts)):
            for j in range(i + 1, len(ts)):
                t1, t2 = ts[i], ts[j]
                if not concurrent(t1, t2, with_locations):
                    continue
                pairs += 1
                try:
                    a, b = residual(t2, t1), residual(t1, t2)
                    ok = a.target == b.target
                except ResidualMissing:
                    ok = False
                if not ok and len(violations) < limit:
                    violations.append({"state": state_hash(m), "first": str(t1), "second": str(t2)})
    return {"schema": "revchor.square/1", "states": len(lts.states), "pairs_checked": pairs,
            "violations": violations}
