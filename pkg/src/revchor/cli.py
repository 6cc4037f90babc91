"""Command line front end: parse, project, step through, explore and check programs.

Exit codes: 0 success, 1 a property was violated, 2 a budget ran out or the program is outside
the first-order fragment a check supports, 3 bad input.
"""
from __future__ import annotations

import json
import sys

import click

from . import atomic as at
from . import decoupled as dc
from .causal import check_causal_consistency, check_square
from .conformance import (check_correspondence, check_loop, check_theorem1, check_wf_unit)
from .errors import BudgetExhausted, NotFirstOrder, RevchorError, SourceError, StaleRedex
from .runtime import Config, show_config, state_hash
from .syntax import load, show_source
from .types import project

EXIT_OK, EXIT_VIOLATION, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3
TRACE_SCHEMA = "revchor.trace/1"


def _load(program: str):
    try:
        return load(program)
    except SourceError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)
    except OSError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)


def _write_json(data: dict, dest: str | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if dest in (None, "-"):
        click.echo(text, nl=False)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


@click.group()
def main():
    """Reversible multiparty choreographies: run, explore and check programs."""


@main.command()
@click.argument("program")
def parse(program):
    """Parse PROGRAM (a path or bundled name) and print it back."""
    click.echo(show_source(_load(program)), nl=False)


@main.command(name="project")
@click.argument("program")
@click.option("--role", "-r", required=True, help="Participant to project onto.")
@click.option("--global", "gname", default=None, help="Global type name (default: the only one).")
def project_cmd(program, role, gname):
    """Print the local type of ROLE."""
    unit = _load(program)
    if gname is None:
        if len(unit.globals) != 1:
            click.echo("error: several global types, pick one with --global", err=True)
            sys.exit(EXIT_INPUT)
        gname = next(iter(unit.globals))
    if gname not in unit.globals:
        click.echo(f"error: no global type {gname!r}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        click.echo(str(project(unit.globals[gname], role)))
    except RevchorError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)


# ---------------------------------------------------------------- stepping


class Stepper:
    """A cursor over one run, recording each step so it can be undone and dumped."""

    def __init__(self, m0: Config, atomic: bool):
        self.atomic = atomic
        self.initial = m0
        self.states = [m0]
        self.steps = []

    @property
    def current(self) -> Config:
        return self.states[-1]

    def options(self) -> list:
        return at.atomic_steps(self.current) if self.atomic else dc.steps(self.current)

    def resolve(self, cmd: str):
        """Pick a step by menu index or by name, e.g. `init`, `out@A`, `rIn@S`, `sel@B:ok`."""
        opts = self.options()
        if cmd.isdigit():
            i = int(cmd)
            if not 0 <= i < len(opts):
                raise StaleRedex(f"no step number {i}")
            return opts[i]
        want = cmd.lower()
        hits = [o for o in opts if str(o[0]).lower() == want]
        if not hits:
            hits = [o for o in opts if str(o[0]).lower().startswith(want + ":")
                    or str(o[0]).lower().split("@")[0] == want]
        if len(hits) != 1:
            names = ", ".join(str(r) for r, _ in opts) or "none"
            what = "ambiguous" if hits else "not enabled"
            raise StaleRedex(f"step {cmd!r} is {what}; enabled: {names}")
        return hits[0]

    def take(self, cmd: str):
        r, n = self.resolve(cmd)
        self.steps.append(r)
        self.states.append(n)
        return r

    def undo(self) -> list:
        """Go back to the previous state through backward steps only."""
        if not self.steps:
            raise StaleRedex("nothing to undo")
        target = self.states[-2]
        limit = 1 if self.atomic else 3
        layer = [(self.current, ())]
        for _ in range(limit):
            nxt = []
            for m, path in layer:
                succ = at.atomic_backward(m) if self.atomic else dc.backward_steps(m)
                for r, n in succ:
                    if n == target:
                        self.steps.pop()
                        self.states.pop()
                        return list(path + (r,))
                    nxt.append((n, path + (r,)))
            layer = nxt
        raise StaleRedex(f"{self.steps[-1]} cannot be undone from here")

    def dump(self) -> dict:
        return trace_dump(self.initial, list(zip(self.steps, self.states[1:])), self.atomic)


def trace_dump(m0: Config, taken: list, atomic: bool) -> dict:
    return {
        "schema": TRACE_SCHEMA,
        "semantics": "atomic" if atomic else "decoupled",
        "initial": {"hash": state_hash(m0), "state": show_config(m0)},
        "steps": [{"rule": r.rule, "session": r.session, "subjects": list(r.subjects),
                   **({"label": r.label} if r.label else {}), "hash": state_hash(n)}
                  for r, n in taken],
        "final": {"hash": state_hash(taken[-1][1] if taken else m0),
                  "state": show_config(taken[-1][1] if taken else m0)},
    }


def replay(m0: Config, dump: dict) -> Config:
    """Re-apply a dumped trace, checking every recorded hash."""
    atomic = dump["semantics"] == "atomic"
    if state_hash(m0) != dump["initial"]["hash"]:
        raise StaleRedex("initial state does not match the dump")
    m = m0
    for i, s in enumerate(dump["steps"]):
        opts = at.atomic_steps(m) if atomic else dc.steps(m)
        hit = [n for r, n in opts if r.rule == s["rule"] and list(r.subjects) == s["subjects"]
               and r.label == s.get("label") and r.session == s["session"]]
        if not hit or state_hash(hit[0]) != s["hash"]:
            raise StaleRedex(f"replay diverges at step {i} ({s['rule']})")
        m = hit[0]
    return m


def _menu(st: Stepper) -> str:
    lines = [show_config(st.current), ""]
    for i, (r, _) in enumerate(st.options()):
        lines.append(f"  [{i}] {r}")
    if len(lines) == 2:
        lines.append("  (no steps enabled)")
    return "\n".join(lines)


def _read_script(path: str) -> list:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        out.extend(tok for tok in line.replace(",", " ").split() if tok)
    return out


@main.command()
@click.argument("program")
@click.option("--atomic/--decoupled", default=False, help="Step granularity (default decoupled).")
@click.option("--script", type=click.Path(exists=True, dir_okay=False),
              help="File of step names or menu indices, applied in order.")
@click.option("--dump", "dump_path", default=None, help="Write the trace as JSON here at the end.")
@click.option("--quiet", is_flag=True, help="Only print the final state.")
def step(program, atomic, script, dump_path, quiet):
    """Step through PROGRAM interactively, or along a script.

    Commands: a menu index or step name, `undo`, `dump FILE`, `quit`."""
    st = Stepper(_load(program).initial_config(), atomic)
    commands = _read_script(script) if script else None
    interactive = commands is None

    def handle(cmd: str) -> bool:
        if cmd in ("quit", "q", "exit"):
            return False
        if cmd == "undo":
            undone = st.undo()
            click.echo("undone via " + "; ".join(map(str, undone)))
        elif cmd.startswith("dump"):
            parts = cmd.split(None, 1)
            _write_json(st.dump(), parts[1] if len(parts) > 1 else None)
        else:
            r = st.take(cmd)
            if not quiet:
                click.echo(f"-> {r}")
        return True

    try:
        if interactive:
            click.echo(_menu(st))
            while True:
                try:
                    cmd = click.prompt(">", prompt_suffix=" ", default="quit", show_default=False)
                except click.Abort:
                    break
                try:
                    if not handle(cmd.strip()):
                        break
                except StaleRedex as e:
                    click.echo(f"error: {e}", err=True)
                click.echo(_menu(st))
        else:
            for cmd in commands:
                if not handle(cmd):
                    break
            click.echo(show_config(st.current) if quiet else _menu(st))
    except StaleRedex as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)
    if dump_path:
        _write_json(st.dump(), dump_path)


# ---------------------------------------------------------------- exploration and checks


@main.command()
@click.argument("program")
@click.option("--depth", "-d", type=int, default=5, show_default=True)
@click.option("--atomic/--decoupled", default=False)
@click.option("--direction", type=click.Choice(["both", "fwd", "bwd"]), default="both", show_default=True)
@click.option("--json", "json_path", default="-", show_default=True, help="Output file, - for stdout.")
@click.option("--figure", default=None, help="Also render a PNG summary here.")
def explore(program, depth, atomic, direction, json_path, figure):
    """Explore the state space of PROGRAM breadth first up to DEPTH."""
    m0 = _load(program).initial_config()
    try:
        if atomic:
            lts = at.explore_atomic(m0, depth, direction)
        else:
            lts = dc.explore(m0, depth, direction)
    except BudgetExhausted as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_BUDGET)
    data = lts.to_json()
    data["semantics"] = "atomic" if atomic else "decoupled"
    data["depth"] = depth
    _write_json(data, json_path)
    if figure:
        from .report import lts_figure
        lts_figure(data, figure, f"{program}: depth {depth}")


PROPERTIES = ("loop", "square", "causal", "correspondence", "wf", "theorem1")


def run_check(unit, prop: str, depth: int) -> dict:
    m0 = unit.initial_config()
    if prop == "loop":
        return check_loop(m0, depth)
    if prop == "square":
        return check_square(m0, depth)
    if prop == "causal":
        return check_causal_consistency(m0, maxlen=depth).to_json()
    if prop == "correspondence":
        return check_correspondence(m0, depth).to_json()
    if prop == "theorem1":
        return check_theorem1(m0, depth)
    results = check_wf_unit(unit)
    return {"schema": "revchor.wf/1", "services": results,
            "violations": sorted(loc for loc, ok in results.items() if not ok)}


def violation_count(report: dict) -> int:
    keys = ("violations", "part_b_violations", "atomic_not_decoupled", "stable_decoupled_not_atomic")
    return sum(len(report.get(k, [])) for k in keys)


@main.command()
@click.argument("program")
@click.option("--property", "prop", type=click.Choice(PROPERTIES), required=True)
@click.option("--depth", "-d", type=int, default=4, show_default=True,
              help="Exploration depth (trace length for causal).")
@click.option("--json", "json_path", default="-", show_default=True)
@click.option("--figure", default=None, help="Also render a PNG summary here.")
def check(program, prop, depth, json_path, figure):
    """Check a semantic property of PROGRAM; exit 1 on any violation."""
    unit = _load(program)
    try:
        report = run_check(unit, prop, depth)
    except NotFirstOrder as e:
        click.echo(f"error: not first-order: {e}", err=True)
        sys.exit(EXIT_BUDGET)
    except BudgetExhausted as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_BUDGET)
    report["property"] = prop
    report["depth"] = depth
    _write_json(report, json_path)
    if figure:
        from .report import check_figure
        check_figure(report, figure, f"{program}: {prop}")
    n = violation_count(report)
    if json_path not in (None, "-"):
        click.echo(f"{prop}: {n} violation(s)")
    sys.exit(EXIT_VIOLATION if n else EXIT_OK)
