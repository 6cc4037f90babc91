"""Surface syntax: a lark grammar for protocols and located systems, and a printer."""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources

from lark import Lark, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from .errors import MalformedType, ProjectionUndefined, SourceError
from .runtime import (NIL, Abstraction, Apply, Branch, Call, Config, Const, Endpoint, Input, NameVar,
                      Output, Par, ProcVar, Rec, Restrict, Select, Service, SharedName, Star,
                      THUNK_PARAM, VarRef, _map_proc, normalize, show_process)
from .types import (Arrow, Base, BASE_KINDS, GChoice, GEnd, GExchange, GRec, GVar, LBranch, LEnd,
                    LRec, LRecv, LSelect, LSend, LVar, check_guarded, participants, project,
                    type_equal)

GRAMMAR = r"""
start: decl*

?decl: type_decl | global_decl | system_decl

type_decl: "type" NAME "=" NAME ";"
global_decl: "global" NAME "=" gtype ";"
system_decl: "system" "{" (service ";")* "}"
service: NAME ":" KIND NAME "(" NAME annot? ")" "role" NAME "." NAME "=" proc
annot: ":" ltype
KIND: "request" | "accept"

?gtype: NAME "->" NAME ":" "<" vtype ">" "." gtype              -> g_exch
      | NAME "->" "{" NAME ("," NAME)* "}" ":" "<" vtype ">" "." gtype -> g_multi
      | NAME "->" NAME ":" "{" gbranch ("," gbranch)* "}"      -> g_choice
      | "rec" NAME "." gtype                                   -> g_rec
      | "end"                                                  -> g_end
      | NAME                                                   -> g_var
      | "(" gtype ")"
gbranch: NAME ":" gtype

?ltype: NAME "!" "<" vtype ">" "." ltype                        -> l_send
      | NAME "?" "<" vtype ">" "." ltype                        -> l_recv
      | NAME "+" "{" lbranch ("," lbranch)* "}"                 -> l_select
      | NAME "&" "{" lbranch ("," lbranch)* "}"                 -> l_branch
      | "rec" NAME "." ltype                                    -> l_rec
      | "end"                                                   -> l_end
      | NAME                                                    -> l_var
      | "(" ltype ")"
lbranch: NAME ":" ltype

vtype: NAME                     -> v_base
     | "{{" ltype? "}}"         -> v_arrow

?proc: chan "!" "<" value ">" "." proc                          -> p_out
     | chan "?" "(" NAME ")" "." proc                           -> p_in
     | chan "+" "{" pbranch ("," pbranch)* "}"                  -> p_sel
     | chan "&" "{" pbranch ("," pbranch)* "}"                  -> p_bra
     | "(" proc "|" proc ("|" proc)* ")"                        -> p_par
     | "rec" NAME "." proc                                      -> p_rec
     | "(" "new" NAME ")" proc                                  -> p_new
     | "0"                                                      -> p_nil
     | fun "(" arg ")"                                          -> p_app
     | NAME                                                     -> p_var
     | "(" proc ")"
pbranch: NAME ":" proc

chan: NAME                      -> c_var
    | NAME "[" NAME "]"         -> c_endpoint

arg: "*"                        -> a_star
   | NAME                       -> a_name
   | NAME "[" NAME "]"          -> a_endpoint

fun: NAME                       -> f_var
   | thunk
   | abstraction

thunk: "{{" proc "}}"
abstraction: "(" "\\" NAME "." proc ")"

?value: STRING                  -> v_str
      | INT                     -> v_int
      | "true"                  -> v_true
      | "false"                 -> v_false
      | "*"                     -> v_star
      | NAME                    -> v_name
      | NAME "[" NAME "]"       -> v_endpoint
      | NAME "(" [value ("," value)*] ")" -> v_call
      | thunk
      | abstraction

NAME: /[A-Za-z][A-Za-z0-9_]*/
STRING: /'(?:[^'\\]|\\.)*'/
INT: /[0-9]+/
COMMENT: /\/\/[^\n]*/

%import common.WS
%ignore WS
%ignore COMMENT
"""

_PARSER = Lark(GRAMMAR, parser="lalr", lexer="contextual", propagate_positions=True)


@dataclass
class SourceUnit:
    types: dict = field(default_factory=dict)
    globals: dict = field(default_factory=dict)
    services: list = field(default_factory=list)

    def initial_config(self) -> Config:
        return normalize(Config((), tuple(self.services)))

    def shared_names(self) -> set:
        return {s.shared for s in self.services}


def _unquote(tok: str) -> str:
    body = tok[1:-1]
    out, i = [], 0
    while i < len(body):
        if body[i] == "\\" and i + 1 < len(body):
            out.append(body[i + 1])
            i += 2
        else:
            out.append(body[i])
            i += 1
    return "".join(out)


@v_args(inline=True)
class _Build(Transformer):
    def __init__(self, aliases: dict):
        super().__init__()
        self.aliases = aliases

    # value types
    def v_base(self, name):
        name = str(name)
        if name in BASE_KINDS:
            return Base(name)
        if name in self.aliases:
            return Base(name, self.aliases[name])
        raise SourceError(f"unknown value type {name!r}", name.line, name.column)

    def v_arrow(self, t=None):
        return Arrow(t if t is not None else LEnd())

    # global types
    def g_exch(self, p, q, u, g):
        return GExchange(str(p), str(q), u, g)

    def g_multi(self, p, *rest):
        *qs, u, g = rest
        for q in reversed(qs):
            g = GExchange(str(p), str(q), u, g)
        return g

    def g_choice(self, p, q, *branches):
        return GChoice(str(p), str(q), tuple(branches))

    def gbranch(self, l, g):
        return (str(l), g)

    def g_rec(self, x, g):
        return GRec(str(x), g)

    def g_end(self):
        return GEnd()

    def g_var(self, x):
        return GVar(str(x))

    # local types
    def l_send(self, p, u, t):
        return LSend(str(p), u, t)

    def l_recv(self, p, u, t):
        return LRecv(str(p), u, t)

    def l_select(self, p, *branches):
        return LSelect(str(p), tuple(branches))

    def l_branch(self, p, *branches):
        return LBranch(str(p), tuple(branches))

    def lbranch(self, l, t):
        return (str(l), t)

    def l_rec(self, x, t):
        return LRec(str(x), t)

    def l_end(self):
        return LEnd()

    def l_var(self, x):
        return LVar(str(x))

    # processes
    def p_out(self, c, v, p):
        return Output(c, v, p)

    def p_in(self, c, y, p):
        return Input(c, str(y), p)

    def p_sel(self, c, *branches):
        return Select(c, tuple(branches))

    def p_bra(self, c, *branches):
        return Branch(c, tuple(branches))

    def pbranch(self, l, p):
        return (str(l), p)

    def p_par(self, *ps):
        out = ps[-1]
        for p in reversed(ps[:-1]):
            out = Par(p, out)
        return out

    def p_rec(self, x, p):
        return Rec(str(x), p)

    def p_new(self, n, p):
        return Restrict(str(n), p)

    def p_nil(self):
        return NIL

    def p_app(self, f, a):
        return Apply(f, a)

    def p_var(self, x):
        return ProcVar(str(x))

    def c_var(self, x):
        return NameVar(str(x))

    def c_endpoint(self, s, p):
        return Endpoint(str(s), str(p))

    a_endpoint = c_endpoint
    v_endpoint = c_endpoint

    def a_star(self):
        return Star()

    def a_name(self, x):
        return NameVar(str(x))

    def f_var(self, x):
        return VarRef(str(x))

    def thunk(self, p):
        return Abstraction(THUNK_PARAM, p)

    def abstraction(self, x, p):
        return Abstraction(str(x), p)

    def v_str(self, s):
        return Const(_unquote(str(s)))

    def v_int(self, n):
        return Const(int(n))

    def v_true(self):
        return Const(True)

    def v_false(self):
        return Const(False)

    def v_star(self):
        return Star()

    def v_name(self, x):
        return VarRef(str(x))

    def v_call(self, f, *args):
        return Call(str(f), tuple(a for a in args if a is not None))

    def annot(self, t):
        return t


def _resolve_shared(p, shared: set):
    """Free value names that denote shared service names become SharedName values."""
    return _map_proc(p, lambda y: SharedName(y) if y in shared else None,
                     lambda c: None, frozenset())


def parse(text: str) -> SourceUnit:
    try:
        tree = _PARSER.parse(text)
    except UnexpectedInput as e:
        raise SourceError(f"syntax error: {e.__class__.__name__}", e.line, e.column) from None
    aliases = {}
    for d in tree.children:
        if d.data == "type_decl":
            name, kind = (str(t) for t in d.children)
            if kind not in BASE_KINDS:
                raise SourceError(f"type {name!r} must alias one of {', '.join(BASE_KINDS)}",
                                  d.meta.line, d.meta.column)
            aliases[name] = kind
    unit = SourceUnit(types=dict(aliases))
    systems = 0
    builder = _Build(aliases)
    for d in tree.children:
        try:
            if d.data == "global_decl":
                name, g = str(d.children[0]), builder.transform(d.children[1])
                check_guarded(g)
                if name in unit.globals:
                    raise SourceError(f"global type {name!r} declared twice", d.meta.line, d.meta.column)
                unit.globals[name] = g
            elif d.data == "system_decl":
                systems += 1
                for svc in d.children:
                    unit.services.append(_service(builder, unit, svc))
        except VisitError as e:
            inner = e.orig_exc
            if isinstance(inner, SourceError):
                raise inner from None
            raise SourceError(str(inner), d.meta.line, d.meta.column) from None
        except (MalformedType, ProjectionUndefined) as e:
            raise SourceError(str(e), d.meta.line, d.meta.column) from None
    if systems == 0:
        raise SourceError("no system declared", 1, 1)
    shared = unit.shared_names()
    unit.services = [_replace_body(s, _resolve_shared(s.body, shared)) for s in unit.services]
    _validate(unit)
    return unit


def _replace_body(s: Service, body) -> Service:
    from dataclasses import replace
    return replace(s, body=body)


def _service(builder, unit, node) -> Service:
    kids = list(node.children)
    loc, kind, shared, var = (str(k) for k in kids[:4])
    rest = kids[4:]
    annot = None
    if len(rest) == 4:
        annot = builder.transform(rest[0])
        rest = rest[1:]
    gname, role, body = str(rest[0]), str(rest[1]), builder.transform(rest[2])
    if gname not in unit.globals:
        raise SourceError(f"unknown global type {gname!r}", node.meta.line, node.meta.column)
    g = unit.globals[gname]
    if role not in participants(g):
        raise SourceError(f"{role!r} is not a participant of {gname}", node.meta.line, node.meta.column)
    proj = project(g, role)
    if annot is None:
        annot = proj
    return Service(loc, kind, shared, var, annot, body, role, g, gname)


def _validate(unit: SourceUnit):
    locs = [s.loc for s in unit.services]
    if len(set(locs)) != len(locs):
        raise SourceError("duplicate location in system", 1, 1)
    for a in unit.shared_names():
        reqs = [s for s in unit.services if s.shared == a and s.kind == "request"]
        if len(reqs) != 1:
            raise SourceError(f"shared name {a!r} needs exactly one request, found {len(reqs)}", 1, 1)


# ---------------------------------------------------------------- printing


def show_source(unit: SourceUnit) -> str:
    lines = [f"type {n} = {k};" for n, k in unit.types.items()]
    for name, g in unit.globals.items():
        lines.append(f"global {name} = {g};")
    lines.append("system {")
    for s in unit.services:
        ann = "" if type_equal(s.annot, project(s.protocol, s.role)) else f": {s.annot}"
        lines.append(f"  {s.loc}: {s.kind} {s.shared}({s.var}{ann}) role {s.protocol_name}.{s.role} = "
                     f"{show_process(s.body)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- bundled programs

BUNDLED = ("three_buyer", "three_buyer_prefix", "buyer_seller", "four_party", "relay")


def bundled_source(name: str) -> str:
    return resources.files("revchor.programs").joinpath(f"{name}.rc").read_text()


def load(path_or_name: str) -> SourceUnit:
    """Parse a file path, or a bundled program given by name."""
    if path_or_name in BUNDLED:
        return parse(bundled_source(path_or_name))
    with open(path_or_name, encoding="utf-8") as fh:
        return parse(fh.read())
