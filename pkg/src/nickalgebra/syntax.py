"""Concrete syntax: the core term format and the DSD-subset script language.

Core term grammar (whitespace separates tokens, ``//`` starts a line comment)::

    soup     := [ item ("|" item)* ]
    item     := [ INT "*" ] molecule | "new" IDENT "(" soup ")"
    molecule := single | duplex
    single   := "<" "t^" IDENT ">" | "<" IDENT "t^" ">"
    duplex   := seg (":" seg)*
    seg      := "t^" | "[" segbody "]"
    segbody  := IDENT | "t^" IDENT | IDENT "t^" | IDENT IDENT

``:`` is the top-strand nick and a bare ``t^`` is an open bottom toehold,
so ``t^:[x t^]:[a t^]:[a]`` is the four-segment duplex whose top strand
reads ``t / x.t / a.t / a``.

The script language accepts exactly: ``directive sample END POINTS``,
``directive plot SPEC (; SPEC)*``, ``new t@BIND,UNBIND``,
``def Name(p1,...) = new a ... ( items )`` and a parenthesized body of
replicated molecules and definition calls.  Plot specs are either an exact
molecule or ``sum({...})`` over a duplex pattern where ``_`` matches any
long domain.

Pictogram output style (output only; ASCII stand-ins for the corner-glyph
notation): free signal ``_|x``, free cosignal ``x|_``; inside a duplex,
rendered between braces, an open bottom toehold is ``_``, a bound signal
segment ``_|x``, a bound cosignal segment ``x|_``, a covered long domain
``x`` and a two-domain top strand ``x&y``.
"""

from dataclasses import dataclass, field
import re

from . import terms
from .errors import ParseError, ElaborationError


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>//[^\n]*)
    | (?P<toehold>t\^)
    | (?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z][A-Za-z0-9_']*)
    | (?P<wild>_)
    | (?P<punct><|>|\[|\]|\(|\)|\{|\}|:|\||\*|;|,|@|=)
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str  # "t^", "ident", "int", "real", "_", "eof", or the punct text
    text: str
    line: int
    col: int


def _tokenize(text):
    toks = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        tok_text = m.group()
        col = pos - line_start + 1
        if kind == "ws" or kind == "comment":
            pass
        elif kind == "toehold":
            toks.append(_Tok("t^", tok_text, line, col))
        elif kind == "num":
            numkind = "int" if re.fullmatch(r"\d+", tok_text) else "real"
            toks.append(_Tok(numkind, tok_text, line, col))
        elif kind == "ident":
            toks.append(_Tok("ident", tok_text, line, col))
        elif kind == "wild":
            toks.append(_Tok("_", tok_text, line, col))
        else:
            toks.append(_Tok(tok_text, tok_text, line, col))
        if "\n" in tok_text:
            line += tok_text.count("\n")
            line_start = pos + tok_text.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, n - line_start + 1))
    return toks


class _Stream:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self, ahead=0):
        i = min(self.pos + ahead, len(self.toks) - 1)
        return self.toks[i]

    def advance(self):
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind, what=None):
        tok = self.peek()
        if tok.kind != kind:
            self.fail(f"expected {what or kind}, found {tok.text or 'end of input'!r}")
        return self.advance()

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)


# ---------------------------------------------------------------------------
# core term parsing

def parse_soup_term(text):
    """Parse core-format text into a soup in prenex form (not canonicalized)."""
    st = _Stream(text)
    counter = [0]
    items = _parse_items(st, {}, counter)
    if st.peek().kind != "eof":
        st.fail(f"trailing input {st.peek().text!r}")
    return terms.soup(items, counter[0])


def _parse_items(st, env, counter):
    items = []
    if st.peek().kind in ("eof", ")"):
        return items
    items.extend(_parse_item(st, env, counter))
    while st.peek().kind == "|":
        st.advance()
        items.extend(_parse_item(st, env, counter))
    return items


def _parse_item(st, env, counter):
    tok = st.peek()
    if tok.kind == "ident" and tok.text == "new":
        st.advance()
        name = st.expect("ident", "binder name").text
        slot = counter[0]
        counter[0] += 1
        inner_env = dict(env)
        inner_env[name] = terms.private(slot)
        st.expect("(")
        items = _parse_items(st, inner_env, counter)
        st.expect(")")
        return items
    count = 1
    if tok.kind == "int" and st.peek(1).kind == "*":
        count = int(st.advance().text)
        st.advance()
    mol = _parse_molecule(st, env)
    return [(mol, count)]


def _resolve(st, tok, env):
    dom = env.get(tok.text, tok.text)
    try:
        return terms._check_dom(dom)
    except ValueError as exc:
        st.fail(str(exc), tok)


def _parse_molecule(st, env, wildcards=False):
    tok = st.peek()
    if tok.kind == "<":
        return _parse_single(st, env)
    if tok.kind in ("t^", "["):
        segs = [_parse_seg(st, env, wildcards)]
        while st.peek().kind == ":":
            st.advance()
            segs.append(_parse_seg(st, env, wildcards))
        return (terms.DUP, tuple(segs))
    st.fail(f"expected a molecule, found {tok.text or 'end of input'!r}")


def _parse_single(st, env):
    st.expect("<")
    tok = st.peek()
    if tok.kind == "t^":
        st.advance()
        name = st.expect("ident", "long domain")
        mol = (terms.SIG, _resolve(st, name, env))
    elif tok.kind == "ident":
        name = st.advance()
        st.expect("t^", "'t^' after the long domain")
        mol = (terms.COS, _resolve(st, name, env))
    else:
        st.fail("a single strand is <t^ x> or <x t^>")
    st.expect(">")
    return mol


def _parse_seg(st, env, wildcards=False):
    tok = st.peek()
    if tok.kind == "t^":
        st.advance()
        return (terms.T,)
    st.expect("[")

    def dom_tok():
        t = st.peek()
        if wildcards and t.kind == "_":
            st.advance()
            return None
        name = st.expect("ident", "long domain")
        return _resolve(st, name, env)

    first = st.peek()
    if first.kind == "t^":
        st.advance()
        d = dom_tok()
        seg = (terms.TX, d)
    else:
        d = dom_tok()
        nxt = st.peek()
        if nxt.kind == "t^":
            st.advance()
            seg = (terms.XT, d)
        elif nxt.kind == "ident" or (wildcards and nxt.kind == "_"):
            seg = (terms.XY, d, dom_tok())
        else:
            seg = (terms.X, d)
    if st.peek().kind != "]":
        st.fail("a duplex segment holds at most two domains")
    st.advance()
    return seg


# ---------------------------------------------------------------------------
# printing

_NAME_POOL = "abcdefghijklmnopqrstuvwxyz"


def surface_names(u):
    """Deterministic display names for the nu-slots of *u*."""
    taken = terms.public_domains(u) | {terms.TOEHOLD}
    names = {}
    fallback = 0
    pool = iter(_NAME_POOL)
    for slot in range(u.n_priv):
        for cand in pool:
            if cand not in taken:
                break
        else:
            while f"p{fallback}" in taken:
                fallback += 1
            cand = f"p{fallback}"
            fallback += 1
        taken.add(cand)
        names[terms.private(slot)] = cand
    return names


def print_molecule(mol, names=None):
    names = names or {}

    def nm(d):
        return names.get(d, d)

    tag = mol[0]
    if tag == terms.SIG:
        return f"<t^ {nm(mol[1])}>"
    if tag == terms.COS:
        return f"<{nm(mol[1])} t^>"
    parts = []
    for seg in mol[1]:
        if seg[0] == terms.T:
            parts.append("t^")
        elif seg[0] == terms.X:
            parts.append(f"[{nm(seg[1])}]")
        elif seg[0] == terms.TX:
            parts.append(f"[t^ {nm(seg[1])}]")
        elif seg[0] == terms.XT:
            parts.append(f"[{nm(seg[1])} t^]")
        else:
            parts.append(f"[{nm(seg[1])} {nm(seg[2])}]")
    return ":".join(parts)


def _pictogram_molecule(mol, names):
    def nm(d):
        return names.get(d, d)

    tag = mol[0]
    if tag == terms.SIG:
        return f"_|{nm(mol[1])}"
    if tag == terms.COS:
        return f"{nm(mol[1])}|_"
    glyphs = []
    for seg in mol[1]:
        if seg[0] == terms.T:
            glyphs.append("_")
        elif seg[0] == terms.X:
            glyphs.append(nm(seg[1]))
        elif seg[0] == terms.TX:
            glyphs.append(f"_|{nm(seg[1])}")
        elif seg[0] == terms.XT:
            glyphs.append(f"{nm(seg[1])}|_")
        else:
            glyphs.append(f"{nm(seg[1])}&{nm(seg[2])}")
    return "{" + " ".join(glyphs) + "}"


def print_soup(u, style="core"):
    """Render a soup; the core style parses back to an algebraically equal soup."""
    if style not in ("core", "pictogram"):
        raise ValueError(f"unknown print style: {style!r}")
    u = terms.canonicalize(u)
    names = surface_names(u)
    render = print_molecule if style == "core" else _pictogram_molecule
    parts = []
    for mol, count in u.mols:
        text = render(mol, names)
        parts.append(f"{count} * {text}" if count > 1 else text)
    body = " | ".join(parts)
    if style == "core":
        for slot in range(u.n_priv - 1, -1, -1):
            body = f"new {names[terms.private(slot)]} ({body})"
    elif u.n_priv:
        prefix = " ".join(f"new {names[terms.private(s)]}" for s in range(u.n_priv))
        body = f"{prefix} ({body})"
    return body


# ---------------------------------------------------------------------------
# plot specs

@dataclass(frozen=True)
class PlotSpec:
    """What to plot: an exact species or a sum over a duplex pattern."""

    kind: str  # "exact" | "sum"
    mol: tuple = None
    pattern: tuple = None  # segment tuples; None in a domain slot is a wildcard

    def label(self):
        if self.kind == "exact":
            return print_molecule(self.mol)
        parts = []
        for seg in self.pattern:
            if seg[0] == terms.T:
                parts.append("t^")
            else:
                inner = " ".join(
                    "t^" if d == "t^" else ("_" if d is None else d)
                    for d in _pattern_slots(seg)
                )
                parts.append(f"[{inner}]")
        return "sum({" + ":".join(parts) + "})"

    def matches(self, mol):
        """Does this spec select the given species molecule?"""
        if self.kind == "exact":
            return mol == self.mol
        if mol[0] != terms.DUP:
            return False
        segs = mol[1]
        if len(segs) != len(self.pattern):
            return False
        for pat, seg in zip(self.pattern, segs):
            if pat[0] != seg[0]:
                return False
            for want, have in zip(pat[1:], seg[1:]):
                if want is not None and want != have:
                    return False
        return True


def _pattern_slots(seg):
    if seg[0] == terms.TX:
        return ("t^", seg[1])
    if seg[0] == terms.XT:
        return (seg[1], "t^")
    if seg[0] == terms.X:
        return (seg[1],)
    return (seg[1], seg[2])


# ---------------------------------------------------------------------------
# simulation settings (filled in from script directives)

@dataclass
class SimSettings:
    """Time grid, toehold rates, and method options for a simulation run."""

    end_time: float = 100.0
    points: int = 500
    bind_rate: float = 1.0
    unbind_rate: float = 1.0
    method: str = "ode"  # "ode" | "ssa"
    ode_step: float = None  # initial integrator step; default end_time / 1e4
    seed: int = 0

    def __post_init__(self):
        if self.end_time <= 0:
            raise ValueError("end_time must be positive")
        if self.points < 2:
            raise ValueError("points must be at least 2")
        if self.bind_rate <= 0 or self.unbind_rate <= 0:
            raise ValueError("rates must be positive")
        if self.method not in ("ode", "ssa"):
            raise ValueError(f"unknown method: {self.method!r}")


# ---------------------------------------------------------------------------
# script AST

@dataclass(frozen=True)
class ScriptDef:
    name: str
    params: tuple
    news: tuple  # private long-domain names, one nu-slot each per call
    items: tuple  # ((count_expr, molecule_template), ...)


@dataclass(frozen=True)
class ScriptCall:
    name: str
    args: tuple  # ints and identifier strings


@dataclass(frozen=True)
class ScriptMol:
    count: object  # int, or identifier string (rejected at top level)
    mol: tuple


@dataclass
class ScriptProgram:
    sample: tuple = None  # (end_time, points)
    plots: tuple = ()
    toehold_rates: tuple = (1.0, 1.0)
    defs: dict = field(default_factory=dict)
    body: tuple = ()


def parse_dsd_script(text):
    """Parse the supported DSD script subset into a :class:`ScriptProgram`."""
    st = _Stream(text)
    prog = ScriptProgram()
    body = None
    while st.peek().kind != "eof":
        tok = st.peek()
        if tok.kind == "ident" and tok.text == "directive":
            _parse_directive(st, prog)
        elif tok.kind == "ident" and tok.text == "new":
            _parse_toehold_rates(st, prog)
        elif tok.kind == "ident" and tok.text == "def":
            _parse_def(st, prog)
        elif tok.kind == "(":
            if body is not None:
                st.fail("a script has a single parenthesized body")
            body = _parse_body(st)
        else:
            st.fail(
                f"expected 'directive', 'new', 'def' or the script body, found {tok.text!r}"
            )
    prog.body = tuple(body or ())
    return prog


def _number(st, what="number"):
    tok = st.peek()
    if tok.kind not in ("int", "real"):
        st.fail(f"expected {what}, found {tok.text!r}")
    st.advance()
    return float(tok.text)


def _parse_directive(st, prog):
    st.advance()  # 'directive'
    name = st.expect("ident", "directive name").text
    if name == "sample":
        end = _number(st, "sample end time")
        points = int(st.expect("int", "sample point count").text)
        prog.sample = (end, points)
    elif name == "plot":
        specs = [_parse_plot_spec(st)]
        while st.peek().kind == ";":
            st.advance()
            specs.append(_parse_plot_spec(st))
        prog.plots = prog.plots + tuple(specs)
    else:
        st.fail(f"unknown directive {name!r}")


def _parse_plot_spec(st):
    tok = st.peek()
    if tok.kind == "ident" and tok.text == "sum":
        st.advance()
        st.expect("(")
        st.expect("{")
        pattern = [_parse_seg(st, {}, wildcards=True)]
        while st.peek().kind == ":":
            st.advance()
            pattern.append(_parse_seg(st, {}, wildcards=True))
        st.expect("}")
        st.expect(")")
        return PlotSpec(kind="sum", pattern=tuple(pattern))
    mol = _parse_molecule(st, {}, wildcards=False)
    return PlotSpec(kind="exact", mol=mol)


def _parse_toehold_rates(st, prog):
    st.advance()  # 'new'
    tok = st.expect("ident", "the toehold name")
    if tok.text != terms.TOEHOLD:
        st.fail("top-level 'new' only declares toehold rates: new t@bind,unbind", tok)
    st.expect("@")
    bind = _number(st, "bind rate")
    st.expect(",")
    unbind = _number(st, "unbind rate")
    prog.toehold_rates = (bind, unbind)


def _parse_def(st, prog):
    st.advance()  # 'def'
    name = st.expect("ident", "definition name").text
    if name in prog.defs:
        st.fail(f"duplicate definition {name!r}")
    st.expect("(")
    params = [st.expect("ident", "parameter").text]
    while st.peek().kind == ",":
        st.advance()
        params.append(st.expect("ident", "parameter").text)
    st.expect(")")
    st.expect("=")
    news = []
    while st.peek().kind == "ident" and st.peek().text == "new":
        st.advance()
        news.append(st.expect("ident", "private domain name").text)
    st.expect("(")
    items = [_parse_def_item(st)]
    while st.peek().kind == "|":
        st.advance()
        items.append(_parse_def_item(st))
    st.expect(")")
    prog.defs[name] = ScriptDef(
        name=name, params=tuple(params), news=tuple(news), items=tuple(items)
    )


def _count_prefix(st):
    tok = st.peek()
    if tok.kind == "int" and st.peek(1).kind == "*":
        st.advance()
        st.advance()
        return int(tok.text)
    if tok.kind == "ident" and st.peek(1).kind == "*":
        st.advance()
        st.advance()
        return tok.text
    return 1


def _parse_def_item(st):
    count = _count_prefix(st)
    mol = _parse_template_molecule(st)
    return (count, mol)


def _parse_body(st):
    st.expect("(")
    items = [_parse_body_item(st)]
    while st.peek().kind == "|":
        st.advance()
        items.append(_parse_body_item(st))
    st.expect(")")
    return items


def _parse_body_item(st):
    tok = st.peek()
    if tok.kind == "ident" and st.peek(1).kind == "(":
        name = st.advance().text
        st.advance()  # '('
        args = [_parse_arg(st)]
        while st.peek().kind == ",":
            st.advance()
            args.append(_parse_arg(st))
        st.expect(")")
        return ScriptCall(name=name, args=tuple(args))
    count = _count_prefix(st)
    mol = _parse_template_molecule(st)
    return ScriptMol(count=count, mol=mol)


def _parse_arg(st):
    tok = st.peek()
    if tok.kind == "int":
        st.advance()
        return int(tok.text)
    if tok.kind == "ident":
        st.advance()
        return tok.text
    st.fail(f"expected a count or domain argument, found {tok.text!r}")


def _parse_template_molecule(st):
    # Domain identifiers stay unresolved; definitions bind them at call time.
    return _parse_molecule(st, {}, wildcards=False)


# ---------------------------------------------------------------------------
# elaboration

def elaborate(prog, bindings=None):
    """Instantiate a script into (initial soup, settings, plot specs).

    Every ``new a`` of a definition yields one nu-slot per call, shared by
    all N replicas of that call; separate calls get separate slots.
    *bindings* resolves symbolic counts appearing as call arguments.
    """
    bindings = bindings or {}
    slot = 0
    acc = []
    for item in prog.body:
        if isinstance(item, ScriptCall):
            d = prog.defs.get(item.name)
            if d is None:
                raise ElaborationError(f"call to unknown definition {item.name!r}")
            if len(item.args) != len(d.params):
                raise ElaborationError(
                    f"{item.name} expects {len(d.params)} arguments, got {len(item.args)}"
                )
            env = dict(zip(d.params, item.args))
            privs = {}
            for nu in d.news:
                privs[nu] = terms.private(slot)
                slot += 1
            for count_expr, mol in d.items:
                count = _resolve_count(count_expr, env, bindings)
                acc.append((_resolve_mol(mol, env, privs), count))
        else:
            if isinstance(item.count, str):
                raise ElaborationError(
                    f"symbolic count {item.count!r} outside a definition"
                )
            acc.append((_resolve_mol(item.mol, {}, {}), item.count))

    initial = terms.canonicalize(terms.soup(acc, slot))
    sample = prog.sample or (SimSettings.end_time, SimSettings.points)
    settings = SimSettings(
        end_time=sample[0],
        points=sample[1],
        bind_rate=prog.toehold_rates[0],
        unbind_rate=prog.toehold_rates[1],
    )
    return initial, settings, list(prog.plots)


def _resolve_count(expr, env, bindings):
    value = expr
    if isinstance(value, str):
        value = env.get(value, value)
    if isinstance(value, str):
        if value not in bindings:
            raise ElaborationError(f"unbound count name {value!r}")
        value = bindings[value]
    if not isinstance(value, int):
        raise ElaborationError(f"count is not an integer: {value!r}")
    if value < 0:
        raise ElaborationError(f"negative count {value}")
    return value


def _resolve_mol(mol, env, privs):
    def conv(d):
        if d in privs:
            return privs[d]
        value = env.get(d, d)
        if isinstance(value, int):
            raise ElaborationError(f"count argument used in a domain position: {d!r}")
        if value in privs:
            return privs[value]
        try:
            return terms._check_dom(value)
        except ValueError as exc:
            raise ElaborationError(str(exc)) from exc

    return terms.validate_molecule(terms._map_mol_fn(mol, conv))
