"""Surface syntax: lexer, parser, desugarer, and the variable uniquifier.

The surface language adds to the core: `let x (: T)? = M; M` sugar, named
finite-sum aliases, expressions in value positions (pulled out to fresh
temporaries), and `#` line comments.  Desugaring needs a light pre-typing
pass to infer the types of unannotated let bindings, so it threads a typing
environment; the let-lambda itself is annotated with the ambient party set
so the continuation keeps every participant in scope.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .masking import mask_type
from .syntax import (
    App, Case, ChorExpr, ChorType, ChorValue, Com, DProd, DSum, DUnit,
    DataTy, DataType, Fst, FunTy, Inl, Inr, Lam, Lookup, Pair, PartySet,
    Snd, Span, TupleTy, Unit, Val, Var, Vec,
)
from .typecheck import AMBIGUOUS_SUM, TypeEnv, TypeErr, synth


class ParseError(Exception):
    def __init__(self, message: str, span: Optional[Span] = None,
                 expected: tuple[str, ...] = ()):
        self.span = span
        self.expected = expected
        where = f" at {span}" if span else ""
        super().__init__(f"{message}{where}")


class DesugarError(Exception):
    def __init__(self, message: str, span: Optional[Span] = None):
        self.span = span
        where = f" at {span}" if span else ""
        super().__init__(f"{message}{where}")


# ---------------------------------------------------------------------------
# lexer

KEYWORDS = {"fn", "case", "of", "let", "alias", "Inl", "Inr", "Pair",
            "fst", "snd", "lookup", "com"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<id>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<int>[0-9]+)
  | (?P<punct>=>|->|[()\[\],.;:=@+*])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "id", "int", punctuation itself, or "eof"
    text: str
    span: Span


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, bol = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            span = Span(pos, pos + 1, line, pos - bol + 1)
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        start, end = m.span()
        span = Span(start, end, line, start - bol + 1)
        if m.lastgroup == "id":
            tokens.append(Token("id", m.group(), span))
        elif m.lastgroup == "int":
            tokens.append(Token("int", m.group(), span))
        elif m.lastgroup == "punct":
            tokens.append(Token(m.group(), m.group(), span))
        # whitespace and comments are skipped, but line tracking continues
        chunk = text[start:end]
        if "\n" in chunk:
            line += chunk.count("\n")
            bol = start + chunk.rindex("\n") + 1
        pos = end
    tokens.append(Token("eof", "", Span(pos, pos, line, pos - bol + 1)))
    return tokens


# ---------------------------------------------------------------------------
# surface AST

@dataclass
class SVar:
    name: str
    span: Span


@dataclass
class SUnit:
    owners: PartySet
    span: Span


@dataclass
class SLam:
    param: str
    param_type: ChorType
    body: "SurfaceExpr"
    owners: PartySet
    span: Span


@dataclass
class SApp:
    fn: "SurfaceExpr"
    arg: "SurfaceExpr"
    span: Span


@dataclass
class SInl:
    inner: "SurfaceExpr"
    span: Span


@dataclass
class SInr:
    inner: "SurfaceExpr"
    span: Span


@dataclass
class SPair:
    first: "SurfaceExpr"
    second: "SurfaceExpr"
    span: Span


@dataclass
class STuple:
    elems: list["SurfaceExpr"]
    span: Span


@dataclass
class SKeyword:
    value: ChorValue  # fst/snd/lookup/com, fully formed
    span: Span


@dataclass
class SCase:
    guards: PartySet
    scrutinee: "SurfaceExpr"
    left_var: str
    left_body: "SurfaceExpr"
    right_var: str
    right_body: "SurfaceExpr"
    span: Span


@dataclass
class SLet:
    name: str
    annot: Optional[ChorType]
    bound: "SurfaceExpr"
    body: "SurfaceExpr"
    span: Span


SurfaceExpr = Union[SVar, SUnit, SLam, SApp, SInl, SInr, SPair, STuple,
                    SKeyword, SCase, SLet]


@dataclass
class SurfaceProgram:
    aliases: dict[str, DataType]
    body: SurfaceExpr
    source: str


# ---------------------------------------------------------------------------
# parser

_NON_ATOM_KEYWORDS = {"fn", "case", "of", "let", "alias"}


class Parser:
    def __init__(self, tokens: list[Token], aliases: dict[str, DataType]):
        self.tokens = tokens
        self.pos = 0
        self.aliases = aliases

    # -- token plumbing ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        if tok.kind != kind:
            return False
        return text is None or tok.text == text

    def at_kw(self, word: str) -> bool:
        return self.at("id", word)

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or 'eof'!r}",
                             tok.span, (kind,))
        return self.next()

    def expect_kw(self, word: str) -> Token:
        tok = self.peek()
        if not self.at_kw(word):
            raise ParseError(f"expected {word!r}, found {tok.text or 'eof'!r}",
                             tok.span, (word,))
        return self.next()

    def name(self) -> str:
        tok = self.expect("id")
        if tok.text in KEYWORDS:
            raise ParseError(f"{tok.text!r} is a keyword", tok.span)
        return tok.text

    # -- parties -----------------------------------------------------------

    def party_list(self) -> PartySet:
        self.expect("[")
        names = [self.name()]
        while self.at(","):
            self.next()
            names.append(self.name())
        self.expect("]")
        return PartySet(names)

    # -- types -------------------------------------------------------------

    def type_(self) -> ChorType:
        if self.at("("):
            save = self.pos
            try:
                return self._paren_type()
            except ParseError:
                self.pos = save
        shape = self.dtype()
        self.expect("@")
        owners = self.party_list()
        return DataTy(shape, owners)

    def _paren_type(self) -> ChorType:
        self.expect("(")
        first = self.type_()
        if self.at("->"):
            self.next()
            ret = self.type_()
            self.expect(")")
            self.expect("@")
            owners = self.party_list()
            return FunTy(first, ret, owners)
        if self.at(","):
            elems = [first]
            while self.at(","):
                self.next()
                if self.at(")"):
                    break  # trailing comma: one-element tuple
                elems.append(self.type_())
            self.expect(")")
            return TupleTy(tuple(elems))
        self.expect(")")
        return first

    def dtype(self) -> DataType:
        left = self.dprod()
        while self.at("+"):
            self.next()
            left = DSum(left, self.dprod())
        return left

    def dprod(self) -> DataType:
        left = self.datom()
        while self.at("*"):
            self.next()
            left = DProd(left, self.datom())
        return left

    def datom(self) -> DataType:
        tok = self.peek()
        if self.at("("):
            self.next()
            if self.at(")"):
                self.next()
                return DUnit()
            inner = self.dtype()
            self.expect(")")
            return inner
        if tok.kind == "id" and tok.text not in KEYWORDS:
            self.next()
            if tok.text not in self.aliases:
                raise ParseError(f"unknown type alias {tok.text!r}", tok.span)
            return self.aliases[tok.text]
        raise ParseError(f"expected a data type, found {tok.text or 'eof'!r}",
                         tok.span)

    # -- expressions --------------------------------------------------------

    def expr(self) -> SurfaceExpr:
        if self.at_kw("let"):
            return self.let_()
        if self.at_kw("case"):
            return self.case_()
        return self.app()

    def let_(self) -> SLet:
        start = self.expect_kw("let")
        name = self.name()
        annot = None
        if self.at(":"):
            self.next()
            annot = self.type_()
        self.expect("=")
        bound = self.expr()
        self.expect(";")
        body = self.expr()
        return SLet(name, annot, bound, body, start.span)

    def case_(self) -> SCase:
        start = self.expect_kw("case")
        guards = self.party_list()
        scrut = self.app()
        self.expect_kw("of")
        self.expect_kw("Inl")
        left_var = self.name()
        self.expect("=>")
        left_body = self.expr()
        self.expect(";")
        self.expect_kw("Inr")
        right_var = self.name()
        self.expect("=>")
        right_body = self.expr()
        return SCase(guards, scrut, left_var, left_body, right_var,
                     right_body, start.span)

    def app(self) -> SurfaceExpr:
        first = self.atom()
        while self._atom_ahead():
            arg = self.atom()
            first = SApp(first, arg, first.span)
        return first

    def _atom_ahead(self) -> bool:
        tok = self.peek()
        if tok.kind == "id":
            return tok.text not in _NON_ATOM_KEYWORDS
        return tok.kind == "("

    def atom(self) -> SurfaceExpr:
        tok = self.peek()
        if self.at("("):
            return self._paren_atom()
        if self.at_kw("Inl"):
            self.next()
            inner = self.atom()
            return SInl(inner, tok.span)
        if self.at_kw("Inr"):
            self.next()
            inner = self.atom()
            return SInr(inner, tok.span)
        if self.at_kw("Pair"):
            self.next()
            first = self.atom()
            second = self.atom()
            return SPair(first, second, tok.span)
        if self.at_kw("fst"):
            self.next()
            return SKeyword(Fst(self.party_list(), span=tok.span), tok.span)
        if self.at_kw("snd"):
            self.next()
            return SKeyword(Snd(self.party_list(), span=tok.span), tok.span)
        if self.at_kw("lookup"):
            self.next()
            self.expect("[")
            index = int(self.expect("int").text)
            self.expect("]")
            owners = self.party_list()
            return SKeyword(Lookup(index, owners, span=tok.span), tok.span)
        if self.at_kw("com"):
            self.next()
            self.expect("[")
            sender = self.name()
            self.expect("]")
            recipients = self.party_list()
            return SKeyword(Com(sender, recipients, span=tok.span), tok.span)
        if tok.kind == "id":
            if tok.text in KEYWORDS:
                raise ParseError(f"unexpected keyword {tok.text!r}", tok.span)
            self.next()
            return SVar(tok.text, tok.span)
        raise ParseError(f"expected an expression, found {tok.text or 'eof'!r}",
                         tok.span)

    def _paren_atom(self) -> SurfaceExpr:
        start = self.expect("(")
        if self.at_kw("fn"):
            self.next()
            param = self.name()
            self.expect(":")
            ptype = self.type_()
            self.expect(".")
            body = self.expr()
            self.expect(")")
            self.expect("@")
            owners = self.party_list()
            return SLam(param, ptype, body, owners, start.span)
        if self.at(")"):  # unit
            self.next()
            self.expect("@")
            owners = self.party_list()
            return SUnit(owners, start.span)
        first = self.expr()
        if self.at(","):
            elems = [first]
            while self.at(","):
                self.next()
                if self.at(")"):
                    break
                elems.append(self.expr())
            self.expect(")")
            return STuple(elems, start.span)
        self.expect(")")
        return first

    # -- program ------------------------------------------------------------

    def program(self, source: str) -> SurfaceProgram:
        while self.at_kw("alias"):
            self.next()
            tok = self.expect("id")
            if tok.text in KEYWORDS:
                raise ParseError("alias name may not be a keyword", tok.span)
            self.expect("=")
            shape = self.dtype()
            self.expect(";")
            if tok.text in self.aliases:
                raise ParseError(f"duplicate alias {tok.text!r}", tok.span)
            self.aliases[tok.text] = shape
        body = self.expr()
        self.expect("eof")
        return SurfaceProgram(self.aliases, body, source)


def parse(text: str) -> SurfaceProgram:
    return Parser(tokenize(text), {}).program(text)


# ---------------------------------------------------------------------------
# desugaring (elaboration)
#
# Lets become immediately applied lambdas annotated with the ambient party
# set.  Unannotated lets synthesize the bound expression's type, which is
# why elaboration carries a typing environment.

class _Elab:
    def __init__(self):
        self.fresh = 0

    def temp(self) -> str:
        self.fresh += 1
        return f"tmp${self.fresh}"

    def expr(self, s: SurfaceExpr, env: TypeEnv) -> ChorExpr:
        match s:
            case SVar(name, span):
                return Val(Var(name, span=span), span)
            case SUnit(owners, span):
                return Val(Unit(owners, span=span), span)
            case SLam(param, ptype, body, owners, span):
                inner = env.with_theta(owners).bind(param, ptype)
                return Val(Lam(param, ptype, self.expr(body, inner), owners,
                               span=span), span)
            case SApp(fn, arg, span):
                return App(self.expr(fn, env), self.expr(arg, env), span)
            case SKeyword(value, span):
                return Val(value, span)
            case SInl(inner, span):
                return self._construct(
                    [inner], env, span, lambda vs: Inl(vs[0], span=span))
            case SInr(inner, span):
                return self._construct(
                    [inner], env, span, lambda vs: Inr(vs[0], span=span))
            case SPair(first, second, span):
                return self._construct(
                    [first, second], env, span,
                    lambda vs: Pair(vs[0], vs[1], span=span))
            case STuple(elems, span):
                return self._construct(
                    list(elems), env, span,
                    lambda vs: Vec(tuple(vs), span=span))
            case SCase():
                return self._case(s, env)
            case SLet():
                return self._let(s, env)
        raise TypeError(f"not a surface expression: {s!r}")

    def _case(self, s: SCase, env: TypeEnv) -> ChorExpr:
        scrut = self.expr(s.scrutinee, env)
        env_l = env.with_theta(s.guards)
        env_r = env.with_theta(s.guards)
        try:
            tn = synth(env, scrut)
            masked = mask_type(tn, s.guards)
            if (masked is not None and isinstance(masked, DataTy)
                    and isinstance(masked.shape, DSum)):
                env_l = env_l.bind(s.left_var,
                                   DataTy(masked.shape.left, s.guards))
                env_r = env_r.bind(s.right_var,
                                   DataTy(masked.shape.right, s.guards))
        except TypeErr:
            pass  # the real check reports this later, with the right kind
        return Case(s.guards, scrut,
                    s.left_var, self.expr(s.left_body, env_l),
                    s.right_var, self.expr(s.right_body, env_r),
                    s.span)

    def _let(self, s: SLet, env: TypeEnv) -> ChorExpr:
        bound = self.expr(s.bound, env)
        if s.annot is not None:
            t = s.annot
        else:
            try:
                t = synth(env, bound)
            except TypeErr as err:
                if err.kind == AMBIGUOUS_SUM:
                    raise DesugarError(
                        f"cannot infer a type for let {s.name}; "
                        f"add an annotation", s.span) from err
                raise
        body = self.expr(s.body, env.bind(s.name, t))
        lam = Lam(s.name, t, body, env.theta, span=s.span)
        return App(Val(lam, s.span), bound, s.span)

    def _construct(self, parts: list[SurfaceExpr], env: TypeEnv, span: Span,
                   build) -> ChorExpr:
        """Build a value constructor, pulling non-value parts into temps."""
        elaborated = [self.expr(p, env) for p in parts]
        lets: list[tuple[str, ChorType, ChorExpr]] = []
        values: list[ChorValue] = []
        for part in elaborated:
            if isinstance(part, Val):
                values.append(part.value)
                continue
            try:
                t = synth(env, part)
            except TypeErr as err:
                if err.kind == AMBIGUOUS_SUM:
                    raise DesugarError(
                        "cannot infer a type for this expression inside a "
                        "value constructor; bind it with an annotated let",
                        span) from err
                raise
            name = self.temp()
            lets.append((name, t, part))
            values.append(Var(name, span=span))
            env = env.bind(name, t)
        result: ChorExpr = Val(build(values), span)
        for name, t, bound in reversed(lets):
            result = App(Val(Lam(name, t, result, env.theta, span=span), span),
                         bound, span)
        return result


def desugar(sp: SurfaceProgram,
            theta: Optional[PartySet] = None) -> tuple[ChorExpr, PartySet]:
    """Lower a surface program to the core, returning it with its party set.

    The checking context is the outermost lambda's owner set when the
    program is one, else every party the program mentions; an explicit
    theta overrides both.
    """
    if theta is None:
        if isinstance(sp.body, SLam):
            theta = sp.body.owners
        else:
            theta = _surface_roles(sp.body)
    core = _Elab().expr(sp.body, TypeEnv(theta))
    return core, theta


def _surface_roles(s: SurfaceExpr) -> PartySet:
    found: set[str] = set()

    def walk_type(t) -> None:
        match t:
            case DataTy(_, owners):
                found.update(owners)
            case FunTy(arg, ret, owners):
                found.update(owners)
                walk_type(arg)
                walk_type(ret)
            case TupleTy(elems):
                for e in elems:
                    walk_type(e)

    def walk(node: SurfaceExpr) -> None:
        match node:
            case SVar():
                pass
            case SUnit(owners, _):
                found.update(owners)
            case SLam(_, ptype, body, owners, _):
                found.update(owners)
                walk_type(ptype)
                walk(body)
            case SApp(fn, arg, _):
                walk(fn)
                walk(arg)
            case SInl(inner, _) | SInr(inner, _):
                walk(inner)
            case SPair(first, second, _):
                walk(first)
                walk(second)
            case STuple(elems, _):
                for e in elems:
                    walk(e)
            case SKeyword(value, _):
                if isinstance(value, Com):
                    found.add(value.sender)
                    found.update(value.recipients)
                else:
                    found.update(value.owners)
            case SCase(guards, scrut, _, lb, _, rb, _):
                found.update(guards)
                walk(scrut)
                walk(lb)
                walk(rb)
            case SLet(_, annot, bound, body, _):
                if annot is not None:
                    walk_type(annot)
                walk(bound)
                walk(body)

    walk(s)
    if not found:
        raise DesugarError("program names no parties")
    return PartySet(found)


# ---------------------------------------------------------------------------
# uniquify

def uniquify(e: ChorExpr) -> ChorExpr:
    """Alpha-rename so every binder is globally distinct; free variables and
    first occurrences keep their names."""
    used = set(_all_names(e))
    counters: dict[str, int] = {}
    taken: set[str] = set()

    def fresh(base: str) -> str:
        if base not in taken:
            taken.add(base)
            return base
        n = counters.get(base, 0)
        while True:
            n += 1
            candidate = f"{base}${n}"
            if candidate not in used and candidate not in taken:
                counters[base] = n
                taken.add(candidate)
                return candidate

    def walk(node: ChorExpr, ren: dict[str, str]) -> ChorExpr:
        match node:
            case Val(v):
                return Val(walk_value(v, ren), node.span)
            case App(fn, arg):
                return App(walk(fn, ren), walk(arg, ren), node.span)
            case Case(guards, scrut, xl, ml, xr, mr):
                scrut2 = walk(scrut, ren)
                xl2 = fresh(xl)
                ml2 = walk(ml, {**ren, xl: xl2})
                xr2 = fresh(xr)
                mr2 = walk(mr, {**ren, xr: xr2})
                return Case(guards, scrut2, xl2, ml2, xr2, mr2, node.span)
        raise TypeError(f"not an expression: {node!r}")

    def walk_value(v: ChorValue, ren: dict[str, str]) -> ChorValue:
        match v:
            case Var(name):
                return Var(ren.get(name, name), span=v.span)
            case Lam(param, ptype, body, owners):
                param2 = fresh(param)
                return Lam(param2, ptype, walk(body, {**ren, param: param2}),
                           owners, span=v.span)
            case Inl(inner):
                return Inl(walk_value(inner, ren), span=v.span)
            case Inr(inner):
                return Inr(walk_value(inner, ren), span=v.span)
            case Pair(a, b):
                return Pair(walk_value(a, ren), walk_value(b, ren),
                            span=v.span)
            case Vec(elems):
                return Vec(tuple(walk_value(x, ren) for x in elems),
                           span=v.span)
            case _:
                return v

    return walk(e, {})


def _all_names(e: ChorExpr) -> set[str]:
    names: set[str] = set()

    def walk(node) -> None:
        match node:
            case Val(v):
                walk_value(v)
            case App(fn, arg):
                walk(fn)
                walk(arg)
            case Case(_, scrut, xl, ml, xr, mr):
                names.add(xl)
                names.add(xr)
                walk(scrut)
                walk(ml)
                walk(mr)

    def walk_value(v) -> None:
        match v:
            case Var(name):
                names.add(name)
            case Lam(param, _, body, _):
                names.add(param)
                walk(body)
            case Inl(inner) | Inr(inner):
                walk_value(inner)
            case Pair(a, b):
                walk_value(a)
                walk_value(b)
            case Vec(elems):
                for x in elems:
                    walk_value(x)
            case _:
                pass

    walk(e)
    return names


# ---------------------------------------------------------------------------
# the full pipeline

@dataclass
class CompiledProgram:
    core: ChorExpr
    theta: PartySet


def compile_text(text: str,
                 theta: Optional[PartySet] = None) -> CompiledProgram:
    """parse -> desugar -> uniquify."""
    sp = parse(text)
    core, theta_out = desugar(sp, theta)
    return CompiledProgram(uniquify(core), theta_out)
