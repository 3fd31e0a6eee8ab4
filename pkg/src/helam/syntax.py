"""AST definitions for the choreographic language and its local-process target.

Parties, data shapes, located types, choreography expressions, local
behaviors, and the canonical plain-text rendering that the rest of the
package (and the test suite) treats as the one true syntax.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

# ---------------------------------------------------------------------------
# parties

_PARTY_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class EmptyPartySet(ValueError):
    """A party set must name at least one party."""


class BadPartyName(ValueError):
    pass


class PartySet:
    """Nonempty, duplicate-free set of party names with sorted iteration order."""

    __slots__ = ("members",)

    def __init__(self, names: Iterable[str]):
        members = tuple(sorted(set(names)))
        if not members:
            raise EmptyPartySet("party set may not be empty")
        for name in members:
            if not _PARTY_RE.match(name):
                raise BadPartyName(f"invalid party name: {name!r}")
        object.__setattr__(self, "members", members)

    def __setattr__(self, name, value):  # immutable after construction
        raise AttributeError("PartySet is immutable")

    def __iter__(self) -> Iterator[str]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, name: str) -> bool:
        return name in self.members

    def __eq__(self, other) -> bool:
        return isinstance(other, PartySet) and self.members == other.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __repr__(self) -> str:
        return f"PartySet({list(self.members)!r})"

    def __str__(self) -> str:
        return "[" + ", ".join(self.members) + "]"

    def issubset(self, other: "PartySet") -> bool:
        return set(self.members) <= set(other.members)

    def union(self, other: "PartySet") -> "PartySet":
        return PartySet(self.members + other.members)

    def intersect(self, other: "PartySet") -> Optional["PartySet"]:
        """Intersection, or None when it would be empty."""
        common = set(self.members) & set(other.members)
        return PartySet(common) if common else None

    def without(self, name: str) -> tuple[str, ...]:
        """Members minus one party; may be empty, so a plain tuple."""
        return tuple(m for m in self.members if m != name)


def parties(*names: str) -> PartySet:
    return PartySet(names)


# ---------------------------------------------------------------------------
# source spans

@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


def _span_field():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# data shapes (the algebra of sendable things)

@dataclass(frozen=True)
class DUnit:
    pass


@dataclass(frozen=True)
class DSum:
    left: "DataType"
    right: "DataType"


@dataclass(frozen=True)
class DProd:
    left: "DataType"
    right: "DataType"


class DAny:
    """Wildcard shape, equal to every data shape.

    Never written by programs: the checker introduces it for the sum sides
    that reduction leaves unconstrained (a bare injection stepping into a
    case scrutinee, say), so that every reduct of a well-typed program still
    checks at its original type.
    """

    __slots__ = ()

    def __eq__(self, other):
        return isinstance(other, (DUnit, DSum, DProd, DAny))

    def __hash__(self):
        return hash(())

    def __repr__(self):
        return "DAny()"


DataType = Union[DUnit, DSum, DProd, DAny]


# ---------------------------------------------------------------------------
# located types

@dataclass(frozen=True)
class DataTy:
    shape: DataType
    owners: PartySet


@dataclass(frozen=True)
class FunTy:
    arg: "ChorType"
    ret: "ChorType"
    owners: PartySet


@dataclass(frozen=True)
class TupleTy:
    elems: tuple["ChorType", ...]

    def __post_init__(self):
        if not self.elems:
            raise ValueError("tuple types need at least one component")


ChorType = Union[DataTy, FunTy, TupleTy]


# ---------------------------------------------------------------------------
# choreography expressions and values

@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Lam:
    param: str
    param_type: ChorType
    body: "ChorExpr"
    owners: PartySet
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Unit:
    owners: PartySet
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Inl:
    value: "ChorValue"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Inr:
    value: "ChorValue"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Pair:
    first: "ChorValue"
    second: "ChorValue"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Vec:
    elems: tuple["ChorValue", ...]
    span: Optional[Span] = _span_field()

    def __post_init__(self):
        if not self.elems:
            raise ValueError("tuples need at least one element")


@dataclass(frozen=True)
class Fst:
    owners: PartySet
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Snd:
    owners: PartySet
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Lookup:
    index: int  # 1-based
    owners: PartySet
    span: Optional[Span] = _span_field()

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("lookup indices are 1-based")


@dataclass(frozen=True)
class Com:
    sender: str
    recipients: PartySet
    span: Optional[Span] = _span_field()


ChorValue = Union[Var, Lam, Unit, Inl, Inr, Pair, Vec, Fst, Snd, Lookup, Com]


@dataclass(frozen=True)
class Val:
    value: ChorValue
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class App:
    fn: "ChorExpr"
    arg: "ChorExpr"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Case:
    guards: PartySet
    scrutinee: "ChorExpr"
    left_var: str
    left_body: "ChorExpr"
    right_var: str
    right_body: "ChorExpr"
    span: Optional[Span] = _span_field()


ChorExpr = Union[Val, App, Case]


def val(v: ChorValue, span: Optional[Span] = None) -> Val:
    return Val(v, span)


# ---------------------------------------------------------------------------
# local process language

@dataclass(frozen=True)
class LVar:
    name: str


@dataclass(frozen=True)
class LUnit:
    pass


@dataclass(frozen=True)
class LLam:
    param: str
    body: "Behavior"


@dataclass(frozen=True)
class LInl:
    value: "LocalValue"


@dataclass(frozen=True)
class LInr:
    value: "LocalValue"


@dataclass(frozen=True)
class LPair:
    first: "LocalValue"
    second: "LocalValue"


@dataclass(frozen=True)
class LVec:
    elems: tuple["LocalValue", ...]

    def __post_init__(self):
        if not self.elems:
            raise ValueError("tuples need at least one element")


@dataclass(frozen=True)
class LFst:
    pass


@dataclass(frozen=True)
class LSnd:
    pass


@dataclass(frozen=True)
class LLookup:
    index: int


@dataclass(frozen=True)
class Recv:
    sender: str


@dataclass(frozen=True)
class Send:
    recipients: tuple[str, ...]  # may be empty; never contains the runner


@dataclass(frozen=True)
class SendSelf:
    recipients: tuple[str, ...]  # ditto; the sent value is also kept locally


@dataclass(frozen=True)
class Bottom:
    pass


BOTTOM = Bottom()

LocalValue = Union[
    LVar, LUnit, LLam, LInl, LInr, LPair, LVec, LFst, LSnd, LLookup,
    Recv, Send, SendSelf, Bottom,
]


@dataclass(frozen=True)
class BVal:
    value: LocalValue


@dataclass(frozen=True)
class BApp:
    fn: "Behavior"
    arg: "Behavior"


@dataclass(frozen=True)
class BCase:
    scrutinee: "Behavior"
    left_var: str
    left_body: "Behavior"
    right_var: str
    right_body: "Behavior"


Behavior = Union[BVal, BApp, BCase]

BOT = BVal(BOTTOM)


@dataclass(frozen=True)
class StepLabel:
    """Send/receive annotations on a local step; at most one side is nonempty."""

    sends: frozenset[tuple[str, LocalValue]] = frozenset()
    receives: frozenset[tuple[str, LocalValue]] = frozenset()


SILENT = StepLabel()


# ---------------------------------------------------------------------------
# free variables

def free_vars(e: ChorExpr) -> frozenset[str]:
    match e:
        case Val(v):
            return free_vars_value(v)
        case App(fn, arg):
            return free_vars(fn) | free_vars(arg)
        case Case(_, scrut, xl, ml, xr, mr):
            return (free_vars(scrut)
                    | (free_vars(ml) - {xl})
                    | (free_vars(mr) - {xr}))
    raise TypeError(f"not an expression: {e!r}")


def free_vars_value(v: ChorValue) -> frozenset[str]:
    match v:
        case Var(name):
            return frozenset({name})
        case Lam(param, _, body, _):
            return free_vars(body) - {param}
        case Inl(inner) | Inr(inner):
            return free_vars_value(inner)
        case Pair(a, b):
            return free_vars_value(a) | free_vars_value(b)
        case Vec(elems):
            out: frozenset[str] = frozenset()
            for elem in elems:
                out |= free_vars_value(elem)
            return out
        case Unit() | Fst() | Snd() | Lookup() | Com():
            return frozenset()
    raise TypeError(f"not a value: {v!r}")


def node_count(e: ChorExpr) -> int:
    match e:
        case Val(v):
            return 1 + _value_nodes(v)
        case App(fn, arg):
            return 1 + node_count(fn) + node_count(arg)
        case Case(_, scrut, _, ml, _, mr):
            return 1 + node_count(scrut) + node_count(ml) + node_count(mr)
    raise TypeError(f"not an expression: {e!r}")


def _value_nodes(v: ChorValue) -> int:
    match v:
        case Lam(_, _, body, _):
            return 1 + node_count(body)
        case Inl(inner) | Inr(inner):
            return 1 + _value_nodes(inner)
        case Pair(a, b):
            return 1 + _value_nodes(a) + _value_nodes(b)
        case Vec(elems):
            return 1 + sum(_value_nodes(x) for x in elems)
        case _:
            return 1


# ---------------------------------------------------------------------------
# canonical printing
#
# `+` binds looser than `*`; both are printed left-associated, so a compound
# right operand gets parenthesized.  A located compound shape is wrapped in
# parens before `@`.  One-element tuples take a trailing comma.

def print_data(d: DataType, level: int = 0) -> str:
    # level: 0 = sum position, 1 = product position, 2 = atom
    match d:
        case DUnit():
            return "()"
        case DSum(l, r):
            s = f"{print_data(l, 0)} + {print_data(r, 1)}"
            return f"({s})" if level > 0 else s
        case DProd(l, r):
            s = f"{print_data(l, 1)} * {print_data(r, 2)}"
            return f"({s})" if level > 1 else s
        case DAny():
            return "_"
    raise TypeError(f"not a data shape: {d!r}")


def _data_atom(d: DataType) -> str:
    text = print_data(d)
    return text if isinstance(d, DUnit) else f"({text})"


def print_type(t: ChorType) -> str:
    match t:
        case DataTy(shape, owners):
            return f"{_data_atom(shape)}@{owners}"
        case FunTy(arg, ret, owners):
            return f"({print_type(arg)} -> {print_type(ret)})@{owners}"
        case TupleTy(elems):
            if len(elems) == 1:
                return f"({print_type(elems[0])},)"
            return "(" + ", ".join(print_type(e) for e in elems) + ")"
    raise TypeError(f"not a type: {t!r}")


# precedence contexts for expression printing
_TOP = 0    # full expressions
_FN = 1     # function position of an application
_ATOM = 2   # argument position / constructor operand


def print_expr(e: ChorExpr, level: int = _TOP) -> str:
    match e:
        case Val(v):
            return print_value(v, level)
        case App(fn, arg):
            s = f"{print_expr(fn, _FN)} {print_expr(arg, _ATOM)}"
            return f"({s})" if level >= _ATOM else s
        case Case(guards, scrut, xl, ml, xr, mr):
            s = (f"case{guards} {print_expr(scrut, _FN)} of "
                 f"Inl {xl} => {print_expr(ml)}; "
                 f"Inr {xr} => {print_expr(mr)}")
            return f"({s})" if level >= _FN else s
    raise TypeError(f"not an expression: {e!r}")


def print_value(v: ChorValue, level: int = _TOP) -> str:
    match v:
        case Var(name):
            return name
        case Unit(owners):
            return f"()@{owners}"
        case Lam(param, ptype, body, owners):
            return f"(fn {param}: {print_type(ptype)}. {print_expr(body)})@{owners}"
        case Inl(inner):
            s = f"Inl {print_value(inner, _ATOM)}"
            return f"({s})" if level >= _ATOM else s
        case Inr(inner):
            s = f"Inr {print_value(inner, _ATOM)}"
            return f"({s})" if level >= _ATOM else s
        case Pair(a, b):
            s = f"Pair {print_value(a, _ATOM)} {print_value(b, _ATOM)}"
            return f"({s})" if level >= _ATOM else s
        case Vec(elems):
            if len(elems) == 1:
                return f"({print_value(elems[0])},)"
            return "(" + ", ".join(print_value(x) for x in elems) + ")"
        case Fst(owners):
            return f"fst{owners}"
        case Snd(owners):
            return f"snd{owners}"
        case Lookup(index, owners):
            return f"lookup[{index}]{owners}"
        case Com(sender, recipients):
            return f"com[{sender}]{recipients}"
    raise TypeError(f"not a value: {v!r}")


def print_behavior(b: Behavior, level: int = _TOP) -> str:
    match b:
        case BVal(l):
            return print_local(l, level)
        case BApp(fn, arg):
            s = f"{print_behavior(fn, _FN)} {print_behavior(arg, _ATOM)}"
            return f"({s})" if level >= _ATOM else s
        case BCase(scrut, xl, bl, xr, br):
            s = (f"case {print_behavior(scrut, _FN)} of "
                 f"Inl {xl} => {print_behavior(bl)}; "
                 f"Inr {xr} => {print_behavior(br)}")
            return f"({s})" if level >= _FN else s
    raise TypeError(f"not a behavior: {b!r}")


def print_local(l: LocalValue, level: int = _TOP) -> str:
    match l:
        case LVar(name):
            return name
        case LUnit():
            return "()"
        case LLam(param, body):
            s = f"fn {param}. {print_behavior(body)}"
            return f"({s})" if level >= _FN else s
        case LInl(inner):
            s = f"Inl {print_local(inner, _ATOM)}"
            return f"({s})" if level >= _ATOM else s
        case LInr(inner):
            s = f"Inr {print_local(inner, _ATOM)}"
            return f"({s})" if level >= _ATOM else s
        case LPair(a, b):
            s = f"Pair {print_local(a, _ATOM)} {print_local(b, _ATOM)}"
            return f"({s})" if level >= _ATOM else s
        case LVec(elems):
            if len(elems) == 1:
                return f"({print_local(elems[0])},)"
            return "(" + ", ".join(print_local(x) for x in elems) + ")"
        case LFst():
            return "fst"
        case LSnd():
            return "snd"
        case LLookup(index):
            return f"lookup[{index}]"
        case Recv(sender):
            return f"recv_[{sender}]"
        case Send(recipients):
            return "send_[" + ", ".join(recipients) + "]"
        case SendSelf(recipients):
            return "send*_[" + ", ".join(recipients) + "]"
        case Bottom():
            return "⊥"
    raise TypeError(f"not a local value: {l!r}")


def canonical_print(x) -> str:
    """Render an expression, type, or local behavior as canonical text."""
    if isinstance(x, (Val, App, Case)):
        return print_expr(x)
    if isinstance(x, (DataTy, FunTy, TupleTy)):
        return print_type(x)
    if isinstance(x, (BVal, BApp, BCase)):
        return print_behavior(x)
    if isinstance(x, (DUnit, DSum, DProd)):
        return print_data(x)
    # bare values are accepted for convenience
    return print_value(x)
