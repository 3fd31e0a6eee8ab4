"""Location-aware substitution and the centralized small-step semantics.

Evaluation is deterministic: function position first, then the argument,
then the redex.  Communication distributes over the data constructors so a
whole data value changes location in one step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .masking import mask_value
from .syntax import (
    App, Case, ChorExpr, ChorValue, Com, Fst, Inl, Inr, Lam, Lookup, Pair,
    PartySet, Snd, Unit, Val, Var, Vec, node_count, print_expr,
)


@dataclass(frozen=True)
class Stepped:
    expr: ChorExpr
    rule: str


@dataclass(frozen=True)
class IsValue:
    pass


@dataclass(frozen=True)
class Stuck:
    reason: str


StepResult = Union[Stepped, IsValue, Stuck]


class StuckError(RuntimeError):
    pass


class FuelExhausted(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# substitution

def subst(m: ChorExpr, x: str, v: ChorValue) -> ChorExpr:
    match m:
        case Val(inner):
            return Val(subst_value(inner, x, v), m.span)
        case App(fn, arg):
            return App(subst(fn, x, v), subst(arg, x, v), m.span)
        case Case(guards, scrut, xl, ml, xr, mr):
            # the scrutinee always receives the unmasked value; the branches
            # only see it masked to the guard set, or not at all
            scrut2 = subst(scrut, x, v)
            masked = mask_value(v, guards)
            if masked is None:
                return Case(guards, scrut2, xl, ml, xr, mr, m.span)
            ml2 = ml if xl == x else subst(ml, x, masked)
            mr2 = mr if xr == x else subst(mr, x, masked)
            return Case(guards, scrut2, xl, ml2, xr, mr2, m.span)
    raise TypeError(f"not an expression: {m!r}")


def subst_value(w: ChorValue, x: str, v: ChorValue) -> ChorValue:
    match w:
        case Var(name):
            return v if name == x else w
        case Lam(param, ptype, body, owners):
            if param == x:
                return w
            masked = mask_value(v, owners)
            if masked is None:
                return w
            return Lam(param, ptype, subst(body, x, masked), owners, w.span)
        case Inl(inner):
            return Inl(subst_value(inner, x, v), w.span)
        case Inr(inner):
            return Inr(subst_value(inner, x, v), w.span)
        case Pair(a, b):
            return Pair(subst_value(a, x, v), subst_value(b, x, v), w.span)
        case Vec(elems):
            return Vec(tuple(subst_value(e, x, v) for e in elems), w.span)
        case Unit() | Fst() | Snd() | Lookup() | Com():
            return w
    raise TypeError(f"not a value: {w!r}")


# ---------------------------------------------------------------------------
# stepping

def step(e: ChorExpr) -> StepResult:
    match e:
        case Val(_):
            return IsValue()
        case App(fn, arg):
            if not isinstance(fn, Val):
                inner = step(fn)
                if isinstance(inner, Stepped):
                    return Stepped(App(inner.expr, arg, e.span), inner.rule)
                return _stuck_from(inner, fn)
            if not isinstance(arg, Val):
                inner = step(arg)
                if isinstance(inner, Stepped):
                    return Stepped(App(fn, inner.expr, e.span), inner.rule)
                return _stuck_from(inner, arg)
            return _step_redex(fn.value, arg.value, e)
        case Case(guards, scrut, xl, ml, xr, mr):
            if not isinstance(scrut, Val):
                inner = step(scrut)
                if isinstance(inner, Stepped):
                    return Stepped(
                        Case(guards, inner.expr, xl, ml, xr, mr, e.span),
                        inner.rule)
                return _stuck_from(inner, scrut)
            match scrut.value:
                case Inl(payload):
                    masked = mask_value(payload, guards)
                    if masked is None:
                        return Stuck("case payload does not mask to the guards")
                    return Stepped(subst(ml, xl, masked), "CASEL")
                case Inr(payload):
                    masked = mask_value(payload, guards)
                    if masked is None:
                        return Stuck("case payload does not mask to the guards")
                    return Stepped(subst(mr, xr, masked), "CASER")
                case _:
                    return Stuck("case scrutinee is not an injection")
    raise TypeError(f"not an expression: {e!r}")


def _stuck_from(result: StepResult, at: ChorExpr) -> Stuck:
    if isinstance(result, Stuck):
        return result
    return Stuck(f"no rule applies at {print_expr(at)}")


def _step_redex(fn: ChorValue, arg: ChorValue, e: App) -> StepResult:
    match fn:
        case Lam(param, _, body, owners):
            masked = mask_value(arg, owners)
            if masked is None:
                return Stuck("argument does not mask to the function's owners")
            return Stepped(subst(body, param, masked), "APPABS")
        case Fst(owners):
            if not isinstance(arg, Pair):
                return Stuck("fst of a non-pair")
            masked = mask_value(arg.first, owners)
            if masked is None:
                return Stuck("projected component does not mask")
            return Stepped(Val(masked), "PROJ1")
        case Snd(owners):
            if not isinstance(arg, Pair):
                return Stuck("snd of a non-pair")
            masked = mask_value(arg.second, owners)
            if masked is None:
                return Stuck("projected component does not mask")
            return Stepped(Val(masked), "PROJ2")
        case Lookup(index, owners):
            if not isinstance(arg, Vec) or index > len(arg.elems):
                return Stuck("lookup into a non-tuple or out of range")
            masked = mask_value(arg.elems[index - 1], owners)
            if masked is None:
                return Stuck("projected component does not mask")
            return Stepped(Val(masked), "PROJN")
        case Com(sender, recipients):
            moved = _com_value(arg, sender, recipients)
            if moved is None:
                return Stuck("com of a non-data value or non-owning sender")
            rule = {Unit: "COM1", Pair: "COMPAIR",
                    Inl: "COMINL", Inr: "COMINR"}[type(arg)]
            return Stepped(Val(moved), rule)
        case _:
            return Stuck("applied a non-function value")


def _com_value(v: ChorValue, sender: str,
               recipients) -> Optional[ChorValue]:
    """Relocate a data value to the recipients, or None if unsendable."""
    match v:
        case Unit():
            if mask_value(v, PartySet([sender])) is None:
                return None
            return Unit(recipients)
        case Pair(a, b):
            ma = _com_value(a, sender, recipients)
            mb = _com_value(b, sender, recipients)
            if ma is None or mb is None:
                return None
            return Pair(ma, mb)
        case Inl(inner):
            m = _com_value(inner, sender, recipients)
            return Inl(m) if m is not None else None
        case Inr(inner):
            m = _com_value(inner, sender, recipients)
            return Inr(m) if m is not None else None
        case _:
            return None


# ---------------------------------------------------------------------------
# driver

def find_redex(e: ChorExpr) -> ChorExpr:
    """The subterm the next step will rewrite, under the fixed strategy."""
    match e:
        case App(fn, arg):
            if not isinstance(fn, Val):
                return find_redex(fn)
            if not isinstance(arg, Val):
                return find_redex(arg)
            return e
        case Case(scrutinee=scrut):
            if not isinstance(scrut, Val):
                return find_redex(scrut)
            return e
    return e


def run(e: ChorExpr, fuel: Optional[int] = None,
        trace: Optional[list[tuple[str, str]]] = None) -> ChorValue:
    """Step to a value; the fuel bound is a guard, never part of semantics."""
    if fuel is None:
        fuel = 10 * node_count(e)
    current = e
    for _ in range(fuel + 1):
        result = step(current)
        if isinstance(result, IsValue):
            assert isinstance(current, Val)
            return current.value
        if isinstance(result, Stuck):
            raise StuckError(result.reason)
        if trace is not None:
            trace.append((result.rule, print_expr(find_redex(current))))
        current = result.expr
    raise FuelExhausted(f"no value after {fuel} steps")
