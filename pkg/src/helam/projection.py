"""Endpoint projection to per-party behaviors and the bottom-normalizer.

A party's projection keeps the parts of the choreography it takes part in
and replaces everything else with the missing-value marker.  The floor
function collapses composite terms that are missing everywhere (a pair of
missing halves, an application of a missing function to a value) so that
"not my problem" is always represented by the single marker.
"""

from __future__ import annotations

from typing import Optional

from .syntax import (
    App, BApp, BCase, BOT, BOTTOM, BVal, Behavior, Bottom, Case, ChorExpr,
    ChorValue, Com, Fst, Inl, Inr, LFst, LInl, LInr, LLam, LLookup, LPair,
    LSnd, LUnit, LVar, LVec, Lam, LocalValue, Lookup, Pair, PartySet, Recv,
    Send, SendSelf, Snd, Unit, Val, Var, Vec,
)


class EmptyRoles(ValueError):
    """The expression mentions no party, so no network can be built."""


def roles(e: ChorExpr) -> PartySet:
    """Every party named anywhere in the expression, annotations included."""
    found: set[str] = set()
    _roles_expr(e, found)
    if not found:
        raise EmptyRoles("expression names no parties")
    return PartySet(found)


def _roles_expr(e: ChorExpr, out: set[str]) -> None:
    match e:
        case Val(v):
            _roles_value(v, out)
        case App(fn, arg):
            _roles_expr(fn, out)
            _roles_expr(arg, out)
        case Case(guards, scrut, _, ml, _, mr):
            out.update(guards)
            _roles_expr(scrut, out)
            _roles_expr(ml, out)
            _roles_expr(mr, out)


def _roles_value(v: ChorValue, out: set[str]) -> None:
    match v:
        case Var():
            pass
        case Unit(owners) | Fst(owners) | Snd(owners) | Lookup(_, owners):
            out.update(owners)
        case Lam(_, ptype, body, owners):
            out.update(owners)
            _roles_type(ptype, out)
            _roles_expr(body, out)
        case Com(sender, recipients):
            out.add(sender)
            out.update(recipients)
        case Inl(inner) | Inr(inner):
            _roles_value(inner, out)
        case Pair(a, b):
            _roles_value(a, out)
            _roles_value(b, out)
        case Vec(elems):
            for elem in elems:
                _roles_value(elem, out)


def _roles_type(t, out: set[str]) -> None:
    from .syntax import DataTy, FunTy, TupleTy
    match t:
        case DataTy(_, owners):
            out.update(owners)
        case FunTy(arg, ret, owners):
            out.update(owners)
            _roles_type(arg, out)
            _roles_type(ret, out)
        case TupleTy(elems):
            for elem in elems:
                _roles_type(elem, out)


# ---------------------------------------------------------------------------
# floor

def floor(b: Behavior) -> Behavior:
    match b:
        case BVal(l):
            return BVal(floor_value(l))
        case BApp(fn, arg):
            f = floor(fn)
            a = floor(arg)
            # an application of a missing function to a finished argument is
            # itself missing; a pending argument still has work to do
            if f == BOT and isinstance(a, BVal):
                return BOT
            return BApp(f, a)
        case BCase(scrut, xl, bl, xr, br):
            s = floor(scrut)
            l = floor(bl)
            r = floor(br)
            if s == BOT and l == BOT and r == BOT:
                return BOT
            return BCase(s, xl, l, xr, r)
    raise TypeError(f"not a behavior: {b!r}")


def floor_value(l: LocalValue) -> LocalValue:
    match l:
        case LInl(inner):
            f = floor_value(inner)
            return BOTTOM if isinstance(f, Bottom) else LInl(f)
        case LInr(inner):
            f = floor_value(inner)
            return BOTTOM if isinstance(f, Bottom) else LInr(f)
        case LPair(a, b):
            fa = floor_value(a)
            fb = floor_value(b)
            if isinstance(fa, Bottom) and isinstance(fb, Bottom):
                return BOTTOM
            return LPair(fa, fb)
        case LVec(elems):
            fs = tuple(floor_value(e) for e in elems)
            if all(isinstance(f, Bottom) for f in fs):
                return BOTTOM
            return LVec(fs)
        case LLam(param, body):
            return LLam(param, floor(body))
        case _:
            return l


# ---------------------------------------------------------------------------
# projection

def project(e: ChorExpr, p: str) -> Behavior:
    match e:
        case Val(v):
            return BVal(project_value(v, p))
        case App(fn, arg):
            return floor(BApp(project(fn, p), project(arg, p)))
        case Case(guards, scrut, xl, ml, xr, mr):
            if p in guards:
                return floor(BCase(project(scrut, p), xl, project(ml, p),
                                   xr, project(mr, p)))
            # a bystander only helps compute the guard; the branches cannot
            # mention it, so they are dropped outright
            return floor(BCase(project(scrut, p), xl, BOT, xr, BOT))
    raise TypeError(f"not an expression: {e!r}")


def project_value(v: ChorValue, p: str) -> LocalValue:
    match v:
        case Var(name):
            return LVar(name)
        case Unit(owners):
            return LUnit() if p in owners else BOTTOM
        case Lam(param, _, body, owners):
            if p not in owners:
                return BOTTOM
            return LLam(param, project(body, p))
        case Fst(owners):
            return LFst() if p in owners else BOTTOM
        case Snd(owners):
            return LSnd() if p in owners else BOTTOM
        case Lookup(index, owners):
            return LLookup(index) if p in owners else BOTTOM
        case Com(sender, recipients):
            if p == sender:
                if p in recipients:
                    return SendSelf(recipients.without(p))
                return Send(recipients.members)
            if p in recipients:
                return Recv(sender)
            return BOTTOM
        case Inl(inner):
            return floor_value(LInl(project_value(inner, p)))
        case Inr(inner):
            return floor_value(LInr(project_value(inner, p)))
        case Pair(a, b):
            return floor_value(LPair(project_value(a, p),
                                     project_value(b, p)))
        case Vec(elems):
            return floor_value(LVec(tuple(project_value(x, p)
                                          for x in elems)))
    raise TypeError(f"not a value: {v!r}")


def project_all(e: ChorExpr,
                members: Optional[PartySet] = None) -> dict[str, Behavior]:
    """Project to every role; a fixed member set keeps network domains stable
    across steps (roles can disappear from the term, parties cannot)."""
    if members is None:
        members = roles(e)
    return {p: project(e, p) for p in members}


# ---------------------------------------------------------------------------
# substitution in the local language (no masking; locations are gone)

def local_subst(b: Behavior, x: str, l: LocalValue) -> Behavior:
    match b:
        case BVal(inner):
            return BVal(local_subst_value(inner, x, l))
        case BApp(fn, arg):
            return BApp(local_subst(fn, x, l), local_subst(arg, x, l))
        case BCase(scrut, xl, bl, xr, br):
            return BCase(
                local_subst(scrut, x, l),
                xl, bl if xl == x else local_subst(bl, x, l),
                xr, br if xr == x else local_subst(br, x, l))
    raise TypeError(f"not a behavior: {b!r}")


def local_subst_value(w: LocalValue, x: str, l: LocalValue) -> LocalValue:
    match w:
        case LVar(name):
            return l if name == x else w
        case LLam(param, body):
            if param == x:
                return w
            return LLam(param, local_subst(body, x, l))
        case LInl(inner):
            return LInl(local_subst_value(inner, x, l))
        case LInr(inner):
            return LInr(local_subst_value(inner, x, l))
        case LPair(a, b):
            return LPair(local_subst_value(a, x, l),
                         local_subst_value(b, x, l))
        case LVec(elems):
            return LVec(tuple(local_subst_value(e, x, l) for e in elems))
        case _:
            return w
