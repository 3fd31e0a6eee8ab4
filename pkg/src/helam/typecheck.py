"""Bidirectional type checker for choreographies.

Most expressions synthesize a type.  Injections and the keyword functions
are flexible about parts of their types, so they are checked against an
expected type pushed inward from an application, annotation, or case branch;
com/fst/snd/lookup in head position instead recover the missing pieces from
the argument's synthesized type.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .masking import is_noop, mask_type
from .syntax import (
    App, Case, ChorExpr, ChorType, ChorValue, Com, DAny, DProd, DSum, DUnit,
    DataTy, Fst, FunTy, Inl, Inr, Lam, Lookup, Pair, PartySet, Snd, Span,
    TupleTy, Unit, Val, Var, Vec, print_type,
)

# diagnostic kinds
UNBOUND_VAR = "UnboundVar"
MASK_UNDEFINED = "MaskUndefined"
NOT_A_FUNCTION = "NotAFunction"
ARG_MISMATCH = "ArgMismatch"
GUARD_NOT_SUM = "GuardNotSum"
BRANCH_MISMATCH = "BranchMismatch"
PARTIES_NOT_SUBSET = "PartiesNotSubset"
SENDER_NOT_OWNER = "SenderNotOwner"
PAIR_COMPONENTS_DISJOINT = "PairComponentsDisjoint"
INDEX_OUT_OF_RANGE = "IndexOutOfRange"
NOOP_VIOLATION = "NoopViolation"
AMBIGUOUS_SUM = "AmbiguousSum"

ALL_KINDS = (
    UNBOUND_VAR, MASK_UNDEFINED, NOT_A_FUNCTION, ARG_MISMATCH, GUARD_NOT_SUM,
    BRANCH_MISMATCH, PARTIES_NOT_SUBSET, SENDER_NOT_OWNER,
    PAIR_COMPONENTS_DISJOINT, INDEX_OUT_OF_RANGE, NOOP_VIOLATION,
    AMBIGUOUS_SUM,
)

TYPING_RULES = (
    "TLAMBDA", "TVAR", "TAPP", "TCASE", "TUNIT", "TPAIR", "TVEC",
    "TINL", "TINR", "TPROJ1", "TPROJ2", "TPROJN", "TCOM",
)


class TypeErr(Exception):
    def __init__(self, kind: str, detail: str, span: Optional[Span] = None):
        self.kind = kind
        self.detail = detail
        self.span = span
        super().__init__(f"{kind}: {detail}")

    def record(self) -> str:
        """One machine-readable diagnostic line: kind, span, detail."""
        where = str(self.span) if self.span else "-"
        return f"{self.kind}\t{where}\t{self.detail}"


@dataclass(frozen=True)
class TypeEnv:
    theta: PartySet
    bindings: tuple[tuple[str, ChorType], ...] = ()

    def bind(self, name: str, t: ChorType) -> "TypeEnv":
        return TypeEnv(self.theta, self.bindings + ((name, t),))

    def with_theta(self, theta: PartySet) -> "TypeEnv":
        return TypeEnv(theta, self.bindings)

    def lookup(self, name: str, span: Optional[Span] = None) -> ChorType:
        for bound, t in reversed(self.bindings):
            if bound == name:
                return t
        raise TypeErr(UNBOUND_VAR, f"unbound variable {name}", span)


def _sum_sides(shape):
    """Left/right of a sum shape, treating the wildcard as a wild sum."""
    if isinstance(shape, DSum):
        return shape.left, shape.right
    if isinstance(shape, DAny):
        return DAny(), DAny()
    return None


def _prod_sides(shape):
    if isinstance(shape, DProd):
        return shape.left, shape.right
    if isinstance(shape, DAny):
        return DAny(), DAny()
    return None


# rule coverage accounting, used by the generator's coverage test
_rule_counts: dict[str, int] = {}


def _note(rule: str) -> None:
    _rule_counts[rule] = _rule_counts.get(rule, 0) + 1


def rule_coverage_reset() -> None:
    _rule_counts.clear()


def rule_coverage() -> dict[str, int]:
    return dict(_rule_counts)


# ---------------------------------------------------------------------------
# entry point

def typecheck(theta: PartySet, e: ChorExpr,
              expected: Optional[ChorType] = None) -> ChorType:
    """Type a closed expression under theta; raises TypeErr on rejection.

    With an expected type the expression is checked against it, which also
    accepts flexible forms (bare injections, keyword functions) that cannot
    synthesize on their own.
    """
    env = TypeEnv(theta)
    if expected is None:
        return synth(env, e)
    check(env, e, expected)
    return expected


# ---------------------------------------------------------------------------
# synthesis

def synth(env: TypeEnv, e: ChorExpr) -> ChorType:
    match e:
        case Val(v):
            return synth_value(env, v, e.span)
        case App(fn, arg):
            return _synth_app(env, fn, arg, e.span)
        case Case():
            return _synth_case(env, e)
    raise TypeError(f"not an expression: {e!r}")


def synth_value(env: TypeEnv, v: ChorValue,
                span: Optional[Span] = None) -> ChorType:
    match v:
        case Var(name):
            t = env.lookup(name, span or v.span)
            masked = mask_type(t, env.theta)
            if masked is None:
                raise TypeErr(
                    MASK_UNDEFINED,
                    f"{name}: {print_type(t)} has no owner in {env.theta}",
                    span or v.span)
            _note("TVAR")
            return masked
        case Unit(owners):
            _require_subset(owners, env.theta, span or v.span)
            _note("TUNIT")
            return DataTy(DUnit(), owners)
        case Lam(param, ptype, body, owners):
            _require_subset(owners, env.theta, span or v.span)
            if not is_noop(ptype, owners):
                raise TypeErr(
                    NOOP_VIOLATION,
                    f"parameter type {print_type(ptype)} is not fixed by "
                    f"masking to {owners}",
                    span or v.span)
            ret = synth(env.with_theta(owners).bind(param, ptype), body)
            _note("TLAMBDA")
            return FunTy(ptype, ret, owners)
        case Pair(a, b):
            ta = _require_data(synth_value(env, a, span), "pair component", span)
            tb = _require_data(synth_value(env, b, span), "pair component", span)
            inter = ta.owners.intersect(tb.owners)
            if inter is None:
                raise TypeErr(
                    PAIR_COMPONENTS_DISJOINT,
                    f"pair components share no owner: {ta.owners} vs {tb.owners}",
                    span)
            _note("TPAIR")
            return DataTy(DProd(ta.shape, tb.shape), inter)
        case Vec(elems):
            ts = tuple(synth_value(env, x, span) for x in elems)
            _note("TVEC")
            return TupleTy(ts)
        case Inl() | Inr():
            raise TypeErr(
                AMBIGUOUS_SUM,
                "injection needs an expected type; add an annotation",
                span or v.span)
        case Fst() | Snd() | Lookup():
            raise TypeErr(
                AMBIGUOUS_SUM,
                "projection keyword needs an expected type or an argument",
                span or v.span)
        case Com(sender, recipients):
            # a bare com defaults to sending a unit owned by the sender alone
            full = recipients.union(PartySet([sender]))
            _require_subset(full, env.theta, span or v.span)
            _note("TCOM")
            return FunTy(DataTy(DUnit(), PartySet([sender])),
                         DataTy(DUnit(), recipients), full)
    raise TypeError(f"not a value: {v!r}")


def _synth_app(env: TypeEnv, fn: ChorExpr, arg: ChorExpr,
               span: Optional[Span]) -> ChorType:
    if isinstance(fn, Val):
        head = fn.value
        if isinstance(head, Com):
            return _synth_com_app(env, head, arg, span)
        if isinstance(head, (Fst, Snd)):
            return _synth_proj_app(env, head, arg, span)
        if isinstance(head, Lookup):
            return _synth_lookup_app(env, head, arg, span)
        if isinstance(head, (Unit, Inl, Inr, Pair, Vec)):
            raise TypeErr(NOT_A_FUNCTION, "applied a non-function value", span)
    tf = synth(env, fn)
    if not isinstance(tf, FunTy):
        raise TypeErr(NOT_A_FUNCTION,
                      f"applied expression of type {print_type(tf)}", span)
    check_arg(env, arg, tf.arg, tf.owners)
    _note("TAPP")
    return tf.ret


def _synth_com_app(env: TypeEnv, com: Com, arg: ChorExpr,
                   span: Optional[Span]) -> ChorType:
    full = com.recipients.union(PartySet([com.sender]))
    _require_subset(full, env.theta, span)
    ta = _require_data(synth(env, arg), "com argument", span)
    if com.sender not in ta.owners:
        raise TypeErr(SENDER_NOT_OWNER,
                      f"sender {com.sender} does not own the argument "
                      f"({print_type(ta)})", span)
    _note("TCOM")
    _note("TAPP")
    return DataTy(ta.shape, com.recipients)


def _synth_proj_app(env: TypeEnv, proj, arg: ChorExpr,
                    span: Optional[Span]) -> ChorType:
    owners = proj.owners
    _require_subset(owners, env.theta, span)
    ta = _require_data(synth(env, arg), "projection argument", span)
    sides = _prod_sides(ta.shape)
    if sides is None:
        raise TypeErr(ARG_MISMATCH,
                      f"fst/snd needs a product, got {print_type(ta)}", span)
    masked = mask_type(ta, owners)
    if masked != DataTy(ta.shape, owners):
        raise TypeErr(ARG_MISMATCH,
                      f"{print_type(ta)} does not mask to owners {owners}",
                      span)
    if isinstance(proj, Fst):
        _note("TPROJ1")
        side = sides[0]
    else:
        _note("TPROJ2")
        side = sides[1]
    _note("TAPP")
    return DataTy(side, owners)


def _synth_lookup_app(env: TypeEnv, lk: Lookup, arg: ChorExpr,
                      span: Optional[Span]) -> ChorType:
    _require_subset(lk.owners, env.theta, span)
    ta = synth(env, arg)
    if not isinstance(ta, TupleTy):
        raise TypeErr(ARG_MISMATCH,
                      f"lookup needs a tuple, got {print_type(ta)}", span)
    if lk.index > len(ta.elems):
        raise TypeErr(INDEX_OUT_OF_RANGE,
                      f"lookup[{lk.index}] into a {len(ta.elems)}-tuple", span)
    masked = mask_type(ta, lk.owners)
    if masked is None:
        raise TypeErr(MASK_UNDEFINED,
                      f"{print_type(ta)} does not mask to {lk.owners}", span)
    _note("TPROJN")
    _note("TAPP")
    return masked.elems[lk.index - 1]


def _synth_case(env: TypeEnv, e: Case) -> ChorType:
    dl, dr, env_l, env_r = _case_prelude(env, e)
    try:
        tl = synth(env_l, e.left_body)
    except TypeErr as err:
        if err.kind != AMBIGUOUS_SUM:
            raise
        tr = synth(env_r, e.right_body)  # ambiguity here propagates
        check(env_l, e.left_body, tr)
        _note("TCASE")
        return tr
    try:
        tr = synth(env_r, e.right_body)
    except TypeErr as err:
        if err.kind != AMBIGUOUS_SUM:
            raise
        check(env_r, e.right_body, tl)
        _note("TCASE")
        return tl
    if tl != tr:
        raise TypeErr(BRANCH_MISMATCH,
                      f"branches disagree: {print_type(tl)} vs {print_type(tr)}",
                      e.span)
    _note("TCASE")
    return tl


def _case_prelude(env: TypeEnv, e: Case):
    """Shared guard checks; returns branch payload shapes and environments."""
    _require_subset(e.guards, env.theta, e.span)
    try:
        tn = synth(env, e.scrutinee)
    except TypeErr as err:
        if err.kind != AMBIGUOUS_SUM or not isinstance(e.scrutinee, Val):
            raise
        # a flexible injection still has a definite owner set and a definite
        # shape on the side it actually carries; the other side stays wild
        owners = _data_owners(env, e.scrutinee.value, e.span)
        if owners.intersect(e.guards) != e.guards:
            raise TypeErr(
                MASK_UNDEFINED,
                f"guard owned by {owners} is not located at all "
                f"branching parties {e.guards}", e.span) from err
        tn = DataTy(_value_shape(env, e.scrutinee.value, e.span), owners)
    masked = mask_type(tn, e.guards)
    if masked is None:
        raise TypeErr(MASK_UNDEFINED,
                      f"guard of type {print_type(tn)} has no owner among "
                      f"{e.guards}", e.span)
    sides = _sum_sides(masked.shape) if isinstance(masked, DataTy) else None
    if sides is None:
        raise TypeErr(GUARD_NOT_SUM,
                      f"guard must be a located sum, got {print_type(tn)}",
                      e.span)
    if masked.owners != e.guards:
        raise TypeErr(MASK_UNDEFINED,
                      f"guard of type {print_type(tn)} is not located at all "
                      f"branching parties {e.guards}", e.span)
    dl, dr = sides
    env_l = env.with_theta(e.guards).bind(e.left_var, DataTy(dl, e.guards))
    env_r = env.with_theta(e.guards).bind(e.right_var, DataTy(dr, e.guards))
    return dl, dr, env_l, env_r


def _value_shape(env: TypeEnv, v: ChorValue, span: Optional[Span]):
    """The data shape of a value, with wildcards for unconstrained sum sides."""
    match v:
        case Unit():
            return DUnit()
        case Inl(inner):
            return DSum(_value_shape(env, inner, span), DAny())
        case Inr(inner):
            return DSum(DAny(), _value_shape(env, inner, span))
        case Pair(a, b):
            return DProd(_value_shape(env, a, span),
                         _value_shape(env, b, span))
        case Var():
            got = _require_data(synth_value(env, v, span), "variable", span)
            return got.shape
    raise TypeErr(ARG_MISMATCH, "not a data value", span)


# ---------------------------------------------------------------------------
# checking against an expected type

def check(env: TypeEnv, e: ChorExpr, expected: ChorType) -> None:
    match e:
        case Val(v):
            check_value(env, v, expected, e.span)
            return
        case App(Val(Lam() as lam), arg):
            _lam_preconditions(env, lam, e.span)
            check_arg(env, arg, lam.param_type, lam.owners)
            inner = env.with_theta(lam.owners).bind(lam.param, lam.param_type)
            check(inner, lam.body, expected)
            _note("TLAMBDA")
            _note("TAPP")
            return
        case App(Val(Com() as com), arg):
            _check_com_app(env, com, arg, expected, e.span)
            return
        case App():
            try:
                got = synth(env, e)
            except TypeErr as err:
                if err.kind != AMBIGUOUS_SUM:
                    raise
                # a flexible application (projection of a substituted-in
                # literal, say) checks exactly when it masks to the
                # expectation under the full party set, a no-op here
                _flex(env, e, expected, env.theta)
                return
            _expect_equal(got, expected, e.span)
            return
        case Case():
            _, _, env_l, env_r = _case_prelude(env, e)
            check(env_l, e.left_body, expected)
            check(env_r, e.right_body, expected)
            _note("TCASE")
            return
    raise TypeError(f"not an expression: {e!r}")


def _check_com_app(env: TypeEnv, com: Com, arg: ChorExpr,
                   expected: ChorType, span: Optional[Span]) -> None:
    if not (isinstance(expected, DataTy) and expected.owners == com.recipients):
        got = synth_value(env, com, span)  # may raise PartiesNotSubset
        raise TypeErr(ARG_MISMATCH,
                      f"com to {com.recipients} cannot produce "
                      f"{print_type(expected)} (got {print_type(got)})", span)
    full = com.recipients.union(PartySet([com.sender]))
    _require_subset(full, env.theta, span)
    try:
        ta = _require_data(synth(env, arg), "com argument", span)
        owners = ta.owners
        if ta.shape != expected.shape:
            raise TypeErr(ARG_MISMATCH,
                          f"com argument has shape {print_type(ta)}, expected "
                          f"{print_type(expected)}", span)
    except TypeErr as err:
        if err.kind != AMBIGUOUS_SUM:
            raise
        owners = _flex_data(env, arg, expected.shape, span)
    if com.sender not in owners:
        raise TypeErr(SENDER_NOT_OWNER,
                      f"sender {com.sender} does not own the argument", span)
    _note("TCOM")
    _note("TAPP")


def check_value(env: TypeEnv, v: ChorValue, expected: ChorType,
                span: Optional[Span] = None) -> None:
    match v:
        case Var() | Unit() | Pair() | Vec() if isinstance(expected, DataTy):
            # pairs and tuples recurse structurally so that flexible leaves
            # (injections) inside them still check
            if isinstance(v, (Var, Unit)):
                _expect_equal(synth_value(env, v, span), expected, span)
                return
            _check_data_value(env, v, expected.shape, expected.owners, span)
            return
        case Inl(inner):
            owners, left, _ = _as_sum(expected, span)
            _check_data_value(env, inner, left, owners, span)
            _note("TINL")
            return
        case Inr(inner):
            owners, _, right = _as_sum(expected, span)
            _check_data_value(env, inner, right, owners, span)
            _note("TINR")
            return
        case Lam(param, ptype, body, owners) if isinstance(expected, FunTy):
            if owners != expected.owners or ptype != expected.arg:
                raise TypeErr(ARG_MISMATCH,
                              f"function literal does not fit "
                              f"{print_type(expected)}", span)
            _lam_preconditions(env, v, span)
            check(env.with_theta(owners).bind(param, ptype), body, expected.ret)
            _note("TLAMBDA")
            return
        case Vec(elems) if isinstance(expected, TupleTy):
            if len(elems) != len(expected.elems):
                raise TypeErr(ARG_MISMATCH,
                              f"tuple of {len(elems)} checked against "
                              f"{print_type(expected)}", span)
            for elem, t in zip(elems, expected.elems):
                check_value(env, elem, t, span)
            _note("TVEC")
            return
        case Fst(owners) if isinstance(expected, FunTy):
            want = _proj_type(expected, owners, left=True, span=span)
            _require_subset(owners, env.theta, span)
            _expect_equal(want, expected, span)
            _note("TPROJ1")
            return
        case Snd(owners) if isinstance(expected, FunTy):
            want = _proj_type(expected, owners, left=False, span=span)
            _require_subset(owners, env.theta, span)
            _expect_equal(want, expected, span)
            _note("TPROJ2")
            return
        case Lookup(index, owners) if isinstance(expected, FunTy):
            _require_subset(owners, env.theta, span)
            dom = expected.arg
            if not isinstance(dom, TupleTy) or index > len(dom.elems):
                raise TypeErr(ARG_MISMATCH,
                              f"lookup[{index}] does not fit "
                              f"{print_type(expected)}", span)
            if not is_noop(dom, owners):
                raise TypeErr(NOOP_VIOLATION,
                              f"{print_type(dom)} is not fixed by masking to "
                              f"{owners}", span)
            if expected.ret != dom.elems[index - 1] or expected.owners != owners:
                raise TypeErr(ARG_MISMATCH,
                              f"lookup[{index}]{owners} does not fit "
                              f"{print_type(expected)}", span)
            _note("TPROJN")
            return
        case Com(sender, recipients) if isinstance(expected, FunTy):
            full = recipients.union(PartySet([sender]))
            ok = (isinstance(expected.arg, DataTy)
                  and isinstance(expected.ret, DataTy)
                  and expected.arg.shape == expected.ret.shape
                  and expected.ret.owners == recipients
                  and sender in expected.arg.owners
                  and expected.owners == full)
            if not ok:
                raise TypeErr(ARG_MISMATCH,
                              f"com[{sender}]{recipients} does not fit "
                              f"{print_type(expected)}", span)
            _require_subset(expected.arg.owners.union(recipients), env.theta,
                            span)
            _note("TCOM")
            return
    # fall through: synthesize and compare exactly
    _expect_equal(synth_value(env, v, span), expected, span)


def _proj_type(expected: FunTy, owners: PartySet, left: bool,
               span: Optional[Span]) -> FunTy:
    dom = expected.arg
    sides = _prod_sides(dom.shape) if isinstance(dom, DataTy) else None
    if sides is None:
        raise TypeErr(ARG_MISMATCH,
                      f"fst/snd does not fit {print_type(expected)}", span)
    side = sides[0] if left else sides[1]
    return FunTy(DataTy(dom.shape, owners), DataTy(side, owners), owners)


def _as_sum(expected: ChorType, span: Optional[Span]) -> tuple:
    sides = (_sum_sides(expected.shape)
             if isinstance(expected, DataTy) else None)
    if sides is None:
        raise TypeErr(ARG_MISMATCH,
                      f"injection checked against {print_type(expected)}",
                      span)
    return expected.owners, sides[0], sides[1]


def _lam_preconditions(env: TypeEnv, lam: Lam, span: Optional[Span]) -> None:
    _require_subset(lam.owners, env.theta, span)
    if not is_noop(lam.param_type, lam.owners):
        raise TypeErr(NOOP_VIOLATION,
                      f"parameter type {print_type(lam.param_type)} is not "
                      f"fixed by masking to {lam.owners}", span)


# ---------------------------------------------------------------------------
# argument checking: exists Ta' with  arg : Ta'  and  Ta' masked to the
# function's owners equal to the parameter type

_FLEX_VALUES = (Inl, Inr, Fst, Snd, Lookup, Com)


def check_arg(env: TypeEnv, arg: ChorExpr, param: ChorType,
              fn_owners: PartySet) -> None:
    if isinstance(arg, Val) and isinstance(arg.value, _FLEX_VALUES):
        _flex(env, arg, param, fn_owners)
        return
    try:
        got = synth(env, arg)
    except TypeErr as err:
        if err.kind != AMBIGUOUS_SUM:
            raise
        _flex(env, arg, param, fn_owners)
        return
    masked = mask_type(got, fn_owners)
    if masked != param:
        raise TypeErr(ARG_MISMATCH,
                      f"argument of type {print_type(got)} does not mask to "
                      f"parameter type {print_type(param)} at {fn_owners}",
                      arg.span)


def _flex(env: TypeEnv, e: ChorExpr, param: ChorType,
          mask_set: PartySet) -> ChorType:
    """Check a flexible expression; returns the witness type it types at."""
    match e:
        case Val(v):
            return _flex_value(env, v, param, mask_set, e.span)
        case App(Val(Lam() as lam), bound):
            _lam_preconditions(env, lam, e.span)
            check_arg(env, bound, lam.param_type, lam.owners)
            inner = env.with_theta(lam.owners).bind(lam.param, lam.param_type)
            witness = _flex(inner, lam.body, param, mask_set)
            _note("TLAMBDA")
            _note("TAPP")
            return witness
        case App(Val(Com() as com), inner):
            if not isinstance(param, DataTy):
                raise TypeErr(ARG_MISMATCH,
                              f"com cannot produce {print_type(param)}",
                              e.span)
            got = com.recipients.intersect(mask_set)
            if got != param.owners:
                raise TypeErr(ARG_MISMATCH,
                              f"com to {com.recipients} masks to "
                              f"{got if got else '{}'}, expected "
                              f"{param.owners}", e.span)
            full = com.recipients.union(PartySet([com.sender]))
            _require_subset(full, env.theta, e.span)
            payload_owners = _flex_data(env, inner, param.shape, e.span)
            if com.sender not in payload_owners:
                raise TypeErr(SENDER_NOT_OWNER,
                              f"sender {com.sender} does not own the "
                              f"argument", e.span)
            _note("TCOM")
            _note("TAPP")
            return DataTy(param.shape, com.recipients)
        case App(Val(Fst() as kw), inner) | App(Val(Snd() as kw), inner):
            if not isinstance(param, DataTy):
                raise TypeErr(ARG_MISMATCH,
                              f"fst/snd cannot produce {print_type(param)}",
                              e.span)
            if kw.owners.intersect(mask_set) != param.owners:
                raise TypeErr(ARG_MISMATCH,
                              f"projection at {kw.owners} cannot mask to "
                              f"{param.owners}", e.span)
            _require_subset(kw.owners, env.theta, e.span)
            if isinstance(kw, Fst):
                pair_shape = DProd(param.shape, DAny())
                _note("TPROJ1")
            else:
                pair_shape = DProd(DAny(), param.shape)
                _note("TPROJ2")
            pv = _flex_data(env, inner, pair_shape, e.span)
            if not kw.owners.issubset(pv):
                raise TypeErr(ARG_MISMATCH,
                              f"pair owned by {pv} does not cover the "
                              f"projection at {kw.owners}", e.span)
            _note("TAPP")
            return DataTy(param.shape, kw.owners)
        case App(Val(Lookup() as kw), Val(Vec() as vec)):
            return _flex_lookup(env, kw, vec, param, mask_set, e.span)
        case Case():
            _, _, env_l, env_r = _case_prelude(env, e)
            wl = _flex(env_l, e.left_body, param, mask_set)
            wr = _flex(env_r, e.right_body, param, mask_set)
            if wl != wr:
                raise TypeErr(BRANCH_MISMATCH,
                              f"branches disagree: {print_type(wl)} vs "
                              f"{print_type(wr)}", e.span)
            _note("TCASE")
            return wl
    raise TypeErr(AMBIGUOUS_SUM,
                  "cannot determine the type of this expression; annotate it",
                  e.span)


def _flex_lookup(env: TypeEnv, kw: Lookup, vec: Vec, param: ChorType,
                 mask_set: PartySet, span: Optional[Span]) -> ChorType:
    """Lookup into a tuple literal whose elements may be flexible."""
    _require_subset(kw.owners, env.theta, span)
    if kw.index > len(vec.elems):
        raise TypeErr(INDEX_OUT_OF_RANGE,
                      f"lookup[{kw.index}] into a {len(vec.elems)}-tuple",
                      span)
    effective = kw.owners.intersect(mask_set)
    if effective is None:
        raise TypeErr(ARG_MISMATCH,
                      f"lookup at {kw.owners} cannot mask to "
                      f"{print_type(param)}", span)
    wanted = vec.elems[kw.index - 1]
    witness_elem = _flex_value_or_synth(env, wanted, param, effective, span)
    for n, elem in enumerate(vec.elems, start=1):
        if n != kw.index and not _element_masks(env, elem, kw.owners):
            raise TypeErr(MASK_UNDEFINED,
                          f"tuple element {n} does not mask to {kw.owners}",
                          span)
    result = mask_type(witness_elem, kw.owners)
    if result is None or mask_type(result, mask_set) != param:
        raise TypeErr(ARG_MISMATCH,
                      f"lookup result does not fit {print_type(param)}", span)
    _note("TPROJN")
    _note("TAPP")
    return result


def _flex_value_or_synth(env: TypeEnv, v: ChorValue, param: ChorType,
                         mask_set: PartySet,
                         span: Optional[Span]) -> ChorType:
    try:
        got = synth_value(env, v, span)
    except TypeErr as err:
        if err.kind != AMBIGUOUS_SUM:
            raise
        return _flex_value(env, v, param, mask_set, span)
    if mask_type(got, mask_set) != param:
        raise TypeErr(ARG_MISMATCH,
                      f"value of type {print_type(got)} does not mask to "
                      f"{print_type(param)} at {mask_set}", span)
    return got


def _element_masks(env: TypeEnv, v: ChorValue, theta: PartySet) -> bool:
    """Whether some type of v masks under theta; lenient for unused tuple
    slots whose exact type cannot be recovered from the value alone."""
    try:
        got = synth_value(env, v, None)
        return mask_type(got, theta) is not None
    except TypeErr as err:
        if err.kind != AMBIGUOUS_SUM:
            return False
    match v:
        case Inl() | Inr() | Pair() | Unit():
            try:
                owners = _data_owners(env, v, None)
            except TypeErr:
                return False
            return owners.intersect(theta) is not None
        case Lam(_, _, _, owners):
            return owners.issubset(theta)
        case Vec(elems):
            return all(_element_masks(env, e, theta) for e in elems)
        case Fst(owners) | Snd(owners) | Lookup(_, owners):
            return owners.issubset(theta)
        case Com(sender, recipients):
            return sender in theta and recipients.issubset(theta)
    return False


def _flex_value(env: TypeEnv, v: ChorValue, param: ChorType,
                mask_set: PartySet, span: Optional[Span]) -> ChorType:
    if isinstance(param, DataTy):
        _check_data_shape(env, v, param.shape, span)
        owners = _data_owners(env, v, span)
        inter = owners.intersect(mask_set)
        if inter != param.owners:
            raise TypeErr(ARG_MISMATCH,
                          f"data value owned by {owners} masks to "
                          f"{inter if inter else '{}'} at {mask_set}, "
                          f"expected {param.owners}", span)
        return DataTy(param.shape, owners)
    if isinstance(param, FunTy):
        # function types only mask to themselves
        if not param.owners.issubset(mask_set):
            raise TypeErr(ARG_MISMATCH,
                          f"{print_type(param)} cannot be masked to "
                          f"{mask_set}", span)
        check_value(env, v, param, span)
        return param
    if isinstance(param, TupleTy):
        if not isinstance(v, Vec) or len(v.elems) != len(param.elems):
            raise TypeErr(ARG_MISMATCH,
                          f"tuple value expected for {print_type(param)}",
                          span)
        witnesses = []
        for elem, t in zip(v.elems, param.elems):
            if isinstance(elem, _FLEX_VALUES):
                witnesses.append(_flex_value(env, elem, t, mask_set, span))
                continue
            try:
                got = synth_value(env, elem, span)
            except TypeErr as err:
                if err.kind != AMBIGUOUS_SUM:
                    raise
                witnesses.append(_flex_value(env, elem, t, mask_set, span))
                continue
            if mask_type(got, mask_set) != t:
                raise TypeErr(ARG_MISMATCH,
                              f"tuple element of type {print_type(got)} "
                              f"does not mask to {print_type(t)}", span)
            witnesses.append(got)
        _note("TVEC")
        return TupleTy(tuple(witnesses))
    raise TypeError(f"not a type: {param!r}")


# ---------------------------------------------------------------------------
# the data fragment: shapes and owner sets are recoverable even when the
# full type of an injection is not

def _check_data_value(env: TypeEnv, v: ChorValue, shape, owners: PartySet,
                      span: Optional[Span]) -> None:
    _check_data_shape(env, v, shape, span)
    got = _data_owners(env, v, span)
    if got != owners:
        raise TypeErr(ARG_MISMATCH,
                      f"data value owned by {got}, expected {owners}", span)


def _check_data_shape(env: TypeEnv, v: ChorValue, shape,
                      span: Optional[Span]) -> None:
    match v:
        case Unit():
            if not isinstance(shape, (DUnit, DAny)):
                raise TypeErr(ARG_MISMATCH,
                              f"unit value checked against "
                              f"{canonical_shape(shape)}", span)
        case Inl(inner):
            sides = _sum_sides(shape)
            if sides is None:
                raise TypeErr(ARG_MISMATCH,
                              f"Inl checked against {canonical_shape(shape)}",
                              span)
            _check_data_shape(env, inner, sides[0], span)
            _note("TINL")
        case Inr(inner):
            sides = _sum_sides(shape)
            if sides is None:
                raise TypeErr(ARG_MISMATCH,
                              f"Inr checked against {canonical_shape(shape)}",
                              span)
            _check_data_shape(env, inner, sides[1], span)
            _note("TINR")
        case Pair(a, b):
            sides = _prod_sides(shape)
            if sides is None:
                raise TypeErr(ARG_MISMATCH,
                              f"Pair checked against {canonical_shape(shape)}",
                              span)
            _check_data_shape(env, a, sides[0], span)
            _check_data_shape(env, b, sides[1], span)
            _note("TPAIR")
        case Var():
            got = _require_data(synth_value(env, v, span), "variable", span)
            if got.shape != shape:
                raise TypeErr(ARG_MISMATCH,
                              f"{print_type(got)} has shape "
                              f"{canonical_shape(got.shape)}, expected "
                              f"{canonical_shape(shape)}", span)
        case _:
            raise TypeErr(ARG_MISMATCH, "not a data value", span)


def _data_owners(env: TypeEnv, v: ChorValue,
                 span: Optional[Span]) -> PartySet:
    match v:
        case Unit(owners):
            _require_subset(owners, env.theta, span)
            _note("TUNIT")
            return owners
        case Inl(inner) | Inr(inner):
            return _data_owners(env, inner, span)
        case Pair(a, b):
            inter = _data_owners(env, a, span).intersect(
                _data_owners(env, b, span))
            if inter is None:
                raise TypeErr(PAIR_COMPONENTS_DISJOINT,
                              "pair components share no owner", span)
            return inter
        case Var():
            got = _require_data(synth_value(env, v, span), "variable", span)
            return got.owners
    raise TypeErr(ARG_MISMATCH, "not a data value", span)


def _flex_data(env: TypeEnv, e: ChorExpr, shape,
               span: Optional[Span]) -> PartySet:
    """Owner set of a flexible data expression of a known shape."""
    match e:
        case Val(v):
            _check_data_shape(env, v, shape, span)
            return _data_owners(env, v, span)
        case App(Val(Lam() as lam), bound):
            _lam_preconditions(env, lam, e.span)
            check_arg(env, bound, lam.param_type, lam.owners)
            inner = env.with_theta(lam.owners).bind(lam.param, lam.param_type)
            return _flex_data(inner, lam.body, shape, e.span)
        case App(Val(Com() as com), inner):
            full = com.recipients.union(PartySet([com.sender]))
            _require_subset(full, env.theta, e.span)
            payload_owners = _flex_data(env, inner, shape, e.span)
            if com.sender not in payload_owners:
                raise TypeErr(SENDER_NOT_OWNER,
                              f"sender {com.sender} does not own the "
                              f"argument", e.span)
            _note("TCOM")
            _note("TAPP")
            return com.recipients
        case App(Val(Fst() as kw), inner) | App(Val(Snd() as kw), inner):
            _require_subset(kw.owners, env.theta, e.span)
            pair_shape = (DProd(shape, DAny()) if isinstance(kw, Fst)
                          else DProd(DAny(), shape))
            pv = _flex_data(env, inner, pair_shape, e.span)
            if not kw.owners.issubset(pv):
                raise TypeErr(ARG_MISMATCH,
                              f"pair owned by {pv} does not cover the "
                              f"projection at {kw.owners}", e.span)
            _note("TPROJ1" if isinstance(kw, Fst) else "TPROJ2")
            _note("TAPP")
            return kw.owners
        case App(Val(Lookup() as kw), Val(Vec() as vec)):
            _require_subset(kw.owners, env.theta, e.span)
            if kw.index > len(vec.elems):
                raise TypeErr(INDEX_OUT_OF_RANGE,
                              f"lookup[{kw.index}] into a "
                              f"{len(vec.elems)}-tuple", e.span)
            elem_owners = _flex_data(env, Val(vec.elems[kw.index - 1]),
                                     shape, e.span)
            for n, elem in enumerate(vec.elems, start=1):
                if n != kw.index and not _element_masks(env, elem, kw.owners):
                    raise TypeErr(MASK_UNDEFINED,
                                  f"tuple element {n} does not mask to "
                                  f"{kw.owners}", e.span)
            inter = elem_owners.intersect(kw.owners)
            if inter is None:
                raise TypeErr(MASK_UNDEFINED,
                              f"element owned by {elem_owners} does not mask "
                              f"to {kw.owners}", e.span)
            _note("TPROJN")
            _note("TAPP")
            return inter
        case Case():
            _, _, env_l, env_r = _case_prelude(env, e)
            wl = _flex_data(env_l, e.left_body, shape, e.span)
            wr = _flex_data(env_r, e.right_body, shape, e.span)
            if wl != wr:
                raise TypeErr(BRANCH_MISMATCH,
                              "branches disagree on the owner set", e.span)
            return wl
    raise TypeErr(AMBIGUOUS_SUM,
                  "cannot determine the owners of this expression", span)


# ---------------------------------------------------------------------------
# small shared helpers

def canonical_shape(shape) -> str:
    from .syntax import print_data
    return print_data(shape)


def _require_subset(owners: PartySet, theta: PartySet,
                    span: Optional[Span]) -> None:
    if not owners.issubset(theta):
        raise TypeErr(PARTIES_NOT_SUBSET,
                      f"parties {owners} not all present in {theta}", span)


def _require_data(t: ChorType, what: str, span: Optional[Span]) -> DataTy:
    if not isinstance(t, DataTy):
        raise TypeErr(ARG_MISMATCH,
                      f"{what} must be data, got {print_type(t)}", span)
    return t


def _expect_equal(got: ChorType, expected: ChorType,
                  span: Optional[Span]) -> None:
    if got != expected:
        raise TypeErr(ARG_MISMATCH,
                      f"expected {print_type(expected)}, got "
                      f"{print_type(got)}", span)
