"""Type-directed random generation of well-typed choreographies.

Generation inverts the typing rules: pick a production whose conclusion
matches the target type, then generate the premises.  Every generated
expression checks against its target by construction.  Also provides
canonical inhabitants (used for dead branches and shrinking) and a greedy
shrinker.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .masking import mask_type
from .syntax import (
    App, Case, ChorExpr, ChorType, ChorValue, Com, DProd, DSum, DUnit,
    DataTy, DataType, Fst, FunTy, Inl, Inr, Lam, Lookup, Pair, PartySet,
    Snd, TupleTy, Unit, Val, Var, Vec,
)
from .typecheck import TypeEnv, TypeErr, synth, typecheck


class GenerationExhausted(RuntimeError):
    """The depth bound makes the target unreachable; the caller may retry."""


DEFAULT_WEIGHTS = {
    "value": 4.0,
    "var": 3.0,
    "bind": 3.0,
    "com": 3.0,
    "case": 2.0,
    "proj": 1.5,
}


@dataclass(frozen=True)
class GenConfig:
    max_parties: int = 4
    max_depth: int = 6
    max_tuple_len: int = 3
    max_data_depth: int = 2
    seed: int = 0
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))

    def __post_init__(self):
        if not (2 <= self.max_parties <= 4):
            raise ValueError("max_parties must be between 2 and 4")
        if self.max_depth < 1 or self.max_tuple_len < 1:
            raise ValueError("bounds must be positive")
        if any(w < 0 for w in self.weights.values()) \
                or not any(self.weights.values()):
            raise ValueError("weights must be nonnegative, not all zero")


PARTY_POOL = ("p", "q", "r", "s")


# ---------------------------------------------------------------------------
# shapes, types, values

def gen_data(rng: random.Random, depth: int) -> DataType:
    if depth <= 0:
        return DUnit()
    pick = rng.random()
    if pick < 0.4:
        return DUnit()
    if pick < 0.7:
        return DSum(gen_data(rng, depth - 1), gen_data(rng, depth - 1))
    return DProd(gen_data(rng, depth - 1), gen_data(rng, depth - 1))


def gen_owners(rng: random.Random, universe: PartySet) -> PartySet:
    k = rng.randint(1, len(universe))
    return PartySet(rng.sample(universe.members, k))


def gen_type(rng: random.Random, universe: PartySet, depth: int,
             cfg: GenConfig) -> ChorType:
    """A type every owner set of which lies inside the universe, so masking
    to the universe is always a no-op."""
    pick = rng.random()
    if depth <= 0 or pick < 0.6:
        return DataTy(gen_data(rng, cfg.max_data_depth),
                      gen_owners(rng, universe))
    if pick < 0.85:
        owners = gen_owners(rng, universe)
        arg = gen_type(rng, owners, depth - 1, cfg)
        ret = gen_type(rng, owners, depth - 1, cfg)
        return FunTy(arg, ret, owners)
    n = rng.randint(1, cfg.max_tuple_len)
    return TupleTy(tuple(gen_type(rng, universe, depth - 1, cfg)
                         for _ in range(n)))


def gen_value(rng: random.Random, theta: PartySet, t: ChorType,
              fresh: Callable[[], str]) -> ChorValue:
    """A closed value of the given type (owner sets taken literally, except
    pair components may spread wider as long as they meet at the target)."""
    match t:
        case DataTy(shape, owners):
            return _gen_data_value(rng, theta, shape, owners)
        case FunTy(arg, ret, owners):
            body = Val(gen_value(rng, owners, ret, fresh))
            return Lam(fresh(), arg, body, owners)
        case TupleTy(elems):
            return Vec(tuple(gen_value(rng, theta, e, fresh) for e in elems))
    raise TypeError(f"not a type: {t!r}")


def _gen_data_value(rng: random.Random, theta: PartySet, shape,
                    owners: PartySet) -> ChorValue:
    match shape:
        case DUnit():
            return Unit(owners)
        case DSum(left, right):
            if rng.random() < 0.5:
                return Inl(_gen_data_value(rng, theta, left, owners))
            return Inr(_gen_data_value(rng, theta, right, owners))
        case DProd(left, right):
            o1, o2 = _split_owners(rng, theta, owners)
            return Pair(_gen_data_value(rng, theta, left, o1),
                        _gen_data_value(rng, theta, right, o2))
    raise TypeError(f"not a data shape: {shape!r}")


def _split_owners(rng: random.Random, theta: PartySet,
                  owners: PartySet) -> tuple[PartySet, PartySet]:
    """Two owner sets inside theta whose intersection is exactly `owners`."""
    spare = [p for p in theta if p not in owners]
    rng.shuffle(spare)
    extra1 = [p for p in spare if rng.random() < 0.3]
    extra2 = [p for p in spare if p not in extra1 and rng.random() < 0.3]
    return (PartySet(owners.members + tuple(extra1)),
            PartySet(owners.members + tuple(extra2)))


# ---------------------------------------------------------------------------
# canonical inhabitants

def inhabit(t: ChorType) -> ChorValue:
    """The leftmost inhabitant: units, Inl, and identity-shaped functions."""
    match t:
        case DataTy(shape, owners):
            return _inhabit_data(shape, owners)
        case FunTy(_, ret, owners):
            return Lam("ignored$", t.arg, Val(inhabit(ret)), owners)
        case TupleTy(elems):
            return Vec(tuple(inhabit(e) for e in elems))
    raise TypeError(f"not a type: {t!r}")


def _inhabit_data(shape, owners: PartySet) -> ChorValue:
    match shape:
        case DUnit():
            return Unit(owners)
        case DSum(left, _):
            return Inl(_inhabit_data(left, owners))
        case DProd(left, right):
            return Pair(_inhabit_data(left, owners),
                        _inhabit_data(right, owners))
    raise TypeError(f"not a data shape: {shape!r}")


# ---------------------------------------------------------------------------
# expressions

class ExprGen:
    """Stateful generator: one instance shares a fresh-name counter, so
    separately generated pieces can be combined without binder collisions."""

    def __init__(self, rng: random.Random, cfg: GenConfig):
        self.rng = rng
        self.cfg = cfg
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        return f"x{self.counter}"

    def expr(self, env: TypeEnv, target: ChorType, depth: int) -> ChorExpr:
        rng = self.rng
        w = self.cfg.weights
        options: list[tuple[str, float]] = [("value", w.get("value", 0.0))]
        if self._matching_vars(env, target):
            options.append(("var", w.get("var", 0.0)))
        if depth > 1:
            options.append(("bind", w.get("bind", 0.0)))
            if isinstance(target, DataTy):
                options.append(("com", w.get("com", 0.0)))
                options.append(("case", w.get("case", 0.0)))
                options.append(("proj", w.get("proj", 0.0)))
        names = [name for name, weight in options if weight > 0]
        weights = [weight for _, weight in options if weight > 0]
        if not names:
            if w.get("value", 0.0) > 0 or w.get("var", 0.0) > 0:
                raise GenerationExhausted(
                    "no production fits the target at this depth")
            raise GenerationExhausted("all leaf productions weighted to zero")
        choice = rng.choices(names, weights)[0]
        return getattr(self, f"_gen_{choice}")(env, target, depth)

    def _matching_vars(self, env: TypeEnv, target: ChorType) -> list[str]:
        return [x for x, t in env.bindings
                if mask_type(t, env.theta) == target]

    def _gen_value(self, env: TypeEnv, target: ChorType, depth: int):
        return Val(gen_value(self.rng, env.theta, target, self.fresh))

    def _gen_var(self, env: TypeEnv, target: ChorType, depth: int):
        return Val(Var(self.rng.choice(self._matching_vars(env, target))))

    def _gen_bind(self, env: TypeEnv, target: ChorType, depth: int):
        # let-shaped: bind a fresh variable and continue toward the target
        tx = gen_type(self.rng, env.theta, 1, self.cfg)
        bound = self.expr(env, tx, depth - 1)
        x = self.fresh()
        body = self.expr(env.bind(x, tx), target, depth - 1)
        return App(Val(Lam(x, tx, body, env.theta)), bound)

    def _gen_com(self, env: TypeEnv, target: DataTy, depth: int):
        rng = self.rng
        sender = rng.choice(env.theta.members)
        extra = [p for p in env.theta if rng.random() < 0.4]
        arg_owners = PartySet((sender, *extra))
        arg = self.expr(env, DataTy(target.shape, arg_owners), depth - 1)
        return App(Val(Com(sender, target.owners)), arg)

    def _gen_case(self, env: TypeEnv, target: ChorType, depth: int):
        rng = self.rng
        base = _type_parties(target)
        guards = _grow(rng, base, env.theta)
        scrut_owners = _grow(rng, guards, env.theta)
        dl = gen_data(rng, 1)
        dr = gen_data(rng, 1)
        scrut_ty = DataTy(DSum(dl, dr), scrut_owners)
        x = self.fresh()
        inner = env.with_theta(guards)
        xl, xr = self.fresh(), self.fresh()
        left = self.expr(inner.bind(xl, DataTy(dl, guards)), target, depth - 1)
        right = self.expr(inner.bind(xr, DataTy(dr, guards)), target,
                          depth - 1)
        body = Case(guards, Val(Var(x)), xl, left, xr, right)
        scrut_val = Val(gen_value(rng, env.theta, scrut_ty, self.fresh))
        return App(Val(Lam(x, scrut_ty, body, env.theta)), scrut_val)

    def _gen_proj(self, env: TypeEnv, target: DataTy, depth: int):
        rng = self.rng
        owners = target.owners
        holder = _grow(rng, owners, env.theta)
        kind = rng.choice(("fst", "snd", "lookup"))
        x = self.fresh()
        if kind in ("fst", "snd"):
            other = gen_data(rng, 1)
            if kind == "fst":
                shape = DProd(target.shape, other)
                keyword: ChorValue = Fst(owners)
            else:
                shape = DProd(other, target.shape)
                keyword = Snd(owners)
            arg_ty: ChorType = DataTy(shape, holder)
        else:
            n = rng.randint(1, self.cfg.max_tuple_len)
            index = rng.randint(1, n)
            elems = [gen_type(rng, owners, 0, self.cfg) for _ in range(n)]
            elems[index - 1] = target
            arg_ty = TupleTy(tuple(elems))
            keyword = Lookup(index, owners)
        body = App(Val(keyword), Val(Var(x)))
        bound = Val(gen_value(rng, env.theta, arg_ty, self.fresh))
        return App(Val(Lam(x, arg_ty, body, env.theta)), bound)


def _type_parties(t: ChorType) -> PartySet:
    found: set[str] = set()

    def walk(node):
        match node:
            case DataTy(_, owners) | FunTy(_, _, owners):
                found.update(owners)
                if isinstance(node, FunTy):
                    walk(node.arg)
                    walk(node.ret)
            case TupleTy(elems):
                for e in elems:
                    walk(e)

    walk(t)
    return PartySet(found)


def _grow(rng: random.Random, base: PartySet, theta: PartySet) -> PartySet:
    extra = [p for p in theta if p not in base and rng.random() < 0.4]
    return PartySet(base.members + tuple(extra))


def gen_well_typed(cfg: GenConfig, theta: PartySet, target: ChorType,
                   rng: Optional[random.Random] = None,
                   env: Optional[TypeEnv] = None) -> ChorExpr:
    """A closed expression that checks at the target type under theta."""
    if not _type_parties(target).issubset(theta):
        raise ValueError("the target type mentions parties outside theta")
    rng = rng or random.Random(cfg.seed)
    gen = ExprGen(rng, cfg)
    return gen.expr(env or TypeEnv(theta), target, cfg.max_depth)


@dataclass(frozen=True)
class Instance:
    seed: int
    theta: PartySet
    target: ChorType
    expr: ChorExpr


def gen_instance(cfg: GenConfig, seed: int) -> Instance:
    rng = random.Random(seed)
    k = rng.randint(2, cfg.max_parties)
    theta = PartySet(rng.sample(PARTY_POOL, k))
    target = gen_type(rng, theta, 2, cfg)
    expr = gen_well_typed(cfg, theta, target, rng=rng)
    return Instance(seed, theta, target, expr)


# ---------------------------------------------------------------------------
# shrinking

def shrink(e: ChorExpr, theta: PartySet,
           failing: Callable[[ChorExpr], bool],
           expected: Optional[ChorType] = None) -> ChorExpr:
    """Greedily replace subterms with canonical inhabitants of their types
    while the predicate keeps failing; the result still typechecks."""
    current = e
    while True:
        for candidate in _candidates(current, TypeEnv(theta)):
            try:
                typecheck(theta, candidate, expected)
            except TypeErr:
                continue
            if failing(candidate):
                current = candidate
                break
        else:
            return current


def _candidates(e: ChorExpr, env: TypeEnv):
    yield from _subterm_candidates(e, env, lambda n: n)


def _subterm_candidates(node: ChorExpr, env: TypeEnv, rebuild):
    try:
        t = synth(env, node)
        replacement = Val(inhabit(t))
        if replacement != node:
            yield rebuild(replacement)
    except TypeErr:
        pass
    match node:
        case App(fn, arg):
            yield from _subterm_candidates(
                fn, env, lambda n: rebuild(App(n, arg)))
            yield from _subterm_candidates(
                arg, env, lambda n: rebuild(App(fn, n)))
        case Case(guards, scrut, xl, ml, xr, mr):
            yield from _subterm_candidates(
                scrut, env,
                lambda n: rebuild(Case(guards, n, xl, ml, xr, mr)))
            try:
                tn = synth(env, scrut)
                masked = mask_type(tn, guards)
            except TypeErr:
                masked = None
            if isinstance(masked, DataTy) and isinstance(masked.shape, DSum):
                env_l = env.with_theta(guards).bind(
                    xl, DataTy(masked.shape.left, guards))
                env_r = env.with_theta(guards).bind(
                    xr, DataTy(masked.shape.right, guards))
                yield from _subterm_candidates(
                    ml, env_l,
                    lambda n: rebuild(Case(guards, scrut, xl, n, xr, mr)))
                yield from _subterm_candidates(
                    mr, env_r,
                    lambda n: rebuild(Case(guards, scrut, xl, ml, xr, n)))
        case Val(Lam(param, ptype, body, owners)):
            inner = env.with_theta(owners).bind(param, ptype)
            yield from _subterm_candidates(
                body, inner,
                lambda n: rebuild(Val(Lam(param, ptype, n, owners))))
        case Val(_):
            pass
