"""Core AST invariants: party sets, free variables, canonical printing."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helam.surface import desugar, parse
from helam.syntax import (
    App, Case, Com, DProd, DSum, DUnit, DataTy, EmptyPartySet, Fst, FunTy,
    Inl, Inr, Lam, Lookup, Pair, PartySet, Snd, TupleTy, Unit, Val, Var, Vec,
    canonical_print, free_vars, node_count, parties, print_expr, print_type,
)

P = parties("p")
PQ = parties("p", "q")


class TestPartySet:
    def test_sorted_and_deduplicated(self):
        assert PartySet(["q", "p", "q"]).members == ("p", "q")

    def test_empty_rejected(self):
        with pytest.raises(EmptyPartySet):
            PartySet([])

    def test_bad_name_rejected(self):
        with pytest.raises(ValueError):
            PartySet(["9bad"])

    def test_ops(self):
        assert parties("p").issubset(PQ)
        assert PQ.intersect(parties("q", "r")) == parties("q")
        assert PQ.intersect(parties("r")) is None
        assert PQ.union(parties("r")) == parties("p", "q", "r")
        assert PQ.without("p") == ("q",)

    @given(st.lists(st.sampled_from("pqrs"), min_size=1))
    def test_construction_normalizes(self, names):
        ps = PartySet(names)
        assert list(ps) == sorted(set(names))


class TestFreeVars:
    def test_lone_variable_is_free(self):
        assert free_vars(Val(Var("x"))) == {"x"}

    def test_binder_closes(self):
        lam = Lam("x", DataTy(DUnit(), P), Val(Var("x")), P)
        assert free_vars(Val(lam)) == set()

    def test_unbound_in_body(self):
        lam = Lam("x", DataTy(DUnit(), P), Val(Var("y")), P)
        assert free_vars(Val(lam)) == {"y"}

    def test_case_binders(self):
        e = Case(P, Val(Var("s")), "a", Val(Var("a")), "b", Val(Var("c")))
        assert free_vars(e) == {"s", "c"}


class TestPrinting:
    def test_unit(self):
        assert canonical_print(Val(Unit(PQ))) == "()@[p, q]"

    def test_com(self):
        assert canonical_print(Val(Com("s", parties("r1")))) == "com[s][r1]"

    def test_function_type(self):
        t = FunTy(DataTy(DUnit(), P), DataTy(DUnit(), P), P)
        assert canonical_print(t) == "(()@[p] -> ()@[p])@[p]"

    def test_sum_product_precedence(self):
        d = DSum(DUnit(), DProd(DUnit(), DUnit()))
        assert canonical_print(d) == "() + () * ()"
        d2 = DProd(DSum(DUnit(), DUnit()), DUnit())
        assert canonical_print(d2) == "(() + ()) * ()"

    def test_located_compound_shape_parenthesized(self):
        t = DataTy(DSum(DUnit(), DUnit()), P)
        assert canonical_print(t) == "(() + ())@[p]"

    def test_one_element_tuple(self):
        assert canonical_print(Val(Vec((Unit(P),)))) == "(()@[p],)"
        assert canonical_print(TupleTy((DataTy(DUnit(), P),))) == "(()@[p],)"

    def test_lookup_and_projections(self):
        assert canonical_print(Val(Lookup(2, PQ))) == "lookup[2][p, q]"
        assert canonical_print(Val(Fst(P))) == "fst[p]"
        assert canonical_print(Val(Snd(P))) == "snd[p]"

    def test_application_parens(self):
        inner = App(Val(Var("f")), Val(Var("x")))
        outer = App(Val(Var("g")), inner)
        assert print_expr(outer) == "g (f x)"

    def test_structural_equality_matches_printed_equality(self):
        a = Val(Pair(Unit(P), Unit(PQ)))
        b = Val(Pair(Unit(P), Unit(parties("q", "p"))))
        assert a == b
        assert print_expr(a) == print_expr(b)

    def test_node_count(self):
        e = App(Val(Var("f")), Val(Pair(Unit(P), Unit(P))))
        assert node_count(e) == 7  # App, two Val wrappers, Var, Pair, units


# ---------------------------------------------------------------------------
# randomized print -> parse round trips (syntax only, types not needed)

from strategies import exprs as _exprs, types as _types  # noqa: E402


@settings(max_examples=150, deadline=None)
@given(_exprs)
def test_print_parse_round_trip(e):
    text = print_expr(e)
    core, _ = desugar(parse(text), theta=parties("p", "q", "r"))
    assert core == e
    assert print_expr(core) == text


@settings(max_examples=150, deadline=None)
@given(_types)
def test_type_print_parse_round_trip(t):
    text = print_type(t)
    parsed = _parse_type(text)
    assert parsed == t
    assert print_type(parsed) == text


def _parse_type(text):
    from helam.surface import Parser, tokenize
    parser = Parser(tokenize(text), {})
    t = parser.type_()
    parser.expect("eof")
    return t
