"""Local stepping, rendezvous matching, the scheduler, and deadlock detection."""

import pytest

from helam.network import (
    DeadlockReport, Network, SimulationFault, enumerate_net_steps, explore,
    format_trace, local_step, receive_step, replay, simulate,
)
from helam.projection import project_all
from helam.syntax import (
    App, BApp, BOT, BVal, Com, LInl, LLam, LPair, LUnit, LVar, Recv, Send,
    SendSelf, StepLabel, Unit, Val, parties,
)

PQ = parties("p", "q")

COM_NET = Network(project_all(App(Val(Com("s", PQ)),
                                  Val(Unit(parties("s"))))))


def bapp(f, a):
    return BApp(BVal(f), BVal(a))


class TestLocalStep:
    def test_send_emits_one_annotation_per_recipient(self):
        steps = local_step(bapp(Send(("p", "q")), LUnit()))
        assert steps == [(BOT, StepLabel(
            sends=frozenset({("p", LUnit()), ("q", LUnit())})))]

    def test_send_to_nobody_is_silent(self):
        steps = local_step(bapp(SendSelf(()), LUnit()))
        assert steps == [(BVal(LUnit()), StepLabel())]

    def test_self_send_keeps_the_value(self):
        steps = local_step(bapp(SendSelf(("q",)), LInl(LUnit())))
        [(result, label)] = steps
        assert result == BVal(LInl(LUnit()))
        assert label.sends == frozenset({("q", LInl(LUnit()))})

    def test_receive_is_symbolic(self):
        b = bapp(Recv("s"), LUnit())
        assert local_step(b) == []
        got = receive_step(b, "s", LInl(LUnit()))
        assert got == (BVal(LInl(LUnit())),
                       StepLabel(receives=frozenset({("s", LInl(LUnit()))})))

    def test_receive_from_wrong_sender_does_not_match(self):
        assert receive_step(bapp(Recv("s"), LUnit()), "t", LUnit()) is None

    def test_receive_argument_is_ignored(self):
        got = receive_step(BApp(BVal(Recv("s")), BOT), "s", LUnit())
        assert got[0] == BVal(LUnit())

    def test_beta_floors_the_result(self):
        b = bapp(LLam("x", BVal(LPair(LVar("x"), LVar("x")))), LUnit())
        [(result, label)] = local_step(b)
        assert result == BVal(LPair(LUnit(), LUnit()))
        assert label == StepLabel()

    def test_values_do_not_step(self):
        assert local_step(BVal(LUnit())) == []
        assert local_step(BOT) == []

    def test_at_most_one_side_of_a_label_is_nonempty(self):
        for b in (bapp(Send(("p",)), LUnit()),
                  bapp(LLam("x", BVal(LVar("x"))), LUnit())):
            for _, label in local_step(b):
                assert not (label.sends and label.receives)

    def test_sending_a_function_is_a_fault(self):
        with pytest.raises(SimulationFault):
            local_step(bapp(Send(("q",)), LLam("x", BVal(LVar("x")))))


class TestEnumerate:
    def test_multicast_is_one_atomic_step(self):
        steps = enumerate_net_steps(COM_NET)
        assert len(steps) == 1
        net, info = steps[0]
        assert info.origin == "s"
        assert info.recipients == ("p", "q")
        assert net == Network({"s": BOT, "p": BVal(LUnit()),
                               "q": BVal(LUnit())})

    def test_all_values_means_no_steps(self):
        assert enumerate_net_steps(Network({"p": BVal(LUnit())})) == []

    def test_independent_silent_steps_commute(self):
        redex = bapp(LLam("x", BVal(LVar("x"))), LUnit())
        net = Network({"p": redex, "q": redex})
        steps = enumerate_net_steps(net)
        assert sorted(info.origin for _, info in steps) == ["p", "q"]
        finals = {replay(net, [a, b]) for a, b in (("p", "q"), ("q", "p"))}
        assert len(finals) == 1

    def test_sender_blocks_until_every_recipient_is_ready(self):
        busy_recv = BApp(BVal(Recv("s")),
                         bapp(LLam("x", BVal(LVar("x"))), LUnit()))
        net = Network({"s": bapp(Send(("p",)), LUnit()), "p": busy_recv})
        [(_, info)] = enumerate_net_steps(net)
        assert info.origin == "p"  # only p's internal step is available


class TestSimulate:
    def test_multicast_completes_in_one_step(self):
        out = simulate(COM_NET, seed=0)
        assert out.deadlock is None
        assert len(out.trace) == 1
        assert out.messages == 2

    def test_mutual_waiting_is_reported(self):
        net = Network({"p": BApp(BVal(Recv("q")), BOT),
                       "q": BApp(BVal(Recv("p")), BOT)})
        out = simulate(net, seed=0)
        assert isinstance(out.deadlock, DeadlockReport)
        assert out.deadlock.party == "p"

    def test_unmatched_send_is_reported(self):
        net = Network({"p": bapp(Send(("q",)), LUnit()),
                       "q": BVal(LUnit())})
        out = simulate(net, seed=0)
        assert out.deadlock is not None

    def test_trace_format(self):
        out = simulate(COM_NET, seed=0)
        assert format_trace(out.trace) == "step 1: s -> [p, q] : ()\n"

    def test_empty_trace(self):
        out = simulate(Network({"p": BVal(LUnit())}), seed=0)
        assert out.trace == []
        assert format_trace(out.trace) == ""


def test_recipient_already_owning_the_value_still_rendezvouses():
    # com[s][r] of a value r co-owns: r's receive argument is its own copy,
    # which the incoming message simply replaces
    e = App(Val(Com("s", parties("r"))), Val(Unit(parties("r", "s"))))
    net = Network(project_all(e))
    assert net["r"] == BApp(BVal(Recv("s")), BVal(LUnit()))
    out = simulate(net, seed=0)
    assert out.deadlock is None
    assert out.network == Network({"r": BVal(LUnit()), "s": BOT})


class TestExplore:
    def test_multicast_single_terminal(self):
        result = explore(COM_NET)
        assert result.complete
        assert result.terminals == {
            Network({"s": BOT, "p": BVal(LUnit()), "q": BVal(LUnit())})}
        assert not result.deadlocks

    def test_deadlock_found_exhaustively(self):
        net = Network({"p": BApp(BVal(Recv("q")), BOT),
                       "q": BApp(BVal(Recv("p")), BOT)})
        result = explore(net)
        assert result.deadlocks


class TestNetworkType:
    def test_behaviors_are_floor_normalized_on_construction(self):
        net = Network({"p": BVal(LPair(BOT.value, BOT.value))})
        assert net["p"] == BOT

    def test_nonempty_domain_required(self):
        with pytest.raises(ValueError):
            Network({})
