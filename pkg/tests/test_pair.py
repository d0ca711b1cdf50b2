import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import A49, P, PHI49, fuzz_instances, injectives, rand_word
from mtorus.freegroup import Endo, Word, apply_endo
from mtorus.graph import LabeledGraph, bouquet, find_violation, is_member, tighten
from mtorus.pair import (FoldKind, LabeledGraphPair, bouquet_pair, classify_fold, fold_and_add_loop, initial_pair,
                         is_invariant, pair_to_dot, relative_rank, tighten_pair)

SQUARE = Endo((P("e1 e1"),))


def test_initial_pair_example():
    pair = initial_pair(A49, PHI49)
    assert [len(w) for w in A49] == [2, 6]
    assert pair.Z == bouquet(A49 + [apply_endo(PHI49, a) for a in A49])
    assert [len(apply_endo(PHI49, a)) for a in A49] == [2, 4]
    assert pair.X == bouquet(A49)
    assert relative_rank(pair) == 2
    assert is_invariant(pair, PHI49)


def test_initial_pair_small_cases():
    ident = Endo.identity(3)
    A = [P("e1"), P("e2 e3"), P("e3 e1^-1")]
    assert relative_rank(initial_pair(A, ident)) == 3
    assert relative_rank(initial_pair([P("e1")], SQUARE)) == 1
    with pytest.raises(ValueError):
        initial_pair([Word()], ident)


def test_pair_validation():
    g = bouquet([P("e1"), P("e2")])
    with pytest.raises(ValueError):
        LabeledGraphPair(LabeledGraph(3, ((0, 1, 0), (1, 2, 1))), frozenset({1}), frozenset())  # X disconnected
    pair = LabeledGraphPair(g, frozenset({0}), frozenset())
    assert relative_rank(pair) == 1
    assert relative_rank(LabeledGraphPair(g, frozenset({0, 1}), frozenset())) == 0


def test_example_tightening():
    pair = initial_pair(A49, PHI49)
    out, tr = tighten_pair(pair, PHI49)
    assert relative_rank(out) == 1
    assert find_violation(out.Z) is None
    exc = tr.exceptional()
    assert len(exc) == 1
    assert exc[0].delta == P("e2^-1 e1")
    assert exc[0].loop == P("e2^-1 e3^-1 e2 e2")
    assert "LOOP e2^-1 e3^-1 e2 e2" in tr.to_text(["e1", "e2", "e3"])
    assert is_invariant(out, PHI49)
    again, tr2 = tighten_pair(out, PHI49)
    assert again == out and len(tr2) == 0


def test_square_example():
    out, tr = tighten_pair(initial_pair([P("e1")], SQUARE), SQUARE)
    assert out.Z == LabeledGraph(1, ((0, 0, 0),))
    assert out.X == out.Z
    assert relative_rank(out) == 0


def test_classification_cases():
    # X is the e1 loop; Z adds an e1 edge out to a new vertex carrying an e2 loop
    Z = LabeledGraph(2, ((0, 0, 0), (0, 1, 0), (1, 1, 1)))
    pair = LabeledGraphPair(Z, frozenset({0}), frozenset())
    assert classify_fold(pair, 0, 1).kind is FoldKind.PLAIN
    both = LabeledGraphPair(bouquet([P("e1"), P("e1")]), frozenset({0, 1}), frozenset())
    assert classify_fold(both, 0, 1).kind is FoldKind.SUBGRAPH
    # X: e2 edge * -> 1 with an e1 loop at 1; the overgraph e2 loop at * folds onto it, gluing * to 1
    Z = LabeledGraph(2, ((0, 1, 1), (1, 1, 0), (0, 0, 1)))
    pair = LabeledGraphPair(Z, frozenset({0, 1}), frozenset())
    cls = classify_fold(pair, 0, 2)
    assert cls.kind is FoldKind.EXCEPTIONAL and {cls.p1, cls.p2} == {0, 1}
    with pytest.raises(ValueError):
        classify_fold(pair, 0, 1)


def test_exceptional_without_loop_drops_rr():
    # with the identity every delta already lies in Z, so no loop is added
    Z = LabeledGraph(2, ((0, 1, 1), (1, 1, 0), (0, 0, 1)))
    pair = LabeledGraphPair(Z, frozenset({0, 1}), frozenset())
    new, step = fold_and_add_loop(pair, 0, 2, Endo.identity(2))
    assert step.kind is FoldKind.EXCEPTIONAL and step.loop is None
    assert step.rr_after == step.rr_before - 1


def test_is_invariant_false():
    g = bouquet([P("e1")])
    pair = LabeledGraphPair(g, frozenset({0}), frozenset())
    assert not is_invariant(pair, Endo((P("e2"), P("e1"))))


def test_pair_dot_highlights_x():
    pair = initial_pair([P("e1")], SQUARE)
    text = pair_to_dot(pair)
    assert text.count("bold") == 1


def check_trace(start, tr, phi):
    prev = relative_rank(start)
    for step in tr:
        assert step.rr_before == prev
        assert step.rr_after <= step.rr_before
        if step.bigon and not step.bigon_in_x:
            assert step.rr_after < step.rr_before
        if step.kind is FoldKind.EXCEPTIONAL and step.loop is None:
            assert step.rr_after < step.rr_before
        assert is_invariant(step.pair, phi)
        prev = step.rr_after


@pytest.mark.parametrize("seed", range(3))
def test_fuzzed_traces(seed):
    for phi, A in fuzz_instances(100 + seed, 25):
        pair = initial_pair(A, phi)
        out, tr = tighten_pair(pair, phi)
        check_trace(pair, tr, phi)
        assert relative_rank(out) <= relative_rank(pair)
        assert find_violation(out.Z) is None
        # X^# only grows
        for a in A:
            assert is_member(tighten(out.X), a)
        again = tighten_pair(pair, phi)
        assert again[1].to_text() == tr.to_text()


@settings(max_examples=40, deadline=None)
@given(injectives(), st.integers(0, 10 ** 6))
def test_invariant_pairs_tighten(phi, seed):
    rng = random.Random(seed)
    inner = [rand_word(rng, 3, 5) for _ in range(rng.randint(1, 3))]
    outer = [apply_endo(phi, a) for a in inner] + [rand_word(rng, 3, 4) for _ in range(rng.randint(0, 2))]
    pair = bouquet_pair(inner, outer)
    assert is_invariant(pair, phi)
    out, tr = tighten_pair(pair, phi)
    check_trace(pair, tr, phi)
    assert relative_rank(out) >= 0
