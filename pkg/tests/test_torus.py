import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import (AL3, P, PHI49, injectives, naive_power_apply, oracle_equal_to_normal_form, rand_injective,
                     rand_torus_word, rewrite_oracle, torus_words)
from mtorus.freegroup import Endo, Word, WordSyntaxError, apply_endo, power_endo, twist
from mtorus.graph import bouquet, is_member, same_subgroup, tighten
from mtorus.torus import (STABLE, FreeCase, ImageGraph, NormalForm, TCase, TorusWord, bezout, equal_in_torus,
                          format_torus, normalize, p_hom, parse_torus, reduce_subgroup, substitute_back)

T = TorusWord.stable(1)


def tw(text):
    return parse_torus(text, AL3)


def test_p_hom():
    assert p_hom(tw("t")) == 1
    assert p_hom(tw("e1")) == 0
    assert p_hom(tw("t e1 t^-1 t^-1")) == -1


def test_parse_and_format():
    w = tw("t e1 t^-1 e2^-1")
    assert format_torus(w, AL3.names) == "t e1 t^-1 e2^-1"
    assert tw("1") == TorusWord()
    assert format_torus(TorusWord(), AL3.names) == "1"
    with pytest.raises(WordSyntaxError):
        tw("t e4")
    with pytest.raises(WordSyntaxError):
        tw("t^2")


def test_normalize_examples():
    assert normalize(tw("e1 t^-1"), PHI49) == NormalForm(1, P("e2"), 0)
    assert normalize(tw("e1 t^-1"), PHI49).format(AL3.names) == "t^-1 · e2 · t^0"
    assert normalize(T.inverse() * TorusWord(apply_endo(PHI49, P("e1"))) * T, PHI49) == NormalForm(0, P("e1"), 0)
    assert normalize(T ** 3, PHI49) == NormalForm(0, Word(), 3)
    assert normalize(tw("t t^-1"), PHI49).is_identity()
    assert normalize(tw("t t^-1"), PHI49).format(AL3.names) == "identity"


def test_equal_examples():
    assert equal_in_torus(tw("t e1 t^-1"), apply_endo(PHI49, P("e1")), PHI49)
    assert not equal_in_torus(tw("t"), tw("e1"), PHI49)
    assert equal_in_torus(apply_endo(PHI49, P("e2^-1 e1")), tw("t e2^-1 e1 t^-1"), PHI49)


def test_non_injective_refused():
    with pytest.raises(ValueError):
        normalize(tw("t"), Endo((P("e1"), P("e1"), P("e3"))))
    with pytest.raises(ValueError):
        ImageGraph(Endo((P("e1"), P("e1"), P("e3"))))


def test_preimages_in_a_proper_image():
    psi = Endo((P("e1 e1"), P("e2 e2")))
    ig = ImageGraph(psi)
    assert ig.preimage(P("e1 e1 e2^-1 e2^-1")) == P("e1 e2^-1")
    assert ig.preimage(P("e1")) is None
    # t^-1 (a^2 b^-2) t collapses to a b^-1
    w = T.inverse() * TorusWord(P("e1 e1 e2^-1 e2^-1")) * T
    assert normalize(w, psi) == NormalForm(0, P("e1 e2^-1"), 0)
    assert normalize(T.inverse() * TorusWord(P("e1")) * T, psi) == NormalForm(1, P("e1"), 1)


@settings(max_examples=60, deadline=None)
@given(injectives(), st.lists(st.tuples(st.integers(0, 2), st.sampled_from((1, -1))), max_size=8))
def test_preimage_roundtrip(phi, raw):
    y = Word(raw)
    assert ImageGraph(phi).preimage(apply_endo(phi, y)) == y


@settings(max_examples=150, deadline=None)
@given(injectives(), torus_words())
def test_normal_form_properties(phi, w):
    nf = normalize(w, phi)
    assert nf.q >= 0 and nf.r >= 0
    assert nf.r - nf.q == p_hom(w)
    if nf.q > 0 and nf.r > 0:
        assert not same_subgroup(list(phi.images) + [nf.x], phi.images)
    assert oracle_equal_to_normal_form(list(w), phi.images, nf)
    assert equal_in_torus(w, nf.to_torus(), phi)
    assert normalize(nf.to_torus(), phi) == nf


@settings(max_examples=60, deadline=None)
@given(injectives(), torus_words(max_size=6), torus_words(max_size=6), torus_words(max_size=6))
def test_equality_is_an_equivalence(phi, a, b, c):
    assert equal_in_torus(a, a, phi)
    assert equal_in_torus(a, b, phi) == equal_in_torus(b, a, phi)
    ab = a * b
    # (a b) c and a (b c) are the same element written differently
    assert equal_in_torus(ab * c, a * (b * c), phi)
    if equal_in_torus(a, b, phi) and equal_in_torus(b, c, phi):
        assert equal_in_torus(a, c, phi)
    # the defining relation, conjugated
    x = TorusWord(w for w in a if w[0] != STABLE)
    assert equal_in_torus(b * T * x * T.inverse() * c, b * TorusWord(apply_endo(phi, Word(x))) * c, phi)


def test_bezout():
    assert bezout([2, 0]) == (2, [1, 0])
    g, c = bezout([6, -4, 9])
    assert g == 1 and 6 * c[0] - 4 * c[1] + 9 * c[2] == 1
    assert bezout([0, 0])[0] == 0


def test_reduce_t_square():
    red = reduce_subgroup([tw("t t"), tw("e1")], PHI49)
    assert isinstance(red, TCase)
    assert (red.m, red.p, red.b) == (2, 0, Word())
    assert red.theta == power_endo(PHI49, 2)
    assert red.rewritten == (TorusWord([(STABLE, 1)]), tw("e1"))


def test_reduce_bezout_case():
    gens = [tw("t t e1"), tw("t t t")]
    red = reduce_subgroup(gens, PHI49)
    assert (red.m, red.p, red.b) == (1, 0, P("e1^-1"))
    assert red.bezout == (-1, 1)
    assert red.theta == twist(P("e1^-1"), PHI49)
    for g, r in zip(gens, red.rewritten):
        assert p_hom(r) * red.m == p_hom(g)
        assert equal_in_torus(substitute_back(r, red), g, PHI49)


def test_reduce_free_case():
    red = reduce_subgroup([tw("e1"), tw("t e2 t^-1")], PHI49)
    assert isinstance(red, FreeCase)
    # t e2 t^-1 is already the free-group element phi(e2), so no conjugation is needed
    assert red.k == 0
    assert same_subgroup(red.basis, [P("e1"), apply_endo(PHI49, P("e2"))])
    psi = Endo((P("e1 e1"), P("e2 e2"), P("e3")))
    red = reduce_subgroup([tw("t^-1 e1 t"), tw("e2")], psi)
    assert red.k == 1
    assert same_subgroup(red.basis, [P("e1"), P("e2 e2")])


def test_reduce_errors():
    with pytest.raises(ValueError):
        reduce_subgroup([], PHI49)
    with pytest.raises(ValueError):
        reduce_subgroup([tw("t t^-1")], PHI49)


def roundtrip_checks(gens, phi):
    red = reduce_subgroup(gens, phi)
    if isinstance(red, FreeCase):
        conj = TorusWord.stable(red.k)
        tg = tighten(bouquet(red.basis))
        assert all(is_member(tg, b) for b in red.basis)
        for g in gens:
            nf = normalize(conj * g * conj.inverse(), phi)
            assert nf.q == 0 and nf.r == 0
            assert is_member(tg, nf.x) or not nf.x
        for b in red.basis:
            assert is_member(tighten(bouquet([normalize(conj * g * conj.inverse(), phi).x for g in gens
                                              if normalize(g, phi).x])), b)
        return red
    assert red.theta == twist(red.b, power_endo(phi, red.m))
    for g, r in zip(gens, red.rewritten):
        assert p_hom(r) * red.m == p_hom(g)
        assert equal_in_torus(substitute_back(r, red), g, phi)
    return red


@pytest.mark.parametrize("seed", range(5))
def test_fuzzed_reductions(seed):
    rng = random.Random(seed)
    for _ in range(10):
        rank = rng.randint(1, 3)
        phi = rand_injective(rng, rank, 4)
        gens = [rand_torus_word(rng, rank, 6) for _ in range(rng.randint(1, 3))]
        if all(not normalize(g, phi).x and p_hom(g) == 0 for g in gens):
            continue
        roundtrip_checks(gens, phi)


def test_rewrite_oracle_itself():
    Q, X, R = rewrite_oracle(list(tw("t e1 t^-1")), PHI49.images)
    assert (Q, R) == (0, 0) and X == list(P("e2"))
    assert naive_power_apply(PHI49.images, 2, P("e1")) == list(P("e2^-1 e3 e2"))
