"""Shared fixtures, random generators and independent oracles for the test suite.

The oracles here deliberately avoid the package's folding engine and
normal-form code: they work on plain lists of letters.
"""
from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from mtorus.freegroup import Alphabet, Endo, Word, compose_endo
from mtorus.torus import STABLE, TorusWord

AL3 = Alphabet.standard(3)
P = AL3.parse

# automorphism with e1 -> e2, e2 -> e2^-1 e3 e2, e3 -> e2 e1^-1 e2
PHI49 = Endo((P("e2"), P("e2^-1 e3 e2"), P("e2 e1^-1 e2")))
A49 = [P("e3^-1 e1"), P("e2^-1 e3^-1 e1 e1 e3^-1 e1")]

W36 = [P("e2 e1 e3"), P("e2 e3 e1"), P("e3^-1 e2 e1"), P("e2 e3 e2^-1 e3")]
BASIS36 = [P("e2 e1 e3"), P("e3^-1 e2 e1"), P("e2 e3 e1")]


# -- naive free group arithmetic ----------------------------------------------

def naive_reduce(letters):
    """Free reduction by repeated scanning for a cancelling pair."""
    w = list(letters)
    changed = True
    while changed:
        changed = False
        for i in range(len(w) - 1):
            if w[i][0] == w[i + 1][0] and w[i][1] == -w[i + 1][1]:
                del w[i:i + 2]
                changed = True
                break
    return w


def naive_inverse(letters):
    return [(g, -s) for g, s in reversed(letters)]


def naive_apply(images, letters):
    out = []
    for g, s in letters:
        out.extend(images[g] if s > 0 else naive_inverse(images[g]))
    return naive_reduce(out)


def naive_power_apply(images, k, letters):
    w = list(letters)
    for _ in range(k):
        w = naive_apply(images, w)
    return w


# -- rewriting oracle for the mapping torus ------------------------------------

def rewrite_oracle(letters, images):
    """Push every t right past free letters (t x -> phi(x) t) and every t^-1 left
    (x t^-1 -> t^-1 phi(x)), cancelling t t^-1 and t^-1 t, until the word reads
    t^-Q X t^R.  Returns (Q, X, R).  No preimages are ever taken.
    """
    w = naive_reduce(letters)
    while True:
        for i in range(len(w) - 1):
            a, b = w[i], w[i + 1]
            if a == (STABLE, 1) and b[0] != STABLE:
                w[i:i + 2] = naive_apply(images, [b]) + [(STABLE, 1)]
                break
            if a[0] != STABLE and b == (STABLE, -1):
                w[i:i + 2] = [(STABLE, -1)] + naive_apply(images, [a])
                break
        else:
            break
        w = naive_reduce(w)
    Q = 0
    while Q < len(w) and w[Q] == (STABLE, -1):
        Q += 1
    R = 0
    while R < len(w) - Q and w[len(w) - 1 - R] == (STABLE, 1):
        R += 1
    X = w[Q:len(w) - R]
    assert all(g != STABLE for g, _ in X)
    return Q, X, R


def oracle_equal_to_normal_form(letters, images, nf) -> bool:
    """Whether t^-q x t^r equals the word, certified by rewriting alone.

    The rewritten form t^-Q X t^R equals t^-q x t^r exactly when
    Q - q = R - r = k >= 0 and phi^k(x) = X.
    """
    Q, X, R = rewrite_oracle(letters, images)
    k = Q - nf.q
    return k >= 0 and R - nf.r == k and naive_power_apply(images, k, nf.x) == X


# -- brute-force subgroup enumeration -------------------------------------------

def products(basis, max_factors):
    """All reduced elements that are products of at most ``max_factors`` basis words or inverses."""
    gens = [list(b) for b in basis] + [naive_inverse(b) for b in basis]
    seen = {()}
    frontier = [()]
    for _ in range(max_factors):
        nxt = []
        for w in frontier:
            for g in gens:
                v = tuple(naive_reduce(list(w) + g))
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return seen


def symbol_words(n_symbols, max_len):
    """Reduced words over ``n_symbols`` symbols, up to ``max_len`` letters."""
    letters = [(i, s) for i in range(n_symbols) for s in (1, -1)]
    for n in range(max_len + 1):
        for combo in itertools.product(letters, repeat=n):
            if all(not (a[0] == b[0] and a[1] == -b[1]) for a, b in zip(combo, combo[1:])):
                yield combo


# -- random inputs -----------------------------------------------------------------

def rand_word(rng: random.Random, rank: int, max_len: int, min_len: int = 1) -> Word:
    while True:
        w = Word((rng.randrange(rank), rng.choice((1, -1))) for _ in range(rng.randint(min_len, max_len)))
        if len(w) >= min_len:
            return w


def rand_torus_word(rng: random.Random, rank: int, max_len: int) -> TorusWord:
    letters = []
    for _ in range(rng.randint(0, max_len)):
        g = STABLE if rng.random() < 0.35 else rng.randrange(rank)
        letters.append((g, rng.choice((1, -1))))
    return TorusWord(letters)


def elementary(rng: random.Random, rank: int) -> Endo:
    """A Nielsen move: transvection, inversion or transposition."""
    ims = [Word.gen(i) for i in range(rank)]
    i = rng.randrange(rank)
    kind = rng.randrange(3) if rank > 1 else 1
    if kind == 0:
        j = rng.choice([k for k in range(rank) if k != i])
        other = Word.gen(j, rng.choice((1, -1)))
        ims[i] = ims[i] * other if rng.random() < 0.5 else other * ims[i]
    elif kind == 1:
        ims[i] = Word.gen(i, -1)
    else:
        j = rng.randrange(rank)
        ims[i], ims[j] = ims[j], ims[i]
    return Endo(tuple(ims))


def rand_automorphism(rng: random.Random, rank: int, moves: int = 6, max_len: int = 6) -> Endo:
    phi = Endo.identity(rank)
    for _ in range(rng.randint(0, moves)):
        new = compose_endo(phi, elementary(rng, rank))
        if max(len(w) for w in new.images) > max_len:
            break
        phi = new
    return phi


def rand_injective(rng: random.Random, rank: int, max_len: int = 6) -> Endo:
    """An automorphism, sometimes followed by squaring a generator's image (still injective)."""
    phi = rand_automorphism(rng, rank, max_len=max_len)
    if rng.random() < 0.3:
        ims = list(phi.images)
        i = rng.randrange(rank)
        if 2 * len(ims[i]) <= max_len:
            ims[i] = ims[i] * ims[i]
            phi = Endo(tuple(ims))
    return phi


def fuzz_instances(seed: int, count: int, max_rank: int = 4, max_gens: int = 3, max_len: int = 6):
    rng = random.Random(seed)
    for _ in range(count):
        rank = rng.randint(1, max_rank)
        phi = rand_injective(rng, rank, max_len)
        A = [rand_word(rng, rank, max_len) for _ in range(rng.randint(1, max_gens))]
        yield phi, A


# -- hypothesis strategies ----------------------------------------------------------

def words(rank: int = 3, max_size: int = 8):
    return st.lists(st.tuples(st.integers(0, rank - 1), st.sampled_from((1, -1))), max_size=max_size).map(Word)


def raw_letters(rank: int = 3, max_size: int = 12):
    return st.lists(st.tuples(st.integers(0, rank - 1), st.sampled_from((1, -1))), max_size=max_size)


def automorphisms(rank: int = 3):
    return st.integers(0, 2 ** 32 - 1).map(lambda s: rand_automorphism(random.Random(s), rank))


def injectives(rank: int = 3):
    return st.integers(0, 2 ** 32 - 1).map(lambda s: rand_injective(random.Random(s), rank))


def torus_words(rank: int = 3, max_size: int = 10):
    letter = st.tuples(st.sampled_from([STABLE] + list(range(rank))), st.sampled_from((1, -1)))
    return st.lists(letter, max_size=max_size).map(TorusWord)
