"""Elements of the mapping torus of an injective free-group endomorphism.

The torus group is generated by the free basis and a stable letter with
``t x t^-1 = phi(x)``.  Elements are brought to the form ``t^-q x t^r``;
among all such forms the one with the smallest ``q`` is unique, which is
what makes equality testing a literal comparison.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

from mtorus.freegroup import (Alphabet, Endo, Word, WordSyntaxError, _IDENT, apply_endo, format_tokens, power_endo,
                              twist)
from mtorus.graph import (LabeledGraph, _fold_shape, basis, bouquet, fold, read_weights, tighten, tighten_graph,
                          trace)

STABLE = -1


class TorusWord(tuple):
    """Letters ``(index, sign)`` over the free basis plus ``STABLE`` for the stable letter."""

    __slots__ = ()

    def __new__(cls, letters: Iterable = ()):
        out: list = []
        for g, s in letters:
            g, s = int(g), int(s)
            if s not in (1, -1):
                raise ValueError(f"letter sign must be +1 or -1, got {s}")
            if out and out[-1][0] == g and out[-1][1] == -s:
                out.pop()
            else:
                out.append((g, s))
        return super().__new__(cls, out)

    @classmethod
    def stable(cls, k: int = 1) -> "TorusWord":
        return cls([(STABLE, 1 if k > 0 else -1)] * abs(k))

    def __mul__(self, other):
        if not isinstance(other, tuple):
            return NotImplemented
        return TorusWord(tuple(self) + tuple(other))

    def __rmul__(self, other):
        return TorusWord(tuple(other) + tuple(self))

    def inverse(self) -> "TorusWord":
        return TorusWord((g, -s) for g, s in reversed(self))

    __invert__ = inverse

    def __pow__(self, n: int) -> "TorusWord":
        base = self if n >= 0 else self.inverse()
        return TorusWord(tuple(base) * abs(n))


def p_hom(w: Iterable) -> int:
    """Exponent sum of the stable letter."""
    return sum(s for g, s in w if g == STABLE)


def parse_torus(text: str, alphabet: Alphabet, stable: str = "t") -> TorusWord:
    letters = []
    tokens = list(re.finditer(r"\S+", text))
    if len(tokens) == 1 and tokens[0].group() == "1":
        return TorusWord()
    for m in tokens:
        tok = m.group()
        name, sign = (tok[:-3], -1) if tok.endswith("^-1") else (tok, 1)
        if not _IDENT.match(name):
            raise WordSyntaxError(f"malformed token {tok!r}", m.start())
        if name == stable:
            letters.append((STABLE, sign))
        elif name in alphabet:
            letters.append((alphabet.index(name), sign))
        else:
            raise WordSyntaxError(f"unknown generator {name!r}", m.start())
    return TorusWord(letters)


def format_torus(w: Iterable, names: Sequence[str], stable: str = "t") -> str:
    parts = [(stable if g == STABLE else names[g]) + ("" if s > 0 else "^-1") for g, s in w]
    return " ".join(parts) if parts else "1"


@dataclass(frozen=True)
class NormalForm:
    """``t^-q x t^r``."""

    q: int
    x: Word
    r: int

    def to_torus(self) -> TorusWord:
        return TorusWord.stable(-self.q) * TorusWord(self.x) * TorusWord.stable(self.r)

    def is_identity(self) -> bool:
        return self.q == 0 and self.r == 0 and len(self.x) == 0

    def format(self, names: Sequence[str], stable: str = "t") -> str:
        if self.is_identity():
            return "identity"
        return f"{stable}^{-self.q} · {format_tokens(self.x, names)} · {stable}^{self.r}"


class _Powers:
    """Generator images under phi^k, computed on demand."""

    def __init__(self, phi: Endo):
        self.phi = phi
        self.levels: list[tuple[Word, ...]] = [tuple(Word.gen(i) for i in range(phi.rank))]

    def images(self, k: int) -> tuple[Word, ...]:
        while len(self.levels) <= k:
            self.levels.append(tuple(apply_endo(self.phi, w) for w in self.levels[-1]))
        return self.levels[k]

    def apply(self, k: int, w: Iterable) -> Word:
        if k == 0:
            return Word(w)
        return apply_endo(Endo(self.images(k)), w)


class ImageGraph:
    """Folded bouquet of phi's generator images, with each edge weighted by a word
    in the domain so that reading weights along a closed path gives the preimage.

    Weights start as ``e_i`` on the first edge of the i-th circle and are
    carried through the recorded folds by re-gauging at a vertex before each
    identification; every fold is a homotopy equivalence when phi is injective.
    """

    def __init__(self, phi: Endo):
        if not phi.injective:
            raise ValueError("endomorphism is not injective; preimages are ill-defined")
        self.phi = phi
        g = bouquet(phi.images)
        weights: list[Word] = []
        for i, w in enumerate(phi.images):
            weights.append(Word.gen(i, w[0][1]))
            weights.extend(Word() for _ in range(len(w) - 1))
        _, folds = tighten_graph(g)
        for rec in folds:
            g, weights = self._fold(g, weights, rec.first, rec.second)
        self.graph = g
        self.weights = {e: w for e, w in enumerate(weights) if w}

    @staticmethod
    def _fold(g: LabeledGraph, weights: list[Word], e1: int, e2: int):
        far = _fold_shape(g, e1, e2)
        c1, c2 = weights[e1], weights[e2]
        if far is None:
            if c1 != c2:
                raise ValueError("bigon fold in an image bouquet: endomorphism is not injective")
        elif c1 != c2:
            u1, u2 = far
            shared_origin = g.edges[e1][0] == g.edges[e2][0]
            if u2 != g.basepoint:
                u, h = u2, (c1.inverse() * c2 if shared_origin else c1 * c2.inverse())
            else:
                u, h = u1, (c2.inverse() * c1 if shared_origin else c2 * c1.inverse())
            hinv = h.inverse()
            weights = list(weights)
            for e, (o, t, _) in enumerate(g.edges):
                if o == u or t == u:
                    weights[e] = (h if o == u else Word()) * weights[e] * (hinv if t == u else Word())
        new, rec = fold(g, e1, e2)
        drop = max(e1, e2)
        return new, [w for e, w in enumerate(weights) if e != drop]

    def preimage(self, x: Iterable) -> Optional[Word]:
        """The unique ``y`` with ``phi(y) = x``, or ``None`` if ``x`` is not in the image."""
        p = trace(self.graph, x)
        if p is None or not p.closed:
            return None
        return read_weights(p.steps, self.weights)


@lru_cache(maxsize=64)
def image_graph(phi: Endo) -> ImageGraph:
    return ImageGraph(phi)


def normalize(w: Iterable, phi: Endo) -> NormalForm:
    """Canonical ``t^-q x t^r`` for a torus word.

    Positive stable letters are pushed right with ``t x = phi(x) t`` and
    negative ones left with ``x t^-1 = t^-1 phi(x)``; then ``t^-1 phi(y) t``
    collapses to ``y`` for as long as the middle word has a preimage.
    """
    images = image_graph(phi)
    powers = _Powers(phi)
    q = r = 0
    x: list = []

    def push(letters):
        for letter in letters:
            if x and x[-1][0] == letter[0] and x[-1][1] == -letter[1]:
                x.pop()
            else:
                x.append(letter)

    for g, s in w:
        if g == STABLE:
            if s > 0:
                r += 1
            elif r > 0:
                r -= 1
            else:
                x[:] = apply_endo(phi, x)
                q += 1
        else:
            if not 0 <= g < phi.rank:
                raise ValueError(f"generator index {g} outside rank {phi.rank}")
            piece = powers.images(r)[g]
            push(piece if s > 0 else piece.inverse())
    xw = Word._trusted(x)
    while q > 0 and r > 0:
        pre = images.preimage(xw)
        if pre is None:
            break
        xw, q, r = pre, q - 1, r - 1
    return NormalForm(q, xw, r)


def equal_in_torus(g: Iterable, h: Iterable, phi: Endo) -> bool:
    return normalize(TorusWord(g) * TorusWord(h).inverse(), phi).is_identity()


@dataclass(frozen=True)
class FreeCase:
    """Every generator has zero stable-letter sum; conjugating by ``t^k`` lands in the free group."""

    k: int
    basis: tuple[Word, ...]
    conjugated: tuple[Word, ...] = ()


@dataclass(frozen=True)
class TCase:
    """The subgroup, conjugated by ``t^p``, rewritten inside the torus of ``theta`` with stable letter ``s``.

    The substitution is ``t^m -> b^-1 s``, where ``b t^m`` is the conjugate of a
    subgroup element of stable-letter sum ``m``.
    """

    m: int
    p: int
    b: Word
    theta: Endo
    rewritten: tuple[TorusWord, ...]
    bezout: tuple[int, ...] = field(default=())


SubgroupReduction = Union[FreeCase, TCase]


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return a, 1, 0
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def bezout(values: Sequence[int]) -> tuple[int, list[int]]:
    """``gcd`` of ``values`` with coefficients, accumulated in input order."""
    g = 0
    coefs = [0] * len(values)
    for i, v in enumerate(values):
        sign = -1 if v < 0 else 1
        g, a, b = _egcd(g, abs(v))
        coefs = [c * a for c in coefs]
        coefs[i] = b * sign
    return g, coefs


def reduce_subgroup(gens: Sequence[Iterable], phi: Endo) -> SubgroupReduction:
    gens = [TorusWord(g) for g in gens]
    if not gens:
        raise ValueError("empty generator list")
    ps = [p_hom(g) for g in gens]
    m, coefs = bezout(ps)
    powers = _Powers(phi)
    if m == 0:
        forms = [normalize(g, phi) for g in gens]
        k = max(f.q for f in forms)
        words = tuple(w for w in (powers.apply(k - f.q, f.x) for f in forms) if w)
        if not words:
            raise ValueError("trivial generator list after reduction")
        return FreeCase(k, tuple(basis(tighten(bouquet(words)))), words)
    g_m = TorusWord()
    for g, c in zip(gens, coefs):
        g_m = g_m * g ** c
    nf = normalize(g_m, phi)
    p, b = nf.q, nf.x
    assert nf.r == p + m
    theta = twist(b, power_endo(phi, m))
    tp = TorusWord.stable(p)
    s_block = TorusWord([(STABLE, 1)])
    down = TorusWord(b.inverse()) * s_block  # image of t^m
    rewritten = []
    for g in gens:
        f = normalize(tp * g * tp.inverse(), phi)
        j = (-f.q) % m
        x = powers.apply(j, f.x)
        rewritten.append(down.inverse() ** ((f.q + j) // m) * TorusWord(x) * down ** ((f.r + j) // m))
    return TCase(m, p, b, theta, tuple(rewritten), tuple(coefs))


def substitute_back(w: Iterable, red: TCase) -> TorusWord:
    """Undo the rewriting: ``s -> b t^m``, then conjugate by ``t^-p``."""
    s_image = TorusWord(red.b) * TorusWord.stable(red.m)
    out = TorusWord()
    for g, s in w:
        if g == STABLE:
            out = out * (s_image if s > 0 else s_image.inverse())
        else:
            out = out * TorusWord([(g, s)])
    tp = TorusWord.stable(red.p)
    return tp.inverse() * out * tp
