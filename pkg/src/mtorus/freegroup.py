"""Words in a finite-rank free group and endomorphisms between them.

A letter is a pair ``(index, sign)`` with ``index`` a generator index and
``sign`` in ``{+1, -1}``.  Words are always stored freely reduced, so two
words represent the same group element exactly when they compare equal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

Letter = tuple[int, int]

RESERVED = frozenset({"t", "s"})
_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def _free_reduce(letters: Iterable[Letter]) -> list[Letter]:
    out: list[Letter] = []
    for gen, sign in letters:
        if out and out[-1][0] == gen and out[-1][1] == -sign:
            out.pop()
        else:
            out.append((gen, sign))
    return out


class Word(tuple):
    """A freely reduced word; behaves as an immutable tuple of letters.

    ``*`` is the group product, ``~`` the inverse and ``**`` integer powers.
    """

    __slots__ = ()

    def __new__(cls, letters: Iterable[Letter] = ()):
        return super().__new__(cls, _free_reduce((int(g), int(s)) for g, s in letters))

    @classmethod
    def _trusted(cls, letters: Iterable[Letter]) -> "Word":
        # caller guarantees the letters are already reduced
        return tuple.__new__(cls, letters)

    @classmethod
    def gen(cls, index: int, sign: int = 1) -> "Word":
        return cls._trusted(((index, sign),))

    def __mul__(self, other):
        if not isinstance(other, tuple):
            return NotImplemented
        if not isinstance(other, Word):
            other = Word(other)
        i = len(self)
        j = 0
        # cancel across the seam only; both halves are already reduced
        while i > 0 and j < len(other) and self[i - 1][0] == other[j][0] and self[i - 1][1] == -other[j][1]:
            i -= 1
            j += 1
        return Word._trusted(tuple.__getitem__(self, slice(0, i)) + tuple(other[j:]))

    __add__ = __mul__

    def __rmul__(self, other):
        return Word(other) * self

    def inverse(self) -> "Word":
        return Word._trusted((g, -s) for g, s in reversed(self))

    __invert__ = inverse

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        out = Word()
        for _ in range(abs(n)):
            out = out * base
        return out

    def max_index(self) -> int:
        return max((g for g, _ in self), default=-1)

    def __repr__(self):
        return "Word(%s)" % " ".join(("e%d" % (g + 1)) + ("" if s > 0 else "^-1") for g, s in self) if self else "Word(1)"


def reduce_word(raw: Iterable[Letter], rank: int | None = None) -> Word:
    """Freely reduce a raw letter sequence, checking indices against ``rank``."""
    letters = [(int(g), int(s)) for g, s in raw]
    for g, s in letters:
        if s not in (1, -1):
            raise ValueError(f"letter sign must be +1 or -1, got {s}")
        if g < 0 or (rank is not None and g >= rank):
            raise ValueError(f"generator index {g} out of range for rank {rank}")
    return Word(letters)


class Alphabet:
    """Ordered generator names; indices are positions in ``names``."""

    def __init__(self, names: Sequence[str], reserved: Iterable[str] = RESERVED):
        names = tuple(names)
        reserved = frozenset(reserved)
        for name in names:
            if not _IDENT.match(name):
                raise ValueError(f"invalid generator identifier {name!r}")
            if name in reserved:
                raise ValueError(f"generator identifier {name!r} is reserved for stable letters")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator identifiers in {names}")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}

    @classmethod
    def standard(cls, rank: int, prefix: str = "e") -> "Alphabet":
        return cls([f"{prefix}{i + 1}" for i in range(rank)])

    @property
    def rank(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self._index[name]

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Alphabet({list(self.names)})"

    def parse(self, text: str) -> Word:
        return Word(parse_tokens(text, self._index))

    def format(self, word: Iterable[Letter]) -> str:
        return format_tokens(word, self.names)


def parse_tokens(text: str, index: dict[str, int]) -> list[Letter]:
    """Parse the whitespace-separated token grammar; ``1`` is the empty word.

    Raises ``WordSyntaxError`` carrying the 0-based column of the bad token.
    """
    letters: list[Letter] = []
    tokens = list(re.finditer(r"\S+", text))
    if len(tokens) == 1 and tokens[0].group() == "1":
        return letters
    for m in tokens:
        tok = m.group()
        name, sign = (tok[:-3], -1) if tok.endswith("^-1") else (tok, 1)
        if not _IDENT.match(name):
            raise WordSyntaxError(f"malformed token {tok!r}", m.start())
        if name not in index:
            raise WordSyntaxError(f"unknown generator {name!r}", m.start())
        letters.append((index[name], sign))
    return letters


def format_tokens(word: Iterable[Letter], names: Sequence[str]) -> str:
    parts = [names[g] + ("" if s > 0 else "^-1") for g, s in word]
    return " ".join(parts) if parts else "1"


class WordSyntaxError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(message)
        self.column = column


@dataclass(frozen=True, eq=True)
class Endo:
    """An endomorphism of the free group of rank ``len(images)``."""

    images: tuple[Word, ...]

    def __post_init__(self):
        images = tuple(w if isinstance(w, Word) else Word(w) for w in self.images)
        object.__setattr__(self, "images", images)
        for w in images:
            if w.max_index() >= len(images):
                raise ValueError(f"image {w!r} uses a generator outside rank {len(images)}")

    @classmethod
    def identity(cls, rank: int) -> "Endo":
        return cls(tuple(Word.gen(i) for i in range(rank)))

    @property
    def rank(self) -> int:
        return len(self.images)

    def __call__(self, w: Iterable[Letter]) -> Word:
        return apply_endo(self, w)

    @cached_property
    def injective(self) -> bool:
        return is_injective(self)


def apply_endo(phi: Endo, w: Iterable[Letter]) -> Word:
    images = phi.images
    out: list[Letter] = []
    for g, s in w:
        if g >= len(images) or g < 0:
            raise ValueError(f"generator index {g} outside the endomorphism's rank {len(images)}")
        piece = images[g] if s > 0 else reversed(images[g])
        for h, sh in piece:
            if s < 0:
                sh = -sh
            if out and out[-1][0] == h and out[-1][1] == -sh:
                out.pop()
            else:
                out.append((h, sh))
    return Word._trusted(out)


def _check_same_rank(phi: Endo, psi: Endo) -> None:
    if phi.rank != psi.rank:
        raise ValueError(f"alphabet mismatch: rank {phi.rank} vs {psi.rank}")


def compose_endo(phi: Endo, psi: Endo) -> Endo:
    """``phi o psi``: apply ``psi`` first."""
    _check_same_rank(phi, psi)
    return Endo(tuple(apply_endo(phi, im) for im in psi.images))


def power_endo(phi: Endo, m: int) -> Endo:
    if m < 1:
        raise ValueError("power_endo needs m >= 1")
    out = phi
    for _ in range(m - 1):
        out = compose_endo(phi, out)
    return out


def twist(b: Word, phi: Endo) -> Endo:
    """The endomorphism ``x -> b phi(x) b^-1``."""
    b = Word(b)
    if b.max_index() >= phi.rank:
        raise ValueError("alphabet mismatch: twisting word uses a generator outside the rank")
    binv = b.inverse()
    return Endo(tuple(b * im * binv for im in phi.images))


def is_injective(phi: Endo) -> bool:
    """True iff the generator images freely generate a subgroup of rank ``phi.rank``.

    Free generation is read off the folded bouquet of the images: folding
    loses rank exactly when the induced map on fundamental groups is not
    injective.
    """
    from mtorus.graph import bouquet, rank, tighten_graph

    if any(len(w) == 0 for w in phi.images):
        return False
    tight, _ = tighten_graph(bouquet(phi.images), record=False)
    return rank(tight) == phi.rank
