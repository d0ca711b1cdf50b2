"""Nested labeled graphs (Z, X) and the relative tightening procedure.

X is kept as a marked subset of Z's vertices and edges, carried through
every fold of Z.  Folding Z can glue X to itself from outside X; when that
happens a new element enters X^#, and its image under the endomorphism is
wedged onto Z if Z does not already carry it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

from mtorus.freegroup import Endo, Word, apply_endo, format_tokens
from mtorus.graph import (FoldRecord, LabeledGraph, bouquet, edge_image, find_violation, fold, induced_subgraph,
                          is_bigon, is_member, path_label, rank, spanning_tree, tighten, basis, to_dot,
                          vertex_image, wedge, _fold_shape)


@dataclass(frozen=True)
class LabeledGraphPair:
    Z: LabeledGraph
    x_edges: frozenset[int]
    x_vertices: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "x_edges", frozenset(self.x_edges))
        verts = set(self.x_vertices) | {self.Z.basepoint}
        for e in self.x_edges:
            verts.update(self.Z.edges[e][:2])
        object.__setattr__(self, "x_vertices", frozenset(verts))
        # connectivity of X is checked by building it
        self.X

    @cached_property
    def X(self) -> LabeledGraph:
        return induced_subgraph(self.Z, self.x_edges, self.x_vertices)[0]

    @property
    def basepoint(self) -> int:
        return self.Z.basepoint


class FoldKind(enum.Enum):
    SUBGRAPH = "subgraph"
    EXCEPTIONAL = "exceptional"
    PLAIN = "plain"


@dataclass(frozen=True)
class FoldClass:
    kind: FoldKind
    p1: Optional[int] = None
    p2: Optional[int] = None


@dataclass(frozen=True)
class PairStep:
    record: FoldRecord
    kind: FoldKind
    bigon: bool
    bigon_in_x: bool
    rr_before: int
    rr_after: int
    delta: Optional[Word]
    loop: Optional[Word]
    pair: LabeledGraphPair

    def describe(self, names: Optional[Sequence[str]] = None) -> str:
        text = f"{self.record} [{self.kind.value}]"
        if self.kind is FoldKind.EXCEPTIONAL:
            if self.loop is not None:
                text += " LOOP " + _fmt(self.loop, names)
            else:
                text += " NOLOOP"
        return text


@dataclass(frozen=True)
class PairTrace:
    start: LabeledGraphPair
    steps: tuple[PairStep, ...]

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        return "".join(s.describe(names) + "\n" for s in self.steps)

    def exceptional(self) -> list[PairStep]:
        return [s for s in self.steps if s.kind is FoldKind.EXCEPTIONAL]


def _fmt(w: Word, names) -> str:
    if names is None:
        names = [f"e{i + 1}" for i in range(w.max_index() + 1)]
    return format_tokens(w, names)


def bouquet_pair(inner: Sequence[Word], outer: Sequence[Word]) -> LabeledGraphPair:
    """Z is the bouquet of ``inner`` then ``outer``; X is the circles of ``inner``."""
    inner = [Word(w) for w in inner]
    if any(len(w) == 0 for w in inner) or any(len(w) == 0 for w in outer):
        raise ValueError("subgroup generators must be nonempty words")
    Z = bouquet(list(inner) + list(outer))
    n_x_edges = sum(len(w) for w in inner)
    n_x_vertices = 1 + sum(len(w) - 1 for w in inner)
    return LabeledGraphPair(Z, frozenset(range(n_x_edges)), frozenset(range(n_x_vertices)))


def initial_pair(A: Sequence[Word], phi: Endo) -> LabeledGraphPair:
    """Z is the bouquet of A followed by phi(A); X is the circles of A."""
    A = [Word(a) for a in A]
    return bouquet_pair(A, [apply_endo(phi, a) for a in A])


def relative_rank(pair: LabeledGraphPair) -> int:
    return rank(pair.Z) - rank(pair.X)


def classify_fold(pair: LabeledGraphPair, e1: int, e2: int) -> FoldClass:
    far = _fold_shape(pair.Z, e1, e2)
    if e1 in pair.x_edges and e2 in pair.x_edges:
        return FoldClass(FoldKind.SUBGRAPH)
    if far is not None:
        p1, p2 = far
        if p1 in pair.x_vertices and p2 in pair.x_vertices and p1 != p2:
            return FoldClass(FoldKind.EXCEPTIONAL, p1, p2)
    return FoldClass(FoldKind.PLAIN)


def _fold_pair(pair: LabeledGraphPair, e1: int, e2: int) -> tuple[LabeledGraphPair, FoldRecord]:
    Z1, rec = fold(pair.Z, e1, e2)
    x_edges = frozenset(edge_image(e, rec) for e in pair.x_edges)
    x_vertices = frozenset(vertex_image(v, rec) for v in pair.x_vertices)
    return LabeledGraphPair(Z1, x_edges, x_vertices), rec


def fold_and_add_loop(pair: LabeledGraphPair, e1: int, e2: int, phi: Endo) -> tuple[LabeledGraphPair, PairStep]:
    """Fold Z; after an exceptional fold, wedge on phi(delta) unless Z already carries it."""
    cls = classify_fold(pair, e1, e2)
    bigon = is_bigon(pair.Z, e1, e2)
    rr_before = relative_rank(pair)
    delta = loop = None
    if cls.kind is FoldKind.EXCEPTIONAL:
        paths = spanning_tree(pair.Z, first=pair.x_edges).paths
        delta = path_label(pair.Z, paths[cls.p1]) * path_label(pair.Z, paths[cls.p2]).inverse()
    new, rec = _fold_pair(pair, e1, e2)
    if delta is not None:
        image = apply_endo(phi, delta)
        if not is_member(tighten(new.Z), image):
            loop = image
            new = LabeledGraphPair(wedge(new.Z, bouquet([image])), new.x_edges, new.x_vertices)
    step = PairStep(rec, cls.kind, bigon, bigon and e1 in pair.x_edges and e2 in pair.x_edges,
                    rr_before, relative_rank(new), delta, loop, new)
    return new, step


def is_invariant(pair: LabeledGraphPair, phi: Endo) -> bool:
    """Whether phi maps the subgroup carried by X into the one carried by Z."""
    tz = tighten(pair.Z)
    return all(is_member(tz, apply_endo(phi, a)) for a in basis(tighten(pair.X)))


def tighten_pair(pair: LabeledGraphPair, phi: Endo) -> tuple[LabeledGraphPair, PairTrace]:
    """Subgraph folds while X is not tight, then fold-and-add-loop until Z is tight."""
    start = pair
    steps = []
    while True:
        hit = find_violation(pair.Z, pair.x_edges)
        if hit is None:
            hit = find_violation(pair.Z)
            if hit is None:
                break
        pair, step = fold_and_add_loop(pair, hit[0], hit[1], phi)
        steps.append(step)
    return pair, PairTrace(start, tuple(steps))


def pair_to_dot(pair: LabeledGraphPair, names: Optional[Sequence[str]] = None, title: str = "G") -> str:
    return to_dot(pair.Z, highlight=pair.x_edges, names=names, title=title)
