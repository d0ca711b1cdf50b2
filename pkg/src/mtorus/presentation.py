"""Finite presentations ``<t, A, B | t a_j t^-1 = w_j>`` for subgroups containing ``t``.

The driver tightens the pair built from the generators, reads A and B off
a maximal tree of Z that restricts to a maximal tree of X, and then checks
that ``A u B u phi(B) u ... u phi^(d-1)(B)`` is still free.  When a level is
not free, the pair formed by the last free level and the failing one is
tightened instead; its relative rank is strictly smaller, so the loop ends.
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from mtorus.freegroup import Alphabet, Endo, Word, apply_endo, format_tokens, parse_tokens
from mtorus.graph import (Immersion, LabeledGraph, TreeData, basis_from_tree, read_weights, same_subgroup,
                          spanning_tree, trace)
from mtorus.pair import LabeledGraphPair, PairTrace, bouquet_pair, initial_pair, relative_rank, tighten_pair
from mtorus.torus import STABLE, TorusWord, equal_in_torus, format_torus, normalize, parse_torus

DEFAULT_DEPTH = 8


@dataclass(frozen=True)
class Relator:
    """``t a_index t^-1 = w``, with ``w`` over symbols (``k < |A|`` is ``a_k``, the rest ``b``)."""

    index: int
    w: Word


@dataclass(frozen=True)
class CertLevel:
    """Level ``i`` checks ``S_i``; ``added`` holds the words ``S_i`` has beyond ``S_(i-1)``."""

    level: int
    size: int
    rank: int
    added: tuple[Word, ...] = field(default=(), compare=False, repr=False)

    @property
    def passed(self) -> bool:
        return self.rank == self.size


@dataclass(frozen=True)
class Certificate:
    depth: int
    levels: tuple[CertLevel, ...]

    @property
    def failed_level(self) -> Optional[int]:
        for lv in self.levels:
            if not lv.passed:
                return lv.level
        return None

    def words(self, level: int) -> list[Word]:
        """The full set ``S_level``."""
        return [w for lv in self.levels[:level] for w in lv.added]

    @property
    def certified_depth(self) -> int:
        good = 0
        for lv in self.levels:
            if not lv.passed:
                break
            good = lv.level
        return good


@dataclass(frozen=True)
class Witness:
    generator: TorusWord
    expression: TorusWord  # free letters index A symbols


@dataclass(frozen=True)
class Cycle:
    """One pass of the driver: the pair's relative rank and the first uncertified level, if any."""

    rr: int
    failed_level: Optional[int]
    restarted: bool


@dataclass(frozen=True)
class Presentation:
    A: tuple[Word, ...]
    B: tuple[Word, ...]
    relators: tuple[Relator, ...]
    certificate: Optional[Certificate] = None
    restart_count: int = 0
    initial_rr: int = 0
    witnesses: tuple[Witness, ...] = ()
    pair: Optional[LabeledGraphPair] = field(default=None, compare=False)
    tree: Optional[TreeData] = field(default=None, compare=False)
    traces: tuple[PairTrace, ...] = field(default=(), compare=False)
    cycles: tuple[Cycle, ...] = field(default=(), compare=False)

    @property
    def symbols(self) -> tuple[Word, ...]:
        return self.A + self.B

    @property
    def certified_depth(self) -> int:
        return self.certificate.certified_depth if self.certificate else 0

    def symbol_names(self) -> list[str]:
        return [f"a{i + 1}" for i in range(len(self.A))] + [f"b{i + 1}" for i in range(len(self.B))]


def collect_A(gens: Iterable[Iterable], phi: Endo) -> list[Word]:
    """Middle words of the generators' normal forms, nonempty and without repeats."""
    out: list[Word] = []
    for g in gens:
        x = normalize(g, phi).x
        if x and x not in out:
            out.append(x)
    return out


def level_words(A: Sequence[Word], B: Sequence[Word], phi: Endo, depth: int) -> list[list[Word]]:
    """``[A u B, phi(B), phi^2(B), ...]``: the words each level adds."""
    chunks = [list(A) + list(B)]
    cur = list(B)
    for _ in range(depth - 1):
        cur = [apply_endo(phi, b) for b in cur]
        chunks.append(cur)
    return chunks


def _rank_of(words: Sequence[Word]) -> int:
    graph = Immersion()
    for w in words:
        graph.add_word(w)
    return graph.rank


def certify_depth(A: Sequence[Word], B: Sequence[Word], phi: Endo, depth: int, jobs: int = 1) -> Certificate:
    """Free-generation checks for levels 1..depth, stopping at the first failure."""
    chunks = level_words(A, B, phi, depth)
    levels = []
    if jobs > 1 and depth > 1:
        sets = [sum(chunks[:i], []) for i in range(1, depth + 1)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            ranks = list(pool.map(_rank_of, sets))
        for i, (words, rk) in enumerate(zip(sets, ranks), start=1):
            levels.append(CertLevel(i, len(words), rk, tuple(chunks[i - 1])))
            if rk != len(words):
                break
        return Certificate(depth, tuple(levels))
    # folding is confluent, so each level folds its new circles onto the previous graph
    graph = Immersion()
    size = 0
    for i, chunk in enumerate(chunks, start=1):
        for w in chunk:
            graph.add_word(w)
        size += len(chunk)
        levels.append(CertLevel(i, size, graph.rank, tuple(chunk)))
        if not levels[-1].passed:
            break
    return Certificate(depth, tuple(levels))


def _symbol_weights(pair: LabeledGraphPair, tree: TreeData) -> tuple[dict[int, Word], list[int], list[int]]:
    a_edges = [e for e in tree.non_tree if e in pair.x_edges]
    b_edges = [e for e in tree.non_tree if e not in pair.x_edges]
    weights = {e: Word.gen(k) for k, e in enumerate(a_edges + b_edges)}
    return weights, a_edges, b_edges


def _express(g: LabeledGraph, weights: dict[int, Word], w: Iterable) -> Word:
    p = trace(g, w)
    if p is None or not p.closed:
        raise ValueError("word is not carried by the final graph")
    return read_weights(p.steps, weights)


def _extract(pair: LabeledGraphPair, phi: Endo):
    tree = spanning_tree(pair.Z, first=pair.x_edges)
    words = dict(zip(tree.non_tree, basis_from_tree(pair.Z, tree)))
    weights, a_edges, b_edges = _symbol_weights(pair, tree)
    A = tuple(words[e] for e in a_edges)
    B = tuple(words[e] for e in b_edges)
    relators = tuple(Relator(j, _express(pair.Z, weights, apply_endo(phi, a))) for j, a in enumerate(A))
    return tree, A, B, relators


def present(phi: Endo, A: Sequence[Iterable], depth: int = DEFAULT_DEPTH, jobs: int = 1) -> Presentation:
    if depth < 1:
        raise ValueError("certification depth must be at least 1")
    if not phi.injective:
        raise ValueError("endomorphism is not injective")
    A = [Word(a) for a in A]
    A = [a for a in A if a]
    pair = initial_pair(A, phi)
    initial_rr = relative_rank(pair)
    pair, tr = tighten_pair(pair, phi)
    traces = [tr]
    restarts = 0
    cycles = []
    while True:
        tree, A_, B_, relators = _extract(pair, phi)
        cert = certify_depth(A_, B_, phi, depth, jobs=jobs)
        failed = cert.failed_level
        if failed is not None:
            chunks = level_words(A_, B_, phi, failed)
            candidate = bouquet_pair(sum(chunks[:-1], []), chunks[-1])
        else:
            candidate = bouquet_pair(A_, B_)
        new, tr = tighten_pair(candidate, phi)
        if failed is None and relative_rank(new) >= relative_rank(pair):
            cycles.append(Cycle(relative_rank(pair), None, False))
            break
        cycles.append(Cycle(relative_rank(pair), failed, True))
        if relative_rank(new) >= relative_rank(pair):
            raise RuntimeError("restart pair did not lower the relative rank")
        pair = new
        traces.append(tr)
        restarts += 1
    return Presentation(A_, B_, relators, cert, restarts, initial_rr, (), pair, tree, tuple(traces), tuple(cycles))


def express_generator(g: Iterable, pres: Presentation, phi: Endo) -> TorusWord:
    """Write ``g`` as ``t^-q (word in A symbols) t^r`` using the final graph."""
    nf = normalize(g, phi)
    weights, _, _ = _symbol_weights(pres.pair, pres.tree)
    sym = _express(pres.pair.Z, weights, nf.x)
    if any(k >= len(pres.A) for k, _ in sym):
        raise RuntimeError("generator's free part left the subgraph; X^# should only grow")
    return TorusWord.stable(-nf.q) * TorusWord(sym) * TorusWord.stable(nf.r)


def expand_symbols(w: Iterable, symbols: Sequence[Word]) -> TorusWord:
    """Replace symbol letters by their words; stable letters pass through."""
    out = []
    for k, s in w:
        if k == STABLE:
            out.append((k, s))
        else:
            out.extend(symbols[k] if s > 0 else symbols[k].inverse())
    return TorusWord(out)


def present_subgroup(gens: Sequence[Iterable], phi: Endo, depth: int = DEFAULT_DEPTH, jobs: int = 1) -> Presentation:
    """``collect_A`` + ``present`` + a witness for every input generator."""
    gens = [TorusWord(g) for g in gens]
    pres = present(phi, collect_A(gens, phi), depth, jobs)
    witnesses = tuple(Witness(g, express_generator(g, pres, phi)) for g in gens)
    return dataclasses.replace(pres, witnesses=witnesses)


@dataclass(frozen=True)
class VerificationReport:
    relator_images: bool
    same_subgroup: bool
    relators_trivial: bool
    details: tuple[str, ...] = ()
    witnesses: Optional[bool] = None  # None when the presentation records no witnesses

    @property
    def passed(self) -> bool:
        return self.relator_images and self.same_subgroup and self.relators_trivial and self.witnesses is not False

    def lines(self) -> list[str]:
        mark = lambda ok: "PASS" if ok else "FAIL"
        return [f"{mark(self.relator_images)} (a) each w_j spells phi(a_j)",
                f"{mark(self.same_subgroup)} (b) <A, phi(A)> = <A, B>",
                f"{mark(self.relators_trivial)} (c) each relator is trivial in the mapping torus"] + (
            [] if self.witnesses is None else [f"{mark(self.witnesses)} (w) each generator equals its witness"])


def verify_presentation(pres: Presentation, phi: Endo) -> VerificationReport:
    symbols = pres.symbols
    details = []
    ok_a = ok_c = True
    if len(pres.relators) != len(pres.A):
        ok_a = False
        details.append(f"{len(pres.relators)} relators for {len(pres.A)} A-generators")
    t = TorusWord.stable(1)
    for rel in pres.relators:
        if not 0 <= rel.index < len(pres.A) or rel.w.max_index() >= len(symbols):
            ok_a = ok_c = False
            details.append(f"relator {rel.index + 1} refers to unknown symbols")
            continue
        a = pres.A[rel.index]
        spelled = expand_symbols(rel.w, symbols)
        if Word(spelled) != apply_endo(phi, a):
            ok_a = False
            details.append(f"relator {rel.index + 1}: w does not spell phi(a)")
        r = t * TorusWord(a) * t.inverse() * spelled.inverse()
        if not equal_in_torus(r, TorusWord(), phi):
            ok_c = False
            details.append(f"relator {rel.index + 1} is not trivial")
    ok_b = same_subgroup(list(pres.A) + [apply_endo(phi, a) for a in pres.A], list(pres.A) + list(pres.B))
    ok_w = None
    if pres.witnesses:
        ok_w = True
        for i, wit in enumerate(pres.witnesses, start=1):
            if any(k >= len(pres.A) for k, _ in wit.expression if k != STABLE) or \
                    not equal_in_torus(expand_symbols(wit.expression, symbols), wit.generator, phi):
                ok_w = False
                details.append(f"witness {i} does not match its generator")
    return VerificationReport(ok_a, ok_b, ok_c, tuple(details), ok_w)


# -- text and document forms -------------------------------------------------

def _symbol_index(pres: Presentation) -> dict[str, int]:
    return {name: k for k, name in enumerate(pres.symbol_names())}


def format_human(pres: Presentation, names: Sequence[str], stable: str = "t") -> str:
    sym = pres.symbol_names()
    head = ", ".join([stable] + sym)
    rels = ", ".join(f"{stable} {sym[r.index]} {stable}^-1 = {format_tokens(r.w, sym)}" for r in pres.relators)
    lines = [f"< {head} | {rels} >" if rels else f"< {head} | >"]
    for name, w in zip(sym, pres.symbols):
        lines.append(f"  {name} = {format_tokens(w, names)}")
    for wit in pres.witnesses:
        lines.append(f"  {format_torus(wit.generator, names, stable)} = {format_torus(wit.expression, sym, stable)}")
    if pres.certificate is not None:
        lines.append(f"certificate: depth {pres.certificate.depth}, certified {pres.certified_depth}")
        for lv in pres.certificate.levels:
            verdict = "free" if lv.passed else "NOT free"
            lines.append(f"  level {lv.level}: |S| = {lv.size}, rank = {lv.rank}, {verdict}")
    return "\n".join(lines)


def presentation_to_dict(pres: Presentation, names: Sequence[str], stable: str = "t") -> dict:
    sym = pres.symbol_names()
    cert = pres.certificate
    return {
        "A": [format_tokens(w, names) for w in pres.A],
        "B": [format_tokens(w, names) for w in pres.B],
        "relators": [{"index": r.index + 1, "w": format_tokens(r.w, sym)} for r in pres.relators],
        "certified_depth": pres.certified_depth,
        "restart_count": pres.restart_count,
        "initial_rr": pres.initial_rr,
        "certificate": None if cert is None else {
            "depth": cert.depth,
            "levels": [{"level": lv.level, "size": lv.size, "rank": lv.rank, "passed": lv.passed}
                       for lv in cert.levels],
        },
        "witnesses": [{"generator": format_torus(w.generator, names, stable),
                       "expression": format_torus(w.expression, sym, stable)} for w in pres.witnesses],
    }


def presentation_from_dict(doc: dict, alphabet: Alphabet, stable: str = "t") -> Presentation:
    """Inverse of ``presentation_to_dict``; raises ``ValueError``/``KeyError`` on malformed input."""
    A = tuple(alphabet.parse(s) for s in doc["A"])
    B = tuple(alphabet.parse(s) for s in doc["B"])
    shell = Presentation(A, B, ())
    sym_index = _symbol_index(shell)
    sym_alpha = Alphabet(shell.symbol_names(), reserved=())
    relators = tuple(Relator(int(r["index"]) - 1, Word(parse_tokens(r["w"], sym_index))) for r in doc["relators"])
    cert = None
    if doc.get("certificate") is not None:
        c = doc["certificate"]
        cert = Certificate(int(c["depth"]), tuple(CertLevel(int(lv["level"]), int(lv["size"]), int(lv["rank"]))
                                                  for lv in c["levels"]))
    witnesses = tuple(Witness(parse_torus(w["generator"], alphabet, stable), parse_torus(w["expression"], sym_alpha,
                                                                                       stable))
                      for w in doc.get("witnesses", []))
    return Presentation(A, B, relators, cert, int(doc.get("restart_count", 0)), int(doc.get("initial_rr", 0)),
                        witnesses)
