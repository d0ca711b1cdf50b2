"""Based labeled graphs over a free-group alphabet and Stallings folding.

Vertices are ``0 .. num_vertices - 1``; an edge is ``(origin, terminus, label)``
and its id is its position in ``edges``.  Reading an edge forwards spells
``label^+1``, backwards ``label^-1``.  Every fold renumbers vertices and edges
by order-preserving compaction, so ids stay small and traces reproducible.
"""
from __future__ import annotations

import heapq
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

from mtorus.freegroup import Word

Step = tuple[int, int]  # (edge id, +1 forwards / -1 backwards)


@dataclass(frozen=True)
class LabeledGraph:
    num_vertices: int
    edges: tuple[tuple[int, int, int], ...]
    basepoint: int = 0

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        n = self.num_vertices
        if not 0 <= self.basepoint < n:
            raise ValueError("basepoint is not a vertex")
        for o, t, lab in self.edges:
            if not (0 <= o < n and 0 <= t < n) or lab < 0:
                raise ValueError(f"bad edge {(o, t, lab)}")
        seen = {self.basepoint}
        stack = [self.basepoint]
        adj = self.adjacency
        while stack:
            v = stack.pop()
            for _, _, _, w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != n:
            raise ValueError("labeled graph must be connected")

    @cached_property
    def adjacency(self) -> list[list[tuple[int, int, int, int]]]:
        """Per vertex, ``(label, dir, edge, other end)`` sorted by label, outgoing first, edge id."""
        adj: list[list] = [[] for _ in range(self.num_vertices)]
        for e, (o, t, lab) in enumerate(self.edges):
            adj[o].append((lab, 1, e, t))
            adj[t].append((lab, -1, e, o))
        for lst in adj:
            lst.sort(key=lambda x: (x[0], -x[1], x[2]))
        return adj

    @cached_property
    def moves(self) -> dict[tuple[int, int, int], list[tuple[int, int]]]:
        """``(vertex, label, sign) -> [(edge, other end), ...]`` in edge-id order."""
        out: dict = {}
        for v, lst in enumerate(self.adjacency):
            for lab, d, e, w in lst:
                out.setdefault((v, lab, d), []).append((e, w))
        return out

    @property
    def num_edges(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class FoldRecord:
    first: int
    second: int
    survivor: int
    merged: Optional[tuple[int, int]] = None  # (kept vertex, removed vertex)

    def __str__(self):
        return f"FOLD e{self.first} e{self.second} -> e{self.survivor}"

    @classmethod
    def parse(cls, line: str) -> "FoldRecord":
        parts = line.split()
        if len(parts) != 5 or parts[0] != "FOLD" or parts[3] != "->":
            raise ValueError(f"malformed fold record {line!r}")
        first, second, survivor = (int(p[1:]) for p in (parts[1], parts[2], parts[4]))
        return cls(first, second, survivor)


@dataclass(frozen=True)
class FoldTrace:
    records: tuple[FoldRecord, ...] = ()

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def to_text(self) -> str:
        return "".join(f"{r}\n" for r in self.records)

    @classmethod
    def from_text(cls, text: str) -> "FoldTrace":
        return cls(tuple(FoldRecord.parse(line) for line in text.splitlines() if line.strip()))

    def replay(self, g: LabeledGraph) -> list[LabeledGraph]:
        """Apply the recorded folds to ``g``; returns every intermediate graph."""
        graphs = [g]
        for rec in self.records:
            g, _ = fold(g, rec.first, rec.second)
            graphs.append(g)
        return graphs


def rank(g: LabeledGraph) -> int:
    return g.num_edges - g.num_vertices + 1


def bouquet(words: Iterable[Sequence]) -> LabeledGraph:
    """Wedge of one subdivided circle per word at a common basepoint ``0``."""
    edges = []
    nv = 1
    for w in words:
        if len(w) == 0:
            raise ValueError("cannot build a circle for the empty word")
        prev = 0
        for k, (lab, sign) in enumerate(w):
            if k == len(w) - 1:
                nxt = 0
            else:
                nxt = nv
                nv += 1
            edges.append((prev, nxt, lab) if sign > 0 else (nxt, prev, lab))
            prev = nxt
    return LabeledGraph(nv, tuple(edges), 0)


def wedge(g: LabeledGraph, h: LabeledGraph) -> LabeledGraph:
    """Attach ``h`` to ``g`` by identifying basepoints; ``g``'s ids are kept."""
    shift = {}
    nv = g.num_vertices
    for v in range(h.num_vertices):
        if v == h.basepoint:
            shift[v] = g.basepoint
        else:
            shift[v] = nv
            nv += 1
    edges = g.edges + tuple((shift[o], shift[t], lab) for o, t, lab in h.edges)
    return LabeledGraph(nv, edges, g.basepoint)


def find_violation(g: LabeledGraph, edges: Optional[Iterable[int]] = None) -> Optional[tuple[int, int]]:
    """First foldable pair in scan order, optionally restricted to an edge subset.

    Scan order: vertices ascending, then labels, then outgoing before
    incoming; the pair is the two lowest edge ids found there.
    """
    allowed = None if edges is None else set(edges)
    for lst in g.adjacency:
        prev_key = None
        prev_edge = None
        for lab, d, e, _ in lst:
            if allowed is not None and e not in allowed:
                continue
            if (lab, d) == prev_key:
                return prev_edge, e
            prev_key, prev_edge = (lab, d), e
    return None


def _fold_shape(g: LabeledGraph, e1: int, e2: int) -> Optional[tuple[int, int]]:
    """Far endpoints to identify, or ``None`` for a bigon. Raises on an illegal pair."""
    if e1 == e2 or not (0 <= e1 < g.num_edges and 0 <= e2 < g.num_edges):
        raise ValueError(f"illegal fold pair ({e1}, {e2})")
    o1, t1, l1 = g.edges[e1]
    o2, t2, l2 = g.edges[e2]
    if l1 != l2:
        raise ValueError(f"edges e{e1} and e{e2} carry different labels")
    if o1 == o2 and t1 == t2:
        return None
    if o1 == o2:
        return t1, t2
    if t1 == t2:
        return o1, o2
    raise ValueError(f"edges e{e1} and e{e2} share no endpoint on the same side")


def is_bigon(g: LabeledGraph, e1: int, e2: int) -> bool:
    return _fold_shape(g, e1, e2) is None


def fold(g: LabeledGraph, e1: int, e2: int) -> tuple[LabeledGraph, FoldRecord]:
    """Identify edges ``e1`` and ``e2``; the lower id survives, as does the lower vertex id."""
    far = _fold_shape(g, e1, e2)
    keep_e, drop_e = min(e1, e2), max(e1, e2)
    if far is None:
        vmap = list(range(g.num_vertices))
        nv = g.num_vertices
        merged = None
    else:
        keep_v, drop_v = min(far), max(far)
        vmap = [v if v < drop_v else v - 1 for v in range(g.num_vertices)]
        vmap[drop_v] = keep_v
        nv = g.num_vertices - 1
        merged = (keep_v, drop_v)
    edges = tuple((vmap[o], vmap[t], lab) for k, (o, t, lab) in enumerate(g.edges) if k != drop_e)
    return LabeledGraph(nv, edges, vmap[g.basepoint]), FoldRecord(e1, e2, keep_e, merged)


def edge_image(e: int, rec: FoldRecord) -> int:
    """Where edge ``e`` lands after the fold described by ``rec``."""
    drop = max(rec.first, rec.second)
    if e == drop:
        return rec.survivor
    return e if e < drop else e - 1


def vertex_image(v: int, rec: FoldRecord) -> int:
    if rec.merged is None:
        return v
    keep, drop = rec.merged
    if v == drop:
        return keep
    return v if v < drop else v - 1


class _Folder:
    """Mutable folding state keyed by the input graph's ids.

    Vertex classes live in a union-find whose class name is the smallest
    member id; since renumbering is order-preserving, scanning by names
    reproduces the scan order on the renumbered graph.
    """

    def __init__(self, g: LabeledGraph, record: bool):
        n = g.num_vertices
        self.g = g
        self.parent = list(range(n))
        self.name = list(range(n))
        self.size = [1] * n
        self.ends = [[o, t] for o, t, _ in g.edges]
        self.label = [lab for _, _, lab in g.edges]
        self.alive = [True] * g.num_edges
        self.inc: list[dict] = [dict() for _ in range(n)]
        for e, (o, t, lab) in enumerate(g.edges):
            self.inc[o].setdefault((lab, 0), []).append(e)
            self.inc[t].setdefault((lab, 1), []).append(e)
        self.record = record
        if record:
            self.alive_e = list(range(g.num_edges))
            self.alive_v = list(range(n))
        self.records: list[FoldRecord] = []

    def find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def violation(self, root: int) -> Optional[tuple[int, int, int]]:
        for key in sorted(self.inc[root]):
            lst = self.inc[root][key]
            if len(lst) >= 2:
                return lst[0], lst[1], key[1]
        return None

    def _remove(self, root: int, key, e: int) -> None:
        lst = self.inc[root][key]
        lst.remove(e)
        if not lst:
            del self.inc[root][key]

    def fold(self, e1: int, e2: int) -> list[int]:
        o1, t1 = (self.find(x) for x in self.ends[e1])
        o2, t2 = (self.find(x) for x in self.ends[e2])
        lab = self.label[e1]
        if o1 == o2 and t1 == t2:
            far = None
        elif o1 == o2:
            far = (t1, t2)
        else:
            far = (o1, o2)
        if self.record:
            i = bisect_left(self.alive_e, e1)
            j = bisect_left(self.alive_e, e2)
            merged = None
            if far is not None:
                a, b = sorted(self.name[r] for r in far)
                ia, ib = bisect_left(self.alive_v, a), bisect_left(self.alive_v, b)
                merged = (ia, ib)
                del self.alive_v[ib]
            del self.alive_e[j]
            self.records.append(FoldRecord(i, j, i, merged))
        self._remove(o2, (lab, 0), e2)
        self._remove(t2, (lab, 1), e2)
        self.alive[e2] = False
        touched = [self.name[o1], self.name[t1]]
        if far is not None:
            ra, rb = far
            if self.size[ra] < self.size[rb]:
                ra, rb = rb, ra
            self.parent[rb] = ra
            self.size[ra] += self.size[rb]
            self.name[ra] = min(self.name[ra], self.name[rb])
            big, small = self.inc[ra], self.inc[rb]
            for key, lst in small.items():
                if key in big:
                    big[key] = sorted(big[key] + lst)
                else:
                    big[key] = lst
            self.inc[rb] = {}
            touched.append(self.name[ra])
        return touched

    def run(self) -> None:
        heap = list(range(self.g.num_vertices))
        heapq.heapify(heap)
        while heap:
            v = heapq.heappop(heap)
            root = self.find(v)
            if self.name[root] != v:
                continue
            hit = self.violation(root)
            if hit is None:
                continue
            for u in self.fold(hit[0], hit[1]):
                heapq.heappush(heap, u)

    def result(self) -> LabeledGraph:
        names = sorted({self.name[self.find(v)] for v in range(self.g.num_vertices)})
        new_id = {nm: k for k, nm in enumerate(names)}
        vid = lambda v: new_id[self.name[self.find(v)]]
        edges = tuple((vid(o), vid(t), self.label[e]) for e, (o, t) in enumerate(self.ends) if self.alive[e])
        return LabeledGraph(len(names), edges, vid(self.g.basepoint))


def tighten_graph(g: LabeledGraph, record: bool = True) -> tuple[LabeledGraph, FoldTrace]:
    """Fold until the labeling is an immersion, always folding the first violation."""
    folder = _Folder(g, record)
    folder.run()
    return folder.result(), FoldTrace(tuple(folder.records))


def tighten(g: LabeledGraph) -> LabeledGraph:
    return tighten_graph(g, record=False)[0]


class Immersion:
    """A folded graph grown one word at a time, for rank and membership queries.

    Words are added as circles at the basepoint and folded on arrival, so
    the graph is always tight.  No ids or traces are kept; use
    ``tighten_graph`` when the deterministic fold order matters.
    """

    def __init__(self):
        self.parent = [0]
        self.out: list[dict] = [{}]  # (label, sign) -> neighbour, one edge per key
        self.num_vertices = 1
        self.num_edges = 0

    def _find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def _new_vertex(self) -> int:
        self.parent.append(len(self.parent))
        self.out.append({})
        self.num_vertices += 1
        return len(self.parent) - 1

    def _merge(self, a: int, b: int) -> None:
        queue = [(a, b)]
        while queue:
            a, b = (self._find(x) for x in queue.pop())
            if a == b:
                continue
            if len(self.out[a]) < len(self.out[b]):
                a, b = b, a
            self.parent[b] = a
            self.num_vertices -= 1
            big = self.out[a]
            for key, w in self.out[b].items():
                if key in big:
                    # two edges with the same origin and label become one
                    if key[1] > 0:
                        self.num_edges -= 1
                    queue.append((big[key], w))
                else:
                    big[key] = w
            self.out[b] = {}

    def _add_edge(self, u: int, v: int, label: int) -> None:
        u, v = self._find(u), self._find(v)
        fwd, back = (label, 1), (label, -1)
        if fwd in self.out[u]:
            self._merge(self.out[u][fwd], v)
        elif back in self.out[v]:
            self._merge(self.out[v][back], u)
        else:
            self.out[u][fwd] = v
            self.out[v][back] = u
            self.num_edges += 1

    def add_word(self, w: Sequence) -> None:
        if len(w) == 0:
            raise ValueError("cannot build a circle for the empty word")
        v = 0
        for k, (lab, sign) in enumerate(w):
            nxt = 0 if k == len(w) - 1 else self._new_vertex()
            if sign > 0:
                self._add_edge(v, nxt, lab)
            else:
                self._add_edge(nxt, v, lab)
            v = nxt

    @property
    def rank(self) -> int:
        return self.num_edges - self.num_vertices + 1

    def is_member(self, w: Iterable) -> bool:
        v = self._find(0)
        for lab, sign in w:
            nxt = self.out[v].get((lab, sign))
            if nxt is None:
                return False
            v = self._find(nxt)
        return v == self._find(0)


def is_tight(g: LabeledGraph) -> bool:
    return find_violation(g) is None


@dataclass(frozen=True)
class TreeData:
    tree_edges: frozenset[int]
    paths: dict[int, tuple[Step, ...]] = field(compare=False)
    non_tree: tuple[int, ...] = ()

    def symbol_of(self) -> dict[int, int]:
        return {e: k for k, e in enumerate(self.non_tree)}


def spanning_tree(g: LabeledGraph, first: Optional[Iterable[int]] = None) -> TreeData:
    """Breadth-first tree from the basepoint.

    With ``first`` given, the search is confined to those edges until it
    stalls and then continues through the remaining edges, so the tree meets
    that subgraph in a maximal tree of it.
    """
    allowed = None if first is None else set(first)
    paths: dict[int, tuple[Step, ...]] = {g.basepoint: ()}
    order = [g.basepoint]
    tree: set[int] = set()

    def search(queue: deque, only) -> None:
        while queue:
            v = queue.popleft()
            for lab, d, e, w in g.adjacency[v]:
                if w in paths or (only is not None and e not in only):
                    continue
                paths[w] = paths[v] + ((e, d),)
                tree.add(e)
                order.append(w)
                queue.append(w)

    search(deque([g.basepoint]), allowed)
    if allowed is not None:
        search(deque(order), None)
    non_tree = tuple(e for e in range(g.num_edges) if e not in tree)
    return TreeData(frozenset(tree), paths, non_tree)


def tree_from_edges(g: LabeledGraph, tree_edges: Iterable[int]) -> TreeData:
    tree_edges = frozenset(tree_edges)
    paths: dict[int, tuple[Step, ...]] = {g.basepoint: ()}
    queue = deque([g.basepoint])
    while queue:
        v = queue.popleft()
        for lab, d, e, w in g.adjacency[v]:
            if e not in tree_edges:
                continue
            if w in paths:
                if paths[v] and paths[v][-1][0] == e:
                    continue
                raise ValueError("edge set contains a cycle")
            paths[w] = paths[v] + ((e, d),)
            queue.append(w)
    if len(paths) != g.num_vertices or len(tree_edges) != g.num_vertices - 1:
        raise ValueError("edge set is not a spanning tree")
    non_tree = tuple(e for e in range(g.num_edges) if e not in tree_edges)
    return TreeData(tree_edges, paths, non_tree)


def path_label(g: LabeledGraph, steps: Iterable[Step]) -> Word:
    return Word((g.edges[e][2], d) for e, d in steps)


def basis_from_tree(g: LabeledGraph, tree: TreeData) -> list[Word]:
    out = []
    for e in tree.non_tree:
        o, t, lab = g.edges[e]
        out.append(path_label(g, tree.paths[o]) * Word.gen(lab) * path_label(g, tree.paths[t]).inverse())
    return out


def basis(g: LabeledGraph) -> list[Word]:
    return basis_from_tree(g, spanning_tree(g))


@dataclass(frozen=True)
class Path:
    steps: tuple[Step, ...]
    end: int
    start: int = 0

    @property
    def closed(self) -> bool:
        return self.end == self.start


def trace(g: LabeledGraph, w: Iterable, start: Optional[int] = None) -> Optional[Path]:
    """Read ``w`` from ``start`` (the basepoint by default); ``None`` when a letter has no edge."""
    v = g.basepoint if start is None else start
    origin = v
    moves = g.moves
    steps = []
    for lab, sign in w:
        hit = moves.get((v, lab, sign))
        if hit is None:
            return None
        e, v = hit[0]
        steps.append((e, sign))
    return Path(tuple(steps), v, origin)


def is_member(g: LabeledGraph, w: Iterable) -> bool:
    p = trace(g, w)
    return p is not None and p.closed


def read_weights(steps: Iterable[Step], weights: dict[int, Word]) -> Word:
    """Product of per-edge words along a path; edges absent from ``weights`` read as 1."""
    out: list = []
    for e, d in steps:
        wt = weights.get(e)
        if not wt:
            continue
        piece = wt if d > 0 else wt.inverse()
        for letter in piece:
            if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
                out.pop()
            else:
                out.append(letter)
    return Word._trusted(out)


def express_in_basis(g: LabeledGraph, tree: TreeData, w: Iterable) -> Word:
    """Rewrite a member ``w`` over basis symbols: symbol ``k`` is ``tree.non_tree[k]``."""
    p = trace(g, w)
    if p is None or not p.closed:
        raise ValueError("word is not in the subgroup carried by the graph")
    weights = {e: Word.gen(k) for k, e in enumerate(tree.non_tree)}
    return read_weights(p.steps, weights)


def expand(symbols: Iterable, words: Sequence[Word]) -> Word:
    """Substitute ``words[k]`` for symbol ``k``."""
    out = Word()
    for k, s in symbols:
        out = out * (words[k] if s > 0 else words[k].inverse())
    return out


def induced_subgraph(g: LabeledGraph, edges: Iterable[int], vertices: Iterable[int] = ()) -> tuple[LabeledGraph, list[int], list[int]]:
    """Order-preserving extraction; returns the graph plus old vertex ids and old edge ids."""
    edges = sorted(set(edges))
    verts = {g.basepoint, *vertices}
    for e in edges:
        verts.update(g.edges[e][:2])
    vlist = sorted(verts)
    vid = {v: k for k, v in enumerate(vlist)}
    sub = LabeledGraph(len(vlist), tuple((vid[g.edges[e][0]], vid[g.edges[e][1]], g.edges[e][2]) for e in edges), vid[g.basepoint])
    return sub, vlist, edges


def core(g: LabeledGraph) -> LabeledGraph:
    """Prune valence-one vertices other than the basepoint until none remain."""
    valence = [0] * g.num_vertices
    for o, t, _ in g.edges:
        valence[o] += 1
        valence[t] += 1
    dead_v = set()
    dead_e = set()
    stack = [v for v in range(g.num_vertices) if valence[v] == 1 and v != g.basepoint]
    while stack:
        v = stack.pop()
        if v in dead_v or valence[v] != 1:
            continue
        dead_v.add(v)
        for _, _, e, w in g.adjacency[v]:
            if e in dead_e:
                continue
            dead_e.add(e)
            valence[v] -= 1
            valence[w] -= 1
            if valence[w] == 1 and w != g.basepoint:
                stack.append(w)
    keep = [e for e in range(g.num_edges) if e not in dead_e]
    sub, _, _ = induced_subgraph(g, keep)
    return sub


def isomorphic_based(g1: LabeledGraph, g2: LabeledGraph) -> bool:
    """Label-preserving based isomorphism of tight graphs by synchronized traversal."""
    if g1.num_vertices != g2.num_vertices or g1.num_edges != g2.num_edges:
        return False
    vmap = {g1.basepoint: g2.basepoint}
    used = {g2.basepoint}
    queue = deque([g1.basepoint])
    moves2 = g2.moves
    while queue:
        v = queue.popleft()
        for lab, d, e, w in g1.adjacency[v]:
            hit = moves2.get((vmap[v], lab, d))
            if hit is None:
                return False
            w2 = hit[0][1]
            if w in vmap:
                if vmap[w] != w2:
                    return False
            else:
                if w2 in used:
                    return False
                vmap[w] = w2
                used.add(w2)
                queue.append(w)
    return len(vmap) == g1.num_vertices


def same_subgroup(words1: Iterable[Sequence], words2: Iterable[Sequence]) -> bool:
    """Whether two finite word sets generate the same subgroup (via cored folded bouquets)."""
    return isomorphic_based(core(tighten(bouquet(words1))), core(tighten(bouquet(words2))))


def to_dot(g: LabeledGraph, highlight: Optional[Iterable[int]] = None, names: Optional[Sequence[str]] = None,
           title: str = "G") -> str:
    """DOT text: basepoint double-circled, highlighted edges drawn bold."""
    bold = set(highlight or ())
    lines = [f"digraph {title} {{", "  node [shape=circle, label=\"\"];"]
    for v in range(g.num_vertices):
        shape = "doublecircle" if v == g.basepoint else "circle"
        lines.append(f"  v{v} [shape={shape}, xlabel=\"{v}\"];")
    for e, (o, t, lab) in enumerate(g.edges):
        text = names[lab] if names is not None else f"e{lab + 1}"
        style = ", style=bold, penwidth=2" if e in bold else ""
        lines.append(f"  v{o} -> v{t} [label=\"{text}\"{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
