"""Rooted directed trees truncated at a generation depth, with positive edge weights.

Vertices of generated trees are (generation, index) pairs; trees loaded from
JSON files keep their opaque string labels.  A tree stores parent and ordered
children maps, and every vertex strictly above the truncation depth must have
at least one child (no interior leaves).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Hashable, Iterator, Sequence

from .errors import (
    BadParams,
    DepthTooLargeForMemory,
    MalformedSpec,
    NonpositiveWeight,
    NotDescendant,
    UnknownExample,
)

VertexId = Hashable

# Hard cap on stored vertices; the quartic example tree explodes past depth 3.
MAX_VERTICES = 200_000


@dataclass(frozen=True)
class TreeSpec:
    """Declarative description of a weighted tree: root, edges, truncation depth."""

    depth: int
    root: VertexId
    edges: tuple[tuple[VertexId, VertexId, float], ...]


@dataclass(frozen=True)
class PathSubtree:
    """A maximal root-to-leaf chain; every vertex has one successor in the list."""

    vertices: tuple[VertexId, ...]

    def __len__(self) -> int:
        return len(self.vertices)


class Tree:
    """Immutable rooted tree with ordered children, truncated at `depth` generations.

    Vertices are enumerated breadth first (by generation, then insertion order);
    `index` maps a vertex to its position in that enumeration and `generation`
    gives its distance from the root.
    """

    def __init__(self, root: VertexId, children: dict[VertexId, Sequence[VertexId]],
                 depth: int) -> None:
        if depth < 0:
            raise MalformedSpec("truncation depth must be nonnegative")
        self.root = root
        self.depth = depth
        self.children: dict[VertexId, tuple[VertexId, ...]] = {}
        self.parent: dict[VertexId, VertexId] = {}

        generations: list[list[VertexId]] = [[root]]
        gen_of: dict[VertexId, int] = {root: 0}
        frontier = [root]
        total = 1
        while frontier:
            nxt: list[VertexId] = []
            for u in frontier:
                kids = tuple(children.get(u, ()))
                self.children[u] = kids
                for v in kids:
                    if v in gen_of:
                        raise MalformedSpec(f"vertex {v!r} has two parents or lies on a cycle")
                    self.parent[v] = u
                    gen_of[v] = gen_of[u] + 1
                    if gen_of[v] > depth:
                        raise MalformedSpec(f"vertex {v!r} exceeds truncation depth {depth}")
                    nxt.append(v)
                    total += 1
                    if total > MAX_VERTICES:
                        raise DepthTooLargeForMemory(
                            f"tree exceeds {MAX_VERTICES} vertices")
            if nxt:
                generations.append(nxt)
            frontier = nxt

        unreachable = set(children) - set(self.children)
        if unreachable:
            raise MalformedSpec(f"unreachable vertices: {sorted(map(repr, unreachable))[:5]}")
        for u, g in gen_of.items():
            if g < depth and not self.children[u]:
                raise MalformedSpec(
                    f"vertex {u!r} at generation {g} has no children above the truncation depth")

        self.generations: tuple[tuple[VertexId, ...], ...] = tuple(map(tuple, generations))
        self.vertices: tuple[VertexId, ...] = tuple(v for gen in generations for v in gen)
        self.index: dict[VertexId, int] = {v: i for i, v in enumerate(self.vertices)}
        self.generation: dict[VertexId, int] = gen_of

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def ancestors(self, v: VertexId) -> Iterator[VertexId]:
        """Yield v, parent(v), ..., root."""
        while True:
            yield v
            if v == self.root:
                return
            v = self.parent[v]

    def descendants(self, u: VertexId) -> Iterator[VertexId]:
        """Yield descendants of u (including u) in breadth-first order."""
        frontier = [u]
        while frontier:
            nxt: list[VertexId] = []
            for w in frontier:
                yield w
                nxt.extend(self.children[w])
            frontier = nxt

    def is_last_generation(self, v: VertexId) -> bool:
        return self.generation[v] == self.depth


class WeightMap:
    """Positive weights on all non-root vertices of a tree."""

    def __init__(self, tree: Tree, weights: dict[VertexId, float]) -> None:
        for v in tree.vertices:
            if v == tree.root:
                continue
            w = weights.get(v)
            if w is None:
                raise MalformedSpec(f"missing weight for vertex {v!r}")
            if not (w > 0):
                raise NonpositiveWeight(f"weight at {v!r} is {w!r}")
        self.tree = tree
        self.values: dict[VertexId, float] = {
            v: float(weights[v]) for v in tree.vertices if v != tree.root}

    def __getitem__(self, v: VertexId) -> float:
        return self.values[v]


def build_tree(spec: TreeSpec) -> tuple[Tree, WeightMap]:
    """Validate a tree specification and assemble the tree plus its weight map.

    Rejects duplicate edges, vertices with several parents, cycles, interior
    leaves, vertices beyond the stated depth, and nonpositive weights.
    """
    children: dict[VertexId, list[VertexId]] = {}
    weights: dict[VertexId, float] = {}
    seen: set[tuple[VertexId, VertexId]] = set()
    for u, v, w in spec.edges:
        if (u, v) in seen:
            raise MalformedSpec(f"duplicate edge {u!r} -> {v!r}")
        seen.add((u, v))
        if v == spec.root:
            raise MalformedSpec("root cannot have a parent")
        if not (w > 0):
            raise NonpositiveWeight(f"weight on edge {u!r} -> {v!r} is {w!r}")
        children.setdefault(u, []).append(v)
        children.setdefault(v, [])
        weights[v] = float(w)
    if spec.root not in children and spec.edges:
        raise MalformedSpec("root does not appear in any edge")
    tree = Tree(spec.root, children, spec.depth)
    return tree, WeightMap(tree, weights)


def load_tree_spec(path: str) -> TreeSpec:
    """Read the JSON tree-spec format: {"depth", "root", "edges": [{from,to,weight}]}."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        edges = tuple((e["from"], e["to"], float(e["weight"])) for e in raw["edges"])
        return TreeSpec(depth=int(raw["depth"]), root=raw["root"], edges=edges)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise MalformedSpec(f"bad tree-spec file {path}: {exc}") from exc


def save_tree_spec(spec: TreeSpec, path: str) -> None:
    """Write a tree spec in the JSON format understood by `load_tree_spec`."""
    payload = {
        "depth": spec.depth,
        "root": spec.root,
        "edges": [{"from": u, "to": v, "weight": w} for u, v, w in spec.edges],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def tree_to_spec(tree: Tree, weights: WeightMap, *, stringify: bool = True) -> TreeSpec:
    """Serialize a built tree back to a TreeSpec, stringifying tuple labels."""

    def label(v: VertexId):
        if stringify and isinstance(v, tuple):
            return ".".join(str(c) for c in v)
        return v

    edges = tuple(
        (label(u), label(v), weights[v])
        for u in tree.vertices for v in tree.children[u])
    return TreeSpec(depth=tree.depth, root=label(tree.root), edges=edges)


def generate_example(name: str, depth: int, params: Sequence[float] = ()) -> tuple[Tree, WeightMap]:
    """Build one of the named example trees.

    T2:         root with two infinite rays; weights 1 on the first ray and
                alpha on the second, params = [alpha] with 0 < alpha < 1.
    T4:         generation m holds 2^(m(m+1)) vertices, each vertex at depth m
                has 2^(2m+2) children, and weights are 2^(-|v|).
    UNILATERAL: a single path; params is the weight list (length = depth).
    """
    key = name.upper()
    if key == "T2":
        if depth < 1:
            raise BadParams("T2 needs depth >= 1")
        if len(params) != 1 or not (0 < params[0] < 1):
            raise BadParams("T2 needs params=[alpha] with 0 < alpha < 1")
        alpha = float(params[0])
        children: dict[VertexId, list[VertexId]] = {(0, 0): [(1, 1), (2, 1)]}
        weights: dict[VertexId, float] = {(1, 1): 1.0, (2, 1): alpha}
        for i, w in ((1, 1.0), (2, alpha)):
            for j in range(1, depth):
                children[(i, j)] = [(i, j + 1)]
                weights[(i, j + 1)] = w
            children[(i, depth)] = []
        tree = Tree((0, 0), children, depth)
        return tree, WeightMap(tree, weights)

    if key == "T4":
        if params:
            raise BadParams("T4 takes no parameters")
        count = sum(2 ** (m * (m + 1)) for m in range(depth + 1))
        if count > MAX_VERTICES:
            raise DepthTooLargeForMemory(
                f"T4 at depth {depth} holds {count} vertices (cap {MAX_VERTICES})")
        children = {}
        weights = {}
        for m in range(depth + 1):
            width = 2 ** (m * (m + 1))
            fanout = 2 ** (2 * m + 2)
            for n in range(width):
                if m < depth:
                    kids = [(m + 1, k) for k in range(n * fanout, (n + 1) * fanout)]
                else:
                    kids = []
                children[(m, n)] = kids
                if m > 0:
                    weights[(m, n)] = 2.0 ** (-m)
        tree = Tree((0, 0), children, depth)
        return tree, WeightMap(tree, weights)

    if key == "UNILATERAL":
        if len(params) != depth:
            raise BadParams(f"UNILATERAL needs {depth} weights, got {len(params)}")
        if any(not (w > 0) for w in params):
            raise NonpositiveWeight("chain weights must be positive")
        children = {(k, 0): [(k + 1, 0)] for k in range(depth)}
        children[(depth, 0)] = []
        weights = {(k + 1, 0): float(params[k]) for k in range(depth)}
        tree = Tree((0, 0), children, depth)
        return tree, WeightMap(tree, weights)

    raise UnknownExample(f"no example named {name!r}")


def balanced_double_ray(depth: int, generation_norms: Sequence[float]) -> tuple[Tree, WeightMap]:
    """Two rays branching at the root, weighted so every generation-m vertex u
    has ||S e_u|| equal to generation_norms[m].  Useful balanced non-isometry.
    """
    if depth < 1:
        raise BadParams("balanced_double_ray needs depth >= 1")
    if len(generation_norms) < depth:
        raise BadParams(f"need {depth} generation norms, got {len(generation_norms)}")
    if any(not (c > 0) for c in generation_norms):
        raise NonpositiveWeight("generation norms must be positive")
    c = [float(x) for x in generation_norms]
    children: dict[VertexId, list[VertexId]] = {(0, 0): [(1, 1), (2, 1)]}
    weights: dict[VertexId, float] = {(1, 1): c[0] / 2 ** 0.5, (2, 1): c[0] / 2 ** 0.5}
    for i in (1, 2):
        for j in range(1, depth):
            children[(i, j)] = [(i, j + 1)]
            weights[(i, j + 1)] = c[j]
        children[(i, depth)] = []
    tree = Tree((0, 0), children, depth)
    return tree, WeightMap(tree, weights)


def generate_random_tree(depth: int, max_branching: int, seed: int,
                         weight_range: tuple[float, float] = (0.5, 2.0)) -> tuple[Tree, WeightMap]:
    """Random locally finite tree with branching <= max_branching and random weights.

    Branching counts are drawn with probabilities favouring single children so
    the vertex count stays at desk scale; deterministic for a fixed seed.
    """
    from ._util import stable_rng

    if max_branching < 1:
        raise BadParams("max_branching must be >= 1")
    rng = stable_rng(seed, "random-tree")
    counts = list(range(1, max_branching + 1))
    probs = [0.55, 0.3, 0.15][:max_branching]
    probs = [p / sum(probs) for p in probs]
    lo, hi = weight_range
    children: dict[VertexId, list[VertexId]] = {}
    weights: dict[VertexId, float] = {}
    frontier = [(0, 0)]
    for g in range(depth):
        nxt: list[VertexId] = []
        idx = 0
        for u in frontier:
            k = int(rng.choice(counts, p=probs))
            kids = [(g + 1, idx + t) for t in range(k)]
            idx += k
            children[u] = kids
            for v in kids:
                weights[v] = float(rng.uniform(lo, hi))
            nxt.extend(kids)
        frontier = nxt
    for u in frontier:
        children[u] = []
    tree = Tree((0, 0), children, depth)
    return tree, WeightMap(tree, weights)


def lambda_product(tree: Tree, weights: WeightMap, u: VertexId, v: VertexId) -> float:
    """Product of weights along the ancestor chain from v up to, excluding, u.

    Returns 1 when u == v (empty product).  Raises NotDescendant when u is not
    an ancestor of v.
    """
    if u not in tree.index or v not in tree.index:
        raise NotDescendant(f"unknown vertex in pair ({u!r}, {v!r})")
    prod = 1.0
    w = v
    while w != u:
        if w == tree.root:
            raise NotDescendant(f"{v!r} is not a descendant of {u!r}")
        prod *= weights[w]
        w = tree.parent[w]
    return prod


def enumerate_paths(tree: Tree) -> list[PathSubtree]:
    """All maximal root-to-leaf chains, in depth-first child order."""
    out: list[PathSubtree] = []
    stack: list[list[VertexId]] = [[tree.root]]
    while stack:
        chain = stack.pop()
        kids = tree.children[chain[-1]]
        if not kids:
            out.append(PathSubtree(tuple(chain)))
            continue
        for child in reversed(kids):
            stack.append(chain + [child])
    return out
