"""Tree decomposition lemmas: small-subtree split, cover, bare paths.

Core facts used by the embedding pipeline:

* every tree on at least 2k vertices splits into two induced subtrees
  overlapping in at most one vertex, one of them holding between k and 2k-1
  vertices (``small_subtree_split``);
* iterating the split covers any tree by at most ceil(n/(k-1)) + 1 induced
  subtrees of fewer than 2k vertices each (``subtree_cover``);
* a tree with few leaves packs many vertex-disjoint bare paths, paths whose
  inner vertices all have degree 2 (``find_bare_paths``);
* hence the dichotomy ``classify_tree``: either enough disjoint bare paths
  of the profile length, or a small subtree crowded with leaf neighbors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .errors import (
    DegreeBoundViolated,
    InvalidConfiguration,
    InvalidParameter,
    TreeTooSmall,
)


class Tree:
    """Rooted tree as a parent array; vertex ids are 0..n-1.

    The root is the unique vertex with parent None.  Undirected structure
    (degrees, leaves) ignores the rooting.
    """

    __slots__ = ("n", "parent", "root", "children", "adj")

    def __init__(self, parent: Sequence[Optional[int]]):
        self.n = len(parent)
        if self.n == 0:
            raise InvalidConfiguration("a tree needs at least one vertex")
        self.parent: List[Optional[int]] = list(parent)
        roots = [i for i, p in enumerate(self.parent) if p is None]
        if len(roots) != 1:
            raise InvalidConfiguration(f"expected exactly one root, found {len(roots)}")
        self.root = roots[0]
        self.children: List[List[int]] = [[] for _ in range(self.n)]
        self.adj: List[List[int]] = [[] for _ in range(self.n)]
        for v, p in enumerate(self.parent):
            if p is None:
                continue
            if not 0 <= p < self.n:
                raise InvalidConfiguration(f"parent of {v} out of range: {p}")
            self.children[p].append(v)
            self.adj[p].append(v)
            self.adj[v].append(p)
        # reach everything from the root, which also rules out cycles
        seen = [False] * self.n
        stack = [self.root]
        seen[self.root] = True
        count = 1
        while stack:
            v = stack.pop()
            for c in self.children[v]:
                if seen[c]:
                    raise InvalidConfiguration("parent array contains a cycle")
                seen[c] = True
                count += 1
                stack.append(c)
        if count != self.n:
            raise InvalidConfiguration("parent array is disconnected")
        for v in range(self.n):
            self.children[v].sort()
            self.adj[v].sort()

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]], root: int = 0) -> "Tree":
        adj: List[List[int]] = [[] for _ in range(n)]
        m = 0
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
            m += 1
        if m != n - 1:
            raise InvalidConfiguration(f"a tree on {n} vertices has {n - 1} edges, got {m}")
        parent: List[Optional[int]] = [None] * n
        seen = [False] * n
        seen[root] = True
        stack = [root]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    parent[w] = v
                    stack.append(w)
        return cls(parent)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def max_degree(self) -> int:
        return max(len(a) for a in self.adj)

    def leaves(self) -> List[int]:
        return [v for v in range(self.n) if len(self.adj[v]) == 1]

    def leaf_neighbors(self) -> List[int]:
        """Vertices adjacent to at least one leaf, ascending."""
        out: Set[int] = set()
        for v in self.leaves():
            out.add(self.adj[v][0])
        return sorted(out)

    def edges(self) -> List[Tuple[int, int]]:
        return sorted(
            (min(v, p), max(v, p))
            for v, p in enumerate(self.parent) if p is not None
        )

    def to_dict(self) -> dict:
        return {"n": self.n, "parent": list(self.parent)}

    @classmethod
    def from_dict(cls, data: dict) -> "Tree":
        parent = data["parent"]
        if len(parent) != data["n"]:
            raise InvalidConfiguration("parent array length disagrees with n")
        return cls(parent)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Tree":
        return cls.from_dict(json.loads(text))


def induces_subtree(tree: Tree, vertices: Iterable[int]) -> bool:
    """Is the induced subgraph on ``vertices`` connected (hence a tree)?"""
    vs = set(vertices)
    if not vs:
        return False
    start = next(iter(vs))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in tree.adj[v]:
            if w in vs and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == vs


def _subtree_sizes(adj: List[List[int]], vertices: Set[int], root: int) -> Tuple[Dict[int, int], Dict[int, Optional[int]]]:
    """Sizes of root-down subtrees within the vertex set, plus parents."""
    parent: Dict[int, Optional[int]] = {root: None}
    order = [root]
    stack = [root]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w in vertices and w not in parent:
                parent[w] = v
                order.append(w)
                stack.append(w)
    size = {v: 1 for v in parent}
    for v in reversed(order):
        p = parent[v]
        if p is not None:
            size[p] += size[v]
    return size, parent


def _split_set(adj: List[List[int]], vertices: Set[int], k: int) -> Tuple[Set[int], Set[int]]:
    """Split an induced subtree into (V_A, V_B) per the split lemma."""
    n = len(vertices)
    root = min(vertices)
    size, parent = _subtree_sizes(adj, vertices, root)
    if len(size) != n:
        raise InvalidConfiguration("vertex set does not induce a subtree")

    # minimal subtree with at least 2k vertices: descend while a child
    # subtree still has 2k or more
    w = root
    while True:
        nxt = None
        for c in sorted(adj[w]):
            if c in vertices and parent.get(c) == w and size[c] >= 2 * k:
                nxt = c
                break
        if nxt is None:
            break
        w = nxt

    def collect(top: int) -> Set[int]:
        out = {top}
        stack = [top]
        while stack:
            v = stack.pop()
            for c in adj[v]:
                if c in vertices and parent.get(c) == v and c not in out:
                    out.add(c)
                    stack.append(c)
        return out

    kids = [c for c in sorted(adj[w]) if c in vertices and parent.get(c) == w]
    big = next((c for c in kids if size[c] >= k), None)
    if big is not None:
        # a whole child subtree fits the window; no overlap needed
        va = collect(big)
        vb = vertices - va
        return va, vb
    # otherwise take w plus child subtrees in ascending id until the
    # window opens; w stays shared with the rest
    va: Set[int] = {w}
    for c in kids:
        if len(va) >= k:
            break
        va |= collect(c)
    vb = (vertices - va) | {w}
    return va, vb


def small_subtree_split(tree: Tree, k: int) -> Tuple[List[int], List[int]]:
    """Split into induced subtrees (V_A, V_B) with k <= |V_A| < 2k.

    V_A and V_B cover the tree and overlap in at most one vertex.
    """
    if k < 1:
        raise InvalidParameter("k must be positive")
    if tree.n < 2 * k:
        raise TreeTooSmall(f"need at least {2 * k} vertices, have {tree.n}")
    va, vb = _split_set(tree.adj, set(range(tree.n)), k)
    return sorted(va), sorted(vb)


def subtree_cover(tree: Tree, k: int) -> List[List[int]]:
    """Cover by induced subtrees of size < 2k, at most ceil(n/(k-1)) + 1."""
    if k < 2:
        raise InvalidParameter("k must be at least 2")
    parts: List[List[int]] = []
    rest: Set[int] = set(range(tree.n))
    while len(rest) >= 2 * k:
        va, vb = _split_set(tree.adj, rest, k)
        parts.append(sorted(va))
        rest = vb
    parts.append(sorted(rest))
    return parts


def find_bare_paths(tree: Tree, ell: int) -> List[List[int]]:
    """Vertex-disjoint bare paths with ``ell`` edges each.

    Branch vertices (degree 3 or more) are set aside; what remains of the
    tree is a disjoint union of paths, and each is chopped into consecutive
    blocks of ell+1 vertices.  Inner block vertices therefore have tree
    degree exactly 2.  With at most k leaves this yields at least
    (n - (2k-2)(ell+1))/(ell+1) blocks.
    """
    if ell < 1:
        raise InvalidParameter("path length must be at least 1")
    keep = [v for v in range(tree.n) if len(tree.adj[v]) <= 2]
    keep_set = set(keep)
    seen: Set[int] = set()
    paths: List[List[int]] = []
    for v in keep:
        if v in seen:
            continue
        nbrs = [w for w in tree.adj[v] if w in keep_set]
        if len(nbrs) > 1:
            continue  # interior of a component; start from an end
        # walk the component path from this end
        comp = [v]
        seen.add(v)
        cur, prev = v, -1
        while True:
            nxt = [w for w in tree.adj[cur] if w in keep_set and w != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            comp.append(cur)
            seen.add(cur)
        for i in range(0, len(comp) - ell, ell + 1):
            paths.append(comp[i:i + ell + 1])
    return paths


def is_bare_path(tree: Tree, path: Sequence[int]) -> bool:
    """Structural check: consecutive edges, inner degrees exactly 2."""
    if len(path) < 2 or len(set(path)) != len(path):
        return False
    for a, b in zip(path, path[1:]):
        if b not in tree.adj[a]:
            return False
    return all(len(tree.adj[v]) == 2 for v in path[1:-1])


@dataclass
class BarePathsCase:
    """Enough vertex-disjoint bare paths of the profile length."""

    paths: List[List[int]]


@dataclass
class LeavesCase:
    """A small induced subtree crowded with leaf neighbors."""

    tprime: List[int]
    n1: List[int]


TreeClassification = Union[BarePathsCase, LeavesCase]


def _backbone_window(tree: Tree, start: int, backbone: Set[int],
                     targets: Set[int], cap: int) -> List[int]:
    """Connected window of at most ``cap`` backbone vertices around start.

    Grows breadth-first; when the cap truncates a layer, leaf neighbors are
    kept ahead of other vertices.
    """
    window = [start]
    chosen = {start}
    frontier = [start]
    while frontier and len(window) < cap:
        layer: List[int] = []
        for v in frontier:
            for w in tree.adj[v]:
                if w in backbone and w not in chosen and w not in layer:
                    layer.append(w)
        layer.sort(key=lambda w: (w not in targets, w))
        take = layer[:cap - len(window)]
        window.extend(take)
        chosen.update(take)
        frontier = take
    return sorted(window)


def classify_tree(tree: Tree, params) -> TreeClassification:
    """Bare-paths case if the packing reaches gamma*n, else leaves case.

    The leaves case needs a subtree of at most delta*n vertices holding
    floor(C1 * log n) leaf neighbors.  Candidates come from the subtree
    cover with k = 0.4*delta*n and from connected windows of non-leaf
    vertices; the richest candidate wins.  If neither branch closes, the
    failure report covers both.
    """
    n = tree.n
    if tree.max_degree() > params.d:
        raise DegreeBoundViolated(
            f"max degree {tree.max_degree()} exceeds the profile bound {params.d}")
    paths = find_bare_paths(tree, params.ell)
    need_paths = math.ceil(params.gamma * n - 1e-12)
    if len(paths) >= need_paths:
        return BarePathsCase(paths)

    need_n1 = int(params.C1 * math.log(n))
    leaf_floor = params.C * params.gamma * n
    leaves = tree.leaves()
    if len(leaves) < leaf_floor:
        raise InvalidParameter(
            f"dichotomy failed: {len(paths)} bare paths (< {need_paths}) and "
            f"{len(leaves)} leaves (< {leaf_floor:.0f})")
    targets = set(tree.leaf_neighbors())
    cap = int(params.delta * n)
    candidates: List[List[int]] = []
    k = max(2, int(0.4 * params.delta * n))
    if tree.n >= 2 * k and 2 * k - 1 <= cap:
        candidates.extend(subtree_cover(tree, k))
    backbone = {v for v in range(n) if len(tree.adj[v]) > 1}
    if len(backbone) == 1 or not backbone:
        backbone = set(range(n))  # a star or an edge: keep the whole thing
    for v in sorted(backbone):
        candidates.append(_backbone_window(tree, v, backbone, targets, cap))
    best = max(candidates, key=lambda part: (len(targets.intersection(part)),
                                             -len(part)))
    hits = sorted(targets.intersection(best))
    if len(hits) < need_n1:
        raise InvalidParameter(
            f"dichotomy failed: {len(paths)} bare paths (< {need_paths}) and "
            f"best small subtree holds {len(hits)} leaf neighbors (< {need_n1})")
    return LeavesCase(tprime=best, n1=hits[:need_n1])
