"""Tree embedding engines for dense expanding host graphs.

Four entry points cooperate to place a bounded-degree tree inside a host:

* :func:`check_expansion` measures whether a region of the host expands
  well enough for extension to be guaranteed ((P1)/(P2) reports);
* :func:`haxell_extend` grows a partial embedding leaf by leaf, with
  alternating-path repair and bounded backtracking when greedy choices
  collide;
* :func:`star_matching` partitions the leftover vertices into stars around
  the embedded leaf parents (a capacitated bipartite b-matching);
* :func:`greedy_embed_rest` and :func:`random_embed_subtree` embed small
  subtrees, deterministically or by uniform random extension with direct
  verification of the pair-degree conditions the later stages rely on.

All greedy scans break ties by lowest vertex id, so every deterministic
entry point is reproducible run to run.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import (
    EmbeddingInvalid,
    ExtensionFailed,
    GreedyStuck,
    InvalidParameter,
    NoStarMatching,
    PreconditionUnmet,
    RandomizedEmbeddingFailed,
)
from .graphs import Graph
from .trees import Tree


def _bits(mask: int) -> List[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


class Embedding:
    """Partial injective map from tree vertices to host-graph vertices.

    ``map`` is the underlying dict and ``image`` the cached set of used
    host vertices; mutate only through :meth:`place` and :meth:`unplace`
    so the two stay consistent.  ``meta`` carries per-run statistics from
    whichever engine produced the embedding.
    """

    __slots__ = ("map", "image", "meta")

    def __init__(self, mapping: Optional[Dict[int, int]] = None):
        self.map: Dict[int, int] = {}
        self.image: Set[int] = set()
        self.meta: Dict[str, object] = {}
        if mapping:
            for tv in sorted(mapping):
                self.place(tv, mapping[tv])

    def place(self, tv: int, gv: int) -> None:
        if tv in self.map:
            raise EmbeddingInvalid(f"tree vertex {tv} is already embedded")
        if gv in self.image:
            raise EmbeddingInvalid(f"graph vertex {gv} is already an image")
        self.map[tv] = gv
        self.image.add(gv)

    def unplace(self, tv: int) -> int:
        gv = self.map.pop(tv)
        self.image.discard(gv)
        return gv

    def __contains__(self, tv: int) -> bool:
        return tv in self.map

    def __len__(self) -> int:
        return len(self.map)

    def __getitem__(self, tv: int) -> int:
        return self.map[tv]

    def get(self, tv: int, default: Optional[int] = None) -> Optional[int]:
        return self.map.get(tv, default)

    def copy(self) -> "Embedding":
        other = Embedding()
        other.map = dict(self.map)
        other.image = set(self.image)
        other.meta = dict(self.meta)
        return other

    def to_json(self, n: Optional[int] = None) -> str:
        """Serialize as a JSON array indexed by tree vertex (null = unmapped)."""
        size = n if n is not None else (max(self.map) + 1 if self.map else 0)
        arr: List[Optional[int]] = [None] * size
        for tv, gv in self.map.items():
            if tv >= size:
                raise InvalidParameter(f"tree vertex {tv} does not fit in array of size {size}")
            arr[tv] = gv
        return json.dumps(arr)

    @classmethod
    def from_json(cls, text: str) -> "Embedding":
        arr = json.loads(text)
        emb = cls()
        for tv, gv in enumerate(arr):
            if gv is not None:
                emb.place(tv, gv)
        return emb

    def __repr__(self) -> str:
        return f"Embedding({len(self.map)} vertices)"


def validate_embedding(G: Graph, tree: Tree, emb: Embedding,
                       region: Optional[Iterable[int]] = None,
                       require_total: bool = False) -> bool:
    """Structural validator: injectivity, edge preservation, containment.

    Raises :class:`EmbeddingInvalid` on the first violation, returns True
    otherwise.  Checks the raw ``map`` from scratch so that direct dict
    mutation is caught as well.
    """
    seen: Dict[int, int] = {}
    for tv, gv in emb.map.items():
        if not (0 <= tv < tree.n):
            raise EmbeddingInvalid(f"tree vertex {tv} out of range")
        if not (0 <= gv < G.n):
            raise EmbeddingInvalid(f"graph vertex {gv} out of range")
        if gv in seen:
            raise EmbeddingInvalid(
                f"not injective: tree vertices {seen[gv]} and {tv} share image {gv}")
        seen[gv] = tv
    if emb.image != set(seen):
        raise EmbeddingInvalid("cached image set disagrees with the map")
    if region is not None:
        allowed = set(region)
        for tv, gv in emb.map.items():
            if gv not in allowed:
                raise EmbeddingInvalid(f"image {gv} of tree vertex {tv} leaves the region")
    if require_total and len(emb.map) != tree.n:
        missing = [v for v in range(tree.n) if v not in emb.map]
        raise EmbeddingInvalid(f"not total: {len(missing)} tree vertices unmapped, first {missing[:5]}")
    for u, v in tree.edges():
        if u in emb.map and v in emb.map and not G.has_edge(emb.map[u], emb.map[v]):
            raise EmbeddingInvalid(
                f"tree edge ({u},{v}) maps to non-edge ({emb.map[u]},{emb.map[v]})")
    return True


# -- expansion checking ------------------------------------------------------


@dataclass(frozen=True)
class ExpansionSpec:
    """Parameters of the extension lemma: degree bound d, size threshold k,
    the allowed image region, and host vertices already used by the seed
    embedding."""

    d: int
    k: int
    region: frozenset
    reserved: frozenset = frozenset()

    def __init__(self, d: int, k: int, region: Iterable[int],
                 reserved: Iterable[int] = ()):  # frozen dataclass, set via object.__setattr__
        if k < 1:
            raise InvalidParameter(f"k must be at least 1, got {k}")
        if d < 1:
            raise InvalidParameter(f"d must be at least 1, got {d}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "region", frozenset(region))
        object.__setattr__(self, "reserved", frozenset(reserved))


@dataclass
class CheckResult:
    passed: bool
    witness: Optional[Tuple[int, ...]]
    detail: str


@dataclass
class ExpansionReport:
    mode: str
    p1: CheckResult
    p2: CheckResult

    @property
    def ok(self) -> bool:
        return self.p1.passed and self.p2.passed


# Full subset enumeration is permitted on small inputs only; above this
# many candidate sets the sufficient checks run instead.
_EXHAUSTIVE_SUBSET_BUDGET = 300_000


def _subset_count(r: int, top: int) -> int:
    total = 0
    for s in range(1, min(top, r) + 1):
        total += math.comb(r, s)
        if total > 10 * _EXHAUSTIVE_SUBSET_BUDGET:
            break
    return total


def check_expansion(G: Graph, spec: ExpansionSpec, target_size: int,
                    mode: str = "auto", samples: int = 200,
                    rng: Optional[random.Random] = None) -> ExpansionReport:
    """Report whether the region satisfies the extension properties.

    (P1): every X inside the region with 1 <= |X| <= 2k has
    |N(X) cap region minus reserved| >= d|X| + 1.
    (P2): every X with k < |X| <= 2k has |N(X) cap region| >= d|X| + target_size.

    Exhaustive mode enumerates the sets; it is gated to k <= 3 or
    |region| <= 24 and to an enumeration budget.  Otherwise a sufficient
    check runs: (P1) from the minimum degree into the region (any X loses
    at most |X| of one member's neighbors), (P2) from sampled domination
    (few region vertices outside N(X)) plus the implied counting bound.
    The report never raises on failure; callers decide what a failed or
    advisory check means.
    """
    if target_size < 0:
        raise InvalidParameter("target_size must be non-negative")
    for v in spec.region | spec.reserved:
        if not (0 <= v < G.n):
            raise InvalidParameter(f"vertex {v} outside the host graph")
    region = sorted(spec.region)
    r = len(region)
    if r == 0:
        raise InvalidParameter("empty region")
    if mode not in ("auto", "exhaustive", "sufficient"):
        raise InvalidParameter(f"unknown mode {mode!r}")

    gate = spec.k <= 3 or r <= 24
    affordable = _subset_count(r, 2 * spec.k) <= _EXHAUSTIVE_SUBSET_BUDGET
    if mode == "exhaustive" and not gate:
        raise InvalidParameter(
            "exhaustive mode requires k <= 3 or a region of at most 24 vertices")
    use_exhaustive = (mode == "exhaustive") or (mode == "auto" and gate and affordable)

    if use_exhaustive:
        return _check_exhaustive(G, spec, target_size, region)
    return _check_sufficient(G, spec, target_size, region, samples,
                             rng if rng is not None else random.Random(0))


def _check_exhaustive(G: Graph, spec: ExpansionSpec, target: int,
                      region: List[int]) -> ExpansionReport:
    masks = G.masks()
    region_mask = G.mask_of(region)
    open_mask = region_mask & ~G.mask_of(spec.reserved)
    d, k = spec.d, spec.k
    p1 = CheckResult(True, None, "all sets verified")
    p2 = CheckResult(True, None, "all sets verified")
    top = min(2 * k, len(region))
    for size in range(1, top + 1):
        for X in combinations(region, size):
            nb = 0
            for v in X:
                nb |= masks[v]
            if p1.passed and (nb & open_mask).bit_count() < d * size + 1:
                p1 = CheckResult(False, tuple(X),
                                 f"|N(X) cap region minus reserved| = {(nb & open_mask).bit_count()}"
                                 f" < {d * size + 1}")
            if p2.passed and size > k and (nb & region_mask).bit_count() < d * size + target:
                p2 = CheckResult(False, tuple(X),
                                 f"|N(X) cap region| = {(nb & region_mask).bit_count()}"
                                 f" < {d * size + target}")
            if not p1.passed and not p2.passed:
                return ExpansionReport("exhaustive", p1, p2)
    return ExpansionReport("exhaustive", p1, p2)


def _check_sufficient(G: Graph, spec: ExpansionSpec, target: int,
                      region: List[int], samples: int,
                      rng: random.Random) -> ExpansionReport:
    masks = G.masks()
    region_mask = G.mask_of(region)
    open_mask = region_mask & ~G.mask_of(spec.reserved)
    d, k = spec.d, spec.k
    r = len(region)

    # (P1): |N(X) setminus reserved| >= |N(v) cap open| - |X| for any v in X,
    # so min-degree headroom of (d+1)*2k + 1 covers every admissible X.
    min_nb, min_v = min(((masks[v] & open_mask).bit_count(), v) for v in region)
    bound1 = (d + 1) * 2 * k + 1
    if min_nb >= bound1:
        p1 = CheckResult(True, None,
                         f"min degree into region minus reserved is {min_nb} >= {bound1}")
    else:
        p1 = CheckResult(False, (min_v,),
                         f"min degree into region minus reserved is {min_nb} < {bound1}")

    # (P2): sampled domination.  If every sampled X of size k+1 leaves fewer
    # than k region vertices undominated, the counting bound
    # |region| - |X| - (k - 1) >= d|X| + target finishes the argument.
    if r <= k:
        p2 = CheckResult(True, None, "no sets in range (k, 2k]")
        return ExpansionReport("sufficient", p1, p2)
    worst_nondom = -1
    worst_set: Optional[Tuple[int, ...]] = None
    direct_fail: Optional[Tuple[int, ...]] = None
    size = min(k + 1, r)
    for _ in range(samples):
        X = tuple(sorted(rng.sample(region, size)))
        nb = 0
        for v in X:
            nb |= masks[v]
        nondom = (region_mask & ~nb & ~G.mask_of(X)).bit_count()
        if nondom > worst_nondom:
            worst_nondom, worst_set = nondom, X
        if (nb & region_mask).bit_count() < d * size + target:
            direct_fail = X
            break
    bound2 = 2 * d * k + target
    implied = r - 3 * k + 1
    if direct_fail is not None:
        p2 = CheckResult(False, direct_fail, "sampled set fails the bound directly")
    elif worst_nondom >= k:
        p2 = CheckResult(False, worst_set,
                         f"sampled set leaves {worst_nondom} >= k = {k} region vertices undominated")
    elif implied < bound2:
        p2 = CheckResult(False, None,
                         f"counting bound |region| - 3k + 1 = {implied} < {bound2}")
    else:
        p2 = CheckResult(True, None,
                         f"{samples} samples dominate (worst misses {worst_nondom}),"
                         f" counting bound {implied} >= {bound2}")
    return ExpansionReport("sufficient", p1, p2)


# -- leaf-by-leaf extension --------------------------------------------------


def _attach_order(tree: Tree, seeds: Set[int]) -> List[Tuple[int, int]]:
    """BFS order of the unembedded vertices, each paired with the neighbor
    through which it attaches (already placed when its turn comes)."""
    order: List[Tuple[int, int]] = []
    seen = set(seeds)
    queue = sorted(seeds)
    head = 0
    while head < len(queue):
        v = queue[head]
        head += 1
        for w in tree.adj[v]:
            if w not in seen:
                seen.add(w)
                order.append((w, v))
                queue.append(w)
    return order


def haxell_extend(G: Graph, tree: Tree, s_vertices: Iterable[int],
                  g: Embedding, spec: ExpansionSpec,
                  repair_depth: int = 4,
                  backtrack_budget: int = 2000) -> Embedding:
    """Extend an embedding of the subtree S to all of the tree.

    Vertices are attached leaf by leaf in BFS order from S (from the tree
    root when S is empty), each placed on the lowest free region neighbor
    of its parent's image.  A stuck vertex first triggers an
    alternating-path repair (relocate already-placed vertices to free a
    suitable image, up to ``repair_depth`` chained moves), then bounded
    backtracking over earlier greedy choices.  Raises
    :class:`ExtensionFailed` with the unplaced vertices as witness when
    both budgets run out; under exhaustively verified (P1)/(P2) that
    signals a bug, not bad luck.
    """
    seeds = set(s_vertices)
    for v in seeds:
        if not (0 <= v < tree.n):
            raise InvalidParameter(f"subtree vertex {v} outside the tree")
    if set(g.map) != seeds:
        raise InvalidParameter("embedding domain must equal the seed subtree")
    region_mask = G.mask_of(spec.region)
    blocked = G.mask_of(spec.reserved) & ~G.mask_of(g.image)
    for tv, gv in g.map.items():
        if gv not in spec.region:
            raise InvalidParameter(f"seed image {gv} of {tv} lies outside the region")
    if seeds:
        from .trees import induces_subtree

        if not induces_subtree(tree, seeds):
            raise InvalidParameter("seed vertices do not induce a subtree")

    masks = G.masks()
    emb = g.copy()
    used = G.mask_of(emb.image)
    order = _attach_order(tree, seeds) if seeds else (
        [(tree.root, -1)] + _attach_order(tree, {tree.root}))
    if len(order) + len(seeds) != tree.n:
        raise InvalidParameter("tree is not connected through the seed subtree")

    stats = {"placements": 0, "repairs": 0, "backtracks": 0,
             "repair_depth": repair_depth, "backtrack_budget": backtrack_budget}

    def cand_mask(parent_img: int) -> int:
        return masks[parent_img] & region_mask & ~used & ~blocked

    def placed_neighbor_images(tv: int) -> List[int]:
        return [emb[w] for w in tree.adj[tv] if w in emb]

    def relocation_mask(tv: int) -> int:
        m = region_mask & ~used & ~blocked
        for img in placed_neighbor_images(tv):
            m &= masks[img]
        return m

    owner: Dict[int, int] = {gv: tv for tv, gv in emb.map.items()}

    def try_repair(pool: int, depth: int, frozen: Set[int]) -> Optional[int]:
        """Free one vertex of ``pool`` by relocating its occupant; returns the
        freed host vertex or None."""
        nonlocal used
        for x in _bits(pool & used):
            u = owner.get(x)
            if u is None or u in seeds or u in frozen:
                continue
            move_to = relocation_mask(u)
            y: Optional[int] = None
            if move_to:
                y = _lowest_bit(move_to)
            elif depth > 1:
                full = region_mask & ~blocked
                for img in placed_neighbor_images(u):
                    full &= masks[img]
                y = try_repair(full & ~(1 << x), depth - 1, frozen | {u})
            if y is not None:
                emb.unplace(u)
                used &= ~(1 << x)
                emb.place(u, y)
                used |= 1 << y
                del owner[x]
                owner[y] = u
                return x
        return None

    # Greedy walk with per-position candidate cursors for backtracking.
    cursors: List[int] = []  # candidates not yet tried at each position
    pos = 0
    backtracks = 0
    while pos < len(order):
        tv, parent = order[pos]
        if pos == len(cursors):
            if parent == -1:
                cands = region_mask & ~used & ~blocked
            else:
                cands = cand_mask(emb[parent])
            if not cands and repair_depth > 0 and parent != -1:
                pool = masks[emb[parent]] & region_mask & ~blocked
                freed = try_repair(pool, repair_depth, {tv})
                if freed is not None:
                    stats["repairs"] += 1
                    cands = 1 << freed
            cursors.append(cands)
        cands = cursors[pos] & ~used  # repairs may have shuffled availability
        if cands:
            gv = _lowest_bit(cands)
            cursors[pos] &= ~(1 << gv)
            emb.place(tv, gv)
            used |= 1 << gv
            owner[gv] = tv
            stats["placements"] += 1
            pos += 1
            continue
        # exhausted at this position: back up
        cursors.pop()
        if pos == 0 or backtracks >= backtrack_budget:
            witness = sorted(v for v, _ in order[pos:])
            raise ExtensionFailed(
                f"could not place tree vertex {tv} after {backtracks} backtracks",
                witness=witness)
        backtracks += 1
        stats["backtracks"] = backtracks
        pos -= 1
        prev_tv, _ = order[pos]
        prev_gv = emb.unplace(prev_tv)
        used &= ~(1 << prev_gv)
        del owner[prev_gv]

    emb.meta.update(stats)
    return emb


# -- star matching -----------------------------------------------------------


class _Dinic:
    """Max flow on a small integer-capacity network (augmenting BFS levels +
    DFS blocking flow)."""

    def __init__(self, n: int):
        self.n = n
        self.adj: List[List[List[int]]] = [[] for _ in range(n)]  # [to, cap, rev]

    def add(self, u: int, v: int, cap: int) -> None:
        self.adj[u].append([v, cap, len(self.adj[v])])
        self.adj[v].append([u, 0, len(self.adj[u]) - 1])

    def max_flow(self, s: int, t: int) -> int:
        flow = 0
        while True:
            level = [-1] * self.n
            level[s] = 0
            queue = [s]
            head = 0
            while head < len(queue):
                u = queue[head]
                head += 1
                for e in self.adj[u]:
                    if e[1] > 0 and level[e[0]] < 0:
                        level[e[0]] = level[u] + 1
                        queue.append(e[0])
            if level[t] < 0:
                return flow
            it = [0] * self.n

            def dfs(u: int, pushed: int) -> int:
                if u == t:
                    return pushed
                while it[u] < len(self.adj[u]):
                    e = self.adj[u][it[u]]
                    v = e[0]
                    if e[1] > 0 and level[v] == level[u] + 1:
                        got = dfs(v, min(pushed, e[1]))
                        if got:
                            e[1] -= got
                            self.adj[v][e[2]][1] += got
                            return got
                    it[u] += 1
                return 0

            while True:
                pushed = dfs(s, 1 << 60)
                if not pushed:
                    break
                flow += pushed


def star_matching(G: Graph, U: Iterable[int], W: Iterable[int],
                  d: int, m: int, k_map: Dict[int, int]) -> Dict[int, List[int]]:
    """Partition W into stars around U: each u receives k_map[u] of its
    neighbors, every w used exactly once.

    ``d`` and ``m`` are the parameters of the guaranteeing conditions
    (1 <= k(u) <= d; condition sets of size up to m); the solver itself is a
    capacitated bipartite b-matching via max flow.  Raises
    :class:`NoStarMatching` with a Hall-type violator when infeasible.
    """
    U = sorted(set(U))
    W = sorted(set(W))
    if set(U) & set(W):
        raise InvalidParameter("U and W must be disjoint")
    if set(k_map) != set(U):
        raise InvalidParameter("k_map must cover exactly U")
    for u, ku in k_map.items():
        if not (1 <= ku <= d):
            raise InvalidParameter(f"k({u}) = {ku} outside 1..d = {d}")
    if sum(k_map.values()) != len(W):
        raise InvalidParameter(
            f"star sizes sum to {sum(k_map.values())} but |W| = {len(W)}")
    if m < 1:
        raise InvalidParameter("m must be at least 1")

    w_index = {w: i for i, w in enumerate(W)}
    net = _Dinic(2 + len(U) + len(W))
    source, sink = 0, 1 + len(U) + len(W)
    for i, u in enumerate(U):
        net.add(source, 1 + i, k_map[u])
        for w in sorted(G.neighbors(u)):
            if w in w_index:
                net.add(1 + i, 1 + len(U) + w_index[w], 1)
    for j in range(len(W)):
        net.add(1 + len(U) + j, sink, 1)

    flow = net.max_flow(source, sink)
    assignment: Dict[int, List[int]] = {u: [] for u in U}
    if flow == len(W):
        for i, u in enumerate(U):
            for e in net.adj[1 + i]:
                to = e[0]
                if 1 + len(U) <= to < 1 + len(U) + len(W) and e[1] == 0:
                    assignment[u].append(W[to - 1 - len(U)])
            assignment[u].sort()
        return assignment

    # Hall-type witness: W vertices reachable from an uncovered w by
    # alternating (w -> G-neighbor u, u -> w' already assigned to u) moves
    # form a set Y whose joint neighborhood capacity is short of |Y|.
    matched_to: Dict[int, int] = {}
    for i, u in enumerate(U):
        for e in net.adj[1 + i]:
            to = e[0]
            if 1 + len(U) <= to < 1 + len(U) + len(W) and e[1] == 0:
                matched_to[W[to - 1 - len(U)]] = u
    uncovered = [w for w in W if w not in matched_to]
    u_set = set(U)
    reach_w: Set[int] = set(uncovered)
    reach_u: Set[int] = set()
    frontier = list(uncovered)
    while frontier:
        w = frontier.pop()
        for u in G.neighbors(w):
            if u in u_set and u not in reach_u:
                reach_u.add(u)
                for w2 in W:
                    if matched_to.get(w2) == u and w2 not in reach_w:
                        reach_w.add(w2)
                        frontier.append(w2)
    raise NoStarMatching(
        f"only {flow} of {len(W)} leftover vertices can be starred;"
        f" {len(reach_w)} vertices see total star capacity"
        f" {sum(k_map[u] for u in reach_u)}",
        witness=sorted(reach_w))


# -- greedy and randomized subtree embedding ---------------------------------


def greedy_embed_rest(G: Graph, tree: Tree, g: Embedding,
                      region: Iterable[int]) -> Embedding:
    """Extend a partial embedding over the rest of the tree by always taking
    the lowest free region neighbor of the parent's image.  No repair, no
    backtracking; raises :class:`GreedyStuck` naming the stuck vertex."""
    if not g.map:
        raise InvalidParameter("greedy extension needs a non-empty start")
    masks = G.masks()
    region_mask = G.mask_of(region)
    emb = g.copy()
    used = G.mask_of(emb.image)
    for tv, parent in _attach_order(tree, set(emb.map)):
        cands = masks[emb[parent]] & region_mask & ~used
        if not cands:
            raise GreedyStuck(
                f"no free region neighbor for tree vertex {tv}"
                f" (parent image {emb[parent]})", witness=[tv])
        gv = _lowest_bit(cands)
        emb.place(tv, gv)
        used |= 1 << gv
    if len(emb.map) != tree.n:
        raise InvalidParameter("tree is not connected through the embedded prefix")
    return emb


def random_embed_subtree(G: Graph, t1: Tree, v1: Iterable[int],
                         n1: Iterable[int], params, seed,
                         budget: int = 50,
                         d_floor: Optional[float] = None,
                         bad_floor: Optional[float] = None) -> Embedding:
    """Embed a small subtree into V1 uniformly at random and verify the
    degree conditions the leaf stage needs.

    Vertices are embedded in BFS order, each image drawn uniformly from
    the free V1-neighbors of the parent's image.  After each attempt two
    conditions are checked directly:

    * (B) for every host vertex w, at most one parent of an n1 vertex got
      an image whose common neighborhood with w inside V1 is below
      ``bad_floor`` (default alpha * n);
    * (D) every host vertex w outside the image has at least ``d_floor``
      (default 2 * C0 * log n) neighbors among the images of n1.

    Fails are resampled with a fresh derived seed up to ``budget``
    attempts; exhaustion raises :class:`RandomizedEmbeddingFailed` naming
    the failed condition.  The precondition of this stage is that no
    subtree vertex neighbors 0.5 * C1 * log n or more of n1.
    """
    v1_sorted = sorted(set(v1))
    n1_set = set(n1)
    for v in n1_set:
        if not (0 <= v < t1.n):
            raise InvalidParameter(f"n1 vertex {v} outside the subtree")
    if t1.n > len(v1_sorted):
        raise InvalidParameter("subtree larger than the region")
    n = G.n
    if d_floor is None:
        d_floor = 2.0 * params.C0 * math.log(n)
    if bad_floor is None:
        bad_floor = params.alpha * n

    spread_cap = 0.5 * params.C1 * math.log(n)
    for x in range(t1.n):
        hits = sum(1 for w in t1.adj[x] if w in n1_set)
        if hits >= spread_cap:
            raise PreconditionUnmet(
                f"subtree vertex {x} neighbors {hits} of n1,"
                f" at or above the spread cap {spread_cap:.2f}")

    masks = G.masks()
    v1_mask = G.mask_of(v1_sorted)
    order = [(t1.root, -1)] + _attach_order(t1, {t1.root})
    parents_of_n1 = sorted({t1.parent[v] for v in n1_set
                            if t1.parent[v] is not None})

    b_failures = 0
    d_failures = 0
    stuck_failures = 0
    last_reason = ""
    last_witness: Optional[int] = None
    for attempt in range(budget):
        rng = random.Random(f"{seed}:{attempt}")
        emb = Embedding()
        used = 0
        ok = True
        for tv, parent in order:
            if parent == -1:
                gv = v1_sorted[rng.randrange(len(v1_sorted))]
            else:
                cands = _bits(masks[emb[parent]] & v1_mask & ~used)
                if not cands:
                    ok = False
                    stuck_failures += 1
                    last_reason = "no-candidate"
                    last_witness = tv
                    break
                gv = cands[rng.randrange(len(cands))]
            emb.place(tv, gv)
            used |= 1 << gv
        if not ok:
            continue

        bad_w = None
        for w in range(n):
            bad = 0
            for p in parents_of_n1:
                if (masks[emb[p]] & masks[w] & v1_mask).bit_count() < bad_floor:
                    bad += 1
                    if bad >= 2:
                        bad_w = w
                        break
            if bad_w is not None:
                break
        if bad_w is not None:
            b_failures += 1
            last_reason = "B"
            last_witness = bad_w
            continue

        gn1_mask = G.mask_of(emb[v] for v in n1_set)
        short_w = None
        for w in range(n):
            if used >> w & 1:
                continue
            if (masks[w] & gn1_mask).bit_count() < d_floor:
                short_w = w
                break
        if short_w is not None:
            d_failures += 1
            last_reason = "D"
            last_witness = short_w
            continue

        emb.meta.update({"attempts": attempt + 1, "seed": f"{seed}:{attempt}",
                         "b_failures": b_failures, "d_failures": d_failures,
                         "d_floor": d_floor, "bad_floor": bad_floor})
        return emb

    raise RandomizedEmbeddingFailed(
        f"no attempt of {budget} passed: {b_failures} failed (B),"
        f" {d_failures} failed (D), {stuck_failures} ran out of candidates;"
        f" last failure {last_reason} at host vertex {last_witness}",
        failed_check=last_reason)
