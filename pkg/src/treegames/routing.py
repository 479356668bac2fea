"""Routing long bare paths through a factor of 5-cliques.

The host graph carries a family of vertex-disjoint 5-cliques split into
good and bad ones.  An auxiliary graph on the good cliques (edges are
size-3 matchings) yields a Hamilton cycle, the cycle is cut into short
clique paths, and every bare path of the tree is mapped onto three
clique connectors joined by a reserve vertex and a 5-vertex detour
inside its own bad clique.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .embedding import Embedding, validate_embedding
from .errors import (
    AccountingError,
    BadSplit,
    ConnectorFailed,
    DiracUnmet,
    HallViolation,
    InvalidConfiguration,
    InvalidParameter,
    RoutingFailed,
)
from .graphs import Graph
from .trees import Tree


def _low_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


class CliqueFactor:
    """Vertex-disjoint 5-cliques in a host graph with a good/bad split.

    ``cliques`` holds sorted 5-tuples of host vertices; ``bad`` indexes
    the cliques reserved for path detours, one per routed bare path.
    Constructor checks sizes and disjointness; completeness inside a
    concrete host is checked by :meth:`validate`.
    """

    __slots__ = ("cliques", "bad")

    def __init__(self, cliques: Iterable[Sequence[int]], bad: Iterable[int] = ()):
        out: List[Tuple[int, ...]] = []
        seen: Set[int] = set()
        for i, c in enumerate(cliques):
            t = tuple(sorted(int(v) for v in c))
            if len(t) != 5 or len(set(t)) != 5:
                raise InvalidConfiguration(
                    f"clique {i} must have 5 distinct vertices, got {t}")
            if seen.intersection(t):
                raise InvalidConfiguration(f"clique {i} overlaps an earlier one")
            seen.update(t)
            out.append(t)
        self.cliques: Tuple[Tuple[int, ...], ...] = tuple(out)
        idx = frozenset(int(b) for b in bad)
        for b in idx:
            if not 0 <= b < len(self.cliques):
                raise InvalidConfiguration(f"bad clique index {b} out of range")
        self.bad: frozenset = idx

    @property
    def good(self) -> List[int]:
        return [i for i in range(len(self.cliques)) if i not in self.bad]

    def vertex_set(self) -> Set[int]:
        vs: Set[int] = set()
        for c in self.cliques:
            vs.update(c)
        return vs

    def validate(self, G: Graph) -> bool:
        """Check every clique lies inside ``G`` and induces a complete graph."""
        for i, c in enumerate(self.cliques):
            for v in c:
                if not 0 <= v < G.n:
                    raise InvalidConfiguration(
                        f"clique {i} vertex {v} outside host range")
            for a in range(5):
                for b in range(a + 1, 5):
                    if not G.has_edge(c[a], c[b]):
                        raise InvalidConfiguration(
                            f"clique {i} misses host edge {c[a]}-{c[b]}")
        return True

    def to_dict(self) -> dict:
        return {"cliques": [list(c) for c in self.cliques],
                "bad": sorted(self.bad)}

    @classmethod
    def from_dict(cls, data: dict) -> "CliqueFactor":
        return cls(data["cliques"], data.get("bad", ()))

    def __len__(self) -> int:
        return len(self.cliques)

    def __repr__(self) -> str:
        return f"CliqueFactor({len(self.cliques)} cliques, {len(self.bad)} bad)"


# -- bipartite matching helpers --------------------------------------------

def _kuhn(adj: List[List[int]], n_right: int) -> Tuple[List[int], List[int]]:
    """Maximum bipartite matching by augmenting paths, deterministic in
    the order of the adjacency lists."""
    match_l = [-1] * len(adj)
    match_r = [-1] * n_right

    def grow(u: int, seen: Set[int]) -> bool:
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            if match_r[v] < 0 or grow(match_r[v], seen):
                match_l[u] = v
                match_r[v] = u
                return True
        return False

    for u in range(len(adj)):
        grow(u, set())
    return match_l, match_r


def _hall_witness(adj: List[List[int]], match_r: List[int], u0: int) -> List[int]:
    # alternating reachability from an unmatched left vertex; the visited
    # left set sees exactly one fewer right vertices than its size
    lefts = {u0}
    rights: Set[int] = set()
    stack = [u0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v in rights:
                continue
            rights.add(v)
            w = match_r[v]
            if w >= 0 and w not in lefts:
                lefts.add(w)
                stack.append(w)
    return sorted(lefts)


def _matching_size(G: Graph, left: Sequence[int], right: Sequence[int]) -> int:
    adj = [[j for j, w in enumerate(right) if G.has_edge(v, w)] for v in left]
    match_l, _ = _kuhn(adj, len(right))
    return sum(1 for v in match_l if v >= 0)


# -- operations -------------------------------------------------------------

def build_clique_adjacency(G: Graph, factor: CliqueFactor) -> Graph:
    """Auxiliary graph on the good cliques of ``factor``.

    Vertex ``h`` stands for the ``h``-th good clique (in factor index
    order); an edge means the two cliques are joined by a matching of
    size 3 in ``G``.
    """
    factor.validate(G)
    good = factor.good
    H = Graph(len(good))
    for i in range(len(good)):
        ci = factor.cliques[good[i]]
        for j in range(i + 1, len(good)):
            if _matching_size(G, ci, factor.cliques[good[j]]) >= 3:
                H.add_edge(i, j)
    return H


def dirac_hamilton_cycle(H: Graph) -> List[int]:
    """Hamilton cycle of a graph with minimum degree at least n/2.

    Constructive rotation and extension: grow a path at its endpoints,
    close it through a crossing pair when stuck, and reopen the cycle at
    an outside vertex.  All choices take the lowest available id, so the
    output is a pure function of the input.  The returned cycle starts
    at vertex 0 and its second vertex is the smaller neighbor.
    """
    n = H.n
    if n < 3:
        raise DiracUnmet(f"need at least 3 vertices, got {n}")
    min_deg = min(H.degree(v) for v in range(n))
    if 2 * min_deg < n:
        raise DiracUnmet(f"minimum degree {min_deg} below {n}/2")

    path = [0]
    placed = {0}
    cycle: List[int] = []
    while True:
        ext = sorted(H.neighbors(path[-1]) - placed)
        if ext:
            path.append(ext[0])
            placed.add(ext[0])
            continue
        if H.neighbors(path[0]) - placed:
            path.reverse()
            continue
        cycle = _close_path(H, path)
        if len(cycle) == n:
            break
        # the cycle spans more than half the graph, so every outside
        # vertex has a neighbor on it
        u = min(v for v in range(n) if v not in placed)
        j = next((i for i, c in enumerate(cycle) if H.has_edge(u, c)), None)
        if j is None:
            raise AccountingError("outside vertex misses the cycle")
        path = [u] + cycle[j:] + cycle[:j]
        placed.add(u)

    i0 = cycle.index(0)
    cycle = cycle[i0:] + cycle[:i0]
    if cycle[-1] < cycle[1]:
        cycle = [cycle[0]] + cycle[:0:-1]
    _verify_hamilton(H, cycle)
    return cycle


def _close_path(H: Graph, path: List[int]) -> List[int]:
    # both endpoints have all neighbors on the path; the degree bound
    # forces an index i with path[i] ~ tail and path[i+1] ~ head
    head, tail = path[0], path[-1]
    k = len(path) - 1
    nb_t = H.neighbors(tail)
    nb_h = H.neighbors(head)
    for i in range(k):
        if path[i] in nb_t and path[i + 1] in nb_h:
            return path[:i + 1] + path[k:i:-1]
    raise AccountingError("no crossing pair despite the degree bound")


def _verify_hamilton(H: Graph, cycle: List[int]) -> None:
    ok = (len(cycle) == H.n and len(set(cycle)) == H.n and
          all(H.has_edge(cycle[i], cycle[(i + 1) % H.n])
              for i in range(H.n)))
    if not ok:
        raise AccountingError("hamilton cycle self-check failed")


def split_cycle_into_paths(cycle: Sequence[int], q: int) -> List[List[int]]:
    """Cut a cycle into consecutive paths of exactly ``q`` vertices."""
    if q < 1:
        raise InvalidParameter(f"part size must be positive, got {q}")
    if len(cycle) % q != 0:
        raise BadSplit(
            f"cycle of {len(cycle)} vertices cannot split into parts of {q}")
    return [list(cycle[i:i + q]) for i in range(0, len(cycle), q)]


def match_pairs_to_paths(pairs: Sequence[Tuple[int, int]],
                         clique_paths: Sequence[Sequence[int]],
                         H: Graph) -> List[int]:
    """Assign one clique path to every clique pair.

    A pair (a, b) accepts a path when its endpoints match to a and b in
    ``H``, in either orientation.  Returns the path index chosen for
    each pair; an unmatchable instance raises :class:`HallViolation`
    whose witness lists pair indices that together see fewer paths than
    their number.
    """
    if len(pairs) != len(clique_paths):
        raise InvalidParameter(
            f"{len(pairs)} pairs against {len(clique_paths)} paths")
    for a, b in pairs:
        if not (0 <= a < H.n and 0 <= b < H.n) or a == b:
            raise InvalidParameter(f"bad clique pair ({a}, {b})")
    for Q in clique_paths:
        if not Q or any(not 0 <= v < H.n for v in Q):
            raise InvalidParameter("clique path outside the auxiliary graph")

    adj: List[List[int]] = []
    for a, b in pairs:
        opts = []
        for j, Q in enumerate(clique_paths):
            s, e = Q[0], Q[-1]
            if (H.has_edge(s, a) and H.has_edge(e, b)) or \
                    (H.has_edge(s, b) and H.has_edge(e, a)):
                opts.append(j)
        adj.append(opts)

    match_l, match_r = _kuhn(adj, len(clique_paths))
    for u, v in enumerate(match_l):
        if v < 0:
            witness = _hall_witness(adj, match_r, u)
            raise HallViolation(
                f"{len(witness)} clique pairs see only {len(witness) - 1}"
                " candidate paths", witness=witness)
    return match_l


def assemble_connector(G: Graph, start_clique: Sequence[int],
                       end_clique: Sequence[int],
                       clique_path: Sequence[Sequence[int]],
                       k_start: int, k_end: int) -> List[int]:
    """Build one host path through a sequence of 5-cliques.

    The path starts at ``k_start``, sweeps all five vertices of every
    clique in (start, path..., end) and stops at ``k_end``, crossing
    between consecutive cliques on single edges picked greedily from
    their matchings so that the crossings stay independent and avoid
    both attachment vertices.  Length is always 5 * (number of cliques).
    """
    seq = [tuple(sorted(start_clique))]
    seq += [tuple(sorted(c)) for c in clique_path]
    seq.append(tuple(sorted(end_clique)))
    seen: Set[int] = set()
    for i, c in enumerate(seq):
        if len(c) != 5 or len(set(c)) != 5:
            raise InvalidConfiguration(f"connector clique {i} is not a 5-set")
        if seen.intersection(c):
            raise InvalidConfiguration(f"connector clique {i} overlaps another")
        seen.update(c)
        for a in range(5):
            for b in range(a + 1, 5):
                if not G.has_edge(c[a], c[b]):
                    raise InvalidConfiguration(
                        f"connector clique {i} misses edge {c[a]}-{c[b]}")
    if k_start not in seq[0] or k_end not in seq[-1]:
        raise InvalidParameter("attachment vertices outside end cliques")

    banned = {k_start, k_end}
    used: Set[int] = set()
    links: List[Tuple[int, int]] = []
    for t in range(len(seq) - 1):
        pick: Optional[Tuple[int, int]] = None
        for a in seq[t]:
            if a in banned or a in used:
                continue
            for b in seq[t + 1]:
                if b in banned or b in used:
                    continue
                if G.has_edge(a, b):
                    pick = (a, b)
                    break
            if pick:
                break
        if pick is None:
            # cannot happen when consecutive cliques carry 3-matchings
            raise ConnectorFailed(
                f"no free crossing edge between cliques {t} and {t + 1}")
        links.append(pick)
        used.update(pick)

    path: List[int] = []
    enter = k_start
    for t, (a, b) in enumerate(links):
        mids = sorted(set(seq[t]) - {enter, a})
        path.extend([enter] + mids + [a])
        enter = b
    mids = sorted(set(seq[-1]) - {enter, k_end})
    path.extend([enter] + mids + [k_end])

    if len(path) != 5 * len(seq) or len(set(path)) != len(path):
        raise AccountingError("connector path accounting broke")
    for i in range(len(path) - 1):
        if not G.has_edge(path[i], path[i + 1]):
            raise AccountingError(
                f"connector step {path[i]}-{path[i + 1]} is not a host edge")
    return path


@dataclass
class RoutePlan:
    """Clique bookkeeping for one routed bare path, for debugging."""

    path_index: int
    v: int
    w: int
    r: int
    bad_index: int
    x: int
    y: int
    good_indices: List[int] = field(default_factory=list)
    attachments: List[int] = field(default_factory=list)
    segments: List[List[int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"path": self.path_index, "v": self.v, "w": self.w,
                "r": self.r, "bad": self.bad_index, "x": self.x,
                "y": self.y, "good": list(self.good_indices),
                "attachments": list(self.attachments),
                "segments": [list(s) for s in self.segments]}


def route_all_bare_paths(G: Graph, tree: Tree, factor: CliqueFactor,
                         paths: Sequence[Sequence[int]],
                         reserve: Sequence[int], g: Embedding,
                         q: int) -> Embedding:
    """Extend a partial tree embedding over the inner bare-path vertices.

    ``paths`` lists the bare paths by tree vertices, endpoints already
    embedded by ``g``; ``reserve`` holds one spare host vertex per path.
    Every path is mapped onto the host walk (v, connector, r, connector,
    detour, connector, w), where the three connectors run through good
    cliques and the detour crosses the path's own bad clique.  Returns a
    new total embedding; ``g`` is not modified.  The per-path clique
    bookkeeping is stored under ``meta["routes"]``.
    """
    if q < 0:
        raise InvalidParameter(f"clique path size must be >= 0, got {q}")
    n_paths = len(paths)
    if not (n_paths == len(reserve) == len(factor.bad)):
        raise InvalidConfiguration(
            f"counts differ: {n_paths} paths, {len(reserve)} reserve"
            f" vertices, {len(factor.bad)} bad cliques")
    factor.validate(G)
    validate_embedding(G, tree, g)
    if n_paths == 0:
        return g.copy()

    inner_needed = 3 * (q + 2) * 5 + 6
    fvs = factor.vertex_set()
    res = [int(r) for r in reserve]
    if len(set(res)) != len(res):
        raise InvalidConfiguration("reserve vertices repeat")
    for r in res:
        if not 0 <= r < G.n:
            raise InvalidConfiguration(f"reserve vertex {r} outside host")
        if r in g.image or r in fvs:
            raise InvalidConfiguration(f"reserve vertex {r} is already taken")
    for i, P in enumerate(paths):
        if len(P) - 2 != inner_needed:
            raise InvalidConfiguration(
                f"bare path {i} has {len(P) - 2} inner vertices, routing"
                f" with q={q} fills exactly {inner_needed}")
        for a, b in zip(P, P[1:]):
            if b not in tree.adj[a]:
                raise InvalidConfiguration(
                    f"bare path {i} step {a}-{b} is not a tree edge")
        if P[0] not in g or P[-1] not in g:
            raise InvalidConfiguration(f"bare path {i} endpoints not embedded")
        for tv in P[1:-1]:
            if tv in g:
                raise InvalidConfiguration(
                    f"inner vertex {tv} of path {i} already embedded")

    good = factor.good
    if len(good) - 6 * n_paths != 3 * q * n_paths:
        raise InvalidConfiguration(
            f"{len(good)} good cliques cannot serve {n_paths} paths:"
            f" need {6 * n_paths} anchors plus {3 * q * n_paths} in cycles")

    masks = G.masks()
    cmask = [G.mask_of(c) for c in factor.cliques]
    reserved = sorted(res)
    bads = sorted(factor.bad)

    # greedy clique selection, paths in order, cliques in index order
    plans: List[RoutePlan] = []
    taken: Set[int] = set()
    for p_i, P in enumerate(paths):
        bk = factor.cliques[bads[p_i]]
        plan = RoutePlan(path_index=p_i, v=g[P[0]], w=g[P[-1]],
                         r=reserved[p_i], bad_index=bads[p_i],
                         x=bk[0], y=bk[1])
        anchors = [plan.v, plan.r, plan.r, plan.x, plan.y, plan.w]
        for slot, anchor in enumerate(anchors):
            pick = next((c for c in good
                         if c not in taken and masks[anchor] & cmask[c]), None)
            if pick is None:
                raise RoutingFailed(
                    f"path {p_i} found no free adjacent clique for slot"
                    f" {slot + 1}", stage="clique-selection",
                    witness={"path": p_i, "slot": slot + 1, "anchor": anchor})
            taken.add(pick)
            plan.good_indices.append(pick)
            plan.attachments.append(_low_bit(masks[anchor] & cmask[pick]))
        plans.append(plan)

    # hamilton cycle over the untouched good cliques, cut into q-paths
    H = build_clique_adjacency(G, factor)
    h_of = {f: h for h, f in enumerate(good)}
    pairs: List[Tuple[int, int]] = []
    for plan in plans:
        ch = [h_of[f] for f in plan.good_indices]
        pairs.extend([(ch[0], ch[1]), (ch[2], ch[3]), (ch[4], ch[5])])
    if q > 0:
        rem = [h for h, f in enumerate(good) if f not in taken]
        pos = {h: i for i, h in enumerate(rem)}
        Hr = Graph(len(rem))
        for i, h in enumerate(rem):
            for h2 in rem[i + 1:]:
                if H.has_edge(h, h2):
                    Hr.add_edge(pos[h], pos[h2])
        cycle = [rem[c] for c in dirac_hamilton_cycle(Hr)]
        cut = split_cycle_into_paths(cycle, q)
        assign = match_pairs_to_paths(pairs, cut, H)
    else:
        assign = list(range(len(pairs)))
        cut = [[] for _ in pairs]

    emb = g.copy()
    for p_i, (P, plan) in enumerate(zip(paths, plans)):
        connectors = []
        for s in range(3):
            a_h, b_h = pairs[3 * p_i + s]
            Q = list(cut[assign[3 * p_i + s]])
            if Q:
                if H.has_edge(Q[0], a_h) and H.has_edge(Q[-1], b_h):
                    pass
                elif H.has_edge(Q[0], b_h) and H.has_edge(Q[-1], a_h):
                    Q.reverse()
                else:
                    raise AccountingError("matched path lost its endpoints")
            seg = [good[h] for h in Q]
            plan.segments.append(seg)
            connectors.append(assemble_connector(
                G, factor.cliques[plan.good_indices[2 * s]],
                factor.cliques[plan.good_indices[2 * s + 1]],
                [factor.cliques[f] for f in seg],
                plan.attachments[2 * s], plan.attachments[2 * s + 1]))
        bk = factor.cliques[plan.bad_index]
        detour = [plan.x] + sorted(set(bk) - {plan.x, plan.y}) + [plan.y]
        images = connectors[0] + [plan.r] + connectors[1] + detour + connectors[2]
        inner = list(P[1:-1])
        if len(images) != len(inner):
            raise AccountingError("routed image length mismatch")
        for tv, gv in zip(inner, images):
            emb.place(tv, gv)

    emb.meta["routes"] = [plan.to_dict() for plan in plans]
    region = set(g.image) | set(res) | fvs
    validate_embedding(G, tree, emb, region=region, require_total=True)
    return emb
