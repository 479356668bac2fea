"""Certificates of tree universality: verification, synthesis, embedding.

A host graph comes with a certificate naming the structure the embedder
leans on: a partition into a general part V1 and a clique-factor part
V2, a star center x with its forced neighborhood S and a small reserve
R, and the factor of 5-cliques with its bad minority.  The verifier
checks the numbered properties below against the host; the embedder
consumes a verified certificate and produces a spanning embedding of
any tree whose maximum degree fits the profile.

Properties, for a profile p on n vertices:

(1)  V1 and V2 partition the host and |V2| = 5 K floor(gamma n).
(2a) |S| = floor(25 C0 log n) and S lies inside N(x).
(2b) |R| <= 25, and the members of R not adjacent to x have a system of
     distinct representatives among their neighbors in S.
(2c) every vertex outside R and S has at least 2 C0 log n neighbors in S.
(3)  every vertex v has at most log n vertices w whose common
     neighborhood with v inside V1 is smaller than alpha n.
(4)  no two disjoint sets A inside V1 and B in the host, both of size
     floor(C0 log n), are edgeless between each other.
(5a) the factor consists of K floor(gamma n) disjoint 5-cliques spanning
     V2, of which exactly floor(gamma n) are marked bad.
(5b) every vertex not in a good clique has at least 40 floor(gamma n)
     neighbors in V2.
(5c) every good clique has a size-3 matching to all but at most gamma n
     of the other good cliques.

Verification never raises on a failed property; it returns a report
with one entry per property, a witness for each failure, and the mode
(exact or sufficient) each check ran in.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .embedding import (
    Embedding,
    ExpansionReport,
    ExpansionSpec,
    check_expansion,
    greedy_embed_rest,
    haxell_extend,
    random_embed_subtree,
    star_matching,
    validate_embedding,
)
from .errors import (
    AccountingError,
    GreedyStuck,
    HallViolation,
    InvalidConfiguration,
    InvalidParameter,
    PreconditionUnmet,
    SynthesisFailed,
)
from .graphs import Graph
from .params import Params
from .routing import CliqueFactor, _kuhn, build_clique_adjacency, route_all_bare_paths
from .trees import BarePathsCase, LeavesCase, Tree, classify_tree

_EPS = 1e-9


class UniversalityCertificate:
    """Named structure inside a host graph: partition, star, clique factor.

    Shape constraints that do not depend on the host or the profile are
    enforced here; everything else is the verifier's job.
    """

    __slots__ = ("v1", "v2", "x", "s_star", "r_star", "factor")

    def __init__(self, v1: Iterable[int], v2: Iterable[int], x: int,
                 s_star: Iterable[int], r_star: Iterable[int],
                 factor: CliqueFactor):
        self.v1: Tuple[int, ...] = tuple(sorted(set(v1)))
        self.v2: Tuple[int, ...] = tuple(sorted(set(v2)))
        self.x = int(x)
        self.s_star: Tuple[int, ...] = tuple(sorted(set(s_star)))
        self.r_star: Tuple[int, ...] = tuple(sorted(set(r_star)))
        self.factor = factor
        if not self.v1 or not self.v2:
            raise InvalidConfiguration("both partition classes must be nonempty")
        v1set, v2set = set(self.v1), set(self.v2)
        if v1set & v2set:
            raise InvalidConfiguration("partition classes overlap")
        if self.x not in v1set:
            raise InvalidConfiguration(f"star center {self.x} is not in V1")
        sset, rset = set(self.s_star), set(self.r_star)
        if not sset <= v1set or not rset <= v1set:
            raise InvalidConfiguration("star sets must lie inside V1")
        if sset & rset:
            raise InvalidConfiguration("S and R overlap")
        if self.x in sset or self.x in rset:
            raise InvalidConfiguration("star center cannot belong to S or R")
        if factor.vertex_set() != v2set:
            raise InvalidConfiguration("clique factor must span V2 exactly")

    def to_dict(self) -> dict:
        fd = self.factor.to_dict()
        return {
            "V1": list(self.v1),
            "V2": list(self.v2),
            "star": {"x": self.x, "S": list(self.s_star), "R": list(self.r_star)},
            "cliques": fd["cliques"],
            "bad": fd["bad"],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "UniversalityCertificate":
        star = data["star"]
        factor = CliqueFactor.from_dict({"cliques": data["cliques"],
                                         "bad": data["bad"]})
        return cls(data["V1"], data["V2"], star["x"], star["S"], star["R"],
                   factor)

    def __repr__(self) -> str:
        return (f"UniversalityCertificate(|V1|={len(self.v1)}, "
                f"|V2|={len(self.v2)}, x={self.x}, |S|={len(self.s_star)}, "
                f"|R|={len(self.r_star)}, cliques={len(self.factor)})")


@dataclass
class PropertyReport:
    """Outcome of one numbered property check."""

    prop: str
    passed: bool
    mode: str = "exact"
    witness: Optional[object] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"prop": self.prop, "passed": self.passed, "mode": self.mode,
                "witness": self.witness, "detail": self.detail}


@dataclass
class CertificateReport:
    items: Dict[str, PropertyReport] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(item.passed for item in self.items.values())

    def failures(self) -> List[PropertyReport]:
        return [item for item in self.items.values() if not item.passed]

    def summary(self) -> str:
        lines = []
        for key, item in self.items.items():
            status = "pass" if item.passed else "FAIL"
            extra = f" [{item.mode}]" if item.mode != "exact" else ""
            tail = f": {item.detail}" if (not item.passed and item.detail) else ""
            lines.append(f"property ({key}): {status}{extra}{tail}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {key: item.to_dict() for key, item in self.items.items()}


def _adjacency_rows(G: Graph) -> np.ndarray:
    """Dense 0/1 adjacency matrix, rows indexed by vertex."""
    n = G.n
    nbytes = (n + 7) // 8
    masks = G.masks()
    rows = np.zeros((n, n), dtype=np.float64)
    for v in range(n):
        bits = np.frombuffer(masks[v].to_bytes(nbytes, "little"), dtype=np.uint8)
        rows[v] = np.unpackbits(bits, bitorder="little")[:n]
    return rows


def _common_non_mask(masks: List[int], full: int, verts: Sequence[int]) -> int:
    """Bitmask of vertices adjacent to none of ``verts`` and outside it."""
    rest = full
    for v in verts:
        rest &= ~masks[v]
        rest &= ~(1 << v)
    return rest


def verify_certificate(G: Graph, cert: UniversalityCertificate,
                       params: Params) -> CertificateReport:
    """Check every numbered property of the certificate against the host.

    All checks are exact scans except (4), which enumerates sets only
    while floor(C0 log n) <= 3 and otherwise falls back to a sufficient
    3-subset bound; that check reports ``mode="sufficient"`` and a
    failure there means "not certified", not a counterexample.
    """
    n = G.n
    if n != params.n:
        raise InvalidConfiguration(
            f"host has {n} vertices but the profile says {params.n}")
    for v in cert.v1 + cert.v2:
        if not 0 <= v < n:
            raise InvalidParameter(f"certificate vertex {v} outside the host")

    masks = G.masks()
    full = (1 << n) - 1
    v1mask = G.mask_of(cert.v1)
    v2mask = G.mask_of(cert.v2)
    smask = G.mask_of(cert.s_star)
    report = CertificateReport()

    # (1) partition and factor-side size
    covers = (v1mask | v2mask) == full and len(cert.v1) + len(cert.v2) == n
    size_ok = len(cert.v2) == params.v2_size
    report.items["1"] = PropertyReport(
        "1", covers and size_ok,
        witness=None if covers and size_ok else
        {"V1": len(cert.v1), "V2": len(cert.v2), "expected_V2": params.v2_size},
        detail="" if covers and size_ok else "partition or factor size is off")

    # (2a) forced star neighborhood
    inside = (smask & ~masks[cert.x]) == 0
    right_size = len(cert.s_star) == params.s_size
    stray = [s for s in cert.s_star if not G.has_edge(s, cert.x)]
    report.items["2a"] = PropertyReport(
        "2a", inside and right_size,
        witness=None if inside and right_size else
        {"size": len(cert.s_star), "expected": params.s_size,
         "outside_neighborhood": stray[:5]},
        detail="" if inside and right_size else
        "S must have the profile size and lie inside N(x)")

    # (2b) distinct S-representatives for reserve vertices missing the hub
    small = len(cert.r_star) <= 25
    missing = [v for v in cert.r_star if not G.has_edge(v, cert.x)]
    adj = [[j for j, s in enumerate(cert.s_star) if G.has_edge(v, s)]
           for v in missing]
    match_l, _ = _kuhn(adj, len(cert.s_star))
    unmatched = [missing[i] for i, mr in enumerate(match_l) if mr < 0]
    report.items["2b"] = PropertyReport(
        "2b", small and not unmatched,
        witness=None if small and not unmatched else
        {"R_size": len(cert.r_star), "unrepresented": unmatched},
        detail="" if small and not unmatched else
        "reserve vertices missing the hub need distinct S-neighbors")

    # (2c) S-degree floor for everyone outside the star sets
    floor_2c = 2.0 * params.C0 * params.log_n
    excluded = set(cert.r_star) | set(cert.s_star)
    witness_2c = None
    for w in range(n):
        if w in excluded:
            continue
        got = (masks[w] & smask).bit_count()
        if got + _EPS < floor_2c:
            witness_2c = {"vertex": w, "S_degree": got, "floor": floor_2c}
            break
    report.items["2c"] = PropertyReport(
        "2c", witness_2c is None, witness=witness_2c,
        detail="" if witness_2c is None else "a vertex sees too little of S")

    # (3) few low-co-degree partners per vertex
    rows = _adjacency_rows(G)
    v1rows = rows[:, list(cert.v1)]
    co = v1rows @ v1rows.T
    bad = (co < params.alpha * n - _EPS).sum(axis=1)
    budget_3 = params.log_n + _EPS
    offenders = np.nonzero(bad > budget_3)[0]
    witness_3 = None
    if offenders.size:
        v = int(offenders[0])
        witness_3 = {"vertex": v, "low_partners": int(bad[v]),
                     "budget": params.log_n}
    report.items["3"] = PropertyReport(
        "3", witness_3 is None, witness=witness_3,
        detail="" if witness_3 is None else
        "too many partners with a thin common V1-neighborhood")

    report.items["4"] = _check_bipartite_expansion(masks, full, cert.v1, params)

    # (5a) factor shape
    want_cliques = params.K * params.gamma_n
    shape_ok = (len(cert.factor) == want_cliques
                and len(cert.factor.bad) == params.gamma_n)
    try:
        cert.factor.validate(G)
        k5_ok, k5_detail = True, ""
    except InvalidConfiguration as err:
        k5_ok, k5_detail = False, str(err)
    report.items["5a"] = PropertyReport(
        "5a", shape_ok and k5_ok,
        witness=None if shape_ok and k5_ok else
        {"cliques": len(cert.factor), "expected": want_cliques,
         "bad": len(cert.factor.bad), "expected_bad": params.gamma_n},
        detail=k5_detail if not k5_ok else
        ("" if shape_ok else "factor counts are off"))

    # (5b) V2-degree floor outside the good cliques
    good_vertices = set()
    for gi in cert.factor.good:
        good_vertices.update(cert.factor.cliques[gi])
    floor_5b = 40 * params.gamma_n
    witness_5b = None
    for v in range(n):
        if v in good_vertices:
            continue
        got = (masks[v] & v2mask).bit_count()
        if got < floor_5b:
            witness_5b = {"vertex": v, "V2_degree": got, "floor": floor_5b}
            break
    report.items["5b"] = PropertyReport(
        "5b", witness_5b is None, witness=witness_5b,
        detail="" if witness_5b is None else
        "a vertex outside the good cliques sees too little of V2")

    # (5c) matching-richness of the good cliques
    if k5_ok:
        H = build_clique_adjacency(G, cert.factor)
        allowed = params.gamma * n + _EPS
        good = cert.factor.good
        witness_5c = None
        for h in range(H.n):
            misses = (H.n - 1) - H.degree(h)
            if misses > allowed:
                witness_5c = {"clique": good[h], "missed": misses,
                              "allowed": params.gamma * n}
                break
        report.items["5c"] = PropertyReport(
            "5c", witness_5c is None, witness=witness_5c,
            detail="" if witness_5c is None else
            "a good clique misses 3-matchings to too many others")
    else:
        report.items["5c"] = PropertyReport(
            "5c", False, detail="skipped: the factor is not a valid 5-clique family")

    return report


def _check_bipartite_expansion(masks: List[int], full: int,
                               v1: Sequence[int], params: Params) -> PropertyReport:
    """Property (4): every size-m set in V1 reaches all but < m vertices.

    Exact enumeration while m <= 3; beyond that, a 3-subset scan: if no
    three V1 vertices share m common non-neighbors then no m of them do,
    since common non-neighborhoods shrink under supersets.  The converse
    fails, so a sufficient-mode failure only means "not certified".
    """
    m = params.m
    if m < 1 or m > len(v1):
        return PropertyReport("4", True, detail=f"vacuous at m = {m}")
    if m <= 3:
        for A in combinations(v1, m):
            count = _common_non_mask(masks, full, A).bit_count()
            if count >= m:
                return PropertyReport(
                    "4", False, witness={"A": list(A), "non_neighbors": count},
                    detail="an m-set misses m vertices entirely")
        return PropertyReport("4", True)

    pairs = []
    for i, a in enumerate(v1):
        for b in v1[i + 1:]:
            if _common_non_mask(masks, full, (a, b)).bit_count() >= m:
                pairs.append((a, b))
    if not pairs:
        return PropertyReport(
            "4", True, mode="sufficient",
            detail="no pair shares m non-neighbors")
    if len(v1) < 3:
        return PropertyReport(
            "4", False, mode="sufficient",
            witness={"pair": list(pairs[0])},
            detail="a pair shares m non-neighbors; not certified")
    for a, b in pairs:
        base = _common_non_mask(masks, full, (a, b))
        for c in v1:
            if c <= b:
                continue
            count = (base & ~masks[c] & ~(1 << c)).bit_count()
            if count >= m:
                return PropertyReport(
                    "4", False, mode="sufficient",
                    witness={"triple": [a, b, c], "non_neighbors": count},
                    detail="three vertices share m non-neighbors; not certified")
    return PropertyReport("4", True, mode="sufficient",
                          detail="certified by the 3-subset bound")


def synth_certificate_graph(params: Params, seed: int = 0,
                            edge_prob: float = 0.7, budget: int = 20,
                            r_size: int = 3
                            ) -> Tuple[Graph, UniversalityCertificate, dict]:
    """Sample a random host with the certificate structure planted.

    Edges are coined independently with ``edge_prob``, then the factor
    cliques are completed, the star neighborhood is forced onto x = 0,
    and the reserve's hub edges are removed so the repair path of the
    embedder actually runs.  Attempts are resampled from derived seeds
    until verification passes; the same arguments always produce the
    same host.
    """
    if not 0.0 < edge_prob <= 1.0:
        raise InvalidParameter(f"edge_prob must lie in (0, 1], got {edge_prob}")
    if budget < 1:
        raise InvalidParameter("budget must be at least 1")
    if not 0 <= r_size <= 25:
        raise InvalidParameter(f"reserve size must lie in 0..25, got {r_size}")
    p = params
    v1_count = p.n - p.v2_size
    if p.gamma_n < 1:
        raise SynthesisFailed(
            f"floor(gamma n) = 0 at n = {p.n}: no factor unit to plant")
    if v1_count <= p.s_size + 1 + r_size:
        raise SynthesisFailed(
            f"star needs {p.s_size + 1 + r_size} vertices but only "
            f"{v1_count} remain outside the factor")

    last = ""
    for attempt in range(budget):
        rng = random.Random(f"{seed}:{attempt}")
        G = Graph(p.n)
        for i in range(p.n):
            for j in range(i + 1, p.n):
                if rng.random() < edge_prob:
                    G.add_edge(i, j)
        v2 = list(range(v1_count, p.n))
        cliques = [tuple(v2[5 * i:5 * i + 5]) for i in range(len(v2) // 5)]
        for clique in cliques:
            for a, b in combinations(clique, 2):
                G.add_edge(a, b)
        x = 0
        s_star = list(range(1, 1 + p.s_size))
        for s in s_star:
            G.add_edge(x, s)
        # top of V1, where the spanning stages leave their spare vertices,
        # so the reserve repair actually runs
        r_star = list(range(v1_count - r_size, v1_count))
        for r in r_star:
            G.remove_edge(x, r)
        factor = CliqueFactor(cliques, bad=range(p.gamma_n))
        cert = UniversalityCertificate(range(v1_count), v2, x, s_star, r_star,
                                       factor)
        outcome = verify_certificate(G, cert, p)
        if outcome.ok:
            meta = {"seed": seed, "attempt": attempt, "edge_prob": edge_prob}
            return G, cert, meta
        last = ", ".join(item.prop for item in outcome.failures())
    raise SynthesisFailed(
        f"no verifiable host in {budget} attempts; last failing properties: {last}")


# -- embedding pipeline ----------------------------------------------------


def leaf_budget_map(tree: Tree, g: Embedding, U: Iterable[int],
                    d: Optional[int] = None) -> Dict[int, int]:
    """Count the unembedded leaves behind each image in U.

    The budgets must account for every unembedded tree vertex, and each
    must be positive (and at most ``d`` when given); anything else means
    the leaf stage was reached in an inconsistent state.
    """
    inv = {gv: tv for tv, gv in g.map.items()}
    kmap: Dict[int, int] = {}
    for u in U:
        parent = inv.get(u)
        if parent is None:
            raise AccountingError(f"budget vertex {u} is not an image")
        pending = [c for c in tree.adj[parent]
                   if len(tree.adj[c]) == 1 and c not in g]
        if not pending:
            raise AccountingError(f"no unembedded leaves behind image {u}")
        if d is not None and len(pending) > d:
            raise AccountingError(
                f"image {u} owes {len(pending)} leaves, above the bound {d}")
        kmap[u] = len(pending)
    total = sum(kmap.values())
    unplaced = tree.n - len(g)
    if total != unplaced:
        raise AccountingError(
            f"star budgets cover {total} vertices but {unplaced} are unembedded")
    return kmap


def _contract_bare_paths(tree: Tree, paths: Sequence[Sequence[int]]
                         ) -> Tuple[Tree, List[int]]:
    """Drop the interiors of the given paths, joining their endpoints."""
    inner = set()
    for path in paths:
        inner.update(path[1:-1])
    kept = [v for v in range(tree.n) if v not in inner]
    idx = {v: i for i, v in enumerate(kept)}
    edges = [(idx[a], idx[b]) for a, b in tree.edges()
             if a not in inner and b not in inner]
    edges.extend((idx[path[0]], idx[path[-1]]) for path in paths)
    return Tree.from_edges(len(kept), edges, root=0), kept


def _induced_tree(tree: Tree, vertices: Iterable[int], root: int
                  ) -> Tuple[Tree, List[int]]:
    """Relabel the induced subtree on ``vertices`` to 0..k-1, sorted."""
    kept = sorted(set(vertices))
    idx = {v: i for i, v in enumerate(kept)}
    if root not in idx:
        raise InvalidParameter(f"root {root} is not among the kept vertices")
    edges = [(idx[a], idx[b]) for a, b in tree.edges()
             if a in idx and b in idx]
    return Tree.from_edges(len(kept), edges, root=idx[root]), kept


def _expansion_dict(rep: ExpansionReport) -> dict:
    return {"mode": rep.mode, "ok": rep.ok,
            "p1": rep.p1.passed, "p2": rep.p2.passed,
            "p1_detail": rep.p1.detail, "p2_detail": rep.p2.detail}


def _stats_of(emb: Embedding) -> dict:
    return {k: v for k, v in emb.meta.items()
            if isinstance(v, (int, float, str, bool))}


def embed_tree(G: Graph, cert: UniversalityCertificate, tree: Tree,
               params: Params, seed: int = 0) -> Embedding:
    """Embed a spanning tree into a host carrying a verified certificate.

    The tree is classified first: with floor(gamma n) long bare paths it
    goes through the path router, otherwise through the leaf pipeline
    (anchored at the star center when one subtree vertex neighbors many
    leaf parents, randomly spread otherwise).  Expansion checks along
    the way are advisory at desk sizes and land in ``meta``; structural
    failures raise.  The returned embedding is validated edge by edge.
    """
    if tree.n != G.n:
        raise InvalidConfiguration(
            f"spanning embedding needs a tree on {G.n} vertices, got {tree.n}")
    if G.n != params.n:
        raise InvalidConfiguration(
            f"host has {G.n} vertices but the profile says {params.n}")
    case = classify_tree(tree, params)
    if isinstance(case, BarePathsCase):
        emb = _embed_bare_paths(G, cert, tree, params, case)
    else:
        emb = _embed_leaves(G, cert, tree, params, case, seed)
    validate_embedding(G, tree, emb, require_total=True)
    return emb


def _embed_bare_paths(G: Graph, cert: UniversalityCertificate, tree: Tree,
                      params: Params, case: BarePathsCase) -> Embedding:
    paths = case.paths[:params.gamma_n]
    t1, kept = _contract_bare_paths(tree, paths)
    if t1.n > len(cert.v1):
        raise PreconditionUnmet(
            f"contracted tree needs {t1.n} vertices, the region has {len(cert.v1)}")
    spec = ExpansionSpec(params.d, params.m, cert.v1)
    expansion = check_expansion(G, spec, t1.n)
    g1 = haxell_extend(G, t1, [], Embedding(), spec)
    gT = Embedding()
    for i in range(t1.n):
        gT.place(kept[i], g1[i])
    reserve = sorted(set(cert.v1) - gT.image)
    if len(reserve) != params.gamma_n:
        raise AccountingError(
            f"expected exactly {params.gamma_n} spare region vertices after the "
            f"contracted embedding, found {len(reserve)}")
    emb = route_all_bare_paths(G, tree, cert.factor, paths, reserve, gT,
                               params.q)
    emb.meta["case"] = "bare-paths"
    emb.meta["paths"] = len(paths)
    emb.meta["expansion"] = {"contracted": _expansion_dict(expansion)}
    emb.meta["extension"] = _stats_of(g1)
    return emb


def _embed_leaves(G: Graph, cert: UniversalityCertificate, tree: Tree,
                  params: Params, case: LeavesCase, seed: int) -> Embedding:
    leaves = set(tree.leaves())
    if any(v in leaves for v in case.n1):
        raise InvalidConfiguration("a leaf-parent seed is itself a leaf")
    t1_verts = [v for v in case.tprime if v not in leaves]
    if not t1_verts:
        raise InvalidConfiguration("the small subtree holds no interior vertices")
    t2_verts = [v for v in range(tree.n) if v not in leaves]
    t1, t1_to_T = _induced_tree(tree, t1_verts, t1_verts[0])
    t1_idx = {v: i for i, v in enumerate(t1_to_T)}
    n1_t1 = sorted(t1_idx[v] for v in case.n1)
    n1_set = set(n1_t1)

    best_x, best = 0, -1
    for x in range(t1.n):
        hits = sum(1 for w in t1.adj[x] if w in n1_set)
        if hits > best:
            best_x, best = x, hits
    spread_cap = 0.5 * params.C1 * params.log_n
    if best + _EPS >= spread_cap:
        g1 = _star_anchored_subtree(G, cert, t1, n1_t1, best_x)
        subcase = "star-anchored"
    else:
        g1 = random_embed_subtree(G, t1, cert.v1, n1_t1, params, seed=seed)
        subcase = "random-spread"

    gT = Embedding()
    for i in sorted(g1.map):
        gT.place(t1_to_T[i], g1[i])

    t2, t2_to_T = _induced_tree(tree, t2_verts, t2_verts[0])
    t2_idx = {v: i for i, v in enumerate(t2_to_T)}
    seeds = sorted(t2_idx[v] for v in t1_to_T)
    g2 = Embedding()
    for v in t1_to_T:
        g2.place(t2_idx[v], gT[v])
    spec = ExpansionSpec(params.d, params.m, cert.v1,
                         reserved=frozenset(gT.image))
    expansion = check_expansion(G, spec, t2.n)
    g2 = haxell_extend(G, t2, seeds, g2, spec)
    for i in sorted(g2.map):
        tv = t2_to_T[i]
        if tv not in gT:
            gT.place(tv, g2[i])

    repairs: List[dict] = []
    if subcase == "star-anchored":
        repairs = _repair_reserve(G, cert, tree, gT, case.n1)
    leaf_info = _finish_leaves(G, tree, gT, params)

    gT.meta["case"] = "leaves"
    gT.meta["subcase"] = subcase
    gT.meta["expansion"] = {"spine": _expansion_dict(expansion)}
    gT.meta["subtree"] = _stats_of(g1)
    gT.meta["extension"] = _stats_of(g2)
    gT.meta["repairs"] = repairs
    gT.meta["leaves"] = leaf_info
    return gT


def _star_anchored_subtree(G: Graph, cert: UniversalityCertificate, t1: Tree,
                           n1_t1: Sequence[int], anchor: int) -> Embedding:
    """Embed the small subtree with the anchor on the star center.

    The anchor's seed neighbors land on the hub-adjacent reserve
    vertices first (all of them, so that any reserve vertex left over
    later is provably hub-avoiding), then on S; the rest of the subtree
    extends greedily inside V1.
    """
    g = Embedding()
    g.place(anchor, cert.x)
    n1_set = set(n1_t1)
    targets = sorted(w for w in t1.adj[anchor] if w in n1_set)
    r_adj = sorted(v for v in cert.r_star if G.has_edge(v, cert.x))
    hosts: List[int] = r_adj + list(cert.s_star)
    if len(targets) < len(r_adj):
        raise PreconditionUnmet(
            f"the anchor has {len(targets)} seed neighbors, fewer than the "
            f"{len(r_adj)} reserve vertices adjacent to the hub")
    if len(targets) > len(hosts):
        taken = set(hosts) | {cert.x}
        spill = [v for v in cert.v1
                 if v not in taken and G.has_edge(v, cert.x)]
        hosts.extend(spill)
        if len(targets) > len(hosts):
            raise GreedyStuck(
                f"hub neighborhood holds {len(hosts)} free vertices for "
                f"{len(targets)} seed neighbors", witness=targets)
    for tv, gv in zip(targets, hosts):
        g.place(tv, gv)
    return greedy_embed_rest(G, t1, g, cert.v1)


def _repair_reserve(G: Graph, cert: UniversalityCertificate, tree: Tree,
                    gT: Embedding, n1_T: Sequence[int]) -> List[dict]:
    """Hand each still-unused reserve vertex a leaf of an S-anchored parent.

    Such a vertex avoids the hub (the anchored stage consumed every
    hub-adjacent reserve vertex), so it neighbors a private S-vertex;
    matching the pending reserve to covered S-images hands each one a
    leaf whose parent sits on its representative.
    """
    pending = sorted(v for v in cert.r_star if v not in gT.image)
    if not pending:
        return []
    inv = {gv: tv for tv, gv in gT.map.items()}
    n1_set = set(n1_T)
    eligible = []
    for s in cert.s_star:
        parent = inv.get(s)
        if parent is None or parent not in n1_set:
            continue
        if any(len(tree.adj[c]) == 1 and c not in gT for c in tree.adj[parent]):
            eligible.append(s)
    adj = [[j for j, s in enumerate(eligible) if G.has_edge(w, s)]
           for w in pending]
    match_l, _ = _kuhn(adj, len(eligible))
    unmatched = [pending[i] for i, mr in enumerate(match_l) if mr < 0]
    if unmatched:
        raise HallViolation(
            f"reserve repair cannot host {len(unmatched)} vertices on "
            f"S-anchored leaf parents", witness=unmatched)
    out = []
    for i, w in enumerate(pending):
        s = eligible[match_l[i]]
        parent = inv[s]
        leaf = min(c for c in tree.adj[parent]
                   if len(tree.adj[c]) == 1 and c not in gT)
        gT.place(leaf, w)
        out.append({"reserve": w, "star": s, "leaf": leaf})
    return out


def _finish_leaves(G: Graph, tree: Tree, g: Embedding, params: Params) -> dict:
    """Place every remaining leaf through one star matching."""
    pend: Dict[int, List[int]] = {}
    for parent in tree.leaf_neighbors():
        waiting = sorted(c for c in tree.adj[parent]
                         if len(tree.adj[c]) == 1 and c not in g)
        if not waiting:
            continue
        if parent not in g:
            raise AccountingError(f"leaf parent {parent} has no image")
        pend[g[parent]] = waiting
    if not pend:
        return {"parents": 0, "leaves": 0}
    U = sorted(pend)
    W = [v for v in range(G.n) if v not in g.image]
    kmap = leaf_budget_map(tree, g, U, d=params.d)
    stars = star_matching(G, U, W, params.d, params.m, kmap)
    placed = 0
    for u in U:
        for leaf, host in zip(pend[u], sorted(stars[u])):
            g.place(leaf, host)
            placed += 1
    return {"parents": len(U), "leaves": placed}
