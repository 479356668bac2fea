"""Tests for clique-factor path routing."""

import json
import random

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from treegames.embedding import Embedding
from treegames.errors import (
    BadSplit,
    ConnectorFailed,
    DiracUnmet,
    HallViolation,
    InvalidConfiguration,
    InvalidParameter,
    RoutingFailed,
)
from treegames.graphs import Graph
from treegames.routing import (
    CliqueFactor,
    assemble_connector,
    build_clique_adjacency,
    dirac_hamilton_cycle,
    match_pairs_to_paths,
    route_all_bare_paths,
    split_cycle_into_paths,
)
from treegames.trees import Tree


def _two_cliques(cross):
    """K5 on 0..4 and K5 on 5..9 plus the given cross edges."""
    G = Graph(10)
    for base in (0, 5):
        for a in range(base, base + 5):
            for b in range(a + 1, base + 5):
                G.add_edge(a, b)
    for u, v in cross:
        G.add_edge(u, v)
    return G


def _is_hamilton(H, cycle):
    return (len(cycle) == H.n and len(set(cycle)) == H.n and
            all(H.has_edge(cycle[i], cycle[(i + 1) % H.n])
                for i in range(H.n)))


def _oracle_matching_size(edges, nl, nr):
    m = np.zeros((nl, nr), dtype=np.int8)
    for u, v in edges:
        m[u][v] = 1
    perm = maximum_bipartite_matching(csr_matrix(m), perm_type="column")
    return int((perm >= 0).sum())


class TestCliqueFactor:
    def test_constructor_and_partition(self):
        f = CliqueFactor([[0, 1, 2, 3, 4], [9, 8, 7, 6, 5]], bad=[1])
        assert len(f) == 2
        assert f.cliques[1] == (5, 6, 7, 8, 9)
        assert f.good == [0]
        assert f.vertex_set() == set(range(10))

    def test_overlap_rejected(self):
        with pytest.raises(InvalidConfiguration, match="overlap"):
            CliqueFactor([[0, 1, 2, 3, 4], [4, 5, 6, 7, 8]])

    def test_wrong_size_rejected(self):
        with pytest.raises(InvalidConfiguration, match="5 distinct"):
            CliqueFactor([[0, 1, 2, 3]])

    def test_bad_index_out_of_range(self):
        with pytest.raises(InvalidConfiguration, match="out of range"):
            CliqueFactor([[0, 1, 2, 3, 4]], bad=[2])

    def test_validate_against_host(self):
        G = _two_cliques([])
        f = CliqueFactor([[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]])
        assert f.validate(G)
        G.remove_edge(6, 8)
        with pytest.raises(InvalidConfiguration, match="6-8"):
            f.validate(G)

    def test_dict_roundtrip(self):
        f = CliqueFactor([[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]], bad=[0])
        g = CliqueFactor.from_dict(json.loads(json.dumps(f.to_dict())))
        assert g.cliques == f.cliques and g.bad == f.bad


class TestBuildCliqueAdjacency:
    def test_complete_cross_gives_edge(self):
        cross = [(a, b) for a in range(5) for b in range(5, 10)]
        G = _two_cliques(cross)
        f = CliqueFactor([[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]])
        H = build_clique_adjacency(G, f)
        assert H.n == 2 and H.has_edge(0, 1)

    def test_two_independent_edges_insufficient(self):
        # all cross edges touch {0, 1} so the matching caps at 2
        cross = [(0, 5), (0, 6), (1, 5), (1, 6), (2, 5), (3, 6)]
        assert _oracle_matching_size(
            [(u, v - 5) for u, v in cross], 5, 5) == 2
        G = _two_cliques(cross)
        f = CliqueFactor([[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]])
        H = build_clique_adjacency(G, f)
        assert not H.has_edge(0, 1)

    def test_three_matching_threshold(self):
        G = _two_cliques([(0, 5), (1, 6), (2, 7)])
        f = CliqueFactor([[0, 1, 2, 3, 4], [5, 6, 7, 8, 9]])
        assert build_clique_adjacency(G, f).has_edge(0, 1)

    def test_bad_cliques_not_vertices(self):
        G = Graph(15)
        cliques = [list(range(5 * i, 5 * i + 5)) for i in range(3)]
        for c in cliques:
            for a in c:
                for b in c:
                    if a < b:
                        G.add_edge(a, b)
        for a in cliques[1]:
            for b in cliques[2]:
                G.add_edge(a, b)
        f = CliqueFactor(cliques, bad=[0])
        H = build_clique_adjacency(G, f)
        # vertices 0 and 1 of H are the good cliques 1 and 2
        assert H.n == 2 and H.has_edge(0, 1)


class TestDiracHamilton:
    def test_complete_four(self):
        assert dirac_hamilton_cycle(Graph.complete(4)) == [0, 1, 2, 3]

    def test_degree_guard(self):
        G = Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])
        with pytest.raises(DiracUnmet, match="minimum degree"):
            dirac_hamilton_cycle(G)

    def test_small_guard(self):
        with pytest.raises(DiracUnmet, match="3 vertices"):
            dirac_hamilton_cycle(Graph.complete(2))

    def test_circulant(self):
        G = Graph(11)
        for v in range(11):
            for off in (1, 2, 3):
                G.add_edge(v, (v + off) % 11)
        cycle = dirac_hamilton_cycle(G)
        assert _is_hamilton(G, cycle)

    def test_random_degree_conditioned(self):
        rng = random.Random(5)
        for _ in range(30):
            n = rng.randrange(3, 61)
            G = Graph.random(n, 0.6, rng)
            for v in range(n):
                while 2 * G.degree(v) < n:
                    opts = sorted(set(range(n)) - {v} - G.neighbors(v))
                    G.add_edge(v, opts[rng.randrange(len(opts))])
            assert _is_hamilton(G, dirac_hamilton_cycle(G))

    def test_deterministic(self):
        rng = random.Random(9)
        G = Graph.random(40, 0.7, rng)
        for v in range(40):
            while 2 * G.degree(v) < 40:
                opts = sorted(set(range(40)) - {v} - G.neighbors(v))
                G.add_edge(v, opts[0])
        assert dirac_hamilton_cycle(G) == dirac_hamilton_cycle(G.copy())


class TestSplitCycle:
    def test_twelve_by_four(self):
        parts = split_cycle_into_paths(list(range(12)), 4)
        assert parts == [[0, 1, 2, 3], [4, 5, 6, 7], [8, 9, 10, 11]]

    def test_indivisible(self):
        with pytest.raises(BadSplit):
            split_cycle_into_paths(list(range(10)), 4)

    def test_full_scale_shape(self):
        parts = split_cycle_into_paths(list(range(93)), 31)
        assert len(parts) == 3
        assert all(len(p) == 31 for p in parts)
        assert sorted(v for p in parts for v in p) == list(range(93))

    def test_part_size_guard(self):
        with pytest.raises(InvalidParameter):
            split_cycle_into_paths(list(range(4)), 0)


class TestMatchPairsToPaths:
    def test_complete_auxiliary(self):
        H = Graph.complete(6)
        assign = match_pairs_to_paths([(0, 1), (2, 3)], [[4], [5]], H)
        assert sorted(assign) == [0, 1]

    def test_flipped_orientation_counts(self):
        H = Graph(4, [(2, 1), (3, 0)])
        assert match_pairs_to_paths([(0, 1)], [[2, 3]], H) == [0]

    def test_isolated_pair(self):
        H = Graph(6, [(4, 2), (4, 3), (5, 2), (5, 3)])
        with pytest.raises(HallViolation) as err:
            match_pairs_to_paths([(0, 1), (2, 3)], [[4], [5]], H)
        assert err.value.witness == [0]

    def test_count_guard(self):
        with pytest.raises(InvalidParameter):
            match_pairs_to_paths([(0, 1)], [[2], [3]], Graph.complete(4))

    def test_oracle_agreement(self):
        rng = random.Random(20)
        hits = misses = 0
        for _ in range(200):
            m = rng.randrange(12, 16)
            H = Graph.random(m, rng.choice([0.25, 0.5, 0.75]), rng)
            verts = list(range(m))
            rng.shuffle(verts)
            k = rng.randrange(2, 4)
            pairs = [(verts[2 * i], verts[2 * i + 1]) for i in range(k)]
            rest = verts[2 * k:]
            qpaths = []
            at = 0
            for _ in range(k):
                ln = rng.randrange(1, 3)
                qpaths.append(rest[at:at + ln])
                at += ln
            fadj = []
            for a, b in pairs:
                opts = [j for j, Q in enumerate(qpaths)
                        if (H.has_edge(Q[0], a) and H.has_edge(Q[-1], b))
                        or (H.has_edge(Q[0], b) and H.has_edge(Q[-1], a))]
                fadj.append(opts)
            edges = [(i, j) for i, opts in enumerate(fadj) for j in opts]
            oracle = _oracle_matching_size(edges, k, k)
            try:
                assign = match_pairs_to_paths(pairs, qpaths, H)
            except HallViolation as err:
                assert oracle < k
                nb = set().union(*(fadj[i] for i in err.witness))
                assert len(nb) < len(err.witness)
                misses += 1
            else:
                assert oracle == k
                assert sorted(assign) == list(range(k))
                assert all(assign[i] in fadj[i] for i in range(k))
                hits += 1
        assert hits > 20 and misses > 20


class TestAssembleConnector:
    def test_two_clique_connector(self):
        cross = [(a, b) for a in range(5) for b in range(5, 10)]
        G = _two_cliques(cross)
        path = assemble_connector(G, range(5), range(5, 10), [], 0, 9)
        assert path == [0, 2, 3, 4, 1, 5, 6, 7, 8, 9]

    def _chain(self, count):
        G = Graph(5 * count)
        cliques = [list(range(5 * i, 5 * i + 5)) for i in range(count)]
        for c in cliques:
            for a in c:
                for b in c:
                    if a < b:
                        G.add_edge(a, b)
        for i in range(count - 1):
            for a in cliques[i]:
                for b in cliques[i + 1]:
                    G.add_edge(a, b)
        return G, cliques

    def test_twenty_vertex_connector(self):
        G, cliques = self._chain(4)
        path = assemble_connector(G, cliques[0], cliques[3], cliques[1:3],
                                  0, 19)
        assert len(path) == 20
        assert path[0] == 0 and path[-1] == 19
        assert sorted(path) == list(range(20))
        assert all(G.has_edge(a, b) for a, b in zip(path, path[1:]))

    def test_full_scale_connector(self):
        G, cliques = self._chain(33)
        path = assemble_connector(G, cliques[0], cliques[32], cliques[1:32],
                                  0, 164)
        assert len(path) == 165
        assert path[0] == 0 and path[-1] == 164
        assert all(G.has_edge(a, b) for a, b in zip(path, path[1:]))

    def test_stuck_greedy(self):
        G = _two_cliques([(0, 5), (0, 6), (0, 7)])
        with pytest.raises(ConnectorFailed, match="crossing edge"):
            assemble_connector(G, range(5), range(5, 10), [], 0, 9)

    def test_attachment_outside_clique(self):
        G = _two_cliques([(a, b) for a in range(5) for b in range(5, 10)])
        with pytest.raises(InvalidParameter):
            assemble_connector(G, range(5), range(5, 10), [], 7, 9)

    def test_incomplete_clique_rejected(self):
        G = _two_cliques([(a, b) for a in range(5) for b in range(5, 10)])
        G.remove_edge(1, 3)
        with pytest.raises(InvalidConfiguration, match="misses edge"):
            assemble_connector(G, range(5), range(5, 10), [], 0, 9)


def _route_instance(n_legs, v1_v2_edges=True):
    """Spider of bare paths from a hub plus a dense clique-factor host."""
    leg = 68
    parent = [None]
    for j in range(n_legs):
        base = 1 + j * leg
        parent.append(0)
        parent += list(range(base, base + leg - 1))
    tree = Tree(parent)
    paths = [list(range(1 + j * leg, 1 + (j + 1) * leg))
             for j in range(n_legs)]

    n_v1 = 1 + 3 * n_legs
    count = 13 * n_legs
    n_host = n_v1 + 5 * count
    G = Graph(n_host)
    g = Embedding()
    g.place(0, 0)
    for j in range(n_legs):
        g.place(1 + j * leg, 1 + j)
        g.place((j + 1) * leg, 1 + n_legs + j)
        G.add_edge(0, 1 + j)
    reserve = list(range(1 + 2 * n_legs, n_v1))
    cliques = [list(range(n_v1 + 5 * i, n_v1 + 5 * i + 5))
               for i in range(count)]
    for c in cliques:
        for a in c:
            for b in c:
                if a < b:
                    G.add_edge(a, b)
    for i in range(count):
        for i2 in range(i + 1, count):
            for a in cliques[i]:
                for b in cliques[i2]:
                    G.add_edge(a, b)
    if v1_v2_edges:
        for v in range(n_v1):
            for u in range(n_v1, n_host):
                G.add_edge(v, u)
    factor = CliqueFactor(cliques, bad=range(n_legs))
    return G, tree, factor, paths, reserve, g


class TestRouteAllBarePaths:
    def test_single_path(self):
        G, tree, factor, paths, reserve, g = _route_instance(1)
        emb = route_all_bare_paths(G, tree, factor, paths, reserve, g, q=2)
        assert len(emb) == len(tree.parent)
        inner_images = [emb[tv] for tv in paths[0][1:-1]]
        allowed = set(reserve) | factor.vertex_set()
        assert set(inner_images) <= allowed
        # reserve vertex sits between the first two connectors
        assert inner_images[20] == reserve[0]
        # the detour walks the bad clique from x to y
        assert inner_images[41:46] == [4, 6, 7, 8, 5]
        assert len(emb.meta["routes"]) == 1
        json.dumps(emb.meta["routes"])

    def test_three_paths_disjoint(self):
        G, tree, factor, paths, reserve, g = _route_instance(3)
        emb = route_all_bare_paths(G, tree, factor, paths, reserve, g, q=2)
        assert len(emb) == len(tree.parent)
        interiors = [set(emb[tv] for tv in P[1:-1]) for P in paths]
        assert not (interiors[0] & interiors[1])
        assert not (interiors[0] & interiors[2])
        assert not (interiors[1] & interiors[2])

    def test_original_embedding_untouched(self):
        G, tree, factor, paths, reserve, g = _route_instance(1)
        before = dict(g.map)
        route_all_bare_paths(G, tree, factor, paths, reserve, g, q=2)
        assert g.map == before

    def test_missing_attachments(self):
        G, tree, factor, paths, reserve, g = _route_instance(1,
                                                             v1_v2_edges=False)
        with pytest.raises(RoutingFailed) as err:
            route_all_bare_paths(G, tree, factor, paths, reserve, g, q=2)
        assert err.value.stage == "clique-selection"
        assert err.value.witness["path"] == 0

    def test_count_mismatch(self):
        G, tree, factor, paths, reserve, g = _route_instance(1)
        with pytest.raises(InvalidConfiguration, match="counts differ"):
            route_all_bare_paths(G, tree, factor, paths, [], g, q=2)

    def test_wrong_shape_for_q(self):
        G, tree, factor, paths, reserve, g = _route_instance(1)
        with pytest.raises(InvalidConfiguration, match="inner vertices"):
            route_all_bare_paths(G, tree, factor, paths, reserve, g, q=3)

    def test_reserve_collision(self):
        G, tree, factor, paths, reserve, g = _route_instance(1)
        taken = next(iter(factor.vertex_set()))
        with pytest.raises(InvalidConfiguration, match="already taken"):
            route_all_bare_paths(G, tree, factor, paths, [taken], g, q=2)

    def test_missing_endpoint(self):
        G, tree, factor, paths, reserve, g = _route_instance(1)
        g.unplace(paths[0][-1])
        with pytest.raises(InvalidConfiguration, match="endpoints"):
            route_all_bare_paths(G, tree, factor, paths, reserve, g, q=2)

    def test_deterministic_replay(self):
        a = _route_instance(3)
        b = _route_instance(3)
        ea = route_all_bare_paths(a[0], a[1], a[2], a[3], a[4], a[5], q=2)
        eb = route_all_bare_paths(b[0], b[1], b[2], b[3], b[4], b[5], q=2)
        assert ea.to_json() == eb.to_json()
        assert ea.meta["routes"] == eb.meta["routes"]
