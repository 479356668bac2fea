import json
import random

import pytest

from treegames.embedding import (
    CheckResult,
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
from treegames.errors import (
    EmbeddingInvalid,
    ExtensionFailed,
    GreedyStuck,
    InvalidParameter,
    NoStarMatching,
    PreconditionUnmet,
    RandomizedEmbeddingFailed,
)
from treegames.graphs import Graph
from treegames.treegen import capped_attachment_tree, path_tree, star_tree
from treegames.trees import Tree


class TestEmbeddingType:
    def test_place_and_image_cache(self):
        emb = Embedding()
        emb.place(0, 7)
        emb.place(3, 2)
        assert emb[0] == 7 and 3 in emb and len(emb) == 2
        assert emb.image == {7, 2}
        assert emb.unplace(0) == 7
        assert emb.image == {2}

    def test_rejects_double_placement(self):
        emb = Embedding({0: 5})
        with pytest.raises(EmbeddingInvalid, match="already embedded"):
            emb.place(0, 6)
        with pytest.raises(EmbeddingInvalid, match="already an image"):
            emb.place(1, 5)

    def test_json_roundtrip_with_gaps(self):
        emb = Embedding({0: 4, 2: 9})
        text = emb.to_json(n=4)
        assert json.loads(text) == [4, None, 9, None]
        back = Embedding.from_json(text)
        assert back.map == emb.map and back.image == emb.image

    def test_validator_catches_edge_violation(self):
        G = Graph(4, [(0, 1), (1, 2)])
        tree = path_tree(3)
        good = Embedding({0: 0, 1: 1, 2: 2})
        assert validate_embedding(G, tree, good)
        bad = Embedding({0: 0, 1: 1, 2: 3})  # (1,3) is not an edge
        with pytest.raises(EmbeddingInvalid, match="non-edge"):
            validate_embedding(G, tree, bad)

    def test_validator_catches_tampering_and_region(self):
        G = Graph.complete(5)
        tree = path_tree(3)
        emb = Embedding({0: 0, 1: 1, 2: 2})
        with pytest.raises(EmbeddingInvalid, match="region"):
            validate_embedding(G, tree, emb, region=[0, 1])
        emb.map[1] = 0  # break injectivity behind the API's back
        with pytest.raises(EmbeddingInvalid):
            validate_embedding(G, tree, emb)

    def test_validator_totality(self):
        G = Graph.complete(5)
        tree = path_tree(4)
        emb = Embedding({0: 0, 1: 1})
        assert validate_embedding(G, tree, emb)
        with pytest.raises(EmbeddingInvalid, match="not total"):
            validate_embedding(G, tree, emb, require_total=True)


class TestExpansionSpec:
    def test_parameter_guards(self):
        with pytest.raises(InvalidParameter):
            ExpansionSpec(d=1, k=0, region=[0])
        with pytest.raises(InvalidParameter):
            ExpansionSpec(d=0, k=1, region=[0])


class TestCheckExpansion:
    def test_complete_graph_passes_up_to_slack(self):
        G = Graph.complete(10)
        spec = ExpansionSpec(d=1, k=1, region=range(10))
        report = check_expansion(G, spec, target_size=8)
        assert report.mode == "exhaustive" and report.ok
        tight = check_expansion(G, spec, target_size=9)
        assert not tight.p2.passed and len(tight.p2.witness) == 2
        assert tight.p1.passed

    def test_isolated_region_vertex_fails_p1(self):
        G = Graph(6, [(u, v) for u in range(5) for v in range(u + 1, 5)])
        spec = ExpansionSpec(d=1, k=1, region=range(6))
        report = check_expansion(G, spec, target_size=1)
        assert not report.p1.passed
        assert report.p1.witness == (5,)

    def test_reserved_vertices_shrink_p1(self):
        G = Graph.complete(6)
        ok = check_expansion(G, ExpansionSpec(d=1, k=1, region=range(6),
                                              reserved=[1, 2, 3]), 1)
        assert ok.p1.passed
        starved = check_expansion(G, ExpansionSpec(d=1, k=1, region=range(6),
                                                   reserved=[1, 2, 3, 4]), 1)
        assert not starved.p1.passed

    def test_sufficient_mode_on_dense_region(self):
        G = Graph.random(150, 0.7, random.Random(1))
        spec = ExpansionSpec(d=3, k=5, region=range(100))
        report = check_expansion(G, spec, target_size=30)
        assert report.mode == "sufficient"
        assert report.ok, (report.p1.detail, report.p2.detail)

    def test_sufficient_mode_reports_failures(self):
        G = Graph.random(60, 0.3, random.Random(2))
        spec = ExpansionSpec(d=4, k=6, region=range(40))
        report = check_expansion(G, spec, target_size=60)
        assert report.mode == "sufficient"
        assert not report.p1.passed and not report.p2.passed

    def test_exhaustive_gate(self):
        G = Graph.random(60, 0.5, random.Random(3))
        spec = ExpansionSpec(d=2, k=5, region=range(40))
        with pytest.raises(InvalidParameter, match="exhaustive"):
            check_expansion(G, spec, 5, mode="exhaustive")

    def test_sufficient_pass_implies_exhaustive_pass(self):
        G = Graph.random(20, 0.95, random.Random(4))
        spec = ExpansionSpec(d=2, k=2, region=range(20))
        suff = check_expansion(G, spec, target_size=4, mode="sufficient")
        exact = check_expansion(G, spec, target_size=4, mode="exhaustive")
        assert suff.ok, (suff.p1.detail, suff.p2.detail)
        assert exact.ok


class TestHaxellExtend:
    def test_path_from_single_vertex_into_clique(self):
        G = Graph.complete(10)
        tree = path_tree(5)
        spec = ExpansionSpec(d=2, k=1, region=range(10))
        emb = haxell_extend(G, tree, [0], Embedding({0: 0}), spec)
        assert validate_embedding(G, tree, emb, require_total=True)

    def test_random_tree_into_random_graph(self):
        tree = capped_attachment_tree(40, random.Random(7), dmax=4)
        G = Graph.random(120, 0.5, random.Random(3))
        spec = ExpansionSpec(d=4, k=3, region=range(120))
        emb = haxell_extend(G, tree, [], Embedding(), spec)
        assert validate_embedding(G, tree, emb, region=range(120), require_total=True)

    def test_binary_tree_into_region(self):
        tree = Tree([None] + [(i - 1) // 2 for i in range(1, 63)])
        G = Graph.random(150, 0.5, random.Random(5))
        region = range(120)
        spec = ExpansionSpec(d=3, k=3, region=region)
        emb = haxell_extend(G, tree, [], Embedding(), spec)
        assert validate_embedding(G, tree, emb, region=region, require_total=True)

    def test_repair_relocates_a_blocking_vertex(self):
        # tree vertex 4 needs an image adjacent to g(2)=2, but host vertex 3
        # (the only such image) is held by tree vertex 3, which can hop to 4.
        G = Graph(5, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 3)])
        tree = Tree.from_edges(5, [(0, 1), (0, 2), (1, 3), (2, 4)])
        spec = ExpansionSpec(d=3, k=1, region=range(5))
        emb = haxell_extend(G, tree, [0], Embedding({0: 0}), spec)
        assert validate_embedding(G, tree, emb, require_total=True)
        assert emb.map == {0: 0, 1: 1, 2: 2, 3: 4, 4: 3}
        assert emb.meta["repairs"] == 1
        assert emb.meta["backtracks"] == 0

    def test_backtracking_revises_greedy_choices(self):
        G = Graph(10, [(0, 1), (0, 2), (2, 9)])
        tree = Tree.from_edges(4, [(0, 1), (1, 2), (0, 3)])
        spec = ExpansionSpec(d=3, k=1, region=range(10))
        emb = haxell_extend(G, tree, [0], Embedding({0: 0}), spec)
        assert validate_embedding(G, tree, emb, require_total=True)
        assert emb.map == {0: 0, 1: 2, 2: 9, 3: 1}
        assert emb.meta["backtracks"] >= 1

    def test_extension_failed_reports_witness(self):
        G = Graph(2, [(0, 1)])
        tree = star_tree(3)
        spec = ExpansionSpec(d=2, k=1, region=range(2))
        with pytest.raises(ExtensionFailed) as err:
            haxell_extend(G, tree, [0], Embedding({0: 0}), spec)
        assert set(err.value.witness) == {1, 2}

    def test_seed_domain_must_match(self):
        G = Graph.complete(4)
        tree = path_tree(3)
        spec = ExpansionSpec(d=2, k=1, region=range(4))
        with pytest.raises(InvalidParameter, match="domain"):
            haxell_extend(G, tree, [0, 1], Embedding({0: 0}), spec)


def _flow_oracle_feasible(G, U, W, k_map):
    import numpy as np
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import maximum_flow

    U = sorted(U)
    W = sorted(W)
    n = 2 + len(U) + len(W)
    source, sink = 0, n - 1
    mat = np.zeros((n, n), dtype=np.int32)
    for i, u in enumerate(U):
        mat[source, 1 + i] = k_map[u]
        for j, w in enumerate(W):
            if G.has_edge(u, w):
                mat[1 + i, 1 + len(U) + j] = 1
    for j in range(len(W)):
        mat[1 + len(U) + j, sink] = 1
    result = maximum_flow(csr_matrix(mat), source, sink)
    return result.flow_value == len(W)


class TestStarMatching:
    def test_complete_bipartite_perfect_matching(self):
        G = Graph.complete_bipartite([0, 1, 2], [3, 4, 5])
        parts = star_matching(G, [0, 1, 2], [3, 4, 5], d=1, m=1,
                              k_map={0: 1, 1: 1, 2: 1})
        images = sorted(w for ws in parts.values() for w in ws)
        assert images == [3, 4, 5]
        assert all(len(ws) == 1 for ws in parts.values())

    def test_k33_minus_matching_has_sdr(self):
        G = Graph.complete_bipartite([0, 1, 2], [3, 4, 5])
        for u, w in [(0, 3), (1, 4), (2, 5)]:
            G.remove_edge(u, w)
        k_map = {0: 1, 1: 1, 2: 1}
        parts = star_matching(G, [0, 1, 2], [3, 4, 5], d=1, m=2, k_map=k_map)
        for u, ws in parts.items():
            assert len(ws) == 1 and G.has_edge(u, ws[0])
        assert _flow_oracle_feasible(G, [0, 1, 2], [3, 4, 5], k_map)

    def test_uneven_capacities(self):
        G = Graph(5, [(0, 2), (0, 3), (0, 4), (1, 4), (1, 3)])
        parts = star_matching(G, [0, 1], [2, 3, 4], d=2, m=1,
                              k_map={0: 2, 1: 1})
        assert len(parts[0]) == 2 and len(parts[1]) == 1
        used = sorted(parts[0] + parts[1])
        assert used == [2, 3, 4]

    def test_infeasible_raises_with_witness(self):
        G = Graph(4, [(0, 2), (1, 2)])
        with pytest.raises(NoStarMatching) as err:
            star_matching(G, [0, 1], [2, 3], d=1, m=1, k_map={0: 1, 1: 1})
        assert 3 in err.value.witness

    def test_parameter_guards(self):
        G = Graph.complete_bipartite([0], [1, 2])
        with pytest.raises(InvalidParameter, match="sum"):
            star_matching(G, [0], [1, 2], d=2, m=1, k_map={0: 1})
        with pytest.raises(InvalidParameter, match="outside"):
            star_matching(G, [0], [1, 2], d=1, m=1, k_map={0: 2})
        with pytest.raises(InvalidParameter, match="disjoint"):
            star_matching(G, [0, 1], [1, 2], d=2, m=1, k_map={0: 1, 1: 1})

    def test_agrees_with_flow_oracle_on_random_instances(self):
        rng = random.Random(99)
        for trial in range(80):
            nu = rng.randint(1, 8)
            nw = rng.randint(1, 20)
            p = rng.choice([0.15, 0.4, 0.8])
            U = list(range(nu))
            W = list(range(nu, nu + nw))
            G = Graph(nu + nw)
            for u in U:
                for w in W:
                    if rng.random() < p:
                        G.add_edge(u, w)
            # random capacities splitting |W| across U, each within 1..d
            d = max(1, (nw + nu - 1) // nu)
            k_map = {u: 1 for u in U}
            rest = nw - nu
            while rest > 0:
                u = rng.choice(U)
                if k_map[u] < d:
                    k_map[u] += 1
                    rest -= 1
            if nw < nu:
                continue  # sizes cannot sum to |W| with k >= 1
            feasible = _flow_oracle_feasible(G, U, W, k_map)
            try:
                parts = star_matching(G, U, W, d=d, m=1, k_map=k_map)
            except NoStarMatching:
                assert not feasible, f"trial {trial}: solver missed a matching"
            else:
                assert feasible, f"trial {trial}: solver invented a matching"
                seen = sorted(w for ws in parts.values() for w in ws)
                assert seen == W
                for u, ws in parts.items():
                    assert len(ws) == k_map[u]
                    assert all(G.has_edge(u, w) for w in ws)


class TestGreedyEmbedRest:
    def test_star_leaves_into_clique(self):
        G = Graph.complete(10)
        tree = star_tree(4)
        emb = greedy_embed_rest(G, tree, Embedding({0: 0}), range(10))
        assert emb.map == {0: 0, 1: 1, 2: 2, 3: 3}

    def test_region_capacity_exhaustion(self):
        G = Graph.complete(10)
        tree = star_tree(4)
        with pytest.raises(GreedyStuck) as err:
            greedy_embed_rest(G, tree, Embedding({0: 0}), [0, 1])
        assert err.value.witness == [2]

    def test_medium_tree_into_dense_region(self):
        tree = capped_attachment_tree(50, random.Random(2), dmax=6)
        G = Graph.random(200, 0.6, random.Random(8))
        emb = greedy_embed_rest(G, tree, Embedding({0: 5}), range(200))
        assert validate_embedding(G, tree, emb, require_total=True)

    def test_needs_a_start(self):
        with pytest.raises(InvalidParameter, match="non-empty"):
            greedy_embed_rest(Graph.complete(3), path_tree(2), Embedding(), range(3))


class _P:
    def __init__(self, **kw):
        self.__dict__.update(kw)


class TestRandomEmbedSubtree:
    def test_seeded_reproducibility(self):
        G = Graph.random(80, 0.8, random.Random(6))
        t1 = capped_attachment_tree(12, random.Random(1), dmax=4)
        params = _P(alpha=0.2, C0=0.3, C1=4.0)
        n1 = [v for v in range(12) if t1.degree(v) == 1][:5]
        a = random_embed_subtree(G, t1, range(60), n1, params, seed=41)
        b = random_embed_subtree(G, t1, range(60), n1, params, seed=41)
        assert a.map == b.map

    def test_dense_host_passes_direct_checks(self):
        G = Graph.random(160, 0.9, random.Random(11))
        t1 = capped_attachment_tree(20, random.Random(3), dmax=5)
        n1 = list(range(8, 20))
        params = _P(alpha=0.3, C0=0.5, C1=4.0)
        emb = random_embed_subtree(G, t1, range(120), n1, params, seed=7)
        assert validate_embedding(G, t1, emb, region=range(120), require_total=True)
        gn1 = [emb[v] for v in n1]
        floor = emb.meta["d_floor"]
        for w in range(160):
            if w in emb.image:
                continue
            got = sum(1 for x in gn1 if G.has_edge(w, x))
            assert got >= floor, (w, got, floor)

    def test_spread_precondition(self):
        G = Graph.random(160, 0.9, random.Random(11))
        t1 = star_tree(12)
        params = _P(alpha=0.3, C0=0.5, C1=1.0)
        with pytest.raises(PreconditionUnmet, match="spread"):
            random_embed_subtree(G, t1, range(120), list(range(1, 9)), params, seed=1)

    def test_low_degree_vertex_defeats_condition_d(self):
        G = Graph(31)
        rng = random.Random(5)
        for u in range(30):
            for v in range(u + 1, 30):
                if rng.random() < 0.9:
                    G.add_edge(u, v)
        t1 = path_tree(6)
        params = _P(alpha=0.2, C0=0.3, C1=10.0)
        with pytest.raises(RandomizedEmbeddingFailed) as err:
            random_embed_subtree(G, t1, range(20), [2, 3, 4], params,
                                 seed=3, budget=3, bad_floor=0.0)
        assert err.value.failed_check == "D"
        assert "host vertex" in str(err.value)
