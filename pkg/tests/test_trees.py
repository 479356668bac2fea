import math
import random
from types import SimpleNamespace

import pytest

from treegames.errors import (
    DegreeBoundViolated,
    InvalidConfiguration,
    InvalidParameter,
    TreeTooSmall,
)
from treegames.treegen import (
    broom_tree,
    capped_attachment_tree,
    caterpillar_tree,
    comb_tree,
    double_broom_tree,
    path_tree,
    preferential_tree,
    random_attachment_tree,
    relabel_tree,
    star_tree,
)
from treegames.trees import (
    BarePathsCase,
    LeavesCase,
    Tree,
    classify_tree,
    find_bare_paths,
    induces_subtree,
    is_bare_path,
    small_subtree_split,
    subtree_cover,
)


def desk_params(**over):
    base = dict(d=15, ell=67, gamma=0.01, delta=0.025, C1=2.2, C=65)
    base.update(over)
    return SimpleNamespace(**base)


class TestTreeType:
    def test_parent_array_roundtrip(self):
        t = Tree([None, 0, 0, 1, 1])
        assert t.n == 5 and t.root == 0
        assert Tree.from_json(t.to_json()).parent == t.parent

    def test_two_roots_rejected(self):
        with pytest.raises(InvalidConfiguration):
            Tree([None, None, 0])

    def test_cycle_rejected(self):
        with pytest.raises(InvalidConfiguration):
            Tree([None, 2, 1])

    def test_from_edges(self):
        t = Tree.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        assert t.parent == [None, 0, 1, 2]
        assert t.leaves() == [0, 3]
        assert t.leaf_neighbors() == [1, 2]

    def test_from_edges_wrong_count(self):
        with pytest.raises(InvalidConfiguration):
            Tree.from_edges(4, [(0, 1), (1, 2)])

    def test_degrees(self):
        t = star_tree(6)
        assert t.degree(0) == 5 and t.max_degree() == 5
        assert t.leaves() == [1, 2, 3, 4, 5]
        assert t.leaf_neighbors() == [0]


class TestSmallSubtreeSplit:
    def test_path_ten(self):
        t = path_tree(10)
        va, vb = small_subtree_split(t, 3)
        assert 3 <= len(va) < 6
        assert len(set(va) & set(vb)) <= 1
        assert set(va) | set(vb) == set(range(10))
        assert induces_subtree(t, va) and induces_subtree(t, vb)

    def test_star_keeps_center(self):
        t = star_tree(6)
        va, vb = small_subtree_split(t, 3)
        assert va == [0, 1, 2]
        assert 0 in vb
        assert induces_subtree(t, va) and induces_subtree(t, vb)

    def test_too_small(self):
        with pytest.raises(TreeTooSmall):
            small_subtree_split(path_tree(4), 3)

    def test_bad_k(self):
        with pytest.raises(InvalidParameter):
            small_subtree_split(path_tree(4), 0)

    def test_child_branch_no_overlap(self):
        # balanced binary tree: some child subtree lands in [k, 2k)
        t = Tree([None, 0, 0, 1, 1, 2, 2])
        va, vb = small_subtree_split(t, 3)
        assert 3 <= len(va) < 6
        assert set(va) | set(vb) == set(range(7))
        assert len(set(va) & set(vb)) <= 1


class TestSubtreeCover:
    def test_path_twenty(self):
        t = path_tree(20)
        parts = subtree_cover(t, 4)
        assert len(parts) <= math.ceil(20 / 3) + 1
        assert all(len(p) < 8 for p in parts)
        assert set().union(*map(set, parts)) == set(range(20))
        assert all(induces_subtree(t, p) for p in parts)

    def test_small_tree_single_part(self):
        parts = subtree_cover(path_tree(5), 3)
        assert parts == [list(range(5))]

    def test_k_must_be_at_least_two(self):
        with pytest.raises(InvalidParameter):
            subtree_cover(path_tree(5), 1)


class TestBarePaths:
    def test_star_has_none(self):
        assert find_bare_paths(star_tree(6), 2) == []

    def test_path_count(self):
        for n in (8, 9, 12, 30):
            t = path_tree(n)
            paths = find_bare_paths(t, 3)
            assert len(paths) == n // 4
            assert all(is_bare_path(t, p) and len(p) == 4 for p in paths)

    def test_paths_disjoint(self):
        t = comb_tree(80, 6, 5)
        paths = find_bare_paths(t, 2)
        used = [v for p in paths for v in p]
        assert len(used) == len(set(used))
        assert all(is_bare_path(t, p) for p in paths)

    def test_bad_length(self):
        with pytest.raises(InvalidParameter):
            find_bare_paths(path_tree(5), 0)

    def test_leaf_bound(self):
        rng = random.Random(7)
        ell = 3
        for _ in range(200):
            n = rng.randint(10, 120)
            t = random_attachment_tree(n, rng, window=rng.choice([None, 2, 5]))
            k = len(t.leaves())
            got = len(find_bare_paths(t, ell))
            assert got >= (n - (2 * k - 2) * (ell + 1)) / (ell + 1)

    def test_few_leaves_corollary(self):
        # leaf count below n/(4(ell+1)) forces that many bare paths
        rng = random.Random(11)
        ell = 4
        gp = 1.0 / (4 * (ell + 1))
        hits = 0
        for _ in range(300):
            n = rng.randint(40, 160)
            t = random_attachment_tree(n, rng, window=rng.choice([1, 2, 3]))
            if len(t.leaves()) < gp * n:
                hits += 1
                assert len(find_bare_paths(t, ell)) >= gp * n
        assert hits > 20


class TestSplitCoverProperties:
    def test_random_corpus(self):
        rng = random.Random(23)
        for _ in range(250):
            n = rng.randint(6, 150)
            style = rng.randrange(3)
            if style == 0:
                t = random_attachment_tree(n, rng)
            elif style == 1:
                t = random_attachment_tree(n, rng, window=rng.randint(1, 6))
            else:
                t = preferential_tree(n, rng)
            k = rng.randint(2, max(2, n // 2))
            if n >= 2 * k:
                va, vb = small_subtree_split(t, k)
                assert k <= len(va) < 2 * k
                assert len(set(va) & set(vb)) <= 1
                assert set(va) | set(vb) == set(range(n))
                assert induces_subtree(t, va) and induces_subtree(t, vb)
            parts = subtree_cover(t, k)
            assert len(parts) <= math.ceil(n / (k - 1)) + 1
            assert all(len(p) < 2 * k for p in parts)
            assert set().union(*map(set, parts)) == set(range(n))
            assert all(induces_subtree(t, p) for p in parts)


class TestGenerators:
    def test_comb_sizes(self):
        t = comb_tree(100, 5, 4)
        assert t.n == 100 and t.max_degree() <= 3

    def test_broom(self):
        t = broom_tree(60, 10, 7)
        assert t.n == 60
        assert t.degree(9) == 8  # hub: handle neighbor plus fan

    def test_double_broom(self):
        t = double_broom_tree(600, 14, 14, drop=2)
        assert t.n == 600
        assert t.max_degree() == 15
        assert len(t.leaves()) == 2 * 14 * 14 - 2

    def test_caterpillar_explicit_legs(self):
        legs = [2, 0, 3, 1]
        t = caterpillar_tree(10, 4, legs=legs)
        assert t.n == 10
        assert [t.degree(v) - len([w for w in t.adj[v] if w < 4])
                for v in range(4)] == legs

    def test_caterpillar_run(self):
        t = caterpillar_tree(30, 20, run=range(5, 15), max_legs=2)
        parents = set(t.leaf_neighbors())
        assert set(range(5, 15)) <= parents

    def test_capped_attachment(self):
        rng = random.Random(3)
        t = capped_attachment_tree(400, rng, 5)
        assert t.max_degree() <= 5

    def test_relabel_preserves_shape(self):
        rng = random.Random(9)
        t = double_broom_tree(120, 5, 5)
        s = relabel_tree(t, rng)
        assert sorted(map(s.degree, range(s.n))) == sorted(map(t.degree, range(t.n)))


class TestClassify:
    def test_degree_guard(self):
        with pytest.raises(DegreeBoundViolated):
            classify_tree(star_tree(40), desk_params(d=10))

    def test_path_is_bare_paths_case(self):
        got = classify_tree(path_tree(600), desk_params())
        assert isinstance(got, BarePathsCase)
        assert len(got.paths) >= 6
        assert all(len(p) == 68 for p in got.paths)

    def test_comb_is_bare_paths_case(self):
        t = comb_tree(600, 70, 70)
        got = classify_tree(t, desk_params())
        assert isinstance(got, BarePathsCase)
        t2 = relabel_tree(t, random.Random(5))
        assert isinstance(classify_tree(t2, desk_params()), BarePathsCase)

    def test_double_broom_is_leaves_case(self):
        t = double_broom_tree(600, 14, 14, drop=2)
        got = classify_tree(t, desk_params())
        assert isinstance(got, LeavesCase)
        assert len(got.n1) == 14
        assert len(got.tprime) <= 15
        assert induces_subtree(t, got.tprime)
        parents = set(t.leaf_neighbors())
        assert set(got.n1) <= parents and set(got.n1) <= set(got.tprime)

    def test_leaves_case_survives_relabel(self):
        t = relabel_tree(double_broom_tree(600, 14, 14), random.Random(17))
        got = classify_tree(t, desk_params())
        assert isinstance(got, LeavesCase)
        assert len(got.n1) == 14
        assert set(got.n1) <= set(t.leaf_neighbors())

    def test_caterpillar_run_is_leaves_case(self):
        # 15 spine vertices carry 13 legs each, the rest alternate 2 legs
        spine = 210
        legs = [0] * spine
        for i in range(100, 115):
            legs[i] = 13
        budget = 600 - spine - sum(legs)
        pos = 0
        while budget > 0 and pos < spine:
            if not 100 <= pos < 115:
                take = min(2, budget)
                legs[pos] = take
                budget -= take
            pos += 2
        legs[0] += budget
        t = caterpillar_tree(600, spine, legs=legs)
        got = classify_tree(t, desk_params())
        assert isinstance(got, LeavesCase)
        assert len(got.n1) == 14
        assert induces_subtree(t, got.tprime)

    def test_dichotomy_failure_reports_both(self):
        # star-ish tree, tiny leaf count relative to the floor
        t = path_tree(300)
        with pytest.raises(InvalidParameter, match="bare paths"):
            classify_tree(t, desk_params(gamma=0.5))
