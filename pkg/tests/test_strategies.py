import random
from fractions import Fraction

import pytest

from treegames.errors import (
    GameOver,
    InvalidConfiguration,
    PairingViolated,
    PreconditionUnmet,
)
from treegames.game import (
    Board,
    Move,
    Outcome,
    Role,
    Rules,
    WinningFamily,
    apply_move,
    new_game,
    outcome,
)
from treegames.graphs import Graph
from treegames.strategies import (
    DegreeScratch,
    PairingPlan,
    PotentialFamilyState,
    degree_game_strategy,
    es_blocker_move,
    es_criterion_value,
    es_potential,
    min_degree_strategy,
    multistage_precondition,
    multistage_strategy,
    pairing_responder,
    second_player_criterion_value,
    second_player_transversal_move,
    wc_transversal_move,
)

from _walks import (
    hit_by_builder,
    random_family,
    walk_ae_enforcer,
    walk_cw_client,
    walk_mb_blocker,
    walk_wc_waiter,
)


def fam(elements, sets, rules=Rules.MB, bias=1):
    board = Board(elements)
    return new_game(board, rules, bias), WinningFamily(board, sets)


class TestPotential:
    def test_empty_family_is_zero(self):
        st, family = fam("abc", [])
        assert es_potential(st, family) == 0

    def test_fresh_triple(self):
        st, family = fam("abc", [{"a", "b", "c"}])
        assert es_potential(st, family) == Fraction(1, 8)
        assert es_criterion_value(family) == Fraction(1, 4)

    def test_two_pairs_criterion_is_one(self):
        st, family = fam("abcd", [{"a", "b"}, {"c", "d"}])
        assert es_criterion_value(family) == 1
        assert second_player_criterion_value(family) == Fraction(1, 2)

    def test_dead_sets_drop_out(self):
        st, family = fam("abcd", [{"a", "b"}, {"c", "d"}])
        apply_move(st, Move(Role.MAKER, ("a",)))
        apply_move(st, Move(Role.BREAKER, ("c",)))
        # {c,d} is dead; {a,b} has one free element
        assert es_potential(st, family) == Fraction(1, 2)

    def test_completion_reaches_one(self):
        st, family = fam("abc", [{"a", "b"}])
        apply_move(st, Move(Role.MAKER, ("a",)))
        apply_move(st, Move(Role.BREAKER, ("c",)))
        apply_move(st, Move(Role.MAKER, ("b",)))
        assert es_potential(st, family) == 1

    def test_builder_role_flips_perspective(self):
        st, family = fam("abcd", [{"a", "b"}], Rules.WC)
        apply_move(st, Move(Role.WAITER, ("a", "c")))
        apply_move(st, Move(Role.CLIENT, ("a",)))
        # from Waiter's side the set died when Client hit it
        assert es_potential(st, family, builder_role=Role.WAITER) == 0
        # from Client's side it is alive with one free element
        assert es_potential(st, family, builder_role=Role.CLIENT) == Fraction(1, 2)


class TestBlockerMove:
    def test_takes_singleton(self):
        st, family = fam("ab", [{"a"}])
        apply_move(st, Move(Role.MAKER, ("b",)))
        assert es_blocker_move(st, family) == "a"

    def test_tie_breaks_low(self):
        st, family = fam("abc", [{"a", "b", "c"}])
        apply_move(st, Move(Role.MAKER, ("a",)))
        assert es_blocker_move(st, family) == "b"

    def test_targets_heaviest_element(self):
        st, family = fam("abcde", [{"a", "b"}, {"c", "d", "e"}])
        apply_move(st, Move(Role.MAKER, ("a",)))
        # the pair through a is one move from completion (weight 1/2); the
        # triple's elements weigh 1/8 each
        assert es_blocker_move(st, family) == "b"

    def test_no_free_element(self):
        st, family = fam("ab", [{"a", "b"}])
        apply_move(st, Move(Role.MAKER, ("a",)))
        apply_move(st, Move(Role.BREAKER, ("b",)))
        with pytest.raises(GameOver):
            es_blocker_move(st, family)

    def test_blocks_random_corpus(self):
        rng = random.Random(7)
        for _ in range(150):
            board, family = random_family(rng, 10, 4, criterion=lambda s: s - 1)
            assert walk_mb_blocker(board, family), \
                f"blocker lost on {[tuple(sorted(f)) for f in family.sets]}"

    def test_potential_monotone_across_rounds(self):
        rng = random.Random(11)
        for _ in range(50):
            board, family = random_family(rng, 9, 4, criterion=lambda s: s - 1)
            st = new_game(board, Rules.MB)
            # maker opens at random, then rounds go blocker rule / maker random
            free = st.free_ids()
            apply_move(st, Move(Role.MAKER, (board.elements[rng.choice(free)],)))
            while outcome(st, family) == Outcome.ONGOING and not st.finished:
                before = es_potential(st, family)
                apply_move(st, Move(Role.BREAKER, (es_blocker_move(st, family),)))
                if st.finished or outcome(st, family) != Outcome.ONGOING:
                    assert es_potential(st, family) <= before
                    break
                free = st.free_ids()
                apply_move(st, Move(Role.MAKER, (board.elements[rng.choice(free)],)))
                assert es_potential(st, family) <= before


class TestWaiterOffer:
    def test_single_pair_offered_whole(self):
        st, family = fam("ab", [{"a", "b"}], Rules.WC)
        assert set(wc_transversal_move(st, family)) == {"a", "b"}

    def test_requires_wc(self):
        st, family = fam("abc", [{"a", "b"}])
        with pytest.raises(InvalidConfiguration):
            wc_transversal_move(st, family)

    def test_forces_transversal_random_corpus(self):
        rng = random.Random(19)
        for _ in range(150):
            board, family = random_family(rng, 9, 4, criterion=lambda s: s - 1)
            assert walk_wc_waiter(board, family), \
                f"waiter failed on {[tuple(sorted(f)) for f in family.sets]}"

    def test_candidate_cap_still_legal(self):
        els = list(range(30))
        board = Board(els)
        family = WinningFamily(board, [set(range(k, k + 8)) for k in range(0, 20, 4)])
        st = new_game(board, Rules.WC)
        offer = wc_transversal_move(st, family, candidate_cap=6)
        assert len(set(offer)) == 2


class TestSecondPlayerMoves:
    def test_cw_client_takes_needed_element(self):
        st, family = fam("abc", [{"a"}], Rules.CW)
        apply_move(st, Move(Role.WAITER, ("a", "b")))
        assert second_player_transversal_move(st, family) == "a"

    def test_cw_requires_pending_offer(self):
        st, family = fam("abc", [{"a"}], Rules.CW)
        with pytest.raises(InvalidConfiguration):
            second_player_transversal_move(st, family)

    def test_cw_client_hits_all_random_corpus(self):
        rng = random.Random(23)
        for _ in range(40):
            board, family = random_family(rng, 8, 3, criterion=lambda s: s)
            assert walk_cw_client(board, family), \
                f"client missed a set on {[tuple(sorted(f)) for f in family.sets]}"

    def test_ae_enforcer_avoids_swallowing(self):
        rng = random.Random(29)
        for _ in range(60):
            board, family = random_family(rng, 8, 3, criterion=lambda s: s)
            assert walk_ae_enforcer(board, family), \
                f"enforcer swallowed a set on {[tuple(sorted(f)) for f in family.sets]}"

    def test_liveness_without_criterion(self):
        # no guarantee, but a legal move must still come back
        st, family = fam("ab", [{"a"}], Rules.CW)
        apply_move(st, Move(Role.WAITER, ("a", "b")))
        assert second_player_transversal_move(st, family) in ("a", "b")


class TestPairing:
    def test_partner_response(self):
        st, _ = fam("abcd", [])
        plan = PairingPlan([("a", "b")], Role.BREAKER)
        apply_move(st, Move(Role.MAKER, ("a",)))
        assert pairing_responder(plan, st, "a") == "b"

    def test_outside_elements_pass(self):
        st, _ = fam("abcd", [])
        plan = PairingPlan([("a", "b")], Role.BREAKER)
        apply_move(st, Move(Role.MAKER, ("c",)))
        assert pairing_responder(plan, st, "c") is None

    def test_violation_detected(self):
        st, _ = fam("abcd", [])
        plan = PairingPlan([("a", "b")], Role.BREAKER)
        apply_move(st, Move(Role.MAKER, ("a",)))
        apply_move(st, Move(Role.BREAKER, ("c",)))
        apply_move(st, Move(Role.MAKER, ("b",)))
        with pytest.raises(PairingViolated):
            pairing_responder(plan, st, "b")

    def test_overlapping_pairs_rejected(self):
        with pytest.raises(InvalidConfiguration):
            PairingPlan([("a", "b"), ("b", "c")], Role.BREAKER)

    def test_simulation_guarantee(self):
        rng = random.Random(31)
        for _ in range(100):
            n = rng.randint(4, 12) * 2
            els = list(range(n))
            rng.shuffle(els)
            pairs = [(els[2 * i], els[2 * i + 1]) for i in range(n // 4)]
            board = Board(range(n))
            plan = PairingPlan(pairs, Role.BREAKER)
            st = new_game(board, Rules.MB)
            while not st.finished:
                free = st.free_ids()
                mv = board.elements[rng.choice(free)]
                apply_move(st, Move(Role.MAKER, (mv,)))
                if st.finished:
                    break
                reply = pairing_responder(plan, st, mv)
                if reply is None:
                    # play any free element outside untouched pairs first
                    free = [board.elements[i] for i in st.free_ids()]
                    safe = [e for e in free
                            if e not in plan.partner
                            or st.owner_of(plan.partner[e]) != 0]
                    reply = (safe or free)[0]
                apply_move(st, Move(Role.BREAKER, (reply,)))
            for a, b in pairs:
                assert 2 in (st.owner_of(a), st.owner_of(b))


def play_mb_edge_game(host, maker_move, breaker_move, bias=1):
    board = Board(host.sorted_edges())
    st = new_game(board, Rules.MB, bias)
    scratch = DegreeScratch()
    while not st.finished:
        if st.turn == Role.MAKER:
            apply_move(st, Move(Role.MAKER, (maker_move(st, scratch),)))
        else:
            apply_move(st, Move(Role.BREAKER, (breaker_move(st),)))
    return st


def greedy_isolating_breaker(st):
    """Attack the vertex where Maker is weakest by eating its free edges."""
    els = st.board.elements
    own = st.ownership
    mdeg = {}
    for i, e in enumerate(els):
        if own[i] == 1:
            mdeg[e[0]] = mdeg.get(e[0], 0) + 1
            mdeg[e[1]] = mdeg.get(e[1], 0) + 1
    free = [els[i] for i in st.free_ids()]
    return min(free, key=lambda e: (min(mdeg.get(e[0], 0), mdeg.get(e[1], 0)),
                                    e[0], e[1]))


def maker_degrees(st, n):
    deg = dict.fromkeys(range(n), 0)
    els = st.board.elements
    for i, e in enumerate(els):
        if st.ownership[i] == 1:
            deg[e[0]] += 1
            deg[e[1]] += 1
    return deg


class TestDegreeStrategies:
    def test_k5_all_breaker_lines(self):
        host = Graph.complete(5)
        board = Board(host.sorted_edges())

        def rec(st, scratch):
            if st.finished:
                return min(maker_degrees(st, 5).values()) >= 1
            if st.turn == Role.MAKER:
                mv = min_degree_strategy(host, st, scratch)
                nxt = st.copy()
                apply_move(nxt, Move(Role.MAKER, (mv,)))
                return rec(nxt, None)
            for i in st.free_ids():
                nxt = st.copy()
                apply_move(nxt, Move(Role.BREAKER, (board.elements[i],)))
                if not rec(nxt, None):
                    return False
            return True

        assert rec(new_game(board, Rules.MB), None)

    def test_k9_vs_isolating_breaker(self):
        host = Graph.complete(9)
        for seed in range(20):
            st = play_mb_edge_game(
                host,
                lambda s, sc: min_degree_strategy(host, s, sc),
                greedy_isolating_breaker,
            )
            assert min(maker_degrees(st, 9).values()) >= 2

    def test_single_edge_host(self):
        host = Graph(2)
        host.add_edge(0, 1)
        board = Board(host.sorted_edges())
        st = new_game(board, Rules.MB)
        assert min_degree_strategy(host, st) == (0, 1)

    def test_degree_game_empty_vertex_set(self):
        st, _ = fam([(0, 1)], [])
        assert degree_game_strategy(st, []) is None

    def test_degree_game_floor_n30(self):
        n = 30
        host = Graph.complete(n)
        board = Board(host.sorted_edges())
        st = new_game(board, Rules.MB, bias=2)
        scratch = DegreeScratch()
        while not st.finished:
            if st.turn == Role.MAKER:
                mv = degree_game_strategy(st, range(n), scratch)
                apply_move(st, Move(Role.MAKER, (mv,)))
            else:
                apply_move(st, Move(Role.BREAKER, (greedy_isolating_breaker(st),)))
        assert min(maker_degrees(st, n).values()) >= 4


class TestMultistage:
    def test_precondition(self):
        board = Board(range(40))
        family = WinningFamily(board, [set(range(40))])
        assert multistage_precondition(family, 0.5)
        small = WinningFamily(board, [{0, 1}, {2, 3}])
        assert not multistage_precondition(small, 0.1)
        st = new_game(board, Rules.MB)
        with pytest.raises(PreconditionUnmet):
            multistage_strategy(st, small, 0.1, strict=True)

    def test_single_whole_board_set(self):
        board = Board(range(40))
        family = WinningFamily(board, [set(range(40))])
        st = new_game(board, Rules.MB)
        rng = random.Random(3)
        while not st.finished:
            if st.turn == Role.MAKER:
                apply_move(st, Move(Role.MAKER,
                                    (multistage_strategy(st, family, 0.5),)))
            else:
                free = st.free_ids()
                apply_move(st, Move(Role.BREAKER,
                                    (board.elements[rng.choice(free)],)))
        assert len(st.builder_ids()) == 20

    def test_two_disjoint_sets(self):
        board = Board(range(60))
        sets = [set(range(30)), set(range(30, 60))]
        family = WinningFamily(board, sets)
        st = new_game(board, Rules.MB)

        def adversary(s):
            # mirror the weight rule to fight the balance
            free = s.free_ids()
            counts = [sum(1 for i in f if s.ownership[i] == 1) for f in family.sets]
            target = sets[counts.index(max(counts))]
            ids = [i for i in free if board.elements[i] in target]
            return board.elements[(ids or free)[0]]

        while not st.finished:
            if st.turn == Role.MAKER:
                apply_move(st, Move(Role.MAKER,
                                    (multistage_strategy(st, family, 0.4),)))
            else:
                apply_move(st, Move(Role.BREAKER, (adversary(st),)))
        for f in family.sets:
            got = sum(1 for i in f if st.ownership[i] == 1)
            assert got >= 3

    def test_random_families_meet_share(self):
        rng = random.Random(41)
        for trial in range(60):
            n = rng.randint(30, 60)
            board = Board(range(n))
            delta = rng.choice([0.4, 0.5, 0.6])
            k = rng.randint(1, 3)
            sets = []
            for _ in range(k):
                size = rng.randint(25, n)
                sets.append(set(rng.sample(range(n), size)))
            family = WinningFamily(board, sets)
            if not multistage_precondition(family, delta):
                continue
            st = new_game(board, Rules.MB)
            greedy = trial % 2 == 0
            while not st.finished:
                if st.turn == Role.MAKER:
                    apply_move(st, Move(Role.MAKER,
                                        (multistage_strategy(st, family, delta),)))
                else:
                    free = st.free_ids()
                    if greedy:
                        pick = max(free, key=lambda i: sum(
                            1 for f in family.sets if i in f))
                    else:
                        pick = rng.choice(free)
                    apply_move(st, Move(Role.BREAKER, (board.elements[pick],)))
            for f in family.sets:
                got = sum(1 for i in f if st.ownership[i] == 1)
                assert got >= (0.5 - delta) * len(f)
