import json
import random

import numpy as np
import pytest

from treegames.errors import (
    AccountingError,
    InvalidConfiguration,
    InvalidParameter,
    PartitionFailed,
)
from treegames.game import Move, Role, Rules, apply_move, new_game
from treegames.params import Params
from treegames.players import (
    BLOCKER,
    BUILDER,
    FREE,
    MatchView,
    adversary_move,
    complete_board,
    edge_id,
    maker_preparatory_partition,
    replay_match,
    run_match,
    waiter_k5_factor_subgame,
    waiter_preparatory_partition,
)

# small enough that one full match takes about a second
SMALL = Params(n=150, alpha=0.05, C0=0.2, gamma=0.01, c=0.16, K=13)


class TestEdgeIds:
    def test_matches_board_enumeration(self):
        n = 37
        board = complete_board(n)
        rng = random.Random(5)
        for _ in range(200):
            u, v = sorted(rng.sample(range(n), 2))
            assert board.elements[edge_id(n, u, v)] == (u, v)

    def test_covers_full_range(self):
        n = 23
        assert edge_id(n, 0, 1) == 0
        assert edge_id(n, n - 2, n - 1) == n * (n - 1) // 2 - 1

    def test_view_eid_unordered(self):
        view = MatchView(12)
        assert view.eid(7, 3) == view.eid(3, 7) == edge_id(12, 3, 7)


class TestMatchView:
    def test_record_is_symmetric(self):
        view = MatchView(8)
        view.record(5, 2, BUILDER)
        assert view.own[view.eid(2, 5)] == BUILDER
        assert view.own_m[2, 5] == BUILDER and view.own_m[5, 2] == BUILDER
        assert view.deg[BUILDER, 2] == 1 and view.deg[BUILDER, 5] == 1

    def test_double_claim_rejected(self):
        view = MatchView(8)
        view.record(0, 1, BUILDER)
        with pytest.raises(AccountingError):
            view.record(0, 1, BLOCKER)
        with pytest.raises(AccountingError):
            view.record(1, 0, BUILDER)


def drive_factor(eng, view, keep_first):
    """Play one part to exhaustion; keeper picks by positional policy."""
    board = complete_board(view.n)
    while (offer := eng.next_offer()) is not None:
        kept, eaten = offer if keep_first(offer) else (offer[1], offer[0])
        for e, side in ((kept, BUILDER), (eaten, BLOCKER)):
            u, v = board.elements[e]
            view.record(u, v, side)
            eng.on_edge(e, side)
    while (e := eng.leftover()) is not None:
        u, v = board.elements[e]
        view.record(u, v, BLOCKER)
        eng.on_edge(e, BLOCKER)


class TestFactorForcing:
    def test_part_size_must_divide(self):
        with pytest.raises(InvalidConfiguration, match="not divisible"):
            waiter_k5_factor_subgame(range(6), MatchView(10), "s")

    def test_cooperative_client_yields_factor(self):
        # the internal edge is always offered first; keeping it every
        # time completes both cliques without a single repair
        view = MatchView(10)
        eng = waiter_k5_factor_subgame(range(10), view, "seed:0")
        drive_factor(eng, view, keep_first=lambda off: True)
        assert eng.succeeded()
        assert eng.repairs == 0
        cliques = eng.cliques()
        assert sorted(v for c in cliques for v in c) == list(range(10))
        assert all(len(c) == 5 for c in cliques)
        for c in cliques:
            for i, u in enumerate(c):
                for w in c[i + 1:]:
                    assert view.own[view.eid(u, w)] == BUILDER

    def test_hostile_client_kills_the_part(self):
        view = MatchView(10)
        eng = waiter_k5_factor_subgame(range(10), view, "seed:0")
        drive_factor(eng, view, keep_first=lambda off: False)
        assert eng.dead
        assert not eng.succeeded()
        # grouping stays a partition even after death
        cliques = eng.cliques()
        assert sorted(v for c in cliques for v in c) == list(range(10))

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_exhaustion_invariant(self, seed):
        # once every edge is settled, survival and success coincide:
        # a live coloring has no eaten internal edge left
        rng = random.Random(seed)
        view = MatchView(10)
        eng = waiter_k5_factor_subgame(range(10), view, f"seed:{seed}")
        drive_factor(eng, view, keep_first=lambda off: rng.random() < 0.5)
        assert eng.succeeded() == (not eng.dead)


class TestPartitions:
    def _args(self):
        v2 = list(range(85, 150))
        s_star = list(range(1, 26))
        return v2, s_star

    def test_dirty_factor_board_rejected(self):
        view = MatchView(150)
        v2, s_star = self._args()
        view.record(100, 101, BLOCKER)
        with pytest.raises(InvalidConfiguration, match="claimed edges"):
            maker_preparatory_partition(view, SMALL, "s", v2, s_star, [],
                                        0, budget=2)

    def test_failure_carries_best_attempt(self):
        # (G2) asks for more factor-board edges per vertex than the
        # whole of V2 offers at this size, so the budget always runs out
        view = MatchView(150)
        v2, s_star = self._args()
        with pytest.raises(PartitionFailed) as err:
            maker_preparatory_partition(view, SMALL, "s", v2, s_star, [],
                                        0, budget=3)
        plan = err.value.best_plan
        assert plan is not None
        assert set(plan.properties) == {"G1", "G2", "G3", "G4", "G5"}
        assert not plan.properties["G2"]["held"]
        assert plan.attempts <= 3
        plan.validate_disjoint(view.own == FREE)

    def test_same_seed_same_draw(self):
        v2, s_star = self._args()
        plans = []
        for _ in range(2):
            view = MatchView(150)
            with pytest.raises(PartitionFailed) as err:
                maker_preparatory_partition(view, SMALL, "s", v2, s_star,
                                            [], 0, budget=3)
            plans.append(err.value.best_plan)
        assert np.array_equal(plans[0].board_of, plans[1].board_of)
        assert plans[0].properties == plans[1].properties

    def test_waiter_split_same_contract(self):
        view = MatchView(150)
        v2, s_star = self._args()
        with pytest.raises(PartitionFailed) as err:
            waiter_preparatory_partition(view, SMALL, "s", v2, s_star, 0,
                                         budget=3)
        plan = err.value.best_plan
        assert set(plan.properties) == {"G1", "G2", "G3", "G4"}
        plan.validate_disjoint(view.own == FREE)


class TestAdversaryMove:
    def test_claims_a_free_edge(self):
        board = complete_board(20)
        state = new_game(board, Rules.MB)
        apply_move(state, Move(Role.MAKER, ((0, 1),)))
        mv = adversary_move(state, "random", "probe")
        assert mv.actor == Role.BREAKER
        assert mv.elements[0] != (0, 1)
        apply_move(state, mv)

    def test_keeps_from_the_offer(self):
        board = complete_board(20)
        state = new_game(board, Rules.WC)
        apply_move(state, Move(Role.WAITER, ((0, 1), (2, 3))))
        mv = adversary_move(state, "pair-degree-attacker", "probe")
        assert mv.actor == Role.CLIENT
        assert mv.elements[0] in ((0, 1), (2, 3))

    def test_unknown_kind_rejected(self):
        board = complete_board(6)
        state = new_game(board, Rules.MB)
        with pytest.raises(InvalidParameter):
            adversary_move(state, "saboteur", "probe")


class TestRunMatch:
    def test_maker_pairing_rejected(self):
        with pytest.raises(InvalidConfiguration, match="cannot play Breaker"):
            run_match("maker", "pair-degree-attacker", SMALL, seed=1)

    def test_unknown_names_rejected(self):
        with pytest.raises(InvalidParameter):
            run_match("builder", "random", SMALL, seed=1)
        with pytest.raises(InvalidParameter):
            run_match("maker", "chaos", SMALL, seed=1)

    def test_maker_vs_random_conforms(self, tmp_path):
        res = run_match("maker", "random", SMALL, seed=7,
                        out_dir=str(tmp_path))
        assert res.conforming()
        assert all(r.conforms() for r in res.records)
        assert len(res.final_hash) == 64
        assert res.stats["same_board_miss"] == 0
        assert res.stats["threat_violations"] == 0

        # artifacts round-trip: replay reaches the same final board
        h, moves = replay_match(res.transcript_file)
        assert h == res.final_hash
        assert moves == SMALL.n * (SMALL.n - 1) // 2
        data = json.loads(open(res.result_file).read())
        assert data["finalHash"] == res.final_hash
        assert data["flags"] == res.flags
        assert set(data) >= {"seed", "builder", "adversary", "records",
                             "verifyReport", "stats"}
        json.loads(open(res.certificate_file).read())

    def test_maker_same_seed_same_board(self):
        a = run_match("maker", "greedy-blocker", SMALL, seed=3)
        b = run_match("maker", "greedy-blocker", SMALL, seed=3)
        assert a.final_hash == b.final_hash
        assert a.flags == b.flags
        assert a.stats == b.stats

    def test_waiter_vs_random_conforms(self):
        res = run_match("waiter", "random", SMALL, seed=7)
        assert res.conforming()
        names = [r.name for r in res.records]
        assert "matchings-processed" in names
        assert res.certificate is not None
        assert res.verify_report is not None

    def test_waiter_vs_attacker_conforms(self):
        res = run_match("waiter", "pair-degree-attacker", SMALL, seed=7)
        assert res.conforming()
        assert all(r.conforms() for r in res.records)
