"""Exhaustive adversary walks used to verify strategy guarantees.

Each walk lets the adversary try every legal line while the side under test
follows its deterministic rule, and checks the guarantee at every leaf.
Boards stay small enough that full enumeration is cheap.
"""

from treegames.game import (
    BUILDER,
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
from treegames.strategies import (
    es_blocker_move,
    second_player_transversal_move,
    wc_transversal_move,
)


def hit_by_builder(state, family):
    own = state.ownership
    return all(any(own[i] == BUILDER for i in f) for f in family.sets)


def walk_mb_blocker(board, family):
    """All Maker lines vs the blocking rule; True iff every line is blocked."""

    def rec(state):
        out = outcome(state, family)
        if out == Outcome.BUILDER_WINS:
            return False
        if out == Outcome.BLOCKER_WINS:
            return True
        for i in state.free_ids():
            nxt = state.copy()
            apply_move(nxt, Move(Role.MAKER, (nxt.board.elements[i],)))
            if outcome(nxt, family) == Outcome.BUILDER_WINS:
                return False
            if outcome(nxt, family) != Outcome.BLOCKER_WINS and not nxt.finished:
                apply_move(nxt, Move(Role.BREAKER, (es_blocker_move(nxt, family),)))
            if not rec(nxt):
                return False
        return True

    return rec(new_game(board, Rules.MB))


def walk_wc_waiter(board, family):
    """All Client replies vs the offer rule; True iff Client always ends
    owning an element of every set."""

    def rec(state):
        if state.finished:
            return hit_by_builder(state, family)
        if state.free_count() < 2:
            # leftover goes to Waiter; any still-unhit set is lost
            nxt = state.copy()
            els = [nxt.board.elements[i] for i in nxt.free_ids()]
            apply_move(nxt, Move(Role.WAITER, tuple(els)))
            return hit_by_builder(nxt, family)
        offer = wc_transversal_move(state, family)
        for pick in offer:
            nxt = state.copy()
            apply_move(nxt, Move(Role.WAITER, offer))
            apply_move(nxt, Move(Role.CLIENT, (pick,)))
            if not rec(nxt):
                return False
        return True

    return rec(new_game(board, Rules.WC))


def walk_cw_client(board, family):
    """All Waiter offer lines vs the pick rule; True iff Client always ends
    owning an element of every set."""
    from itertools import combinations

    def rec(state):
        if state.finished:
            return hit_by_builder(state, family)
        free = state.free_ids()
        els = state.board.elements
        if len(free) < 2:
            nxt = state.copy()
            apply_move(nxt, Move(Role.CLIENT, tuple(els[i] for i in free)))
            return hit_by_builder(nxt, family)
        for combo in combinations(free, 2):
            nxt = state.copy()
            apply_move(nxt, Move(Role.WAITER, tuple(els[i] for i in combo)))
            pick = second_player_transversal_move(nxt, family)
            apply_move(nxt, Move(Role.CLIENT, (pick,)))
            if not rec(nxt):
                return False
        return True

    return rec(new_game(board, Rules.CW))


def walk_ae_enforcer(board, family):
    """All Avoider lines vs the Enforcer rule; True iff Avoider always ends
    owning an element of every set (Enforcer never swallows a whole set)."""

    def rec(state):
        if state.finished:
            return hit_by_builder(state, family)
        for i in state.free_ids():
            nxt = state.copy()
            apply_move(nxt, Move(Role.AVOIDER, (nxt.board.elements[i],)))
            if not nxt.finished:
                mv = second_player_transversal_move(nxt, family)
                apply_move(nxt, Move(Role.ENFORCER, (mv,)))
            if not rec(nxt):
                return False
        return True

    return rec(new_game(board, Rules.AE))


def random_family(rng, max_elements, max_sets, criterion=None):
    """Random hypergraph whose board is the union of its sets; optionally
    rejection-sampled until ``criterion(sizes) < 1``."""
    from fractions import Fraction

    while True:
        n = rng.randint(3, max_elements)
        k = rng.randint(1, max_sets)
        sets = []
        for _ in range(k):
            size = rng.randint(2, n)
            sets.append(tuple(sorted(rng.sample(range(n), size))))
        sets = sorted(set(sets))
        if criterion is not None:
            value = sum(Fraction(1, 2 ** criterion(len(s))) for s in sets)
            if value >= 1:
                continue
        used = sorted({e for s in sets for e in s})
        remap = {e: i for i, e in enumerate(used)}
        sets = [tuple(remap[e] for e in s) for s in sets]
        board = Board(range(len(used)))
        return board, WinningFamily(board, sets)
