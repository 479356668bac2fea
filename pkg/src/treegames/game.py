"""Positional-game state machine.

Four rule variants share one engine:

* ``MB`` (Maker-Breaker): Maker claims one element per turn, Breaker claims
  ``bias`` elements per turn (fewer on his last turn if the board runs out).
  Maker wins by fully claiming some winning set, Breaker by hitting every set.
* ``WC`` (Waiter-Client): Waiter offers ``bias + 1`` free elements, Client
  keeps exactly one and the rest go to Waiter.  If fewer than ``bias + 1``
  elements remain, they all go to Waiter.  Waiter wins if Client's elements
  end up containing a winning set.
* ``CW`` (Client-Waiter): same offer mechanics, but Client wins by completing
  a winning set, and a short leftover goes to Client.
* ``AE`` (Avoider-Enforcer, strict 1:1): both claim one element per turn,
  Avoider moving first by default.  Enforcer wins if Avoider fully claims
  some set.

The state machine tracks ownership and turn order only; winning families are
supplied to :func:`outcome` separately, so one game can be scored against
many families (as the builder players do).  Internally each element is FREE
or owned by the *builder side* (the side whose elements can complete a set:
Maker, Client, Client, Avoider respectively) or the *blocker side*;
``winner_role`` translates an outcome to the seat that wins it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Tuple

from .errors import (
    GameOver,
    IllegalMove,
    InvalidConfiguration,
    OracleBudgetExceeded,
)

Element = Hashable


class Rules(Enum):
    MB = "mb"
    WC = "wc"
    CW = "cw"
    AE = "ae"


class Role(Enum):
    MAKER = "maker"
    BREAKER = "breaker"
    WAITER = "waiter"
    CLIENT = "client"
    AVOIDER = "avoider"
    ENFORCER = "enforcer"


class Outcome(Enum):
    BUILDER_WINS = "builder-wins"
    BLOCKER_WINS = "blocker-wins"
    ONGOING = "ongoing"


FREE = 0
BUILDER = 1
BLOCKER = 2

#: seat of the builder side / blocker side per variant
BUILDER_ROLE = {Rules.MB: Role.MAKER, Rules.WC: Role.CLIENT,
                Rules.CW: Role.CLIENT, Rules.AE: Role.AVOIDER}
BLOCKER_ROLE = {Rules.MB: Role.BREAKER, Rules.WC: Role.WAITER,
                Rules.CW: Role.WAITER, Rules.AE: Role.ENFORCER}

#: seat that wins when a set is completed / when completion is ruled out
COMPLETION_WINNER = {Rules.MB: Role.MAKER, Rules.WC: Role.WAITER,
                     Rules.CW: Role.CLIENT, Rules.AE: Role.ENFORCER}
BLOCKED_WINNER = {Rules.MB: Role.BREAKER, Rules.WC: Role.CLIENT,
                  Rules.CW: Role.WAITER, Rules.AE: Role.AVOIDER}

DEFAULT_FIRST = {Rules.MB: Role.MAKER, Rules.WC: Role.WAITER,
                 Rules.CW: Role.WAITER, Rules.AE: Role.AVOIDER}


def _check_element(e: Element) -> Element:
    if isinstance(e, list):
        e = tuple(e)
    try:
        hash(e)
    except TypeError:
        raise InvalidConfiguration(f"element {e!r} is not hashable")
    return e


class Board:
    """Ordered set of distinct element identifiers.

    For graph games the identifiers are edges as sorted vertex pairs.
    """

    __slots__ = ("elements", "index")

    def __init__(self, elements: Iterable[Element]):
        self.elements: List[Element] = [_check_element(e) for e in elements]
        if not self.elements:
            raise InvalidConfiguration("board must be non-empty")
        self.index: Dict[Element, int] = {}
        for i, e in enumerate(self.elements):
            if e in self.index:
                raise InvalidConfiguration(f"duplicate board element {e!r}")
            self.index[e] = i

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, e: Element) -> bool:
        return e in self.index

    def id_of(self, e: Element) -> int:
        try:
            return self.index[e]
        except KeyError:
            raise IllegalMove(f"element {e!r} is not on the board")

    def to_list(self) -> list:
        return [list(e) if isinstance(e, tuple) else e for e in self.elements]


class WinningFamily:
    """Collection of non-empty target sets over a board's elements."""

    __slots__ = ("sets",)

    def __init__(self, board: Board, sets: Iterable[Iterable[Element]]):
        self.sets: List[FrozenSet[int]] = []
        for s in sets:
            ids = frozenset(board.id_of(_check_element(e)) for e in s)
            if not ids:
                raise InvalidConfiguration("winning sets must be non-empty")
            self.sets.append(ids)

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)


@dataclass
class Move:
    actor: Role
    elements: Tuple[Element, ...]

    def __post_init__(self):
        self.elements = tuple(_check_element(e) for e in self.elements)


@dataclass
class GameState:
    """Live game position.  Mutated in place by ``apply_move``.

    Each state is exclusively owned by one match; copy before branching.
    ``finished`` means no move remains (board exhausted), not that the
    outcome against some family is already decided.
    """

    board: Board
    rules: Rules
    bias: int
    ownership: List[int]
    turn: Role
    pending_offer: Tuple[int, ...] = ()
    claims_left: int = 0          # remaining claims in Breaker's current turn
    round_index: int = 0
    history: List[Move] = field(default_factory=list)
    finished: bool = False
    _free: int = -1               # maintained by apply_move; -1 = recompute

    # -- bookkeeping -------------------------------------------------------

    def owner_of(self, e: Element) -> int:
        return self.ownership[self.board.id_of(e)]

    def free_ids(self) -> List[int]:
        return [i for i, o in enumerate(self.ownership) if o == FREE]

    def free_count(self) -> int:
        if self._free < 0:
            self._free = sum(1 for o in self.ownership if o == FREE)
        return self._free

    def builder_ids(self) -> List[int]:
        return [i for i, o in enumerate(self.ownership) if o == BUILDER]

    def blocker_ids(self) -> List[int]:
        return [i for i, o in enumerate(self.ownership) if o == BLOCKER]

    def builder_elements(self) -> List[Element]:
        els = self.board.elements
        return [els[i] for i in self.builder_ids()]

    def blocker_elements(self) -> List[Element]:
        els = self.board.elements
        return [els[i] for i in self.blocker_ids()]

    def side_of_role(self, role: Role) -> int:
        if role == BUILDER_ROLE[self.rules]:
            return BUILDER
        if role == BLOCKER_ROLE[self.rules]:
            return BLOCKER
        raise IllegalMove(f"role {role.value} does not play under {self.rules.value}")

    def copy(self) -> "GameState":
        return GameState(
            board=self.board,
            rules=self.rules,
            bias=self.bias,
            ownership=list(self.ownership),
            turn=self.turn,
            pending_offer=self.pending_offer,
            claims_left=self.claims_left,
            round_index=self.round_index,
            history=list(self.history),
            finished=self.finished,
            _free=self._free,
        )

    def state_fields(self) -> tuple:
        return (
            tuple(self.ownership),
            self.turn,
            self.pending_offer,
            self.claims_left,
            self.round_index,
            self.finished,
        )


def new_game(board: Board, rules: Rules, bias: int = 1,
             first: Optional[Role] = None) -> GameState:
    """Start a game with all elements free.

    ``first`` overrides the default opener (Maker / Waiter / Avoider).  The
    offer variants must start with Waiter since only she has a move.
    """
    if bias < 1:
        raise InvalidConfiguration("bias must be a positive integer")
    if rules == Rules.AE and bias != 1:
        raise InvalidConfiguration("Avoider-Enforcer games are strict (1:1) only")
    turn = first if first is not None else DEFAULT_FIRST[rules]
    claims = 0
    if rules in (Rules.WC, Rules.CW):
        if turn != Role.WAITER:
            raise InvalidConfiguration("offer games must start with Waiter")
    elif rules == Rules.MB:
        if turn not in (Role.MAKER, Role.BREAKER):
            raise InvalidConfiguration(f"{turn.value} does not play Maker-Breaker")
        if turn == Role.BREAKER:
            claims = bias
    else:
        if turn not in (Role.AVOIDER, Role.ENFORCER):
            raise InvalidConfiguration(f"{turn.value} does not play Avoider-Enforcer")
    return GameState(
        board=board,
        rules=rules,
        bias=bias,
        ownership=[FREE] * len(board),
        turn=turn,
        claims_left=claims,
        _free=len(board),
    )


# ---------------------------------------------------------------------------
# outcome


def outcome(state: GameState, family: WinningFamily) -> Outcome:
    """Completion / blockage status of the position against ``family``.

    Blockage is called as soon as every set is hit in MB/WC/CW; under AE
    rules the game is only scored blocked once the board is exhausted.  An
    empty family is never completed and reports blocked at exhaustion.
    """
    own = state.ownership
    for f in family.sets:
        if all(own[i] == BUILDER for i in f):
            return Outcome.BUILDER_WINS
    if family.sets and state.rules != Rules.AE:
        if all(any(own[i] == BLOCKER for i in f) for f in family.sets):
            return Outcome.BLOCKER_WINS
    if all(o != FREE for o in own):
        return Outcome.BLOCKER_WINS
    return Outcome.ONGOING


def winner_role(state: GameState, family: WinningFamily) -> Optional[Role]:
    """Seat that wins the decided position, else None while ongoing."""
    out = outcome(state, family)
    if out == Outcome.BUILDER_WINS:
        return COMPLETION_WINNER[state.rules]
    if out == Outcome.BLOCKER_WINS:
        return BLOCKED_WINNER[state.rules]
    return None


# ---------------------------------------------------------------------------
# moves


def legal_moves(state: GameState) -> List[Move]:
    """All moves available to the side to move, in deterministic order."""
    if state.finished:
        raise GameOver("the board is exhausted")
    free = state.free_ids()
    els = state.board.elements
    r = state.rules

    if r in (Rules.MB, Rules.AE):
        return [Move(state.turn, (els[i],)) for i in free]

    # offer games
    if state.pending_offer:
        return [Move(Role.CLIENT, (els[i],)) for i in state.pending_offer]
    k = state.bias + 1
    if len(free) < k:
        recipient = Role.WAITER if r == Rules.WC else Role.CLIENT
        return [Move(recipient, tuple(els[i] for i in free))]
    return [Move(Role.WAITER, tuple(els[i] for i in combo))
            for combo in combinations(free, k)]


def _advance_round_mb(state: GameState) -> None:
    if state.turn == Role.MAKER:
        state.turn = Role.BREAKER
        state.claims_left = state.bias
    else:
        state.claims_left -= 1
        if state.claims_left == 0 or state.free_count() == 0:
            state.turn = Role.MAKER
            state.claims_left = 0
            state.round_index += 1


def apply_move(state: GameState, move: Move) -> GameState:
    """Validate and apply ``move``; returns the same (mutated) state."""
    if state.finished:
        raise GameOver("the board is exhausted")

    ids = [state.board.id_of(e) for e in move.elements]
    if len(set(ids)) != len(ids):
        raise IllegalMove("move lists an element twice")
    r = state.rules

    if r in (Rules.MB, Rules.AE):
        if move.actor != state.turn:
            raise IllegalMove(f"it is {state.turn.value}'s turn, not {move.actor.value}")
        if len(ids) != 1:
            raise IllegalMove("claim moves take exactly one element")
        i = ids[0]
        if state.ownership[i] != FREE:
            raise IllegalMove(f"element {move.elements[0]!r} is already claimed")
        state.ownership[i] = state.side_of_role(move.actor)
        state._free -= 1
        if r == Rules.MB:
            _advance_round_mb(state)
        else:
            if state.turn == Role.AVOIDER:
                state.turn = Role.ENFORCER
            else:
                state.turn = Role.AVOIDER
                state.round_index += 1
    else:
        # offer games
        if state.pending_offer:
            if move.actor != Role.CLIENT:
                raise IllegalMove("an offer is pending; it is Client's turn")
            if len(ids) != 1 or ids[0] not in state.pending_offer:
                raise IllegalMove("Client must keep exactly one offered element")
            keep = ids[0]
            state.ownership[keep] = BUILDER
            for i in state.pending_offer:
                if i != keep:
                    state.ownership[i] = BLOCKER
            state._free -= len(state.pending_offer)
            state.pending_offer = ()
            state.turn = Role.WAITER
            state.round_index += 1
        else:
            k = state.bias + 1
            if state.free_count() < k:
                # leftover round: all remaining elements to one side
                free = state.free_ids()
                recipient = Role.WAITER if r == Rules.WC else Role.CLIENT
                if move.actor != recipient:
                    raise IllegalMove(f"leftover elements go to {recipient.value}")
                if sorted(ids) != sorted(free):
                    raise IllegalMove("leftover move must take all remaining elements")
                side = BUILDER if recipient == Role.CLIENT else BLOCKER
                for i in ids:
                    state.ownership[i] = side
                state._free -= len(ids)
                state.round_index += 1
            else:
                if move.actor != Role.WAITER:
                    raise IllegalMove("it is Waiter's turn to offer")
                if len(ids) != k:
                    raise IllegalMove(f"offers take exactly {k} elements")
                for i in ids:
                    if state.ownership[i] != FREE:
                        raise IllegalMove("offered elements must be free")
                state.pending_offer = tuple(sorted(ids))
                state.turn = Role.CLIENT

    state.history.append(move)
    assert state._free >= 0
    if state._free == 0:
        state.finished = True
    return state


# ---------------------------------------------------------------------------
# transcripts


@dataclass
class Transcript:
    """Serializable record of a full or partial game."""

    rules: Rules
    bias: int
    elements: List[Element]
    moves: List[dict] = field(default_factory=list)
    first: Optional[str] = None

    @classmethod
    def from_state(cls, state: GameState) -> "Transcript":
        first = state.history[0].actor if state.history else DEFAULT_FIRST[state.rules]
        t = cls(
            rules=state.rules,
            bias=state.bias,
            elements=list(state.board.elements),
            first=first.value,
        )
        # recompute round numbers by replaying the turn structure
        replayed = new_game(state.board, state.rules, state.bias, first)
        for mv in state.history:
            t.moves.append({
                "round": replayed.round_index,
                "actor": mv.actor.value,
                "elements": list(mv.elements),
            })
            apply_move(replayed, mv)
        return t

    def to_json(self) -> str:
        def enc(e):
            return list(e) if isinstance(e, tuple) else e
        doc = {
            "rules": self.rules.value,
            "bias": self.bias,
            "first": self.first,
            "elements": [enc(e) for e in self.elements],
            "moves": [
                {"round": m["round"], "actor": m["actor"],
                 "elements": [enc(e) for e in m["elements"]]}
                for m in self.moves
            ],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        doc = json.loads(text)
        def dec(e):
            return tuple(e) if isinstance(e, list) else e
        return cls(
            rules=Rules(doc["rules"]),
            bias=int(doc["bias"]),
            first=doc.get("first"),
            elements=[dec(e) for e in doc["elements"]],
            moves=[
                {"round": int(m["round"]), "actor": m["actor"],
                 "elements": [dec(e) for e in m["elements"]]}
                for m in doc["moves"]
            ],
        )


def replay(transcript: Transcript) -> GameState:
    """Re-run a transcript from the empty position."""
    board = Board(transcript.elements)
    first = Role(transcript.first) if transcript.first else None
    state = new_game(board, transcript.rules, transcript.bias, first)
    for m in transcript.moves:
        apply_move(state, Move(Role(m["actor"]), tuple(m["elements"])))
    return state


# ---------------------------------------------------------------------------
# exact solving


def solve_position(state: GameState, family: WinningFamily,
                   budget: int = 2_000_000) -> Role:
    """Winner under optimal play from ``state``, by exhaustive search.

    Positions are memoized on ownership plus turn structure.  Raises
    :class:`OracleBudgetExceeded` once more than ``budget`` positions have
    been expanded, which keeps this oracle honest on small boards only.
    """
    memo: Dict[tuple, bool] = {}
    nodes = [0]
    rules = state.rules
    bias = state.bias
    sets = [tuple(f) for f in family.sets]
    n = len(state.board)

    def completed(own: tuple) -> bool:
        return any(all(own[i] == BUILDER for i in f) for f in sets)

    def blocked(own: tuple) -> bool:
        return bool(sets) and all(any(own[i] == BLOCKER for i in f) for f in sets)

    def exhausted(own: tuple) -> bool:
        return all(o != FREE for o in own)

    # does the side to move want completion?
    wants_completion = {
        Role.MAKER: True, Role.BREAKER: False,
        Role.WAITER: rules == Rules.WC, Role.CLIENT: rules == Rules.CW,
        Role.AVOIDER: False, Role.ENFORCER: True,
    }

    def value(own: tuple, turn: Role, claims: int, pending: tuple) -> bool:
        """True iff the builder side completes a set under optimal play."""
        if completed(own):
            return True
        if rules != Rules.AE and blocked(own):
            return False
        if exhausted(own):
            return False
        key = (own, turn, claims, pending)
        if key in memo:
            return memo[key]
        nodes[0] += 1
        if nodes[0] > budget:
            raise OracleBudgetExceeded(f"search budget of {budget} positions exceeded")
        free = [i for i in range(n) if own[i] == FREE]
        maximize = wants_completion[turn]

        if rules in (Rules.MB, Rules.AE):
            side = BUILDER if turn in (Role.MAKER, Role.AVOIDER) else BLOCKER
            results = []
            for i in free:
                nxt = list(own)
                nxt[i] = side
                if rules == Rules.MB:
                    if turn == Role.MAKER:
                        t2, c2 = Role.BREAKER, bias
                    else:
                        c2 = claims - 1
                        t2, c2 = (Role.MAKER, 0) if c2 == 0 else (Role.BREAKER, c2)
                else:
                    t2 = Role.ENFORCER if turn == Role.AVOIDER else Role.AVOIDER
                    c2 = 0
                v = value(tuple(nxt), t2, c2, ())
                if maximize and v:
                    memo[key] = True
                    return True
                if not maximize and not v:
                    memo[key] = False
                    return False
                results.append(v)
            res = any(results) if maximize else all(results)
        else:
            if pending:
                # Client chooses one offered element to keep
                results = []
                for keep in pending:
                    nxt = list(own)
                    for i in pending:
                        nxt[i] = BUILDER if i == keep else BLOCKER
                    results.append(value(tuple(nxt), Role.WAITER, 0, ()))
                client_max = wants_completion[Role.CLIENT]
                res = any(results) if client_max else all(results)
            else:
                k = bias + 1
                if len(free) < k:
                    side = BLOCKER if rules == Rules.WC else BUILDER
                    nxt = list(own)
                    for i in free:
                        nxt[i] = side
                    res = value(tuple(nxt), Role.WAITER, 0, ())
                else:
                    results = []
                    for combo in combinations(free, k):
                        v = value(own, Role.CLIENT, 0, combo)
                        if maximize and v:
                            results = [True]
                            break
                        if not maximize and not v:
                            results = [False]
                            break
                        results.append(v)
                    res = any(results) if maximize else all(results)
        memo[key] = res
        return res

    builder_completes = value(tuple(state.ownership), state.turn,
                              state.claims_left, state.pending_offer)
    if builder_completes:
        return COMPLETION_WINNER[rules]
    return BLOCKED_WINNER[rules]


def brute_force_winner(board: Board, family: WinningFamily, rules: Rules,
                       bias: int = 1, first: Optional[Role] = None,
                       budget: int = 2_000_000) -> Role:
    """Exact game value of the fresh game, via :func:`solve_position`."""
    return solve_position(new_game(board, rules, bias, first), family, budget)
