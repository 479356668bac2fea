"""Potential-function strategies, pairing plans, and degree-forcing rules.

The potential of a family against a designated builder side is

    sum over sets with no opposing element of 2^(-(free elements in set))

It reaches 1 exactly when some set is fully builder-owned, so a blocker who
keeps it below 1 blocks every set, and the start value bounds what either
side can force.  ``es_blocker_move``, ``wc_transversal_move`` and
``second_player_transversal_move`` are the claim / offer / pick instances of
the same descent rule: move so the worst resulting potential is smallest,
breaking ties toward lower element ids so replays are deterministic.

Degree-forcing rules (``min_degree_strategy``, ``degree_game_strategy``) are
deficit-greedy: play at the vertex where the opponent's lead is largest.
``multistage_strategy`` claims a (1/2 - delta) share of every target set by
exponential-weight descent.  Guarantees for these are enforced by simulation
tests, not assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (
    GameOver,
    InvalidConfiguration,
    PairingViolated,
    PreconditionUnmet,
)
from .game import (
    BLOCKER,
    BUILDER,
    BUILDER_ROLE,
    FREE,
    Element,
    GameState,
    Role,
    Rules,
    WinningFamily,
)
from .graphs import Graph
from .pairdeg import PairDegreePlaybook, StageReport, wc_pair_degree_strategy

__all__ = [
    "DegreeScratch",
    "PairDegreePlaybook",
    "PairingPlan",
    "StageReport",
    "degree_game_strategy",
    "es_blocker_move",
    "es_criterion_value",
    "es_potential",
    "min_degree_strategy",
    "multistage_precondition",
    "multistage_strategy",
    "pairing_responder",
    "second_player_criterion_value",
    "second_player_transversal_move",
    "wc_pair_degree_strategy",
    "wc_transversal_move",
]


def _half_pow(k: int) -> Fraction:
    return Fraction(1, 1 << k) if k >= 0 else Fraction(1 << (-k), 1)


class PotentialFamilyState:
    """Alive flags and free counts for a family, from a builder's viewpoint.

    A set is alive while the side opposing ``builder_role`` owns none of its
    elements; its weight is 2^(-free).  The object is a snapshot; callers
    re-derive it per move (family sizes in this package keep that cheap).
    """

    def __init__(self, state: GameState, family: WinningFamily,
                 builder_role: Optional[Role] = None):
        role = builder_role if builder_role is not None else BUILDER_ROLE[state.rules]
        self.builder_side = state.side_of_role(role)
        self.opponent_side = BLOCKER if self.builder_side == BUILDER else BUILDER
        own = state.ownership
        self.sets: List[Tuple[int, ...]] = []
        self.free: List[int] = []
        self.alive: List[bool] = []
        self.member: Dict[int, List[int]] = {}
        for j, f in enumerate(family.sets):
            ids = tuple(sorted(f))
            self.sets.append(ids)
            self.free.append(sum(1 for i in ids if own[i] == FREE))
            self.alive.append(all(own[i] != self.opponent_side for i in ids))
            for i in ids:
                self.member.setdefault(i, []).append(j)

    def potential(self) -> Fraction:
        total = Fraction(0)
        for j, ids in enumerate(self.sets):
            if self.alive[j]:
                total += _half_pow(self.free[j])
        return total

    def weight_of(self, element_id: int) -> Fraction:
        """Total weight of alive sets through the element."""
        total = Fraction(0)
        for j in self.member.get(element_id, ()):
            if self.alive[j]:
                total += _half_pow(self.free[j])
        return total

    def shared_weight(self, a: int, b: int) -> Fraction:
        """Total weight of alive sets containing both elements."""
        total = Fraction(0)
        sets_b = set(self.member.get(b, ()))
        for j in self.member.get(a, ()):
            if self.alive[j] and j in sets_b:
                total += _half_pow(self.free[j])
        return total


def es_potential(state: GameState, family: WinningFamily,
                 builder_role: Optional[Role] = None) -> Fraction:
    """Potential of ``family`` for the builder side (default per variant)."""
    return PotentialFamilyState(state, family, builder_role).potential()


def es_criterion_value(family: WinningFamily) -> Fraction:
    """sum of 2^(-|F|+1); below 1 the blocker / Waiter guarantees hold."""
    return sum((_half_pow(len(f) - 1) for f in family.sets), Fraction(0))


def second_player_criterion_value(family: WinningFamily) -> Fraction:
    """sum of 2^(-|F|); below 1 the choosing-side guarantees hold."""
    return sum((_half_pow(len(f)) for f in family.sets), Fraction(0))


def es_blocker_move(state: GameState, family: WinningFamily) -> Element:
    """Blocker's claim: the free element of maximum alive weight.

    Claiming it kills every alive set through it, the largest possible
    potential drop.  If the criterion held when the blocker started playing
    this rule, every set ends with a blocker element.
    """
    free = state.free_ids()
    if not free:
        raise GameOver("no free element to claim")
    pot = PotentialFamilyState(state, family)
    best = max(free, key=lambda i: (pot.weight_of(i), -i))
    return state.board.elements[best]


def _top_candidates(pot: PotentialFamilyState, free: Sequence[int],
                    cap: int) -> List[int]:
    if len(free) <= cap:
        return list(free)
    ranked = sorted(free, key=lambda i: (-pot.weight_of(i), i))
    return ranked[:cap]


def wc_transversal_move(state: GameState, family: WinningFamily,
                        candidate_cap: int = 24) -> Tuple[Element, Element]:
    """Waiter's offer that forces Client onto every set.

    Scores a pair {x, y} by the worse of the two resulting potentials
    (Client keeps the pick, the other element comes back to Waiter and
    doubles its unhit sets): potential + |w(x) - w(y)| - shared(x, y).
    Minimizing that keeps the potential below 1/2 whenever the start
    criterion held, and no unhit set can then die entirely on Waiter's
    hands.  On boards larger than ``candidate_cap`` free elements, offers
    are drawn from the heaviest elements only.
    """
    if state.rules != Rules.WC:
        raise InvalidConfiguration("offer rule requires Waiter-Client play")
    if state.pending_offer:
        raise InvalidConfiguration("an offer is already pending")
    free = state.free_ids()
    if len(free) < 2:
        raise GameOver("leftover rule applies; no offer to choose")
    pot = PotentialFamilyState(state, family, builder_role=Role.WAITER)
    cands = _top_candidates(pot, free, candidate_cap)
    w = {i: pot.weight_of(i) for i in cands}
    best_pair = None
    best_score = None
    for ai in range(len(cands)):
        for bi in range(ai + 1, len(cands)):
            a, b = cands[ai], cands[bi]
            score = abs(w[a] - w[b]) - pot.shared_weight(a, b)
            key = tuple(sorted((a, b)))
            if best_score is None or score < best_score or \
                    (score == best_score and key < best_pair):
                best_score = score
                best_pair = key
    els = state.board.elements
    return els[best_pair[0]], els[best_pair[1]]


def second_player_transversal_move(state: GameState,
                                   family: WinningFamily) -> Element:
    """Potential-descent pick for the side that receives elements.

    Client-Waiter: Client keeps the pending element whose keep leaves the
    smallest potential over sets he has not hit yet (kept elements kill
    sets, returned elements double them).  Kept below 1, the potential
    certifies a Client transversal.

    Avoider-Enforcer: the mover claims the free element of least weight
    against the family of sets the opponent has not touched; small weight
    means little doubling toward a fully self-owned set.
    """
    els = state.board.elements
    if state.rules == Rules.CW:
        if not state.pending_offer:
            raise InvalidConfiguration("no pending offer for Client to pick from")
        pot = PotentialFamilyState(state, family, builder_role=Role.WAITER)
        offer = state.pending_offer
        best = None
        best_phi = None
        for x in offer:
            # keep x: sets through x die; other offered elements go to
            # Waiter and halve the free count of their sets
            phi = Fraction(0)
            for j, ids in enumerate(pot.sets):
                if not pot.alive[j] or x in ids:
                    continue
                others = sum(1 for y in offer if y != x and y in ids)
                phi += _half_pow(pot.free[j] - others)
            if best_phi is None or phi < best_phi or \
                    (phi == best_phi and x < best):
                best_phi = phi
                best = x
        return els[best]
    if state.rules == Rules.AE:
        free = state.free_ids()
        if not free:
            raise GameOver("no free element to claim")
        pot = PotentialFamilyState(state, family, builder_role=state.turn)
        best = min(free, key=lambda i: (pot.weight_of(i), i))
        return els[best]
    raise InvalidConfiguration("rule applies to Client-Waiter or Avoider-Enforcer play")


# ---------------------------------------------------------------------------
# pairing


@dataclass
class PairingPlan:
    """Disjoint element pairs served for one role: whenever the opponent
    takes one element of a pair, the served role answers with the partner,
    so every pair ends with a served-role element."""

    pairs: List[Tuple[Element, Element]]
    owner: Role
    partner: Dict[Element, Element] = field(init=False, repr=False)

    def __post_init__(self):
        self.partner = {}
        for a, b in self.pairs:
            if a == b:
                raise InvalidConfiguration("a pair needs two distinct elements")
            if a in self.partner or b in self.partner:
                raise InvalidConfiguration("pairing plan pairs must be disjoint")
            self.partner[a] = b
            self.partner[b] = a


def pairing_responder(plan: PairingPlan, state: GameState,
                      last_opponent_element: Element) -> Optional[Element]:
    """Partner of the opponent's last element, or None to play elsewhere."""
    partner = plan.partner.get(last_opponent_element)
    if partner is None:
        return None
    owner_side = state.side_of_role(plan.owner)
    status = state.owner_of(partner)
    if status == FREE:
        return partner
    if status == owner_side:
        return None
    raise PairingViolated(
        f"pair ({last_opponent_element!r}, {partner!r}) lost both elements")


# ---------------------------------------------------------------------------
# degree forcing


class DegreeScratch:
    """Match-local incremental degree bookkeeping for one claim game."""

    def __init__(self):
        self.seen = 0
        self.builder_deg: Dict[int, int] = {}
        self.blocker_deg: Dict[int, int] = {}

    def sync(self, state: GameState) -> None:
        hist = state.history
        while self.seen < len(hist):
            mv = hist[self.seen]
            self.seen += 1
            side = state.side_of_role(mv.actor)
            deg = self.builder_deg if side == BUILDER else self.blocker_deg
            for e in mv.elements:
                u, v = e
                deg[u] = deg.get(u, 0) + 1
                deg[v] = deg.get(v, 0) + 1


def _deficit_edge(state: GameState, vertices: Sequence[int],
                  scratch: Optional[DegreeScratch]) -> Optional[Element]:
    """Free edge at the vertex where the blocker leads the builder most."""
    if scratch is None:
        scratch = DegreeScratch()
    scratch.sync(state)
    bd, kd = scratch.builder_deg, scratch.blocker_deg

    free_at: Dict[int, List[Tuple[int, int]]] = {}
    els = state.board.elements
    own = state.ownership
    vset = set(vertices)
    for i, e in enumerate(els):
        if own[i] != FREE:
            continue
        u, v = e
        if u in vset and v in vset:
            free_at.setdefault(u, []).append(e)
            free_at.setdefault(v, []).append(e)
    if not free_at:
        return None

    def deficit(v: int) -> int:
        return kd.get(v, 0) - bd.get(v, 0)

    v = max(free_at, key=lambda x: (deficit(x), -x))
    edge = max(free_at[v], key=lambda e: (deficit(e[0] + e[1] - v), -(e[0] + e[1] - v)))
    return edge


def min_degree_strategy(host: Graph, state: GameState,
                        scratch: Optional[DegreeScratch] = None) -> Element:
    """Maker's next edge toward min degree floor(delta(host)/4).

    Deficit-greedy: play at the vertex of maximum blocker-minus-builder
    degree (ties to the lowest vertex id), along the free edge whose other
    endpoint has the largest deficit.
    """
    edge = _deficit_edge(state, range(host.n), scratch)
    if edge is None:
        raise GameOver("no free edge remains on the host")
    return edge


def degree_game_strategy(state: GameState, vertex_set: Sequence[int],
                         scratch: Optional[DegreeScratch] = None) -> Optional[Element]:
    """Maker's next edge in the (1:2) degree game on a clique over
    ``vertex_set``; same deficit rule, None when no playable edge remains."""
    if not vertex_set:
        return None
    return _deficit_edge(state, vertex_set, scratch)


# ---------------------------------------------------------------------------
# fraction claiming


def multistage_precondition(family: WinningFamily, delta: float) -> bool:
    """min |F| > 4 delta^-2 ln |family|; below this no share guarantee."""
    import math
    if not family.sets:
        return True
    k = min(len(f) for f in family.sets)
    return k > 4.0 * delta ** -2 * math.log(len(family.sets))


def multistage_strategy(state: GameState, family: WinningFamily, delta: float,
                        strict: bool = False) -> Element:
    """Maker's claim toward a (1/2 - delta) share of every set.

    Exponential-weight descent: each set weighs (1+delta)^(opponent claims
    minus own claims); claim the free element on the heaviest total.  The
    weight of a set Maker falls behind on grows geometrically, so the rule
    rebalances before any set's share is lost.
    """
    if strict and not multistage_precondition(family, delta):
        raise PreconditionUnmet(
            "smallest set is too small for the requested share guarantee")
    if not (0 < delta < 1):
        raise InvalidConfiguration("delta must lie in (0, 1)")
    free = state.free_ids()
    if not free:
        raise GameOver("no free element to claim")
    own = state.ownership
    builder = BUILDER
    base = 1.0 + delta
    weights = []
    for f in family.sets:
        lead = 0
        for i in f:
            if own[i] == BLOCKER:
                lead += 1
            elif own[i] == builder:
                lead -= 1
        weights.append(base ** lead)
    score: Dict[int, float] = {i: 0.0 for i in free}
    for w, f in zip(weights, family.sets):
        for i in f:
            if i in score:
                score[i] += w
    best = max(free, key=lambda i: (score[i], -i))
    return state.board.elements[best]
