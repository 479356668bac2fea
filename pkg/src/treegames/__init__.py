"""Positional-game engine and tree-embedding toolkit.

The package has three layers:

* a game engine for Maker-Breaker, Waiter-Client, Client-Waiter and
  Avoider-Enforcer play on arbitrary finite boards (:mod:`treegames.game`),
  with potential-function strategies and pairing plans
  (:mod:`treegames.strategies`);
* graph machinery for embedding every bounded-degree spanning tree into one
  host graph: subtree decomposition (:mod:`treegames.trees`), leaf-by-leaf
  extension with alternating-path repair and star matchings
  (:mod:`treegames.embedding`), and bare-path routing through clique
  reservoirs (:mod:`treegames.routing`);
* full builder players that run the two-stage construction as Maker or
  Waiter against an adversary and emit a checkable certificate
  (:mod:`treegames.players`, :mod:`treegames.universality`).
"""

from .errors import TreegamesError
from .game import (
    Board,
    GameState,
    Move,
    Outcome,
    Role,
    Rules,
    Transcript,
    WinningFamily,
    apply_move,
    brute_force_winner,
    legal_moves,
    new_game,
    outcome,
    replay,
    solve_position,
    winner_role,
)
from .graphs import Graph

__version__ = "0.1.0"

__all__ = [
    "Board",
    "GameState",
    "Graph",
    "Move",
    "Outcome",
    "Role",
    "Rules",
    "Transcript",
    "TreegamesError",
    "WinningFamily",
    "apply_move",
    "brute_force_winner",
    "legal_moves",
    "new_game",
    "outcome",
    "replay",
    "solve_position",
    "winner_role",
    "__version__",
]
