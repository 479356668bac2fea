"""Waiter's perfect-matching playbook on the complete bipartite 5x5 graph.

Waiter offers the 25 edges two at a time; after 12 rounds Client holds 12
edges and the leftover edge is Waiter's.  The playbook guarantees Client's
edges contain a perfect matching however Client picks.  The sum criterion is
useless here (the matching family is too sparse), so the strategy is found
once by backtracking search over Waiter offers with an AND over Client
replies, memoized on a canonical form of the position (row and column
relabelings and transposition preserve the game), then cached as a JSON
decision tree and verified exhaustively.

Board convention: left vertices 0-4, right vertices 5-9, edges as sorted
pairs; cache children are keyed by the kept edge as "u,v".
"""

from __future__ import annotations

import json
import os
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import StrategyNotFound

LEFT = tuple(range(5))
RIGHT = tuple(range(5, 10))
EDGES: List[Tuple[int, int]] = [(u, w) for u in LEFT for w in RIGHT]
EDGE_INDEX = {e: i for i, e in enumerate(EDGES)}
FULL = (1 << 25) - 1

_DATA_PATH = os.path.join(os.path.dirname(__file__), "data", "k55_playbook.json")


def k55_board() -> List[Tuple[int, int]]:
    """The 25 edges in deterministic order."""
    return list(EDGES)


def _edge_bit(u: int, w: int) -> int:
    return 1 << (5 * u + (w - 5))


def _has_perfect_matching(mask: int) -> bool:
    """Does the edge set contain a system of 5 disjoint row-column edges?"""

    def rec(row: int, used_cols: int) -> bool:
        if row == 5:
            return True
        avail = (mask >> (5 * row)) & 0x1F & ~used_cols
        while avail:
            c = avail & -avail
            if rec(row + 1, used_cols | c):
                return True
            avail ^= c
        return False

    return rec(0, 0)


def perfect_matching(edges: Iterable[Tuple[int, int]]) -> Optional[List[Tuple[int, int]]]:
    """Five disjoint edges from the given edge set, or None."""
    mask = 0
    for u, w in edges:
        mask |= _edge_bit(u, w)

    out: List[Tuple[int, int]] = []

    def rec(row: int, used_cols: int) -> bool:
        if row == 5:
            return True
        avail = (mask >> (5 * row)) & 0x1F & ~used_cols
        for c in range(5):
            if avail & (1 << c):
                out.append((row, 5 + c))
                if rec(row + 1, used_cols | (1 << c)):
                    return True
                out.pop()
        return False

    return out if rec(0, 0) else None


def _canonical(client: int, waiter: int) -> bytes:
    """Canonical key under row/column sorting and transposition.

    Sorting rows and columns applies some relabeling, so equal keys always
    mean isomorphic positions; the memo never needs the converse.
    """

    def cells(c: int, w: int) -> List[List[int]]:
        m = []
        for r in range(5):
            row = []
            for col in range(5):
                b = 1 << (5 * r + col)
                row.append(1 if c & b else (2 if w & b else 0))
            m.append(row)
        return m

    def settle(m: List[List[int]]) -> tuple:
        for _ in range(6):
            m.sort()
            t = [list(col) for col in zip(*m)]
            t.sort()
            m2 = [list(row) for row in zip(*t)]
            if m2 == m:
                break
            m = m2
        return tuple(x for row in m for x in row)

    a = settle(cells(client, waiter))
    b = settle([list(col) for col in zip(*cells(client, waiter))])
    return bytes(min(a, b))


def _ordered_offers(client: int, waiter: int) -> List[Tuple[int, int]]:
    """Free-edge pairs, most constrained line first.

    Pairs sharing the row or column with the fewest remaining client options
    come first; they are the offers that keep every line coverable.
    """
    free = FULL & ~client & ~waiter
    avail_row = [0] * 5
    avail_col = [0] * 5
    for i in range(25):
        if (client | free) & (1 << i):
            avail_row[i // 5] += 1
            avail_col[i % 5] += 1

    free_edges = [i for i in range(25) if free & (1 << i)]
    pairs = []
    for a in range(len(free_edges)):
        for b in range(a + 1, len(free_edges)):
            i, j = free_edges[a], free_edges[b]
            same_row = i // 5 == j // 5
            same_col = i % 5 == j % 5
            if same_row:
                rank = (0, avail_row[i // 5])
            elif same_col:
                rank = (0, avail_col[i % 5])
            else:
                rank = (1, 0)
            pairs.append((rank, i, j))
    pairs.sort()
    return [(i, j) for _, i, j in pairs]


def _search(client: int, waiter: int, memo: Dict[bytes, bool]) -> bool:
    """True iff Waiter forces a Client perfect matching from here."""
    if _has_perfect_matching(client):
        return True
    if not _has_perfect_matching(client | (FULL & ~client & ~waiter)):
        return False
    free = FULL & ~client & ~waiter
    if bin(free).count("1") < 2:
        # leftover to Waiter; Client's edges are final
        return False
    key = _canonical(client, waiter)
    if key in memo:
        return memo[key]
    result = False
    for i, j in _ordered_offers(client, waiter):
        bi, bj = 1 << i, 1 << j
        if _search(client | bi, waiter | bj, memo) and \
                _search(client | bj, waiter | bi, memo):
            result = True
            break
    memo[key] = result
    return result


def _edge_key(i: int) -> str:
    u, w = EDGES[i]
    return f"{u},{w}"


def _extract(client: int, waiter: int, memo: Dict[bytes, bool]) -> dict:
    """Winning decision tree from a position Waiter wins.

    Play continues through all twelve rounds; once Client's matching is
    secured the remaining offers are the free edges in fixed order.
    """
    free = FULL & ~client & ~waiter
    if bin(free).count("1") < 2:
        return {}
    if _has_perfect_matching(client):
        i, j = [k for k in range(25) if free & (1 << k)][:2]
        bi, bj = 1 << i, 1 << j
        return {
            "offer": sorted([list(EDGES[i]), list(EDGES[j])]),
            "children": {
                _edge_key(i): _extract(client | bi, waiter | bj, memo),
                _edge_key(j): _extract(client | bj, waiter | bi, memo),
            },
        }
    for i, j in _ordered_offers(client, waiter):
        bi, bj = 1 << i, 1 << j
        if _search(client | bi, waiter | bj, memo) and \
                _search(client | bj, waiter | bi, memo):
            return {
                "offer": sorted([list(EDGES[i]), list(EDGES[j])]),
                "children": {
                    _edge_key(i): _extract(client | bi, waiter | bj, memo),
                    _edge_key(j): _extract(client | bj, waiter | bi, memo),
                },
            }
    raise StrategyNotFound("no winning offer in a position marked winning")


class K55Playbook:
    """Cached Waiter decision tree; navigate with Client's kept edges."""

    def __init__(self, tree: dict):
        self.tree = tree

    def node_for(self, picks: Sequence[Tuple[int, int]]) -> dict:
        node = self.tree
        for u, w in picks:
            if "children" not in node:
                raise StrategyNotFound(f"playbook exhausted before pick ({u},{w})")
            try:
                node = node["children"][f"{u},{w}"]
            except KeyError:
                raise StrategyNotFound(f"pick ({u},{w}) was not offered")
        return node

    def offer_for(self, picks: Sequence[Tuple[int, int]]) -> Optional[Tuple[Tuple[int, int], Tuple[int, int]]]:
        """Waiter's offer after the given Client picks; None at a leaf."""
        node = self.node_for(picks)
        if "offer" not in node:
            return None
        (a, b), (c, d) = node["offer"]
        return (a, b), (c, d)


def wc_k55_matching_strategy(cache_path: Optional[str] = None) -> K55Playbook:
    """Load the playbook, or search once and cache it."""
    path = cache_path or _DATA_PATH
    if os.path.exists(path):
        with open(path) as fh:
            return K55Playbook(json.load(fh))
    memo: Dict[bytes, bool] = {}
    if not _search(0, 0, memo):
        raise StrategyNotFound("search found no forcing strategy on the 5x5 board")
    tree = _extract(0, 0, memo)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(tree, fh, separators=(",", ":"), sort_keys=True)
    return K55Playbook(tree)


def verify_playbook(playbook: K55Playbook) -> dict:
    """Walk every Client reply line; raise if any leaf lacks a matching.

    Returns counts: leaves checked, offers seen, max depth.
    """
    stats = {"leaves": 0, "max_rounds": 0}

    def rec(node: dict, client: int, waiter: int, rounds: int) -> None:
        free = FULL & ~client & ~waiter
        if "offer" not in node:
            # leftover edge (if any) goes to Waiter
            if bin(free).count("1") > 1:
                raise StrategyNotFound("playbook stops with two or more free edges")
            if not _has_perfect_matching(client):
                raise StrategyNotFound("leaf reached with no Client perfect matching")
            stats["leaves"] += 1
            stats["max_rounds"] = max(stats["max_rounds"], rounds)
            return
        (e1, e2) = node["offer"]
        i, j = EDGE_INDEX[tuple(e1)], EDGE_INDEX[tuple(e2)]
        bi, bj = 1 << i, 1 << j
        if not (free & bi) or not (free & bj) or i == j:
            raise StrategyNotFound("playbook offered a non-free or repeated edge")
        rec(node["children"][_edge_key(i)], client | bi, waiter | bj, rounds + 1)
        rec(node["children"][_edge_key(j)], client | bj, waiter | bi, rounds + 1)

    rec(playbook.tree, 0, 0, 0)
    return stats
