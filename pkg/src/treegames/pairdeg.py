"""Waiter playbook forcing large common Client neighborhoods for all pairs.

The game is (1:1) WC on the edges of a host graph.  For every vertex pair
v,w with prescribed candidate neighborhood N_{v,w}, the Waiter wants the
final Client graph C to satisfy |N_C(v) ∩ N_C(w) ∩ N_{v,w}| >= beta*n/500.

Plan: split E(host) into G1 and G2 at random, resampling until every pair
keeps |N_{G1}(v) ∩ N_{G2}(w) ∩ N_{v,w}| >= beta*n/5.  Stage one offers G1
edges and forces Client to keep a tenth of each pair's v-side candidate
edges; stage two does the same on G2 for the w-side edges into the stage
one survivors.  Hitting every 0.9-fraction subset of a candidate set is
the same as keeping floor(0.1 s) + 1 of its s edges, so the subset
families stay implicit: per pair we track one pool of candidate edges and
a quota.  Each offer presents two free edges from the most endangered
pool, so whichever edge Client keeps, the pool advances.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from .errors import InvalidParameter, SplitUnavailable
from .game import Board, GameState, Move, Role, Rules, new_game
from .graphs import Graph, norm_edge


def _fail_tail(f: int, q: int, cache: Dict[Tuple[int, int], float]) -> float:
    """2^-f * sum_{j<q} C(f,j): chance a uniform half misses the quota."""
    key = (f, q)
    if key not in cache:
        if q > f:
            cache[key] = 1.0
        else:
            total = sum(math.comb(f, j) for j in range(q))
            cache[key] = total * math.pow(2.0, -f) if f < 1024 else 0.0
    return cache[key]


@dataclass
class StageReport:
    stage: int
    criterion: float
    held: bool
    pools: int
    min_pool: int


class _PoolSet:
    """Quota bookkeeping for one stage's pair pools.

    ``flat`` holds every pool's edge ids back to back; pool p owns the
    slice ptr[p]:ptr[p+1].
    """

    def __init__(self, flat: np.ndarray, ptr: np.ndarray, quotas: np.ndarray,
                 pre_owned: np.ndarray, n_edges: int):
        self.count = len(ptr) - 1
        self.ptr = ptr.astype(np.int64)
        self.flat = flat.astype(np.int32)
        self.f = np.diff(self.ptr)
        self.c = pre_owned.astype(np.int64)
        self.q = quotas.astype(np.int64)
        # edge -> pools (CSR) by stable sort on edge id
        pool_of = np.repeat(np.arange(self.count, dtype=np.int32),
                            self.f)
        order = np.argsort(self.flat, kind="stable")
        self.epools = pool_of[order]
        counts = np.bincount(self.flat, minlength=n_edges)
        self.eptr = np.zeros(n_edges + 1, dtype=np.int64)
        np.cumsum(counts, out=self.eptr[1:])
        self.alive = self.c < self.q
        self.failed = self.alive & (self.f < self.q - self.c)
        self.alive &= ~self.failed
        self.m = np.zeros(n_edges, dtype=np.int64)
        if self.count:
            np.add.at(self.m, self.flat[np.repeat(self.alive, self.f)], 1)
        self.danger = np.where(self.alive, (self.q - self.c) /
                               np.maximum(self.f, 1), -1.0)

    def pools_of(self, edge: int) -> np.ndarray:
        return self.epools[self.eptr[edge]:self.eptr[edge + 1]]

    def record(self, edge: int, to_client: bool) -> None:
        rows = self.pools_of(edge)
        if rows.size == 0:
            return
        self.f[rows] -= 1
        if to_client:
            self.c[rows] += 1
        live = rows[self.alive[rows]]
        done = live[self.c[live] >= self.q[live]]
        lost = live[(self.c[live] < self.q[live]) &
                    (self.f[live] < self.q[live] - self.c[live])]
        for p in done:
            self.alive[p] = False
            np.add.at(self.m, self.flat[self.ptr[p]:self.ptr[p + 1]], -1)
        for p in lost:
            self.alive[p] = False
            self.failed[p] = True
            np.add.at(self.m, self.flat[self.ptr[p]:self.ptr[p + 1]], -1)
        self.danger[rows] = np.where(
            self.alive[rows],
            (self.q[rows] - self.c[rows]) / np.maximum(self.f[rows], 1), -1.0)

    def worst(self) -> Optional[int]:
        if self.count == 0:
            return None
        p = int(np.argmax(self.danger))
        return p if self.danger[p] > 0 else None

    def free_edges(self, p: int, own: np.ndarray) -> List[int]:
        seg = self.flat[self.ptr[p]:self.ptr[p + 1]]
        return [int(e) for e in seg if own[e] == 0]


class PairDegreePlaybook:
    """Two-stage Waiter strategy; create via ``wc_pair_degree_strategy``."""

    def __init__(self, host: Graph, beta: float,
                 neighborhoods: Optional[Mapping[Tuple[int, int], Iterable[int]]],
                 rng: random.Random, budget: int):
        self.host = host
        self.beta = beta
        self.n = n = host.n
        self.edges: List[Tuple[int, int]] = host.sorted_edges()
        self.eidmat = np.full((n, n), -1, dtype=np.int32)
        for i, (u, v) in enumerate(self.edges):
            self.eidmat[u, v] = i
            self.eidmat[v, u] = i
        A = np.zeros((n, n), dtype=bool)
        for u, v in self.edges:
            A[u, v] = A[v, u] = True
        if neighborhoods is None:
            pairs = [(v, w) for v in range(n) for w in range(v + 1, n)]
        else:
            pairs = sorted({norm_edge(v, w) for v, w in neighborhoods})
        self.pairs = pairs
        self.pv = np.array([p[0] for p in pairs], dtype=np.int64)
        self.pw = np.array([p[1] for p in pairs], dtype=np.int64)
        self.nbr = A[self.pv] & A[self.pw]
        if neighborhoods is not None:
            allowed = np.zeros((len(pairs), n), dtype=bool)
            index = {p: i for i, p in enumerate(pairs)}
            for key, us in neighborhoods.items():
                i = index[norm_edge(*key)]
                for u in us:
                    if u in key:
                        raise InvalidParameter("a pair may not neighbor itself")
                    allowed[i, u] = True
            self.nbr &= allowed
        counts = self.nbr.sum(axis=1)
        if len(pairs) and counts.min() < beta * n:
            i = int(np.argmin(counts))
            raise InvalidParameter(
                f"pair {pairs[i]} has {int(counts[i])} candidate common "
                f"neighbors, below beta*n = {beta * n:g}")
        self._split(A, rng, budget)
        self.board = Board(self.edges)
        self.flags: List[str] = []
        self.reports: List[StageReport] = []
        self.stage = 1
        self._tails: Dict[Tuple[int, int], float] = {}
        self.own = np.zeros(len(self.edges), dtype=np.int8)
        self._free_g1 = len(self.g1)
        self._processed = 0
        self._sync_pending: Tuple[int, ...] = ()
        self._g1_sorted = sorted(self.g1)
        self._g2_sorted = sorted(self.g2)
        self._cursor = [0, 0]
        self._pools = self._build_stage1()
        self._report_stage(self._pools, 1)

    # -- construction ------------------------------------------------------

    def _split(self, A: np.ndarray, rng: random.Random, budget: int) -> None:
        floor1 = self.beta * self.n / 5
        m = len(self.edges)
        eu = np.array([e[0] for e in self.edges], dtype=np.int64)
        ev = np.array([e[1] for e in self.edges], dtype=np.int64)
        for attempt in range(budget):
            raw = np.frombuffer(rng.randbytes((m + 7) // 8), dtype=np.uint8)
            side = np.unpackbits(raw)[:m].astype(bool)
            if int(side.sum()) % 2 == 1:
                side[np.flatnonzero(side)[-1]] = False
            A1 = np.zeros_like(A)
            A1[eu[side], ev[side]] = True
            A1[ev[side], eu[side]] = True
            A2 = np.zeros_like(A)
            A2[eu[~side], ev[~side]] = True
            A2[ev[~side], eu[~side]] = True
            t3 = A1[self.pv] & A2[self.pw] & self.nbr
            tc = t3.sum(axis=1)
            if len(self.pairs) == 0 or tc.min() >= floor1:
                self.g1 = {int(i) for i in np.flatnonzero(side)}
                self.g2 = {int(i) for i in np.flatnonzero(~side)}
                self.t3 = t3
                self.split_attempts = attempt + 1
                return
        raise SplitUnavailable(
            f"no edge split met the beta*n/5 floor in {budget} samples")

    def _build_stage1(self) -> _PoolSet:
        rows, us = np.nonzero(self.t3)
        flat = self.eidmat[self.pv[rows], us]
        lens = self.t3.sum(axis=1)
        ptr = np.zeros(len(self.pairs) + 1, dtype=np.int64)
        np.cumsum(lens, out=ptr[1:])
        quotas = lens // 10 + 1
        return _PoolSet(flat, ptr, quotas,
                        np.zeros(len(self.pairs), dtype=np.int64),
                        len(self.edges))

    def _build_stage2(self) -> _PoolSet:
        cadj = self._client_adj()
        surv = self.t3 & cadj[self.pv]
        rows, us = np.nonzero(surv)
        es = self.eidmat[self.pw[rows], us]
        owner = self.own[es]
        npairs = len(self.pairs)
        pre = np.bincount(rows[owner == 1], minlength=npairs)
        keep = owner == 0
        flat = es[keep]
        lens = np.bincount(rows[keep], minlength=npairs)
        ptr = np.zeros(npairs + 1, dtype=np.int64)
        np.cumsum(lens, out=ptr[1:])
        quotas = (lens + pre) // 10 + 1
        for i in np.flatnonzero((lens == 0) & (pre == 0)):
            self.flags.append(f"pair {self.pairs[int(i)]} entered stage 2 empty")
        return _PoolSet(flat, ptr, quotas, pre, len(self.edges))

    def _report_stage(self, ps: _PoolSet, stage: int) -> None:
        crit = 0.0
        for p in range(ps.count):
            if ps.alive[p]:
                crit += _fail_tail(int(ps.f[p]),
                                   int(ps.q[p] - ps.c[p]), self._tails)
        self.reports.append(StageReport(
            stage=stage, criterion=crit, held=crit < 1.0, pools=ps.count,
            min_pool=int(ps.f.min()) if ps.count else 0))

    # -- play --------------------------------------------------------------

    def new_state(self) -> GameState:
        return new_game(self.board, Rules.WC, bias=1)

    def _client_adj(self) -> np.ndarray:
        cadj = np.zeros((self.n, self.n), dtype=bool)
        for e in np.flatnonzero(self.own == 1):
            u, v = self.edges[e]
            cadj[u, v] = cadj[v, u] = True
        return cadj

    def _sync(self, state: GameState) -> None:
        for move in state.history[self._processed:]:
            ids = tuple(self.board.id_of(e) for e in move.elements)
            if move.actor == Role.WAITER and len(ids) == 2:
                self._sync_pending = ids
            elif move.actor == Role.CLIENT:
                kept = ids[0]
                self._claim(kept, True)
                for e in self._sync_pending:
                    if e != kept:
                        self._claim(e, False)
                self._sync_pending = ()
            else:  # leftover round, everything to Waiter
                for e in ids:
                    self._claim(e, False)
        self._processed = len(state.history)

    def _claim(self, edge: int, to_client: bool) -> None:
        self.own[edge] = 1 if to_client else 2
        if edge in self.g1:
            self._free_g1 -= 1
        self._pools.record(edge, to_client)

    def _filler(self) -> List[int]:
        # lowest free edges, preferring the current stage's side of the
        # split; the cursors only move forward so the scan stays amortized
        order = [0, 1] if self.stage == 1 else [1, 0]
        lists = [self._g1_sorted, self._g2_sorted]
        out: List[int] = []
        for which in order:
            lst = lists[which]
            cur = self._cursor[which]
            while cur < len(lst) and self.own[lst[cur]] != 0:
                cur += 1
            self._cursor[which] = cur
            scan = cur
            while scan < len(lst) and len(out) < 2:
                if self.own[lst[scan]] == 0:
                    out.append(lst[scan])
                scan += 1
            if len(out) == 2:
                return out
        return out

    def move(self, state: GameState) -> Move:
        """Waiter's next move: an offer of two edges (or the leftover)."""
        self._sync(state)
        if state.free_count() < 2:
            return Move(Role.WAITER, tuple(self.board.elements[i]
                                           for i in state.free_ids()))
        if self.stage == 1 and self._free_g1 == 0:
            self._pools = self._build_stage2()
            self.stage = 2
            self._report_stage(self._pools, 2)
        ps = self._pools
        p = ps.worst()
        if p is None:
            pick = self._filler()
        else:
            free = sorted(ps.free_edges(p, self.own),
                          key=lambda e: (ps.m[e], e))
            if len(free) >= 2:
                pick = free[:2]
            else:
                # cornered pool: pair its last edge with the mildest filler
                rest = [e for e in self._filler() if e != free[0]]
                pick = [free[0], rest[0]]
                self.flags.append(f"pool {p} was down to one free edge")
        return Move(Role.WAITER, tuple(self.edges[e] for e in sorted(pick)))

    # -- verification ------------------------------------------------------

    def guarantee_report(self, state: GameState) -> dict:
        """Final check of the common-neighborhood floor for every pair."""
        self._sync(state)
        cadj = self._client_adj()
        floor = self.beta * self.n / 500
        if len(self.pairs):
            got = (cadj[self.pv] & cadj[self.pw] & self.nbr).sum(axis=1)
            i = int(np.argmin(got))
            worst = (int(got[i]), self.pairs[i])
            met = bool(got.min() >= floor)
        else:
            worst, met = (0, None), True
        return {
            "floor": floor,
            "met": met,
            "min_common": worst[0],
            "worst_pair": worst[1],
            "conditioned": all(r.held for r in self.reports),
            "criteria": [(r.stage, r.criterion, r.held) for r in self.reports],
            "flags": list(self.flags),
        }


def wc_pair_degree_strategy(host: Graph, beta: float,
                            neighborhoods: Optional[Mapping[Tuple[int, int],
                                                            Iterable[int]]] = None,
                            rng: Optional[random.Random] = None,
                            budget: int = 100) -> PairDegreePlaybook:
    """Build the two-stage Waiter playbook for the pair-degree game.

    ``neighborhoods`` maps vertex pairs to their candidate sets N_{v,w};
    by default every pair uses its full common host neighborhood.  Raises
    ``SplitUnavailable`` when no sampled edge split meets the beta*n/5
    floor within the budget.
    """
    if not 0 < beta <= 1:
        raise InvalidParameter("beta must lie in (0, 1]")
    return PairDegreePlaybook(host, beta, neighborhoods,
                              rng if rng is not None else random.Random(0),
                              budget)
