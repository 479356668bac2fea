"""Deterministic and seeded tree generators for tests and simulations."""

from __future__ import annotations

import random
from typing import List, Optional

from .errors import InvalidParameter
from .trees import Tree


def path_tree(n: int) -> Tree:
    return Tree([None] + list(range(n - 1)))


def star_tree(n: int) -> Tree:
    return Tree([None] + [0] * (n - 1))


def random_attachment_tree(n: int, rng: random.Random,
                           window: Optional[int] = None) -> Tree:
    """Vertex i attaches to a uniform earlier vertex.

    With ``window`` the choice is limited to the previous ``window``
    vertices, which skews the shape toward long paths.
    """
    parent: List[Optional[int]] = [None]
    for i in range(1, n):
        lo = 0 if window is None else max(0, i - window)
        parent.append(rng.randint(lo, i - 1))
    return Tree(parent)


def preferential_tree(n: int, rng: random.Random,
                      dmax: Optional[int] = None) -> Tree:
    """Degree-proportional attachment; skews toward a few heavy hubs."""
    parent: List[Optional[int]] = [None]
    bag = [0]
    deg = [0] * n
    for i in range(1, n):
        p = bag[rng.randrange(len(bag))]
        if dmax is not None:
            while deg[p] >= dmax:
                p = bag[rng.randrange(len(bag))]
        parent.append(p)
        deg[p] += 1
        deg[i] += 1
        bag.append(p)
        bag.append(i)
    return Tree(parent)


def capped_attachment_tree(n: int, rng: random.Random, dmax: int) -> Tree:
    """Uniform attachment that never pushes a vertex past degree dmax."""
    if dmax < 2:
        raise InvalidParameter("degree cap below 2 cannot host a tree")
    parent: List[Optional[int]] = [None]
    deg = [0] * n
    open_ids = [0]
    for i in range(1, n):
        j = rng.randrange(len(open_ids))
        p = open_ids[j]
        parent.append(p)
        deg[p] += 1
        deg[i] += 1
        if deg[p] >= dmax:
            open_ids[j] = open_ids[-1]
            open_ids.pop()
        open_ids.append(i)
    return Tree(parent)


def comb_tree(n: int, spacing: int, tooth_len: int) -> Tree:
    """Spine with a path tooth every ``spacing`` spine vertices.

    The spine grows until n vertices are placed, so long runs of degree-2
    vertices survive on both the spine and the teeth.
    """
    if spacing < 1 or tooth_len < 0:
        raise InvalidParameter("spacing must be positive and teeth nonnegative")
    parent: List[Optional[int]] = [None]
    spine_end = 0
    spine_count = 1
    while len(parent) < n:
        if spine_count % spacing == 0 and tooth_len > 0:
            base = spine_end
            for _ in range(min(tooth_len, n - len(parent))):
                parent.append(base)
                base = len(parent) - 1
            spine_count += 1  # one tooth per qualifying spine vertex
            if len(parent) >= n:
                break
        parent.append(spine_end)
        spine_end = len(parent) - 1
        spine_count += 1
    return Tree(parent)


def broom_tree(n: int, handle_len: int, fan: int) -> Tree:
    """Handle path ending in a hub, hub children each holding leaf bunches.

    Vertices: handle 0..handle_len-1 (hub is the last), then ``fan``
    mid vertices under the hub, then leaves distributed round-robin under
    the mids.  Every mid gets at least one leaf.
    """
    if handle_len < 1 or fan < 1:
        raise InvalidParameter("handle and fan must be positive")
    rem = n - handle_len - fan
    if rem < fan:
        raise InvalidParameter("not enough vertices for a leaf per mid")
    parent: List[Optional[int]] = [None] + list(range(handle_len - 1))
    hub = handle_len - 1
    mids = list(range(handle_len, handle_len + fan))
    parent.extend([hub] * fan)
    for i in range(rem):
        parent.append(mids[i % fan])
    return Tree(parent)


def double_broom_tree(n: int, fan: int, leaf_cap: int, drop: int = 0) -> Tree:
    """Path with a two-level star head at each end.

    Each head: a hub (the path endpoint) with ``fan`` mid children, each
    mid holding up to ``leaf_cap`` leaves; ``drop`` leaves total are traded
    for extra path length.  Keeps every degree at fan+1 or below when
    leaf_cap <= fan.
    """
    head_leaves = 2 * fan * leaf_cap - drop
    if head_leaves <= 0:
        raise InvalidParameter("dropping more leaves than the heads hold")
    handle = n - 2 * fan - head_leaves
    if handle < 2:
        raise InvalidParameter("heads do not leave room for the handle")
    parent: List[Optional[int]] = [None] + list(range(handle - 1))
    hubs = (0, handle - 1)
    counts = [leaf_cap] * (2 * fan)
    for i in range(drop):
        counts[i % (2 * fan)] -= 1
    mids: List[int] = []
    for side in range(2):
        for _ in range(fan):
            parent.append(hubs[side])
            mids.append(len(parent) - 1)
    for mid, cnt in zip(mids, counts):
        parent.extend([mid] * cnt)
    return Tree(parent)


def caterpillar_tree(n: int, spine_len: int,
                     legs: Optional[List[int]] = None,
                     rng: Optional[random.Random] = None,
                     max_legs: int = 1,
                     run: Optional[range] = None) -> Tree:
    """Spine path with leaf legs.

    ``legs`` fixes the per-spine-vertex leaf counts exactly.  Otherwise
    with ``rng`` the legs land on random spine vertices (at most
    ``max_legs`` each), else round-robin; ``run`` marks spine positions
    that take one leg first, guaranteeing a consecutive block of leaf
    neighbors.
    """
    if spine_len < 2 or spine_len > n:
        raise InvalidParameter("spine must fit inside the tree")
    parent: List[Optional[int]] = [None] + list(range(spine_len - 1))
    if legs is not None:
        if len(legs) != spine_len or spine_len + sum(legs) != n:
            raise InvalidParameter("leg counts do not add up to n")
        for pos in range(spine_len):
            parent.extend([pos] * legs[pos])
        return Tree(parent)
    counts = [0] * spine_len
    budget = n - spine_len
    order: List[int] = []
    if run is not None:
        order.extend(run)
    if budget < len(order):
        raise InvalidParameter("not enough vertices to cover the marked run")
    placed = 0
    for pos in order:
        counts[pos] += 1
        placed += 1
    while placed < budget:
        if rng is None:
            pos = placed % spine_len
            if counts[pos] >= max_legs:
                pos = min(range(spine_len), key=lambda i: (counts[i], i))
        else:
            pos = rng.randrange(spine_len)
            if counts[pos] >= max_legs:
                choices = [i for i in range(spine_len) if counts[i] < max_legs]
                if not choices:
                    raise InvalidParameter("leg budget exceeds the caps")
                pos = choices[rng.randrange(len(choices))]
        counts[pos] += 1
        placed += 1
    for pos in range(spine_len):
        parent.extend([pos] * counts[pos])
    return Tree(parent)


def relabel_tree(tree: Tree, rng: random.Random) -> Tree:
    """Same shape under a random vertex permutation."""
    perm = list(range(tree.n))
    rng.shuffle(perm)
    parent: List[Optional[int]] = [None] * tree.n
    for v, p in enumerate(tree.parent):
        parent[perm[v]] = None if p is None else perm[p]
    return Tree(parent)
