"""Fixed-capacity node arena with an intrusive least-recently-used queue.

Nodes live in structure-of-arrays storage (one int32 row of links and
counters per node, a float64 reward sum, and optional dense AMAF tables of
82 entries at 8 bytes each). The tree uses left-child right-sibling links;
a dense child map per node gives O(1) move-to-child lookups during
selection.

Recycling protocol: while free slots remain, expansion uses them. Once the
pool is full, the node at the LRU front is evicted: detached from its
parent, statistics zeroed, storage reused. Nodes on the current selection
path are removed from the queue between `begin_path` and `end_path`, and
reinserted in reverse removal order, which keeps every descendant closer to
the front than its ancestors, so only leaves ever reach the front. Roots
never enter the queue and can never be recycled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

NULL = -1

# links[] columns
L_PARENT = 0
L_FIRST_CHILD = 1
L_NEXT_SIB = 2
L_LRU_PREV = 3
L_LRU_NEXT = 4
L_IN_LRU = 5
L_MOVE = 6
L_TO_MOVE = 7
L_VISITS = 8
L_LIVE = 9
N_LINK_COLS = 10

# meta[] slots
M_FREE_TOP = 0
M_LRU_FRONT = 1
M_LRU_BACK = 2
M_ALLOCATED = 3
M_RECYCLED = 4
M_PEAK = 5

AMAF_ENTRIES = 82
AMAF_ENTRY_BYTES = 8  # 32-bit count + 32-bit reward sum


class InvalidCapacity(Exception):
    """Pool capacity below the minimum useful size (a root plus one child)."""


class PoolExhausted(Exception):
    """No free slot and nothing recyclable: capacity is below the path length."""


class NotAChild(Exception):
    """detach_child was asked to remove a link that does not exist."""


class PoolCorrupted(Exception):
    """An internal invariant failed (e.g. a recycling victim with children)."""


@njit(inline="always")
def k_lru_push_back(links, meta, h):
    back = meta[M_LRU_BACK]
    links[h, L_LRU_PREV] = back
    links[h, L_LRU_NEXT] = NULL
    if back == NULL:
        meta[M_LRU_FRONT] = h
    else:
        links[back, L_LRU_NEXT] = h
    meta[M_LRU_BACK] = h
    links[h, L_IN_LRU] = 1


@njit(inline="always")
def k_lru_remove(links, meta, h):
    prev = links[h, L_LRU_PREV]
    nxt = links[h, L_LRU_NEXT]
    if prev == NULL:
        meta[M_LRU_FRONT] = nxt
    else:
        links[prev, L_LRU_NEXT] = nxt
    if nxt == NULL:
        meta[M_LRU_BACK] = prev
    else:
        links[nxt, L_LRU_PREV] = prev
    links[h, L_LRU_PREV] = NULL
    links[h, L_LRU_NEXT] = NULL
    links[h, L_IN_LRU] = 0


@njit(inline="always")
def k_detach(links, cmap, parent, child):
    """Unlink child from parent's sibling list; True if the link existed."""
    c = links[parent, L_FIRST_CHILD]
    if c == child:
        links[parent, L_FIRST_CHILD] = links[child, L_NEXT_SIB]
    else:
        found = False
        while c != NULL:
            nxt = links[c, L_NEXT_SIB]
            if nxt == child:
                links[c, L_NEXT_SIB] = links[child, L_NEXT_SIB]
                found = True
                break
            c = nxt
        if not found:
            return False
    cmap[parent, links[child, L_MOVE]] = NULL
    links[child, L_NEXT_SIB] = NULL
    return True


@njit(cache=True)
def k_alloc(links, reward, amaf_c, amaf_s, cmap, free, meta, parent, move, to_move, amaf_on):
    """Claim a slot (free list first, else recycle the LRU front leaf).

    Returns the handle, -2 when nothing is free or recyclable, -3 when the
    would-be victim has children (a corrupted queue).
    """
    if meta[M_FREE_TOP] > 0:
        meta[M_FREE_TOP] -= 1
        h = free[meta[M_FREE_TOP]]
    else:
        h = meta[M_LRU_FRONT]
        if h == NULL:
            return -2
        if links[h, L_FIRST_CHILD] != NULL:
            return -3
        k_lru_remove(links, meta, h)
        par = links[h, L_PARENT]
        if par != NULL:
            k_detach(links, cmap, par, h)
        meta[M_RECYCLED] += 1
        meta[M_ALLOCATED] -= 1

    links[h, L_PARENT] = parent
    links[h, L_FIRST_CHILD] = NULL
    links[h, L_NEXT_SIB] = NULL
    links[h, L_LRU_PREV] = NULL
    links[h, L_LRU_NEXT] = NULL
    links[h, L_IN_LRU] = 0
    links[h, L_MOVE] = move
    links[h, L_TO_MOVE] = to_move
    links[h, L_VISITS] = 0
    links[h, L_LIVE] = 1
    reward[h] = 0.0
    if amaf_on:
        for m in range(AMAF_ENTRIES):
            amaf_c[h, m] = 0
            amaf_s[h, m] = 0.0
    for m in range(AMAF_ENTRIES):
        cmap[h, m] = NULL

    if parent != NULL:
        links[h, L_NEXT_SIB] = links[parent, L_FIRST_CHILD]
        links[parent, L_FIRST_CHILD] = h
        cmap[parent, move] = h
        k_lru_push_back(links, meta, h)  # roots stay out of the queue

    meta[M_ALLOCATED] += 1
    if meta[M_ALLOCATED] > meta[M_PEAK]:
        meta[M_PEAK] = meta[M_ALLOCATED]
    return h


@njit(cache=True)
def k_release_subtree(links, cmap, free, meta, stack, root):
    par = links[root, L_PARENT]
    if par != NULL:
        k_detach(links, cmap, par, root)
    sp = 0
    stack[sp] = root
    sp += 1
    while sp > 0:
        sp -= 1
        h = stack[sp]
        c = links[h, L_FIRST_CHILD]
        while c != NULL:
            stack[sp] = c
            sp += 1
            c = links[c, L_NEXT_SIB]
        if links[h, L_IN_LRU] != 0:
            k_lru_remove(links, meta, h)
        links[h, L_LIVE] = 0
        free[meta[M_FREE_TOP]] = h
        meta[M_FREE_TOP] += 1
        meta[M_ALLOCATED] -= 1


@njit(cache=True)
def k_begin_path(links, meta, path, n, guard):
    g = 0
    for i in range(n):
        h = path[i]
        if links[h, L_IN_LRU] != 0:
            k_lru_remove(links, meta, h)
            guard[g] = h
            g += 1
    return g


@njit(cache=True)
def k_end_path(links, meta, guard, g):
    # reverse removal order: deepest first, so ancestors end up nearer the back
    for i in range(g - 1, -1, -1):
        k_lru_push_back(links, meta, guard[i])


@dataclass
class PathGuard:
    """Handles removed from the LRU for one iteration, in removal order."""

    handles: list[int] = field(default_factory=list)
    closed: bool = False


class NodePool:
    """Arena of `capacity` nodes; `amaf=False` drops the per-node AMAF table."""

    def __init__(self, capacity: int, amaf: bool = True):
        if capacity < 2:
            raise InvalidCapacity(f"capacity must be >= 2, got {capacity}")
        self.capacity = capacity
        self.amaf_enabled = amaf
        self.links = np.full((capacity, N_LINK_COLS), NULL, dtype=np.int32)
        self.links[:, L_IN_LRU] = 0
        self.links[:, L_VISITS] = 0
        self.links[:, L_LIVE] = 0
        self.reward = np.zeros(capacity, dtype=np.float64)
        shape = (capacity, AMAF_ENTRIES) if amaf else (1, AMAF_ENTRIES)
        self.amaf_count = np.zeros(shape, dtype=np.int32)
        self.amaf_sum = np.zeros(shape, dtype=np.float32)
        self.child_map = np.full((capacity, AMAF_ENTRIES), NULL, dtype=np.int32)
        self.free = np.arange(capacity - 1, -1, -1, dtype=np.int32)
        self.meta = np.zeros(8, dtype=np.int64)
        self.meta[M_FREE_TOP] = capacity
        self.meta[M_LRU_FRONT] = NULL
        self.meta[M_LRU_BACK] = NULL
        self._stack = np.empty(capacity, dtype=np.int32)

    # -- lifecycle -------------------------------------------------------

    def allocate(self, parent: int, move: int, to_move: int) -> int:
        h = k_alloc(
            self.links, self.reward, self.amaf_count, self.amaf_sum,
            self.child_map, self.free, self.meta,
            parent, move, int(to_move), self.amaf_enabled,
        )
        if h == -2:
            raise PoolExhausted(
                f"pool of {self.capacity} has no free or recyclable node"
            )
        if h == -3:
            raise PoolCorrupted("LRU front node has children")
        return int(h)

    def release_subtree(self, handle: int) -> None:
        k_release_subtree(self.links, self.child_map, self.free, self.meta,
                          self._stack, handle)

    def detach_child(self, parent: int, child: int) -> None:
        if self.links[child, L_FIRST_CHILD] != NULL:
            raise PoolCorrupted(f"detaching node {child} that still has children")
        if not k_detach(self.links, self.child_map, parent, child):
            raise NotAChild(f"node {child} is not a child of {parent}")

    def begin_path(self, handles) -> PathGuard:
        path = np.asarray(handles, dtype=np.int32)
        guard = np.empty(len(path), dtype=np.int32)
        g = k_begin_path(self.links, self.meta, path, len(path), guard)
        return PathGuard(handles=[int(h) for h in guard[:g]])

    def end_path(self, guard: PathGuard) -> None:
        if guard.closed:
            raise PoolCorrupted("PathGuard reused")
        arr = np.asarray(guard.handles, dtype=np.int32)
        k_end_path(self.links, self.meta, arr, len(arr))
        guard.closed = True

    # -- counters ----------------------------------------------------------

    @property
    def allocated(self) -> int:
        return int(self.meta[M_ALLOCATED])

    @property
    def free_count(self) -> int:
        return int(self.meta[M_FREE_TOP])

    @property
    def recycled_total(self) -> int:
        return int(self.meta[M_RECYCLED])

    @property
    def peak_allocated(self) -> int:
        return int(self.meta[M_PEAK])

    # -- node accessors (tests, reporting, drivers) ------------------------

    def is_live(self, h: int) -> bool:
        return bool(self.links[h, L_LIVE])

    def parent(self, h: int) -> int:
        return int(self.links[h, L_PARENT])

    def move(self, h: int) -> int:
        return int(self.links[h, L_MOVE])

    def to_move(self, h: int) -> int:
        return int(self.links[h, L_TO_MOVE])

    def visits(self, h: int) -> int:
        return int(self.links[h, L_VISITS])

    def reward_sum(self, h: int) -> float:
        return float(self.reward[h])

    def in_lru(self, h: int) -> bool:
        return bool(self.links[h, L_IN_LRU])

    def child(self, h: int, move: int) -> int:
        return int(self.child_map[h, move])

    def children(self, h: int) -> list[int]:
        out = []
        c = int(self.links[h, L_FIRST_CHILD])
        while c != NULL:
            out.append(c)
            c = int(self.links[c, L_NEXT_SIB])
        return out

    def lru_order(self) -> list[int]:
        """Queue contents front (next victim) to back (most recent)."""
        out = []
        h = int(self.meta[M_LRU_FRONT])
        while h != NULL:
            out.append(h)
            h = int(self.links[h, L_LRU_NEXT])
        return out

    def lru_order_backward(self) -> list[int]:
        out = []
        h = int(self.meta[M_LRU_BACK])
        while h != NULL:
            out.append(h)
            h = int(self.links[h, L_LRU_PREV])
        return out

    # -- memory accounting --------------------------------------------------

    @property
    def amaf_bytes_per_node(self) -> int:
        return AMAF_ENTRIES * AMAF_ENTRY_BYTES if self.amaf_enabled else 0

    @property
    def bytes_per_node(self) -> int:
        per_node = self.links.itemsize * N_LINK_COLS + self.reward.itemsize
        per_node += self.child_map.itemsize * AMAF_ENTRIES
        per_node += self.free.itemsize + self._stack.itemsize
        return per_node + self.amaf_bytes_per_node
