"""Search drivers: single-level engines, node recycling, two-level variants.

Variant lattice:
  UCT / GRAVE          fixed-tree baselines (capacity covers every expansion)
  UCT_R / GRAVER       same engines over a smaller pool, recycling LRU leaves
  UCT2 / GRAVE2        two-level: expansion runs a nested search from the new
                       leaf, whose tree is discarded afterwards; results are
                       propagated to the top tree in one batch
  GRAVE2_FS            GRAVE2 with forward sharing: every nested playout is
                       backpropagated along the (fixed) top path immediately,
                       and the nested search reads AMAF tables from the
                       top-level reference node until its own root qualifies
  GRAVER2              forward-sharing two-level search with recycling
                       budgets: p_top nested searches of p_sec playouts each

Budget accounting: one playout per iteration, and every iteration except the
first expands exactly one node (the first evaluates the fresh root itself).
A single-level search with P playouts therefore stores the root plus P - 1
children: with capacity N = P the pool fills exactly and never recycles,
which is what makes recycling engines at N >= P transcript-identical to the
fixed-tree baselines. Two-level budgets split the pool as n_sec =
round(lambda * N), n_top = N - n_sec, one pool per level, so peak node usage
never exceeds N and a (N, lambda) search runs exactly n_top * n_sec playouts
(p_top * p_sec with recycling budgets).

Rewards are stored from the perspective of the player who moved into a node
(the chooser), so the argmax at a node always maximises the mover's outcome.
Node AMAF entries belong to the node's player to move and count each move at
most once per playout.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from numba import njit

from .game import (
    DEFAULT_KOMI,
    DEFAULT_MOVE_CAP,
    NMOVES,
    GameState,
    Move,
    Player,
    k_apply,
    k_is_terminal,
    k_legal_moves,
)
from .playout import MastTable, k_run_playout, k_update_mast
from .policy import (
    PolicyParams,
    RefContext,
    k_select_grave,
    k_select_uct,
    update_ref,
)
from .pool import (
    L_FIRST_CHILD,
    L_IN_LRU,
    L_TO_MOVE,
    L_VISITS,
    NULL,
    NodePool,
    PoolCorrupted,
    PoolExhausted,
    k_alloc,
    k_end_path,
    k_lru_remove,
)
from .rng import derive_seed, make_state, rng_below

_M_TO_MOVE = 0


class ConfigError(ValueError):
    """Invalid or inconsistent search parameters."""


class Variant(str, Enum):
    UCT = "uct"
    GRAVE = "grave"
    UCT_R = "uctr"
    GRAVER = "graver"
    UCT2 = "uct2"
    GRAVE2 = "grave2"
    GRAVE2_FS = "grave2fs"
    GRAVER2 = "graver2"

    @property
    def uses_amaf(self) -> bool:
        return self in (Variant.GRAVE, Variant.GRAVER, Variant.GRAVE2,
                        Variant.GRAVE2_FS, Variant.GRAVER2)

    @property
    def uct_selection(self) -> bool:
        return not self.uses_amaf

    @property
    def two_level(self) -> bool:
        return self in (Variant.UCT2, Variant.GRAVE2, Variant.GRAVE2_FS,
                        Variant.GRAVER2)

    @property
    def forward_sharing(self) -> bool:
        return self in (Variant.GRAVE2_FS, Variant.GRAVER2)

    @property
    def recycles(self) -> bool:
        return self in (Variant.UCT_R, Variant.GRAVER, Variant.GRAVER2)


@dataclass(frozen=True)
class SearchParams:
    """Variant selector plus every tunable of one move search."""

    variant: Variant = Variant.GRAVE
    playouts: int | None = None        # P, single-level variants
    capacity: int | None = None        # N, the node budget
    lam: float | None = None           # two-level budget split
    p_top: int | None = None           # GRAVER2 top-level playout budget
    p_sec: int | None = None           # GRAVER2 nested playout budget
    policy: PolicyParams = field(default_factory=PolicyParams)
    epsilon: float = 0.4
    mast_decay: float = 0.2
    move_cap: int = DEFAULT_MOVE_CAP
    komi: float = DEFAULT_KOMI
    seed: int = 0

    def validated(self) -> "SearchParams":
        v = self.variant
        self.policy.validate()
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon must lie in [0, 1]")
        if not 0.0 <= self.mast_decay <= 1.0:
            raise ConfigError("mast_decay must lie in [0, 1]")
        if self.move_cap < 1:
            raise ConfigError("move_cap must be positive")
        out = self
        if v.two_level:
            if self.capacity is None or self.lam is None:
                raise ConfigError(f"{v.value} needs capacity N and lambda")
            if not 0.0 < self.lam < 1.0:
                raise ConfigError("lambda must lie strictly inside (0, 1)")
            n_sec = int(round(self.lam * self.capacity))
            n_top = self.capacity - n_sec
            if n_sec < 2 or n_top < 2:
                raise ConfigError(
                    f"budget split too small: n_top={n_top}, n_sec={n_sec}"
                )
            if v is Variant.GRAVER2:
                if self.p_top is None or self.p_sec is None:
                    raise ConfigError("graver2 needs p_top and p_sec")
                if self.p_top < 1 or self.p_sec < 1:
                    raise ConfigError("p_top and p_sec must be positive")
            elif self.p_top is not None or self.p_sec is not None:
                raise ConfigError(f"{v.value} does not take p_top/p_sec")
        else:
            if self.playouts is None or self.playouts < 1:
                raise ConfigError(f"{v.value} needs a positive playout budget P")
            if self.lam is not None or self.p_top is not None or self.p_sec is not None:
                raise ConfigError(f"{v.value} does not take lambda/p_top/p_sec")
            if self.capacity is None:
                out = replace(self, capacity=self.playouts)
            if out.capacity < 2:
                raise ConfigError("capacity must be >= 2")
            if not v.recycles and out.capacity < out.playouts:
                raise ConfigError(
                    f"{v.value} stores one node per playout and needs "
                    f"capacity >= playouts; use {Variant.UCT_R.value}/"
                    f"{Variant.GRAVER.value} for smaller pools"
                )
        return out

    @property
    def n_sec(self) -> int:
        return int(round(self.lam * self.capacity))

    @property
    def n_top(self) -> int:
        return self.capacity - self.n_sec

    @property
    def total_playouts(self) -> int:
        if not self.variant.two_level:
            return self.playouts
        if self.variant is Variant.GRAVER2:
            return self.p_top * self.p_sec
        return self.n_top * self.n_sec

    def describe(self) -> str:
        v = self.variant
        if v is Variant.GRAVER2:
            return (f"{v.value}:N={self.capacity},lambda={self.lam:g},"
                    f"ptop={self.p_top},psec={self.p_sec}")
        if v.two_level:
            return f"{v.value}:N={self.capacity},lambda={self.lam:g}"
        if self.capacity != self.playouts:
            return f"{v.value}:P={self.playouts},N={self.capacity}"
        return f"{v.value}:P={self.playouts}"


@dataclass(frozen=True)
class SearchResult:
    chosen_move: int
    root_visits: int
    total_playouts: int
    recycled_total: int
    peak_nodes: int
    root_stats: dict[int, tuple[int, float]]  # move -> (visits, reward_sum)


@dataclass(frozen=True)
class MatchRecord:
    """One arena game: agent specs, colour assignment, outcome, counters."""

    game_id: int
    seed: int
    agent_a: str
    agent_b: str
    a_color: Player
    winner: str                  # "a" or "b"
    moves: int
    playouts_a: int
    playouts_b: int
    peak_nodes_a: int
    peak_nodes_b: int
    recycled_a: int
    recycled_b: int
    wall_ms: float


_DUMMY_I16 = np.zeros(1, dtype=np.int16)
_DUMMY_I32 = np.zeros(1, dtype=np.int32)
_DUMMY_F64 = np.zeros(1, dtype=np.float64)


@njit(cache=True)
def k_backprop(links, reward, ac, as_, amaf_on, path, n_path, tm1, n1, tm2, n2,
               pmoves, npm, reward_black, seen):
    """Add one playout to every node on `path`.

    The move sequence below path[i] is tm1[i:n1] + tm2[:n2] + pmoves[:npm];
    entries at even offsets belong to that node's player to move. Each such
    move feeds the node's AMAF entry at most once per playout.
    """
    for i in range(n_path):
        n = path[i]
        links[n, L_VISITS] += 1
        tm = links[n, L_TO_MOVE]
        if tm == 1:
            reward[n] += 1.0 - reward_black
            r_own = reward_black
        else:
            reward[n] += reward_black
            r_own = 1.0 - reward_black
        if amaf_on:
            for m in range(NMOVES):
                seen[m] = 0
            a = n1 - i
            total = a + n2 + npm
            j = 0
            while j < total:
                if j < a:
                    mv = tm1[i + j]
                elif j < a + n2:
                    mv = tm2[j - a]
                else:
                    mv = pmoves[j - a - n2]
                if seen[mv] == 0:
                    seen[mv] = 1
                    ac[n, mv] += 1
                    as_[n, mv] += r_own
                j += 2


@njit(cache=True)
def k_batch_top(links, reward, ac, as_, amaf_on, path, n_path, tmoves,
                coll_moves, coll_off, coll_rewards, n_playouts, seen):
    """Fold a finished nested search into the top tree in one batch.

    Every path node receives the nested search's visit count and aggregate
    reward; AMAF tables receive the per-playout move sets (deduplicated per
    playout, exactly as per-iteration propagation would have done). The top
    leaf is path[n_path - 1], whose update equals inheriting the nested
    root's accumulated statistics.
    """
    wins_b = 0.0
    for k in range(n_playouts):
        wins_b += coll_rewards[k]
    n1 = n_path - 1
    for i in range(n_path):
        n = path[i]
        links[n, L_VISITS] += n_playouts
        tm = links[n, L_TO_MOVE]
        if tm == 1:
            reward[n] += n_playouts - wins_b
        else:
            reward[n] += wins_b
        if amaf_on:
            for k in range(n_playouts):
                rb = coll_rewards[k]
                r_own = rb if tm == 1 else 1.0 - rb
                for m in range(NMOVES):
                    seen[m] = 0
                start = coll_off[k]
                seq_len = coll_off[k + 1] - start
                a = n1 - i
                total = a + seq_len
                j = 0
                while j < total:
                    mv = tmoves[i + j] if j < a else coll_moves[start + j - a]
                    if seen[mv] == 0:
                        seen[mv] = 1
                        ac[n, mv] += 1
                        as_[n, mv] += r_own
                    j += 2


@njit(cache=True)
def k_run_level(board0, cells0, empties0, meta0, hist0,
                board, cells, empties, meta, hist,
                links, reward, amaf_c, amaf_s, cmap, free, pmeta, root,
                n_iter, use_uct, amaf_on, c_explore, bias, ref_threshold,
                epsilon, move_cap, komi,
                mast_cnt, mast_sum, rng,
                fs_on, top_links, top_reward, top_ac, top_as, top_amaf_on,
                top_path, top_n, top_tmoves, top_ref,
                collect_on, coll_moves, coll_off, coll_rewards,
                path_buf, guard_buf, tmoves_buf, legal_buf, pmoves_buf, seen_buf):
    """Run `n_iter` search iterations on one tree level.

    Each iteration: descend from the root (selection values per variant,
    reference node maintained on the way down, visited nodes pulled out of
    the LRU), expand the missing child (recycling when the pool is full),
    play out, update MAST, backpropagate, and reinsert the path into the
    LRU deepest-first. The very first visit of a fresh root evaluates the
    root position itself instead of expanding.

    Forward sharing (fs_on): after every playout the result is also pushed
    along the fixed top-level path, and selection reads AMAF rows from
    `top_ref` while the root of this level has too few visits.
    Collection (collect_on): per-playout move sequences and rewards are
    stored for a later batch update of the enclosing tree.

    Returns 0 on success or the pool error code (-2 exhausted, -3 corrupt).
    """
    for it in range(n_iter):
        board[:] = board0
        cells[:] = cells0
        empties[:] = empties0
        meta[:] = meta0
        hist[:] = hist0

        node = root
        path_buf[0] = root
        depth = 1
        g_n = 0
        tn = 0
        ref = root
        ref_top = False
        if fs_on and links[root, L_VISITS] <= ref_threshold:
            ref_top = True

        if links[root, L_VISITS] != 0 or links[root, L_FIRST_CHILD] != NULL:
            while True:
                if k_is_terminal(meta, move_cap):
                    break
                color = np.int64(meta[_M_TO_MOVE])
                nl = k_legal_moves(board, cells, empties, meta, hist, color, legal_buf)
                if use_uct:
                    m = k_select_uct(links, reward, cmap, node, legal_buf, nl,
                                     c_explore, rng)
                elif ref_top:
                    m = k_select_grave(links, reward, cmap, node,
                                       top_ac[top_ref], top_as[top_ref],
                                       legal_buf, nl, bias, rng)
                else:
                    m = k_select_grave(links, reward, cmap, node,
                                       amaf_c[ref], amaf_s[ref],
                                       legal_buf, nl, bias, rng)
                ch = cmap[node, m]
                k_apply(board, cells, empties, meta, hist, m, color)
                tmoves_buf[tn] = m
                tn += 1
                if ch == NULL:
                    new = k_alloc(links, reward, amaf_c, amaf_s, cmap, free,
                                  pmeta, node, m, np.int64(meta[_M_TO_MOVE]), amaf_on)
                    if new < 0:
                        k_end_path(links, pmeta, guard_buf, g_n)
                        return new
                    path_buf[depth] = new
                    depth += 1
                    break
                node = ch
                path_buf[depth] = ch
                depth += 1
                if links[ch, L_IN_LRU] != 0:
                    k_lru_remove(links, pmeta, ch)
                    guard_buf[g_n] = ch
                    g_n += 1
                if links[ch, L_VISITS] > ref_threshold:
                    ref = ch
                    ref_top = False

        po_start = np.int64(meta[_M_TO_MOVE])
        npo, rb = k_run_playout(board, cells, empties, meta, hist,
                                mast_cnt, mast_sum, epsilon, move_cap, komi,
                                rng, pmoves_buf)
        k_update_mast(mast_cnt, mast_sum, pmoves_buf, npo, po_start, rb)
        k_backprop(links, reward, amaf_c, amaf_s, amaf_on,
                   path_buf, depth, tmoves_buf, tn, _DUMMY_I16, 0,
                   pmoves_buf, npo, rb, seen_buf)
        if fs_on:
            k_backprop(top_links, top_reward, top_ac, top_as, top_amaf_on,
                       top_path, top_n, top_tmoves, top_n - 1, tmoves_buf, tn,
                       pmoves_buf, npo, rb, seen_buf)
        if collect_on:
            off = coll_off[it]
            for j in range(tn):
                coll_moves[off + j] = tmoves_buf[j]
            for j in range(npo):
                coll_moves[off + tn + j] = pmoves_buf[j]
            coll_off[it + 1] = off + tn + npo
            coll_rewards[it] = rb
        k_end_path(links, pmeta, guard_buf, g_n)
    return 0


class _Scratch:
    """Reusable per-search buffers sized by the move cap."""

    def __init__(self, move_cap: int):
        n = move_cap + 2
        self.path = np.empty(n, dtype=np.int32)
        self.guard = np.empty(n, dtype=np.int32)
        self.tmoves = np.empty(n, dtype=np.int16)
        self.legal = np.empty(NMOVES, dtype=np.int16)
        self.pmoves = np.empty(n, dtype=np.int16)
        self.seen = np.empty(NMOVES, dtype=np.uint8)


def _raise_pool_error(status: int, capacity: int) -> None:
    if status == -2:
        raise PoolExhausted(
            f"pool of {capacity} nodes cannot protect the selection path; "
            "increase the node budget"
        )
    raise PoolCorrupted("recycling victim had children")


def _run_level(template: GameState, scratch_state: GameState, pool: NodePool,
               root: int, n_iter: int, params: SearchParams, mast: MastTable,
               rng, bufs: _Scratch, fs=None, collect=None) -> None:
    """Python-side wrapper assembling the kernel call for one tree level."""
    uses_uct = params.variant.uct_selection
    if fs is None:
        fs_on = False
        top_links = np.zeros((1, 10), dtype=np.int32)
        top_reward = _DUMMY_F64
        top_ac = np.zeros((1, NMOVES), dtype=np.int32)
        top_as = np.zeros((1, NMOVES), dtype=np.float32)
        top_amaf_on = False
        top_path = _DUMMY_I32
        top_n = 0
        top_tmoves = _DUMMY_I16
        top_ref = 0
    else:
        fs_on = True
        (top_pool, top_path, top_tmoves, top_ref) = fs
        top_links = top_pool.links
        top_reward = top_pool.reward
        top_ac = top_pool.amaf_count
        top_as = top_pool.amaf_sum
        top_amaf_on = top_pool.amaf_enabled
        top_n = len(top_path)
    if collect is None:
        collect_on = False
        coll_moves, coll_off, coll_rewards = _DUMMY_I16, _DUMMY_I32, _DUMMY_F64
    else:
        collect_on = True
        coll_moves, coll_off, coll_rewards = collect
        coll_off[0] = 0

    status = k_run_level(
        template.board, template.cells, template.empties, template.meta,
        template.history,
        scratch_state.board, scratch_state.cells, scratch_state.empties,
        scratch_state.meta, scratch_state.history,
        pool.links, pool.reward, pool.amaf_count, pool.amaf_sum,
        pool.child_map, pool.free, pool.meta, root,
        n_iter, uses_uct, pool.amaf_enabled,
        params.policy.exploration_c, params.policy.bias,
        params.policy.ref_threshold,
        params.epsilon, params.move_cap, params.komi,
        mast.counts, mast.sums, rng,
        fs_on, top_links, top_reward, top_ac, top_as, top_amaf_on,
        np.asarray(top_path, dtype=np.int32), top_n,
        np.asarray(top_tmoves, dtype=np.int16), top_ref,
        collect_on, coll_moves, coll_off, coll_rewards,
        bufs.path, bufs.guard, bufs.tmoves, bufs.legal, bufs.pmoves, bufs.seen,
    )
    if status < 0:
        _raise_pool_error(status, pool.capacity)


def forward_share_ref(sec_pool: NodePool, top_ref: RefContext, sec_root: int,
                      params: PolicyParams) -> RefContext:
    """Reference context for a nested search under forward sharing.

    The nested search consults the enclosing tree's reference node until its
    own root's visit count exceeds the threshold; afterwards the root (and,
    deeper, any qualifying child) takes over.
    """
    if sec_pool.visits(sec_root) > params.ref_threshold:
        return RefContext(sec_root)
    return RefContext(top_ref.node, is_top=True)


def _root_stats(pool: NodePool, root: int) -> dict[int, tuple[int, float]]:
    return {
        pool.move(ch): (pool.visits(ch), pool.reward_sum(ch))
        for ch in pool.children(root)
    }


def _robust_choice(pool: NodePool, root: int, state: GameState, rng) -> int:
    """Final move: maximum visit count among root children, ties uniform."""
    best_m = -1
    best_v = -1
    ties = 1
    for ch in pool.children(root):
        v = pool.visits(ch)
        if v > best_v:
            best_v = v
            best_m = pool.move(ch)
            ties = 1
        elif v == best_v:
            ties += 1
            if rng_below(rng, ties) == 0:
                best_m = pool.move(ch)
    if best_m < 0:
        legal = state.legal_move_ids()
        best_m = int(legal[rng_below(rng, len(legal))])
    return best_m


class TreeSearch:
    """Stepwise single-level search over one tree.

    `iterate(k)` runs k full iterations (selection, expansion, playout,
    backpropagation, LRU upkeep); the tree and its pool stay inspectable
    between calls. `result()` makes the final robust-child choice; it draws
    from the search's generator, so call it once, after the last iterate.
    """

    def __init__(self, state: GameState, params: SearchParams,
                 mast: MastTable | None = None):
        params = params.validated()
        if params.variant.two_level:
            raise ConfigError("TreeSearch drives single-level variants only")
        if state.is_terminal(params.move_cap):
            raise ConfigError("TreeSearch needs a non-terminal position")
        self.params = params
        self.mast = mast if mast is not None else MastTable()
        self.rng = make_state(params.seed)
        self.pool = NodePool(params.capacity, amaf=params.variant.uses_amaf)
        self.root = self.pool.allocate(NULL, NULL, int(state.to_move))
        self.root_state = state.copy()
        self._scratch = state.copy()
        self._bufs = _Scratch(params.move_cap)
        self.playouts_done = 0

    def iterate(self, n: int = 1) -> None:
        _run_level(self.root_state, self._scratch, self.pool, self.root, n,
                   self.params, self.mast, self.rng, self._bufs)
        self.playouts_done += n

    def result(self) -> SearchResult:
        return SearchResult(
            chosen_move=_robust_choice(self.pool, self.root, self.root_state,
                                       self.rng),
            root_visits=self.pool.visits(self.root),
            total_playouts=self.playouts_done,
            recycled_total=self.pool.recycled_total,
            peak_nodes=self.pool.peak_allocated,
            root_stats=_root_stats(self.pool, self.root),
        )


def _search_two_level(state: GameState, params: SearchParams, mast: MastTable,
                      rng) -> SearchResult:
    v = params.variant
    use_amaf = v.uses_amaf
    n_top, n_sec = params.n_top, params.n_sec
    top_iters = params.p_top if v is Variant.GRAVER2 else n_top
    sec_playouts = params.p_sec if v is Variant.GRAVER2 else n_sec

    pool_top = NodePool(n_top, amaf=use_amaf)
    pool_sec = NodePool(n_sec, amaf=use_amaf)
    top_root = pool_top.allocate(NULL, NULL, int(state.to_move))

    top_scratch = state.copy()
    sec_scratch = state.copy()
    bufs = _Scratch(params.move_cap)
    policy = params.policy

    collect = None
    if not v.forward_sharing:
        collect = (
            np.empty(sec_playouts * (params.move_cap + 2), dtype=np.int16),
            np.empty(sec_playouts + 1, dtype=np.int32),
            np.empty(sec_playouts, dtype=np.float64),
        )

    total = 0
    for _ in range(top_iters):
        # -- top-level descent (the path stays fixed during the nested search)
        state.copy_into(top_scratch)
        node = top_root
        path = [top_root]
        tmoves: list[int] = []
        ref = RefContext(top_root)
        expand_move = None
        if not (pool_top.visits(top_root) == 0 and not pool_top.children(top_root)):
            while True:
                if top_scratch.is_terminal(params.move_cap):
                    break
                legal = top_scratch.legal_move_ids()
                if v.uct_selection:
                    m = int(k_select_uct(pool_top.links, pool_top.reward,
                                         pool_top.child_map, node, legal,
                                         len(legal), policy.exploration_c, rng))
                else:
                    m = int(k_select_grave(pool_top.links, pool_top.reward,
                                           pool_top.child_map, node,
                                           pool_top.amaf_count[ref.node],
                                           pool_top.amaf_sum[ref.node],
                                           legal, len(legal), policy.bias, rng))
                ch = pool_top.child(node, m)
                top_scratch.apply_id_inplace(m)
                tmoves.append(m)
                if ch == NULL:
                    expand_move = m
                    break
                node = ch
                path.append(ch)
                ref = update_ref(pool_top, ref, ch, policy)

        guard = pool_top.begin_path(path)
        if expand_move is not None:
            leaf = pool_top.allocate(node, expand_move, int(top_scratch.to_move))
            path.append(leaf)

        # -- nested search from the leaf position
        sec_root = pool_sec.allocate(NULL, NULL, int(top_scratch.to_move))
        fs = None
        if v.forward_sharing:
            fs = (pool_top, np.asarray(path, dtype=np.int32),
                  np.asarray(tmoves, dtype=np.int16), ref.node)
        _run_level(top_scratch, sec_scratch, pool_sec, sec_root, sec_playouts,
                   params, mast, rng, bufs, fs=fs, collect=collect)
        total += sec_playouts

        if collect is not None:
            k_batch_top(pool_top.links, pool_top.reward, pool_top.amaf_count,
                        pool_top.amaf_sum, pool_top.amaf_enabled,
                        np.asarray(path, dtype=np.int32), len(path),
                        np.asarray(tmoves, dtype=np.int16),
                        collect[0], collect[1], collect[2], sec_playouts,
                        bufs.seen)

        pool_sec.release_subtree(sec_root)
        pool_top.end_path(guard)

    return SearchResult(
        chosen_move=_robust_choice(pool_top, top_root, state, rng),
        root_visits=pool_top.visits(top_root),
        total_playouts=total,
        recycled_total=pool_top.recycled_total + pool_sec.recycled_total,
        peak_nodes=pool_top.peak_allocated + pool_sec.peak_allocated,
        root_stats=_root_stats(pool_top, top_root),
    )


def run_search(state: GameState, params: SearchParams,
               mast: MastTable | None = None) -> SearchResult:
    """One move decision: dispatches on the variant, deterministic per seed."""
    if state.is_terminal(params.move_cap):
        raise ConfigError("run_search needs a non-terminal position")
    params = params.validated()
    if mast is None:
        mast = MastTable()
    if params.variant.two_level:
        return _search_two_level(state, params, mast, make_state(params.seed))
    search = TreeSearch(state, params, mast)
    search.iterate(params.playouts)
    return search.result()


def play_game(agent_a: SearchParams, agent_b: SearchParams, seed: int,
              a_color: Player = Player.BLACK, game_id: int = 0,
              name_a: str | None = None, name_b: str | None = None,
              komi: float = DEFAULT_KOMI,
              move_cap: int = DEFAULT_MOVE_CAP,
              on_move=None) -> MatchRecord:
    """Self-play one game, alternating searches from the live position.

    Each agent keeps its own MAST table for the whole game, decayed by its
    mast_decay factor before every turn after its first. Per-turn search
    seeds derive deterministically from the game seed and the ply.
    `on_move(player, move)` is invoked after every applied move.
    """
    agents = {a_color: agent_a.validated(),
              a_color.opponent: agent_b.validated()}
    masts = {Player.BLACK: MastTable(), Player.WHITE: MastTable()}
    turns = {Player.BLACK: 0, Player.WHITE: 0}
    playouts = {Player.BLACK: 0, Player.WHITE: 0}
    peaks = {Player.BLACK: 0, Player.WHITE: 0}
    recycled = {Player.BLACK: 0, Player.WHITE: 0}

    t0 = time.perf_counter()
    state = GameState.initial()
    n_moves = 0
    while not state.is_terminal(move_cap):
        color = state.to_move
        params = agents[color]
        if turns[color] > 0:
            masts[color].decay(params.mast_decay)
        turns[color] += 1
        params = replace(params, seed=derive_seed(seed, state.ply))
        result = run_search(state, params, masts[color])
        playouts[color] += result.total_playouts
        peaks[color] = max(peaks[color], result.peak_nodes)
        recycled[color] += result.recycled_total
        state = state.apply(Move.from_index(result.chosen_move))
        n_moves += 1
        if on_move is not None:
            on_move(color, Move.from_index(result.chosen_move))
    outcome = state.score(komi)
    winner = "a" if outcome.winner is a_color else "b"
    wall_ms = (time.perf_counter() - t0) * 1000.0

    b_color = a_color.opponent
    return MatchRecord(
        game_id=game_id,
        seed=seed,
        agent_a=name_a or agent_a.describe(),
        agent_b=name_b or agent_b.describe(),
        a_color=a_color,
        winner=winner,
        moves=n_moves,
        playouts_a=playouts[a_color],
        playouts_b=playouts[b_color],
        peak_nodes_a=peaks[a_color],
        peak_nodes_b=peaks[b_color],
        recycled_a=recycled[a_color],
        recycled_b=recycled[b_color],
        wall_ms=wall_ms,
    )
