"""Selection values: UCB, the AMAF interpolation weight, and move choice.

Value conventions for the AMAF-guided selection:
  * zero visits with AMAF evidence puts full weight on the AMAF mean
    (the interpolation weight becomes exactly 1), which is what lets the
    search hand meaningful values to unexpanded or recycled nodes instead
    of the UCB infinity rule;
  * zero visits and zero AMAF evidence yields the optimistic first-play
    value 1.0, so every move is eventually tried but the value stays
    finite under recycling;
  * AMAF statistics are read from a reference ancestor: the deepest node
    on the selection path whose visit count strictly exceeds the
    reference threshold (the search root acts as fallback).

All ties are broken uniformly with the search's seeded generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .pool import L_VISITS, NULL
from .rng import rng_below

DEFAULT_EXPLORATION = math.sqrt(2.0) / 2.0
DEFAULT_BIAS = 1e-2
DEFAULT_REF_THRESHOLD = 25

FIRST_PLAY_VALUE = 1.0


@dataclass(frozen=True)
class PolicyParams:
    exploration_c: float = DEFAULT_EXPLORATION
    bias: float = DEFAULT_BIAS
    ref_threshold: int = DEFAULT_REF_THRESHOLD

    def validate(self) -> None:
        if self.exploration_c < 0:
            raise ValueError("exploration_c must be >= 0")
        if self.bias <= 0:
            raise ValueError("bias must be > 0")
        if self.ref_threshold < 0:
            raise ValueError("ref_threshold must be >= 0")


@dataclass(frozen=True)
class RefContext:
    """The node whose AMAF table is consulted; `is_top` marks a handle that
    lives in the enclosing (top-level) tree during forward sharing."""

    node: int
    is_top: bool = False


@njit(cache=True)
def ucb_value(reward_sum, visits, parent_visits, c):
    """Mean reward plus exploration bonus; unvisited nodes are infinite."""
    if visits == 0:
        return np.inf
    pv = parent_visits if parent_visits > 0 else 1
    return reward_sum / visits + c * math.sqrt(math.log(pv) / visits)


@njit(cache=True)
def beta(amaf_count, visits, bias):
    """Interpolation weight toward the AMAF mean, in [0, 1]."""
    if amaf_count <= 0:
        return 0.0
    return amaf_count / (amaf_count + visits + bias * amaf_count * visits)


@njit(cache=True)
def grave_move_value(node_mean, visits, amaf_mean, amaf_count, bias):
    if visits == 0:
        if amaf_count == 0:
            return FIRST_PLAY_VALUE
        return amaf_mean
    if amaf_count == 0:
        return node_mean
    b = beta(amaf_count, visits, bias)
    return (1.0 - b) * node_mean + b * amaf_mean


@njit(cache=True)
def k_select_grave(links, reward, cmap, node, ref_ac, ref_as, legal, n_legal, bias, rng):
    """Argmax of the interpolated value over legal moves, uniform tie-break."""
    best_v = -1.0
    best_m = -1
    ties = 1
    for i in range(n_legal):
        m = legal[i]
        ch = cmap[node, m]
        if ch == NULL:
            v = 0
            mean = 0.0
        else:
            v = links[ch, L_VISITS]
            mean = reward[ch] / v if v > 0 else 0.0
        ac = ref_ac[m]
        am = ref_as[m] / ac if ac > 0 else 0.0
        val = grave_move_value(mean, v, am, ac, bias)
        if val > best_v:
            best_v = val
            best_m = m
            ties = 1
        elif val == best_v:
            ties += 1
            if rng_below(rng, ties) == 0:
                best_m = m
    return best_m


@njit(cache=True)
def k_select_uct(links, reward, cmap, node, legal, n_legal, c, rng):
    """UCB argmax; any unexpanded move wins (UCB infinite), chosen uniformly."""
    parent_visits = links[node, L_VISITS]
    n_unexp = 0
    best_m = -1
    # uniform reservoir over unexpanded moves first
    for i in range(n_legal):
        m = legal[i]
        ch = cmap[node, m]
        if ch == NULL or links[ch, L_VISITS] == 0:
            n_unexp += 1
            if rng_below(rng, n_unexp) == 0:
                best_m = m
    if n_unexp > 0:
        return best_m
    best_v = -1.0
    ties = 1
    for i in range(n_legal):
        m = legal[i]
        ch = cmap[node, m]
        val = ucb_value(reward[ch], links[ch, L_VISITS], parent_visits, c)
        if val > best_v:
            best_v = val
            best_m = m
            ties = 1
        elif val == best_v:
            ties += 1
            if rng_below(rng, ties) == 0:
                best_m = m
    return best_m


def select_move_grave(pool, node, ref, legal, params, rng, ref_pool=None) -> int:
    """AMAF-guided choice among `legal` move ids at `node`.

    `ref_pool` names the pool holding the reference node's tables; it
    differs from `pool` only under forward sharing, where the nested search
    reads AMAF rows from the enclosing tree.
    """
    rp = ref_pool if ref_pool is not None else pool
    return int(
        k_select_grave(
            pool.links, pool.reward, pool.child_map, node,
            rp.amaf_count[ref.node], rp.amaf_sum[ref.node],
            np.asarray(legal, dtype=np.int16), len(legal),
            params.bias, rng,
        )
    )


def select_child_uct(pool, node, legal, params, rng) -> int:
    return int(
        k_select_uct(
            pool.links, pool.reward, pool.child_map, node,
            np.asarray(legal, dtype=np.int16), len(legal),
            params.exploration_c, rng,
        )
    )


def update_ref(pool, ref: RefContext, child: int, params: PolicyParams) -> RefContext:
    """The child takes over as reference once its visits exceed the threshold."""
    if pool.visits(child) > params.ref_threshold:
        return RefContext(child)
    return ref
