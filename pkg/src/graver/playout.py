"""MAST-guided playouts with epsilon-greedy sampling and inter-turn decay.

A playout samples moves until the game ends (two passes or the ply cap).
With probability epsilon the move is uniform over the legal playout moves;
otherwise the move with the best MAST mean is taken (ties uniform). "Legal
playout moves" are the legal board moves that do not fill the mover's own
single-point eyes (all four orthogonal neighbours own stones or edge); when
no such move exists the playout passes. Without the eye restriction random
Go playouts kill their own groups and rarely reach a meaningful end.

MAST keeps one (weight, reward) pair per player per move id. Weights are
real-valued because tables decay multiplicatively between turns of the same
game. An unplayed move defaults to the optimistic value 1.0 so greedy
sampling still covers untried moves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .game import (
    DEFAULT_KOMI,
    DEFAULT_MOVE_CAP,
    NMOVES,
    PASS,
    GameState,
    Move,
    Player,
    k_apply,
    k_is_eye,
    k_is_terminal,
    k_move_legal,
    k_score,
)
from .rng import rng_below, rng_f64

MAST_DEFAULT_VALUE = 1.0

_M_TO_MOVE = 0
_M_NEMPTY = 3


@njit(inline="always")
def _playout_legal(board, cells, meta, history, p, color):
    # eye fills are excluded from playouts; everything else is plain legality
    if k_is_eye(board, p, color):
        return False
    return k_move_legal(board, cells, meta, history, p, color)


@njit(cache=True)
def k_sample_playout_move(board, cells, empties, meta, history, mast_cnt, mast_sum,
                          epsilon, rng):
    color = np.int64(meta[_M_TO_MOVE])
    nempty = np.int64(meta[_M_NEMPTY])
    if nempty == 0:
        return PASS
    if rng_f64(rng) < epsilon:
        # uniform over legal playout moves: rejection-sample the empty list,
        # falling back to an exact scan when hits are rare
        tries = 0
        limit = 2 * nempty + 8
        while tries < limit:
            p = empties[rng_below(rng, nempty)]
            if _playout_legal(board, cells, meta, history, p, color):
                return p
            tries += 1
        n = 0
        chosen = PASS
        for i in range(nempty):
            p = empties[i]
            if _playout_legal(board, cells, meta, history, p, color):
                n += 1
                if rng_below(rng, n) == 0:
                    chosen = p
        return chosen
    # greedy on MAST means; legality is only checked when a candidate could
    # become the running best, which skips most of the board
    row_c = mast_cnt[color - 1]
    row_s = mast_sum[color - 1]
    best_v = -1.0
    best_m = PASS
    ties = 1
    for i in range(nempty):
        p = empties[i]
        c = row_c[p]
        v = row_s[p] / c if c > 0.0 else MAST_DEFAULT_VALUE
        if v < best_v:
            continue
        if v > best_v:
            if _playout_legal(board, cells, meta, history, p, color):
                best_v = v
                best_m = p
                ties = 1
        else:
            if _playout_legal(board, cells, meta, history, p, color):
                ties += 1
                if rng_below(rng, ties) == 0:
                    best_m = p
    return best_m


@njit(cache=True)
def k_run_playout(board, cells, empties, meta, history, mast_cnt, mast_sum,
                  epsilon, move_cap, komi, rng, out_moves):
    """Play the (mutable) position to the end; returns (n_moves, black_reward)."""
    n = 0
    while not k_is_terminal(meta, move_cap):
        color = np.int64(meta[_M_TO_MOVE])
        m = k_sample_playout_move(
            board, cells, empties, meta, history, mast_cnt, mast_sum, epsilon, rng
        )
        out_moves[n] = m
        n += 1
        k_apply(board, cells, empties, meta, history, m, color)
    black, white = k_score(board)
    reward_black = 1.0 if black - white > komi else 0.0
    return n, reward_black


@njit(cache=True)
def k_update_mast(mast_cnt, mast_sum, moves, n, start_color, reward_black):
    color = np.int64(start_color)
    for i in range(n):
        r = reward_black if color == 1 else 1.0 - reward_black
        mast_cnt[color - 1, moves[i]] += 1.0
        mast_sum[color - 1, moves[i]] += r
        color = 3 - color


class MastTable:
    """Per-player, per-move running means over playout outcomes."""

    __slots__ = ("counts", "sums")

    def __init__(self):
        self.counts = np.zeros((2, NMOVES), dtype=np.float64)
        self.sums = np.zeros((2, NMOVES), dtype=np.float64)

    def value(self, player: Player, move: int) -> float:
        c = self.counts[int(player) - 1, move]
        if c <= 0.0:
            return MAST_DEFAULT_VALUE
        return float(self.sums[int(player) - 1, move] / c)

    def decay(self, factor: float) -> None:
        self.counts *= factor
        self.sums *= factor

    def reset(self) -> None:
        self.counts[:] = 0.0
        self.sums[:] = 0.0


@dataclass(frozen=True)
class PlayoutRecord:
    """Alternating (player, move) trace of one playout plus both rewards."""

    start_player: Player
    moves: np.ndarray  # int16 move ids, alternation starting at start_player
    reward_black: float

    def reward(self, player: Player) -> float:
        return self.reward_black if player is Player.BLACK else 1.0 - self.reward_black

    def players(self) -> list[Player]:
        out = []
        p = self.start_player
        for _ in range(len(self.moves)):
            out.append(p)
            p = p.opponent
        return out

    def __len__(self) -> int:
        return len(self.moves)


def mast_value(table: MastTable, player: Player, move: int) -> float:
    return table.value(player, move)


def sample_playout_move(state: GameState, table: MastTable, epsilon: float, rng) -> Move:
    mid = k_sample_playout_move(
        state.board, state.cells, state.empties, state.meta, state.history,
        table.counts, table.sums, epsilon, rng,
    )
    return Move.from_index(int(mid))


def run_playout(state: GameState, table: MastTable, epsilon: float, rng,
                move_cap: int = DEFAULT_MOVE_CAP, komi: float = DEFAULT_KOMI) -> PlayoutRecord:
    """Sample a full playout from a copy of `state` (the input is untouched)."""
    scratch = state.copy()
    start = scratch.to_move
    buf = np.empty(move_cap + 1, dtype=np.int16)
    n, reward_black = k_run_playout(
        scratch.board, scratch.cells, scratch.empties, scratch.meta, scratch.history,
        table.counts, table.sums, epsilon, move_cap, komi, rng, buf,
    )
    return PlayoutRecord(start, buf[:n].copy(), float(reward_black))


def update_mast(table: MastTable, record: PlayoutRecord) -> None:
    k_update_mast(
        table.counts, table.sums, record.moves, len(record.moves),
        int(record.start_player), record.reward_black,
    )


def decay_mast(table: MastTable, factor: float) -> None:
    if not 0.0 <= factor <= 1.0:
        raise ValueError("decay factor must lie in [0, 1]")
    table.decay(factor)
