"""Rules-engine tests: hand-verified positions plus randomized invariants."""

import numpy as np
import pytest

from graver.game import (
    EMPTY,
    NPOINTS,
    PASS,
    GameState,
    Move,
    Player,
    initial_state,
    legal_moves,
    apply_move,
)
from graver.rng import mix64

from go_cases import CASES


@pytest.mark.parametrize("name,fn", CASES, ids=[name for name, _ in CASES])
def test_position_case(name, fn):
    fn()


def _random_game(seed, max_moves=150):
    """Play uniformly random legal moves; yields each successor state."""
    state = initial_state()
    x = seed
    for _ in range(max_moves):
        if state.is_terminal():
            break
        ids = state.legal_move_ids()
        x = mix64(x)
        state = state.apply(Move.from_index(int(ids[x % len(ids)])))
        yield state


def _liberties_ok(board):
    """Full-board scan: every stone group must have at least one liberty."""
    from graver.game import NBRS

    seen = set()
    for p in range(NPOINTS):
        if board[p] == EMPTY or p in seen:
            continue
        color = board[p]
        stack, group, libs = [p], set(), 0
        group.add(p)
        while stack:
            q = stack.pop()
            for nb in NBRS[q]:
                if nb < 0:
                    continue
                if board[nb] == EMPTY:
                    libs += 1
                elif board[nb] == color and nb not in group:
                    group.add(nb)
                    stack.append(nb)
        if libs == 0:
            return False
        seen |= group
    return True


@pytest.mark.parametrize("seed", range(8))
def test_no_zero_liberty_groups_after_random_play(seed):
    for state in _random_game(1000 + seed):
        assert _liberties_ok(state.board)


@pytest.mark.parametrize("seed", range(8))
def test_legal_moves_always_apply_cleanly(seed):
    state = initial_state()
    x = seed * 77
    for _ in range(60):
        if state.is_terminal():
            break
        moves = legal_moves(state)
        for m in moves:
            assert state.is_legal_id(m.index)
        x = mix64(x)
        state = apply_move(state, moves[x % len(moves)])


def test_replay_determinism():
    seq = [(2, 2), (6, 6), (2, 6), (6, 2), (4, 4), "pass", (3, 3)]

    def run():
        s = initial_state()
        hashes = []
        for mv in seq:
            s = s.apply(Move.pass_move() if mv == "pass" else Move.play(*mv))
            hashes.append(s.position_hash)
        return s, hashes

    a, ha = run()
    b, hb = run()
    assert ha == hb
    assert np.array_equal(a.board, b.board)
    assert a.to_move == b.to_move


def test_state_copy_is_independent():
    s = initial_state()
    c = s.copy()
    c.apply_id_inplace(40)
    assert s.stone_count() == 0
    assert c.stone_count() == 1
    assert s.position_hash != c.position_hash


def test_area_sum_bounded_in_random_endgames():
    for seed in range(6):
        state = initial_state()
        x = seed
        while not state.is_terminal():
            ids = state.legal_move_ids()
            x = mix64(x)
            state = state.apply(Move.from_index(int(ids[x % len(ids)])))
        out = state.score()
        assert out.black_area + out.white_area <= NPOINTS
        assert out.reward(Player.BLACK) + out.reward(Player.WHITE) == 1.0


def test_from_board_rejects_dead_groups():
    board = np.zeros(NPOINTS, dtype=np.int8)
    board[0] = 1  # a1 black
    board[1] = 2  # b1 white
    board[9] = 2  # a2 white: black corner stone has no liberty
    with pytest.raises(ValueError):
        GameState.from_board(board)


def test_pass_move_properties():
    s = initial_state().apply(Move.pass_move())
    assert s.to_move is Player.WHITE
    assert s.consecutive_passes == 1
    assert s.ply == 1
    assert s.stone_count() == 0
    assert PASS in {m.index for m in legal_moves(s)}
