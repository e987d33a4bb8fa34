"""9x9 Go under Tromp-Taylor rules.

Rules implemented here:
  * area scoring (stones + empty regions reaching exactly one colour),
  * positional superko on board-only Zobrist hashes,
  * suicide forbidden,
  * game ends after two consecutive passes or a hard cap of 243 plies
    (three times the board area), after which the position is scored as-is,
  * komi 7.5 by default, so rewards are always 0/1 and draws cannot occur.

Board points use a dense id in [0, 81), row-major: id = 9*row + col.
The pass move has id 81, giving the 82-move id space shared by the AMAF and
MAST tables. `GameState` is a value type: `apply_move` returns a new state
and never mutates its argument.

The rule primitives are compiled kernels operating on the state's arrays
(board, group structure, empty list, scalar meta, superko hash set) so that
playouts and tree descents stay cheap; group liberties are tracked as
pseudo-liberties, which answer both "is this suicide" and "does this
capture" exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from numba import njit

from .rng import mix64

SIZE = 9
NPOINTS = SIZE * SIZE
PASS = NPOINTS
NMOVES = NPOINTS + 1
DEFAULT_KOMI = 7.5
DEFAULT_MOVE_CAP = 3 * NPOINTS

EMPTY = 0
BLACK = 1
WHITE = 2

# GTP column letters skip "I"
_GTP_COLS = "ABCDEFGHJ"

# cells[] rows
_R_GRP = 0   # union-find parent (stones only, -1 on empty points)
_R_PLIB = 1  # pseudo-liberty count, valid at group roots
_R_NEXT = 2  # next stone in the group's circular list
_R_EIDX = 3  # index into the empties list, valid on empty points

# meta[] slots
_M_TO_MOVE = 0
_M_PASSES = 1
_M_PLY = 2
_M_NEMPTY = 3
_M_HASH = 4
_M_NHIST = 5

_HIST_CAP = 1024  # power of two; a game inserts at most move-cap + 1 hashes
_HIST_MASK = np.uint64(_HIST_CAP - 1)

_U0 = np.uint64(0)
_U1 = np.uint64(1)


class IllegalMove(Exception):
    """Raised when a move outside legal_moves() is applied."""


class NotTerminal(Exception):
    """Raised when a live position is scored."""


class Player(IntEnum):
    BLACK = 1
    WHITE = 2

    @property
    def opponent(self) -> "Player":
        return Player.WHITE if self is Player.BLACK else Player.BLACK


@dataclass(frozen=True)
class Move:
    """A board point (row, col in [0, 9)) or the pass move."""

    row: int = -1
    col: int = -1
    is_pass: bool = False

    @staticmethod
    def play(row: int, col: int) -> "Move":
        if not (0 <= row < SIZE and 0 <= col < SIZE):
            raise ValueError(f"point off board: ({row}, {col})")
        return Move(row, col, False)

    @staticmethod
    def pass_move() -> "Move":
        return Move(is_pass=True)

    @staticmethod
    def from_index(index: int) -> "Move":
        if index == PASS:
            return Move.pass_move()
        if not 0 <= index < NPOINTS:
            raise ValueError(f"move id out of range: {index}")
        return Move(index // SIZE, index % SIZE, False)

    @property
    def index(self) -> int:
        return PASS if self.is_pass else SIZE * self.row + self.col

    def gtp(self) -> str:
        if self.is_pass:
            return "pass"
        return f"{_GTP_COLS[self.col]}{self.row + 1}"

    @staticmethod
    def from_gtp(text: str) -> "Move":
        t = text.strip().upper()
        if t == "PASS":
            return Move.pass_move()
        col = _GTP_COLS.find(t[0])
        if col < 0:
            raise ValueError(f"bad GTP vertex: {text!r}")
        row = int(t[1:]) - 1
        return Move.play(row, col)

    def __str__(self) -> str:
        return self.gtp()


def move_index(move: Move) -> int:
    """Map the 82 distinct moves bijectively onto [0, 82)."""
    return move.index


def _build_neighbors():
    nbrs = np.full((NPOINTS, 4), -1, dtype=np.int32)
    nnbr = np.zeros(NPOINTS, dtype=np.int32)
    for p in range(NPOINTS):
        r, c = divmod(p, SIZE)
        k = 0
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < SIZE and 0 <= cc < SIZE:
                nbrs[p, k] = rr * SIZE + cc
                k += 1
        nnbr[p] = k
    return nbrs, nnbr


def _build_zobrist():
    table = np.empty((2, NPOINTS), dtype=np.uint64)
    x = 0x6A09E667F3BCC908  # fixed so hashes are stable across runs
    for c in range(2):
        for p in range(NPOINTS):
            x = mix64(x)
            table[c, p] = x
    return table


NBRS, NNBR = _build_neighbors()
ZOBRIST = _build_zobrist()
EMPTY_BOARD_HASH = np.uint64(mix64(0x60B0A2D))  # nonzero: 0 marks free hash slots


@njit(inline="always")
def _find(grp, p):
    while grp[p] != p:
        grp[p] = grp[grp[p]]
        p = grp[p]
    return p


@njit(inline="always")
def _hist_contains(history, h):
    i = h & _HIST_MASK
    while True:
        v = history[i]
        if v == _U0:
            return False
        if v == h:
            return True
        i = (i + _U1) & _HIST_MASK


@njit(inline="always")
def _hist_insert(history, h):
    i = h & _HIST_MASK
    while True:
        v = history[i]
        if v == h:
            return
        if v == _U0:
            history[i] = h
            return
        i = (i + _U1) & _HIST_MASK


@njit(cache=True)
def k_move_legal(board, cells, meta, history, p, color):
    """Tromp-Taylor legality of placing `color` at point `p`.

    Empty point, not suicide (captures resolved first), and the resulting
    board hash must not repeat any earlier position (positional superko).
    """
    if board[p] != EMPTY:
        return False
    grp = cells[_R_GRP]
    plib = cells[_R_PLIB]
    nxt = cells[_R_NEXT]

    has_empty = False
    eroots = np.empty(4, dtype=np.int64)
    eadj = np.empty(4, dtype=np.int64)
    oroots = np.empty(4, dtype=np.int64)
    oadj = np.empty(4, dtype=np.int64)
    ne = 0
    no = 0
    for k in range(4):
        nb = NBRS[p, k]
        if nb < 0:
            continue
        b = board[nb]
        if b == EMPTY:
            has_empty = True
        elif b == color:
            r = _find(grp, nb)
            found = False
            for i in range(no):
                if oroots[i] == r:
                    oadj[i] += 1
                    found = True
                    break
            if not found:
                oroots[no] = r
                oadj[no] = 1
                no += 1
        else:
            r = _find(grp, nb)
            found = False
            for i in range(ne):
                if eroots[i] == r:
                    eadj[i] += 1
                    found = True
                    break
            if not found:
                eroots[ne] = r
                eadj[ne] = 1
                ne += 1

    # a group dies iff every pseudo-liberty it has comes from p
    any_capture = False
    for i in range(ne):
        if plib[eroots[i]] == eadj[i]:
            any_capture = True
            break

    if not has_empty and not any_capture:
        own_alive = False
        for i in range(no):
            if plib[oroots[i]] > oadj[i]:
                own_alive = True
                break
        if not own_alive:
            return False  # suicide

    h = meta[_M_HASH] ^ ZOBRIST[color - 1, p]
    if any_capture:
        ecolor = 3 - color
        for i in range(ne):
            if plib[eroots[i]] == eadj[i]:
                q = eroots[i]
                while True:
                    h ^= ZOBRIST[ecolor - 1, q]
                    q = nxt[q]
                    if q == eroots[i]:
                        break
    return not _hist_contains(history, h)


@njit(cache=True)
def k_play(board, cells, empties, meta, history, p, color):
    """Place a legal stone: captures, merges and bookkeeping, in place."""
    grp = cells[_R_GRP]
    plib = cells[_R_PLIB]
    nxt = cells[_R_NEXT]
    eidx = cells[_R_EIDX]

    # remove p from the empty list (swap with last entry)
    nempty = int(meta[_M_NEMPTY])
    i = eidx[p]
    last = empties[nempty - 1]
    empties[i] = last
    eidx[last] = i
    nempty -= 1

    board[p] = color
    grp[p] = p
    nxt[p] = p
    h = meta[_M_HASH] ^ ZOBRIST[color - 1, p]

    nlib = 0
    eroots = np.empty(4, dtype=np.int64)
    ne = 0
    for k in range(4):
        nb = NBRS[p, k]
        if nb < 0:
            continue
        b = board[nb]
        if b == EMPTY:
            nlib += 1
        elif b != color:
            r = _find(grp, nb)
            plib[r] -= 1
            found = False
            for i2 in range(ne):
                if eroots[i2] == r:
                    found = True
                    break
            if not found:
                eroots[ne] = r
                ne += 1
    plib[p] = nlib

    # merge with adjacent own groups
    proot = p
    for k in range(4):
        nb = NBRS[p, k]
        if nb < 0 or board[nb] != color:
            continue
        r = _find(grp, nb)
        plib[r] -= 1  # the point p was one of that group's pseudo-liberties
        if r != proot:
            plib[proot] += plib[r]
            grp[r] = proot
            t = nxt[proot]
            nxt[proot] = nxt[r]
            nxt[r] = t

    # remove captured enemy groups
    ecolor = 3 - color
    for i2 in range(ne):
        root = eroots[i2]
        if plib[root] != 0:
            continue
        q = root
        while True:
            qn = nxt[q]
            board[q] = EMPTY
            grp[q] = -1
            h ^= ZOBRIST[ecolor - 1, q]
            empties[nempty] = q
            eidx[q] = nempty
            nempty += 1
            q = qn
            if q == root:
                break
        # dead stones are off the board now; refund their neighbours' liberties
        q = root
        while True:
            qn = nxt[q]
            for k in range(4):
                nb = NBRS[q, k]
                if nb >= 0 and board[nb] != EMPTY:
                    plib[_find(grp, nb)] += 1
            q = qn
            if q == root:
                break

    meta[_M_NEMPTY] = nempty
    meta[_M_HASH] = h
    meta[_M_PASSES] = 0
    meta[_M_PLY] += _U1
    meta[_M_TO_MOVE] = np.uint64(3 - color)
    _hist_insert(history, h)


@njit(inline="always")
def k_pass(meta):
    meta[_M_PASSES] += _U1
    meta[_M_PLY] += _U1
    meta[_M_TO_MOVE] = np.uint64(3) - meta[_M_TO_MOVE]


@njit(inline="always")
def k_apply(board, cells, empties, meta, history, move_id, color):
    if move_id == PASS:
        k_pass(meta)
    else:
        k_play(board, cells, empties, meta, history, move_id, color)


@njit(inline="always")
def k_is_terminal(meta, move_cap):
    return meta[_M_PASSES] >= np.uint64(2) or meta[_M_PLY] >= np.uint64(move_cap)


@njit(cache=True)
def k_legal_moves(board, cells, empties, meta, history, color, out):
    """Fill `out` with all legal move ids (pass last); returns the count."""
    n = 0
    nempty = int(meta[_M_NEMPTY])
    for i in range(nempty):
        p = empties[i]
        if k_move_legal(board, cells, meta, history, p, color):
            out[n] = p
            n += 1
    out[n] = PASS
    return n + 1


@njit(inline="always")
def k_is_eye(board, p, color):
    # single-point eye shape: every on-board neighbour is an own stone
    for k in range(4):
        nb = NBRS[p, k]
        if nb >= 0 and board[nb] != color:
            return False
    return True


@njit(cache=True)
def k_score(board):
    """Tromp-Taylor areas: (black_points, white_points)."""
    black = 0
    white = 0
    for p in range(NPOINTS):
        if board[p] == BLACK:
            black += 1
        elif board[p] == WHITE:
            white += 1
    visited = np.zeros(NPOINTS, dtype=np.uint8)
    queue = np.empty(NPOINTS, dtype=np.int64)
    for p in range(NPOINTS):
        if board[p] != EMPTY or visited[p]:
            continue
        qn = 0
        queue[qn] = p
        qn += 1
        visited[p] = 1
        size = 0
        reach_b = False
        reach_w = False
        while qn > 0:
            qn -= 1
            q = queue[qn]
            size += 1
            for k in range(4):
                nb = NBRS[q, k]
                if nb < 0:
                    continue
                b = board[nb]
                if b == EMPTY:
                    if not visited[nb]:
                        visited[nb] = 1
                        queue[qn] = nb
                        qn += 1
                elif b == BLACK:
                    reach_b = True
                else:
                    reach_w = True
        if reach_b and not reach_w:
            black += size
        elif reach_w and not reach_b:
            white += size
    return black, white


@dataclass(frozen=True)
class GameOutcome:
    black_area: int
    white_area: int
    winner: Player

    def reward(self, player: Player) -> float:
        return 1.0 if player is self.winner else 0.0


class GameState:
    """Full 9x9 position: board, player to move, superko history, pass count.

    Copying yields an independent value; the public `apply_move` is
    functional. The underlying arrays are shared with the compiled kernels.
    """

    __slots__ = ("board", "cells", "empties", "meta", "history")

    def __init__(self, board, cells, empties, meta, history):
        self.board = board
        self.cells = cells
        self.empties = empties
        self.meta = meta
        self.history = history

    @staticmethod
    def initial() -> "GameState":
        board = np.zeros(NPOINTS, dtype=np.int8)
        cells = np.empty((4, NPOINTS), dtype=np.int32)
        cells[_R_GRP] = -1
        cells[_R_PLIB] = 0
        cells[_R_NEXT] = -1
        cells[_R_EIDX] = np.arange(NPOINTS, dtype=np.int32)
        empties = np.arange(NPOINTS, dtype=np.int32)
        meta = np.zeros(8, dtype=np.uint64)
        meta[_M_TO_MOVE] = BLACK
        meta[_M_NEMPTY] = NPOINTS
        meta[_M_HASH] = EMPTY_BOARD_HASH
        history = np.zeros(_HIST_CAP, dtype=np.uint64)
        state = GameState(board, cells, empties, meta, history)
        _hist_insert(history, meta[_M_HASH])
        return state

    @staticmethod
    def from_board(grid, to_move: Player = Player.BLACK) -> "GameState":
        """Build a state from an 81-cell array of {0, 1, 2} (history = {now})."""
        flat = np.asarray(grid, dtype=np.int8).reshape(NPOINTS)
        state = GameState.initial()
        b = state.board
        cells = state.cells
        b[:] = flat
        grp, plib, nxt, eidx = cells
        grp[:] = -1
        plib[:] = 0
        nxt[:] = -1
        n_empty = 0
        h = int(EMPTY_BOARD_HASH)
        for p in range(NPOINTS):
            if flat[p] == EMPTY:
                state.empties[n_empty] = p
                eidx[p] = n_empty
                n_empty += 1
            else:
                h ^= int(ZOBRIST[flat[p] - 1, p])
        # label groups by flood fill, threading each group's circular list
        for p in range(NPOINTS):
            if flat[p] == EMPTY or grp[p] != -1:
                continue
            color = flat[p]
            stack = [p]
            grp[p] = p
            members = []
            while stack:
                q = stack.pop()
                members.append(q)
                for nb in NBRS[q]:
                    if nb >= 0 and flat[nb] == color and grp[nb] == -1:
                        grp[nb] = p
                        stack.append(nb)
            libs = 0
            for q in members:
                for nb in NBRS[q]:
                    if nb >= 0 and flat[nb] == EMPTY:
                        libs += 1
            if libs == 0:
                raise ValueError(f"group without liberties at point {p}")
            plib[p] = libs
            for i, q in enumerate(members):
                nxt[q] = members[(i + 1) % len(members)]
        state.meta[_M_TO_MOVE] = int(to_move)
        state.meta[_M_NEMPTY] = n_empty
        state.meta[_M_HASH] = np.uint64(h)
        state.history[:] = 0
        _hist_insert(state.history, state.meta[_M_HASH])
        return state

    def copy(self) -> "GameState":
        return GameState(
            self.board.copy(),
            self.cells.copy(),
            self.empties.copy(),
            self.meta.copy(),
            self.history.copy(),
        )

    def copy_into(self, other: "GameState") -> None:
        other.board[:] = self.board
        other.cells[:] = self.cells
        other.empties[:] = self.empties
        other.meta[:] = self.meta
        other.history[:] = self.history

    @property
    def to_move(self) -> Player:
        return Player(int(self.meta[_M_TO_MOVE]))

    @property
    def ply(self) -> int:
        return int(self.meta[_M_PLY])

    @property
    def consecutive_passes(self) -> int:
        return int(self.meta[_M_PASSES])

    def stone_count(self, player: Player | None = None) -> int:
        if player is None:
            return int(np.count_nonzero(self.board))
        return int(np.count_nonzero(self.board == int(player)))

    def is_terminal(self, move_cap: int = DEFAULT_MOVE_CAP) -> bool:
        return bool(k_is_terminal(self.meta, move_cap))

    def is_legal_id(self, move_id: int) -> bool:
        if move_id == PASS:
            return True
        if not 0 <= move_id < NPOINTS:
            return False
        return bool(
            k_move_legal(
                self.board, self.cells, self.meta, self.history,
                move_id, int(self.meta[_M_TO_MOVE]),
            )
        )

    def legal_move_ids(self) -> np.ndarray:
        out = np.empty(NMOVES, dtype=np.int16)
        n = k_legal_moves(
            self.board, self.cells, self.empties, self.meta, self.history,
            int(self.meta[_M_TO_MOVE]), out,
        )
        return out[:n].copy()

    def apply_id_inplace(self, move_id: int) -> None:
        """Mutating fast path used inside searches; legality is the caller's job."""
        k_apply(
            self.board, self.cells, self.empties, self.meta, self.history,
            move_id, int(self.meta[_M_TO_MOVE]),
        )

    def apply(self, move: Move) -> "GameState":
        mid = move.index
        if not self.is_legal_id(mid):
            raise IllegalMove(f"illegal move {move.gtp()} for {self.to_move.name}")
        nxt = self.copy()
        nxt.apply_id_inplace(mid)
        return nxt

    def with_to_move(self, player: Player) -> "GameState":
        nxt = self.copy()
        nxt.meta[_M_TO_MOVE] = int(player)
        return nxt

    def score(self, komi: float = DEFAULT_KOMI) -> GameOutcome:
        if not self.is_terminal():
            raise NotTerminal("score() called on a live position")
        black, white = k_score(self.board)
        winner = Player.BLACK if black - white > komi else Player.WHITE
        return GameOutcome(int(black), int(white), winner)

    @property
    def position_hash(self) -> int:
        return int(self.meta[_M_HASH])

    def __str__(self) -> str:
        chars = {EMPTY: ".", BLACK: "X", WHITE: "O"}
        rows = []
        for r in range(SIZE - 1, -1, -1):
            cells = " ".join(chars[int(self.board[SIZE * r + c])] for c in range(SIZE))
            rows.append(f"{r + 1} {cells}")
        rows.append("  " + " ".join(_GTP_COLS))
        return "\n".join(rows)


# Functional aliases matching the engine's public vocabulary.

def initial_state() -> GameState:
    return GameState.initial()


def legal_moves(state: GameState) -> list[Move]:
    return [Move.from_index(int(m)) for m in state.legal_move_ids()]


def apply_move(state: GameState, move: Move) -> GameState:
    return state.apply(move)


def score(state: GameState, komi: float = DEFAULT_KOMI) -> GameOutcome:
    return state.score(komi)


def position_hash(state: GameState) -> int:
    return state.position_hash
