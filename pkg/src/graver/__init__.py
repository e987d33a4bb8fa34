"""Memory-bounded MCTS engines for 9x9 Go.

UCT and AMAF-guided (GRAVE-style) tree search over a fixed-capacity
recycling node pool, plus two-level search variants that trade stored nodes
for playouts, a Tromp-Taylor rules engine, MAST playouts, and a self-play
experiment harness with Agresti-Coull reporting.
"""

from .game import (
    GameOutcome,
    GameState,
    IllegalMove,
    Move,
    NotTerminal,
    Player,
    apply_move,
    initial_state,
    legal_moves,
    move_index,
    position_hash,
    score,
)
from .playout import MastTable, PlayoutRecord, decay_mast, mast_value, run_playout, update_mast
from .policy import PolicyParams, RefContext, beta, grave_move_value, ucb_value
from .pool import InvalidCapacity, NodePool, NotAChild, PathGuard, PoolExhausted
from .search import (
    ConfigError,
    MatchRecord,
    SearchParams,
    SearchResult,
    TreeSearch,
    Variant,
    forward_share_ref,
    play_game,
    run_search,
)
from .stats import EmptySample, MatchSummary, agresti_coull, summarize

__version__ = "0.1.0"

__all__ = [
    "GameOutcome", "GameState", "IllegalMove", "Move", "NotTerminal", "Player",
    "apply_move", "initial_state", "legal_moves", "move_index",
    "position_hash", "score",
    "MastTable", "PlayoutRecord", "decay_mast", "mast_value", "run_playout",
    "update_mast",
    "PolicyParams", "RefContext", "beta", "grave_move_value", "ucb_value",
    "InvalidCapacity", "NodePool", "NotAChild", "PathGuard", "PoolExhausted",
    "ConfigError", "MatchRecord", "SearchParams", "SearchResult",
    "TreeSearch", "Variant", "forward_share_ref", "play_game", "run_search",
    "EmptySample", "MatchSummary", "agresti_coull", "summarize",
]
