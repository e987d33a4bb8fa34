"""Search driver tests: budgets, recycling transparency, backprop accounting."""

import numpy as np
import pytest

from graver.game import GameState, Move, Player, initial_state
from graver.policy import PolicyParams
from graver.pool import NULL, NodePool, PoolExhausted
from graver.search import (
    ConfigError,
    SearchParams,
    TreeSearch,
    Variant,
    forward_share_ref,
    k_backprop,
    play_game,
    run_search,
)

from go_cases import state_from, BLANK


GRAVE = Variant.GRAVE
EMPTY16 = np.zeros(0, dtype=np.int16)


def params(variant, **kw):
    return SearchParams(variant=variant, **kw)


# --- parameter validation ----------------------------------------------------


def test_validation_rules():
    with pytest.raises(ConfigError):
        params(GRAVE).validated()  # no budget
    with pytest.raises(ConfigError):
        params(GRAVE, playouts=100, capacity=50).validated()  # pool too small
    with pytest.raises(ConfigError):
        params(Variant.GRAVE2, capacity=200).validated()  # missing lambda
    with pytest.raises(ConfigError):
        params(Variant.GRAVE2, capacity=200, lam=1.0).validated()
    with pytest.raises(ConfigError):
        params(Variant.GRAVE2, capacity=6, lam=0.2).validated()  # n_sec = 1
    with pytest.raises(ConfigError):
        params(Variant.GRAVER2, capacity=160, lam=0.5).validated()  # no budgets
    with pytest.raises(ConfigError):
        params(GRAVE, playouts=100, epsilon=1.5).validated()
    p = params(GRAVE, playouts=100).validated()
    assert p.capacity == 100  # defaults to P
    p2 = params(Variant.GRAVER, playouts=100, capacity=8).validated()
    assert p2.capacity == 8


def test_budget_formulas():
    p = params(Variant.GRAVE2, capacity=200, lam=0.5).validated()
    assert (p.n_top, p.n_sec, p.total_playouts) == (100, 100, 10_000)
    p = params(Variant.GRAVE2_FS, capacity=240, lam=0.5).validated()
    assert (p.n_top, p.n_sec, p.total_playouts) == (120, 120, 14_400)
    p = params(Variant.GRAVER2, capacity=160, lam=0.5, p_top=160, p_sec=80).validated()
    assert p.total_playouts == 12_800
    p = params(Variant.UCT2, capacity=10, lam=0.5).validated()
    assert p.total_playouts == 25  # (lambda - lambda^2) * N^2
    p = params(Variant.GRAVE2, capacity=240, lam=0.4).validated()
    assert p.n_sec == 96 and p.n_top == 144
    assert p.total_playouts == 96 * 144


def test_describe_round_trip_strings():
    assert params(GRAVE, playouts=10_000).validated().describe() == "grave:P=10000"
    assert (
        params(Variant.GRAVE2_FS, capacity=240, lam=0.4).validated().describe()
        == "grave2fs:N=240,lambda=0.4"
    )


# --- executed budgets and conservation ----------------------------------------


@pytest.mark.parametrize(
    "p,expected",
    [
        (params(GRAVE, playouts=150, seed=5), 150),
        (params(Variant.UCT, playouts=150, seed=5), 150),
        (params(Variant.GRAVE2, capacity=30, lam=0.5, seed=5), 225),
        (params(Variant.GRAVE2_FS, capacity=30, lam=0.5, seed=5), 225),
        (params(Variant.UCT2, capacity=10, lam=0.5, seed=5), 25),
        (params(Variant.GRAVER2, capacity=20, lam=0.5, p_top=25, p_sec=12, seed=5), 300),
    ],
)
def test_total_playouts_and_root_visits(p, expected):
    r = run_search(initial_state(), p)
    assert r.total_playouts == expected
    assert r.root_visits == expected  # visit conservation at the root
    assert r.peak_nodes <= p.validated().capacity


def test_single_level_fills_pool_exactly_without_recycling():
    r = run_search(initial_state(), params(GRAVE, playouts=120, seed=2))
    assert r.recycled_total == 0
    assert r.peak_nodes == 120  # root + P-1 expansions


def test_recycling_counter_under_pressure():
    r = run_search(initial_state(), params(Variant.GRAVER, playouts=200, capacity=16, seed=2))
    assert r.peak_nodes <= 16
    assert r.recycled_total > 0
    assert r.root_visits == 200


# --- recycling transparency ----------------------------------------------------


@pytest.mark.parametrize("P", [50, 200])
@pytest.mark.parametrize("seed", [0, 1])
def test_recycling_transparency(P, seed):
    state = initial_state()
    base = run_search(state, params(GRAVE, playouts=P, seed=seed))
    spare = run_search(
        state, params(Variant.GRAVER, playouts=P, capacity=P + 1, seed=seed)
    )
    assert base.chosen_move == spare.chosen_move
    assert base.root_stats == spare.root_stats
    assert base.recycled_total == spare.recycled_total == 0
    u = run_search(state, params(Variant.UCT, playouts=P, seed=seed))
    v = run_search(state, params(Variant.UCT_R, playouts=P, capacity=P + 1, seed=seed))
    assert u.chosen_move == v.chosen_move
    assert u.root_stats == v.root_stats


def test_transparent_game_transcripts():
    a = params(GRAVE, playouts=60, seed=0)
    b = params(Variant.GRAVER, playouts=60, capacity=61, seed=0)
    opp = params(Variant.UCT, playouts=40, seed=0)
    ra = play_game(a, opp, seed=31415)
    rb = play_game(b, opp, seed=31415)
    assert (ra.winner, ra.moves, ra.playouts_a, ra.playouts_b) == (
        rb.winner, rb.moves, rb.playouts_a, rb.playouts_b)


# --- determinism ----------------------------------------------------------------


@pytest.mark.parametrize(
    "p",
    [
        params(GRAVE, playouts=100, seed=77),
        params(Variant.UCT, playouts=100, seed=77),
        params(Variant.GRAVER, playouts=100, capacity=12, seed=77),
        params(Variant.GRAVE2_FS, capacity=20, lam=0.5, seed=77),
        params(Variant.GRAVE2, capacity=20, lam=0.5, seed=77),
    ],
)
def test_search_determinism(p):
    s = state_from([BLANK] * 8 + ["X O . . . . . . ."], Player.BLACK)
    assert run_search(s, p) == run_search(s, p)


def test_seed_changes_behaviour():
    s = initial_state()
    r = [run_search(s, params(GRAVE, playouts=40, seed=k)).chosen_move for k in range(12)]
    assert len(set(r)) > 1


# --- backpropagation accounting (hand-traced oracles) ----------------------------


def _fresh_root(to_move=1):
    pool = NodePool(4)
    root = pool.allocate(NULL, NULL, to_move)
    seen = np.empty(82, dtype=np.uint8)
    return pool, root, seen


def test_backprop_single_node_black_win():
    pool, root, seen = _fresh_root(to_move=1)
    path = np.array([root], dtype=np.int32)
    pmoves = np.array([5, 9, 5], dtype=np.int16)  # B 5, W 9, B 5
    k_backprop(pool.links, pool.reward, pool.amaf_count, pool.amaf_sum, True,
               path, 1, EMPTY16, 0, EMPTY16, 0, pmoves, 3, 1.0, seen)
    assert pool.visits(root) == 1
    # value is stored for the player who moved into the node (White here)
    assert pool.reward_sum(root) == 0.0
    # Black's moves credited once each, despite 5 appearing twice
    assert pool.amaf_count[root, 5] == 1 and pool.amaf_sum[root, 5] == 1.0
    assert pool.amaf_count[root, 9] == 0  # White's move is not Black's
    k_backprop(pool.links, pool.reward, pool.amaf_count, pool.amaf_sum, True,
               path, 1, EMPTY16, 0, EMPTY16, 0, pmoves, 3, 0.0, seen)
    assert pool.visits(root) == 2
    assert pool.reward_sum(root) == 1.0
    assert pool.amaf_count[root, 5] == 2 and pool.amaf_sum[root, 5] == 1.0


def test_backprop_two_node_path_perspectives():
    pool, root, seen = _fresh_root(to_move=1)
    child = pool.allocate(root, 7, 2)
    path = np.array([root, child], dtype=np.int32)
    tmoves = np.array([7], dtype=np.int16)
    pmoves = np.array([3, 8], dtype=np.int16)  # W 3, B 8 below the child
    k_backprop(pool.links, pool.reward, pool.amaf_count, pool.amaf_sum, True,
               path, 2, tmoves, 1, EMPTY16, 0, pmoves, 2, 1.0, seen)
    # root (Black to move): reward from White's perspective = 0
    assert pool.reward_sum(root) == 0.0
    # child (White to move): reward from Black's perspective = 1
    assert pool.reward_sum(child) == 1.0
    # root AMAF: Black's moves in [7, 3, 8] at even offsets -> 7 and 8
    assert pool.amaf_count[root, 7] == 1 and pool.amaf_sum[root, 7] == 1.0
    assert pool.amaf_count[root, 8] == 1
    assert pool.amaf_count[root, 3] == 0
    # child AMAF: White's moves in [3, 8] -> 3 only, with White's reward 0
    assert pool.amaf_count[child, 3] == 1 and pool.amaf_sum[child, 3] == 0.0
    assert pool.amaf_count[child, 8] == 0


def test_stepwise_search_matches_one_shot():
    p = params(GRAVE, playouts=200, seed=3)
    r = run_search(initial_state(), p)
    assert r.root_visits == 200
    search = TreeSearch(initial_state(), p)
    for _ in range(4):
        search.iterate(50)
    assert search.result() == r


def test_first_iteration_evaluates_root_then_expands():
    search = TreeSearch(initial_state(), params(GRAVE, playouts=10, seed=1))
    search.iterate(1)
    assert search.pool.visits(search.root) == 1
    assert search.pool.allocated == 1  # root evaluated in place, no child yet
    search.iterate(1)
    assert search.pool.allocated == 2
    assert len(search.pool.children(search.root)) == 1


def test_uct_expands_fresh_root_move_each_iteration():
    # while unexpanded root moves remain, UCB infinity forces a new child
    search = TreeSearch(initial_state(), params(Variant.UCT, playouts=40, seed=4))
    search.iterate(40)
    assert len(search.pool.children(search.root)) == 39


def test_recycling_accounting_stepwise():
    search = TreeSearch(
        initial_state(), params(Variant.GRAVER, playouts=100, capacity=8, seed=9)
    )
    for _ in range(100):
        search.iterate(1)
    assert search.pool.allocated <= 8
    assert search.pool.visits(search.root) == 100
    # 99 expansions into a root + 7 free slots
    assert search.pool.recycled_total == 100 - 8
    assert search.result().peak_nodes == 8


def test_amaf_tables_bounded_by_visits():
    # once-per-playout AMAF counting implies amaf_count <= visits everywhere
    search = TreeSearch(initial_state(), params(GRAVE, playouts=300, seed=11))
    search.iterate(300)
    pool = search.pool
    checked = 0
    for h in range(pool.capacity):
        if not pool.is_live(h):
            continue
        v = pool.visits(h)
        assert 0.0 <= pool.reward_sum(h) <= v
        assert np.all(pool.amaf_count[h] <= v)
        assert np.all(pool.amaf_sum[h] <= pool.amaf_count[h] + 1e-6)
        checked += 1
    assert checked == pool.capacity  # pool exactly full, no recycling


def test_lru_invariants_hold_during_live_search():
    # drive a recycling search stepwise and audit the pool structure
    # (link consistency, descendants ahead of ancestors, conservation)
    from test_pool import check_invariants

    search = TreeSearch(
        initial_state(),
        params(Variant.GRAVER, playouts=120, capacity=10, seed=3),
    )
    for _ in range(60):
        search.iterate(2)
        check_invariants(search.pool)
    assert search.pool.recycled_total > 0
    front = search.pool.lru_order()[0]
    assert search.pool.children(front) == []  # next victim is a leaf


def test_forward_share_ref_rule():
    from graver.policy import RefContext

    pol = PolicyParams(ref_threshold=25)
    pool = NodePool(4)
    top_ref = RefContext(node=2)
    sec_root = pool.allocate(NULL, NULL, 1)
    # a fresh nested root consults the enclosing tree's reference tables
    ref = forward_share_ref(pool, top_ref, sec_root, pol)
    assert ref.node == 2 and ref.is_top
    pool.links[sec_root, 8] = 25  # visits column, at the threshold
    assert forward_share_ref(pool, top_ref, sec_root, pol).is_top
    pool.links[sec_root, 8] = 26  # strictly above: the nested root takes over
    ref = forward_share_ref(pool, top_ref, sec_root, pol)
    assert ref.node == sec_root and not ref.is_top


def test_forward_sharing_reads_top_tables():
    # the same seed with and without forward sharing diverges only through
    # the shared reference tables, visible in the explored root children
    base = params(Variant.GRAVE2, capacity=40, lam=0.5, seed=6)
    fs = params(Variant.GRAVE2_FS, capacity=40, lam=0.5, seed=6)
    s = initial_state()
    r_base = run_search(s, base)
    r_fs = run_search(s, fs)
    assert r_base.total_playouts == r_fs.total_playouts == 400
    assert r_base.root_visits == r_fs.root_visits == 400


# --- error paths -----------------------------------------------------------------


def test_run_search_rejects_terminal_state():
    s = initial_state().apply(Move.pass_move()).apply(Move.pass_move())
    with pytest.raises(ConfigError):
        run_search(s, params(GRAVE, playouts=10))


def test_pool_exhaustion_surfaces():
    # a 3-move position and a 2-node pool: once the search commits to
    # descending into the single stored child, expansion has no victim left
    board = np.ones(81, dtype=np.int8)
    board[0] = 0
    board[80] = 0
    s = GameState.from_board(board, Player.BLACK)
    raised = False
    for seed in range(6):
        try:
            run_search(s, params(Variant.GRAVER, playouts=400, capacity=2, seed=seed))
        except PoolExhausted:
            raised = True
            break
    assert raised


# --- self-play ------------------------------------------------------------------


def test_play_game_records():
    a = params(GRAVE, playouts=60, seed=0)
    b = params(Variant.UCT, playouts=60, seed=0)
    rec = play_game(a, b, seed=2024, a_color=Player.BLACK, game_id=9)
    assert rec.winner in ("a", "b")
    assert 2 <= rec.moves <= 243
    assert rec.playouts_a > 0 and rec.playouts_b > 0
    assert rec.game_id == 9 and rec.seed == 2024
    rec2 = play_game(a, b, seed=2024, a_color=Player.BLACK, game_id=9)
    assert (rec.winner, rec.moves, rec.playouts_a, rec.playouts_b,
            rec.peak_nodes_a, rec.recycled_a) == \
           (rec2.winner, rec2.moves, rec2.playouts_a, rec2.playouts_b,
            rec2.peak_nodes_a, rec2.recycled_a)


def test_play_game_color_swap_changes_assignment():
    a = params(GRAVE, playouts=40, seed=0)
    b = params(Variant.UCT, playouts=40, seed=0)
    r1 = play_game(a, b, seed=5, a_color=Player.BLACK)
    r2 = play_game(a, b, seed=5, a_color=Player.WHITE)
    assert r1.a_color is Player.BLACK and r2.a_color is Player.WHITE
