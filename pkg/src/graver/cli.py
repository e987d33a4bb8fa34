"""Command-line entry point: arena experiments, single games, bench, GTP.

Agents are compact strings, e.g. ``grave:P=10000`` or
``grave2fs:N=240,lambda=0.5,bias=0.01,ref=25,eps=0.4``. The variant prefix
is one of uct, grave, uctr, graver, uct2, grave2, grave2fs, graver2;
recognised keys: P (playouts), N (node budget), lambda, ptop, psec,
C (exploration), bias, ref (reference threshold), eps, decay (MAST decay),
cap (ply cap), komi.

Arena games are scheduled across worker processes (never inside one game),
colours alternate game by game, the per-game seed is base_seed + game index,
and one CSV row is appended and flushed per finished game.
"""

from __future__ import annotations

import argparse
import csv
import json
import multiprocessing as mp
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .game import GameState, Move, Player
from .policy import PolicyParams
from .search import ConfigError, SearchParams, Variant, play_game, run_search
from .stats import summarize, summary_table

CSV_HEADER = (
    "game_id,seed,agent_a,agent_b,a_color,winner,moves,playouts_a,playouts_b,"
    "peak_nodes_a,peak_nodes_b,recycled_a,recycled_b,wall_ms"
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One scheduled match: agent specs, game count, seeding, output, workers.

    Colours alternate game by game and the per-game seed is
    base_seed + game index, which makes every game reproducible on its own
    and the whole match order-independent across workers.
    """

    agent_a: str
    agent_b: str
    games: int
    base_seed: int
    out: str | None = None
    parallel_games: int = 1

    def validate(self) -> "ExperimentConfig":
        parse_agent(self.agent_a)
        parse_agent(self.agent_b)
        if self.games < 1:
            raise ConfigError("games must be >= 1")
        if self.parallel_games < 1:
            raise ConfigError("jobs must be >= 1")
        return self

_VARIANT_ALIASES = {
    "uct": Variant.UCT,
    "grave": Variant.GRAVE,
    "uctr": Variant.UCT_R,
    "uct-r": Variant.UCT_R,
    "uct_r": Variant.UCT_R,
    "graver": Variant.GRAVER,
    "uct2": Variant.UCT2,
    "grave2": Variant.GRAVE2,
    "grave2fs": Variant.GRAVE2_FS,
    "grave2-fs": Variant.GRAVE2_FS,
    "graver2": Variant.GRAVER2,
}


def parse_agent(spec: str) -> SearchParams:
    """Build SearchParams from a compact agent string (see module docstring)."""
    head, _, tail = spec.strip().partition(":")
    variant = _VARIANT_ALIASES.get(head.strip().lower())
    if variant is None:
        raise ConfigError(
            f"unknown variant {head!r}; expected one of "
            f"{sorted(set(v.value for v in Variant))}"
        )
    kwargs: dict = {}
    policy: dict = {}
    if tail:
        for item in tail.split(","):
            key, _, value = item.partition("=")
            key = key.strip().lower()
            value = value.strip()
            if not value:
                raise ConfigError(f"malformed agent option {item!r}")
            try:
                if key == "p":
                    kwargs["playouts"] = int(value)
                elif key == "n":
                    kwargs["capacity"] = int(value)
                elif key == "lambda":
                    kwargs["lam"] = float(value)
                elif key == "ptop":
                    kwargs["p_top"] = int(value)
                elif key == "psec":
                    kwargs["p_sec"] = int(value)
                elif key == "c":
                    policy["exploration_c"] = float(value)
                elif key == "bias":
                    policy["bias"] = float(value)
                elif key == "ref":
                    policy["ref_threshold"] = int(value)
                elif key == "eps":
                    kwargs["epsilon"] = float(value)
                elif key == "decay":
                    kwargs["mast_decay"] = float(value)
                elif key == "cap":
                    kwargs["move_cap"] = int(value)
                elif key == "komi":
                    kwargs["komi"] = float(value)
                else:
                    raise ConfigError(f"unknown agent option {key!r}")
            except ValueError as exc:
                raise ConfigError(f"bad value in {item!r}: {exc}") from None
    if policy:
        kwargs["policy"] = PolicyParams(**policy)
    return SearchParams(variant=variant, **kwargs).validated()


def record_to_row(rec) -> list:
    return [
        rec.game_id, rec.seed, rec.agent_a, rec.agent_b,
        "B" if rec.a_color is Player.BLACK else "W",
        rec.winner, rec.moves, rec.playouts_a, rec.playouts_b,
        rec.peak_nodes_a, rec.peak_nodes_b, rec.recycled_a, rec.recycled_b,
        f"{rec.wall_ms:.1f}",
    ]


def _play_one(task):
    """Worker: one arena game. Parses specs locally to stay picklable."""
    spec_a, spec_b, base_seed, game_id = task
    agent_a = parse_agent(spec_a)
    agent_b = parse_agent(spec_b)
    a_color = Player.BLACK if game_id % 2 == 0 else Player.WHITE
    return play_game(
        agent_a, agent_b, seed=base_seed + game_id, a_color=a_color,
        game_id=game_id, name_a=spec_a, name_b=spec_b,
    )


def run_match(spec_a: str, spec_b: str, games: int, base_seed: int,
              jobs: int = 1, out=None, csv_writer=None, quiet=False):
    """Play a full match; returns the MatchRecord list (completion order)."""
    tasks = [(spec_a, spec_b, base_seed, g) for g in range(games)]
    records = []

    def consume(rec):
        records.append(rec)
        if csv_writer is not None:
            csv_writer.writerow(record_to_row(rec))
            if out is not None:
                out.flush()
        if not quiet and len(records) % 25 == 0:
            done = summarize(records, "a")
            print(f"  {len(records)}/{games} games, agent A {done}", file=sys.stderr)

    if jobs <= 1:
        for task in tasks:
            consume(_play_one(task))
    else:
        with mp.Pool(processes=jobs) as pool:
            for rec in pool.imap_unordered(_play_one, tasks):
                consume(rec)
    return records


def cmd_arena(args) -> int:
    try:
        if args.config:
            return _run_config(args)
        config = ExperimentConfig(
            agent_a=args.agent_a, agent_b=args.agent_b, games=args.games,
            base_seed=args.seed, out=args.out, parallel_games=args.jobs,
        ).validate()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = None
    writer = None
    if config.out:
        path = Path(config.out)
        fresh = not path.exists() or path.stat().st_size == 0
        out = path.open("a", newline="")
        writer = csv.writer(out)
        if fresh:
            writer.writerow(CSV_HEADER.split(","))
            out.flush()
    records = run_match(config.agent_a, config.agent_b, config.games,
                        config.base_seed, jobs=config.parallel_games,
                        out=out, csv_writer=writer, quiet=args.quiet)
    if out is not None:
        out.close()
    print(summary_table(records))
    return 0


def _run_config(args) -> int:
    """Run preset experiment cells from a JSON sweep file."""
    cfg = json.loads(Path(args.config).read_text())
    games = args.games or cfg.get("games", 500)
    base_seed = args.seed if args.seed != 1 else cfg.get("base_seed", 1)
    cells = cfg["cells"]
    if args.cell:
        cells = [c for c in cells if c["id"] == args.cell]
        if not cells:
            known = ", ".join(c["id"] for c in cfg["cells"])
            print(f"error: no cell {args.cell!r}; known cells: {known}",
                  file=sys.stderr)
            return 2
    out_dir = Path(args.out) if args.out else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    for cell in cells:
        spec_a = cell["agent_a"]
        spec_b = cell.get("agent_b", cfg.get("agent_b"))
        print(f"[{cell['id']}] {spec_a}  vs  {spec_b}  ({games} games)")
        path = out_dir / f"{cfg.get('name', 'sweep')}_{cell['id']}.csv"
        with path.open("a", newline="") as out:
            writer = csv.writer(out)
            if out.tell() == 0:
                writer.writerow(CSV_HEADER.split(","))
            records = run_match(spec_a, spec_b, games, base_seed,
                                jobs=args.jobs, out=out, csv_writer=writer,
                                quiet=args.quiet)
        print(summary_table(records))
        if "reference_winrate" in cell:
            got = summarize(records, "a").winrate
            print(f"  reference value for this cell: "
                  f"{100 * cell['reference_winrate']:.1f}%  (measured {100 * got:.1f}%)")
    return 0


def cmd_play(args) -> int:
    try:
        black = parse_agent(args.black)
        white = parse_agent(args.white)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    transcript = []
    rec = play_game(black, white, seed=args.seed, a_color=Player.BLACK,
                    name_a=args.black, name_b=args.white,
                    on_move=lambda color, move: transcript.append((color, move)))
    for i, (color, move) in enumerate(transcript):
        print(f"{i + 1:3d}. {'B' if color is Player.BLACK else 'W'} {move.gtp()}")
    state = GameState.initial()
    for _, move in transcript:
        state = state.apply(move)
    outcome = state.score(black.komi)
    print(f"result: {outcome.winner.name} wins "
          f"(area {outcome.black_area}-{outcome.white_area}, komi {black.komi})")
    print(f"winner: agent {'A (black)' if rec.winner == 'a' else 'B (white)'} "
          f"after {rec.moves} moves")
    return 0


def cmd_bench(args) -> int:
    try:
        agent = parse_agent(args.agent)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    from .pool import NodePool
    pool = NodePool(2, amaf=agent.variant.uses_amaf)
    print(f"agent: {args.agent}")
    print(f"node budget (capacity): {agent.capacity}")
    print(f"bytes per node: {pool.bytes_per_node} "
          f"(AMAF portion: {pool.amaf_bytes_per_node})")

    state = GameState.initial()
    total_playouts = 0
    total_time = 0.0
    peak = 0
    recycled = 0
    for i in range(args.positions):
        params = replace(agent, seed=args.seed + i)
        t0 = time.perf_counter()
        result = run_search(state, params)
        total_time += time.perf_counter() - t0
        total_playouts += result.total_playouts
        peak = max(peak, result.peak_nodes)
        recycled += result.recycled_total
        # walk a few plies so later searches see midgame positions
        state = state.apply(Move.from_index(result.chosen_move))
        if state.is_terminal():
            state = GameState.initial()
    print(f"positions searched: {args.positions}")
    print(f"playouts: {total_playouts} in {total_time:.2f}s "
          f"-> {total_playouts / total_time:,.0f} playouts/s")
    print(f"peak nodes: {peak}")
    print(f"recycled nodes: {recycled}")
    return 0


def cmd_gtp(args) -> int:
    from .gtp import GtpServer
    try:
        agent = parse_agent(args.agent)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return GtpServer(agent, seed=args.seed).run()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graver",
        description="Memory-bounded MCTS engines for 9x9 Go",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    arena = sub.add_parser("arena", help="play a match and stream CSV results")
    arena.add_argument("--agent-a", help="agent spec for side A")
    arena.add_argument("--agent-b", help="agent spec for side B")
    arena.add_argument("--games", type=int, default=None)
    arena.add_argument("--seed", type=int, default=1)
    arena.add_argument("--out", help="CSV output path (appended, flushed per game)")
    arena.add_argument("--jobs", type=int, default=1,
                       help="parallel games (never parallel within a game)")
    arena.add_argument("--config", help="JSON sweep preset (see experiments/)")
    arena.add_argument("--cell", help="run only this cell id from the preset")
    arena.add_argument("--quiet", action="store_true")
    arena.set_defaults(func=cmd_arena)

    play = sub.add_parser("play", help="one game, transcript on stdout")
    play.add_argument("--black", required=True)
    play.add_argument("--white", required=True)
    play.add_argument("--seed", type=int, default=1)
    play.set_defaults(func=cmd_play)

    bench = sub.add_parser("bench", help="report speed and memory accounting")
    bench.add_argument("--agent", required=True)
    bench.add_argument("--positions", type=int, default=5)
    bench.add_argument("--seed", type=int, default=1)
    bench.set_defaults(func=cmd_bench)

    gtp = sub.add_parser("gtp", help="speak GTP 2 on stdin/stdout")
    gtp.add_argument("--agent", default="grave:P=10000")
    gtp.add_argument("--seed", type=int, default=0)
    gtp.set_defaults(func=cmd_gtp)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "arena" and not args.config:
        if not args.agent_a or not args.agent_b:
            print("error: arena needs --agent-a/--agent-b or --config",
                  file=sys.stderr)
            return 2
        if args.games is None:
            args.games = 500
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
