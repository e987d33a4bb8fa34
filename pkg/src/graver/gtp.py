"""GTP 2 server: line protocol over standard streams for client interop.

Supported commands: protocol_version, name, version, list_commands,
boardsize (9 only), clear_board, komi, play, genmove, quit. Responses are
"= <result>" on success and "? <message>" on failure, each followed by a
blank line; an optional numeric command id is echoed back. Malformed input
never crashes the engine.
"""

from __future__ import annotations

import sys
from dataclasses import replace

from .game import GameState, IllegalMove, Move, Player, SIZE
from .playout import MastTable
from .rng import derive_seed
from .search import SearchParams, run_search

ENGINE_NAME = "graver"
ENGINE_VERSION = "0.1.0"

_COMMANDS = (
    "protocol_version", "name", "version", "list_commands", "boardsize",
    "clear_board", "komi", "play", "genmove", "quit",
)


def _parse_color(text: str) -> Player:
    t = text.strip().lower()
    if t in ("b", "black"):
        return Player.BLACK
    if t in ("w", "white"):
        return Player.WHITE
    raise ValueError(f"bad color {text!r}")


class GtpServer:
    """One engine instance driving one game at a time."""

    def __init__(self, agent: SearchParams, seed: int = 0):
        self.agent = agent
        self.seed = seed
        self.komi = agent.komi
        self._reset_game()

    def _reset_game(self) -> None:
        self.state = GameState.initial()
        self.masts = {Player.BLACK: MastTable(), Player.WHITE: MastTable()}
        self.turns = {Player.BLACK: 0, Player.WHITE: 0}

    # -- command handlers -------------------------------------------------

    def _cmd_boardsize(self, args):
        if len(args) != 1 or not args[0].isdigit() or int(args[0]) != SIZE:
            raise ValueError("unacceptable size")
        self._reset_game()
        return ""

    def _cmd_komi(self, args):
        self.komi = float(args[0])
        self.agent = replace(self.agent, komi=self.komi)
        return ""

    def _cmd_play(self, args):
        if len(args) != 2:
            raise ValueError("syntax: play <color> <vertex>")
        color = _parse_color(args[0])
        move = Move.from_gtp(args[1])
        state = self.state
        if state.to_move is not color:
            state = state.with_to_move(color)
        try:
            self.state = state.apply(move)
        except IllegalMove:
            raise ValueError("illegal move")
        return ""

    def _cmd_genmove(self, args):
        if len(args) != 1:
            raise ValueError("syntax: genmove <color>")
        color = _parse_color(args[0])
        state = self.state
        if state.to_move is not color:
            state = state.with_to_move(color)
        if state.is_terminal():
            return "pass"
        if self.turns[color] > 0:
            self.masts[color].decay(self.agent.mast_decay)
        self.turns[color] += 1
        params = replace(self.agent, seed=derive_seed(self.seed, state.ply))
        result = run_search(state, params, self.masts[color])
        move = Move.from_index(result.chosen_move)
        self.state = state.apply(move)
        return move.gtp().lower() if move.is_pass else move.gtp()

    def handle(self, line: str):
        """Process one input line; returns (reply, should_quit) or None."""
        line = line.split("#", 1)[0].strip()
        if not line:
            return None
        parts = line.split()
        cmd_id = ""
        if parts[0].isdigit():
            cmd_id = parts[0]
            parts = parts[1:]
        if not parts:
            return None
        cmd, args = parts[0].lower(), parts[1:]
        prefix_ok = f"={cmd_id} " if cmd_id else "= "
        prefix_err = f"?{cmd_id} " if cmd_id else "? "

        try:
            if cmd == "protocol_version":
                out = "2"
            elif cmd == "name":
                out = ENGINE_NAME
            elif cmd == "version":
                out = ENGINE_VERSION
            elif cmd == "list_commands":
                out = "\n".join(_COMMANDS)
            elif cmd == "boardsize":
                out = self._cmd_boardsize(args)
            elif cmd == "clear_board":
                self._reset_game()
                out = ""
            elif cmd == "komi":
                out = self._cmd_komi(args)
            elif cmd == "play":
                out = self._cmd_play(args)
            elif cmd == "genmove":
                out = self._cmd_genmove(args)
            elif cmd == "quit":
                return (prefix_ok.rstrip() + "\n\n", True)
            else:
                return (prefix_err + "unknown command\n\n", False)
        except Exception as exc:  # report, never crash the session
            msg = str(exc) or exc.__class__.__name__
            return (prefix_err + msg.splitlines()[0] + "\n\n", False)
        reply = (prefix_ok + out).rstrip() + "\n\n"
        return (reply, False)

    def run(self, infile=None, outfile=None) -> int:
        infile = infile if infile is not None else sys.stdin
        outfile = outfile if outfile is not None else sys.stdout
        for raw in infile:
            handled = self.handle(raw)
            if handled is None:
                continue
            reply, should_quit = handled
            outfile.write(reply)
            outfile.flush()
            if should_quit:
                return 0
        return 0
