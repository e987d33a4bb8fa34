"""GTP protocol conformance and robustness."""

import io

from graver.cli import parse_agent
from graver.gtp import GtpServer
from graver.rng import mix64


def make_server(spec="uct:P=20", seed=0):
    return GtpServer(parse_agent(spec), seed=seed)


def ask(server, line):
    handled = server.handle(line)
    if handled is None:
        return None
    return handled[0]


def test_fixed_responses():
    s = make_server()
    assert ask(s, "protocol_version") == "= 2\n\n"
    assert ask(s, "name") == "= graver\n\n"
    assert ask(s, "list_commands").startswith("= protocol_version\n")
    assert ask(s, "version").startswith("= ")


def test_id_echo():
    s = make_server()
    assert ask(s, "7 protocol_version") == "=7 2\n\n"
    assert ask(s, "9 bogus") == "?9 unknown command\n\n"


def test_boardsize():
    s = make_server()
    assert ask(s, "boardsize 9") == "=\n\n"
    assert ask(s, "boardsize 19") == "? unacceptable size\n\n"
    assert ask(s, "boardsize x") == "? unacceptable size\n\n"


def test_play_and_illegal():
    s = make_server()
    assert ask(s, "play b A1") == "=\n\n"
    assert ask(s, "play w A2") == "=\n\n"
    assert ask(s, "play b A1") == "? illegal move\n\n"
    assert ask(s, "play q Z9").startswith("? ")
    assert ask(s, "komi 5.5") == "=\n\n"


def test_genmove_legal_and_applied():
    s = make_server()
    reply = ask(s, "genmove b")
    assert reply.startswith("= ")
    vertex = reply[2:].strip()
    assert vertex == "pass" or (vertex[0] in "ABCDEFGHJ" and 1 <= int(vertex[1:]) <= 9)
    assert s.state.stone_count() in (0, 1)  # applied unless it passed
    reply = ask(s, "genmove w")
    assert reply.startswith("= ")


def test_genmove_off_turn_color():
    s = make_server()
    assert ask(s, "genmove w").startswith("= ")  # white asked to move first
    assert s.state.to_move.name == "BLACK"


def test_clear_board_resets():
    s = make_server()
    ask(s, "play b A1")
    ask(s, "clear_board")
    assert s.state.stone_count() == 0
    assert ask(s, "play b A1") == "=\n\n"


def test_session_quit_and_stream():
    s = make_server()
    stdin = io.StringIO(
        "protocol_version\n\nname\nbogus_cmd arg\nquit\ngenmove b\n"
    )
    stdout = io.StringIO()
    rc = s.run(stdin, stdout)
    assert rc == 0
    out = stdout.getvalue()
    assert out.startswith("= 2\n\n")
    assert "? unknown command" in out
    assert out.endswith("=\n\n")  # stopped at quit, genmove never ran


def test_fuzzing_never_crashes():
    s = make_server()
    x = 1234
    for i in range(300):
        x = mix64(x)
        length = x % 30
        chars = []
        for j in range(length):
            x = mix64(x)
            chars.append(chr(32 + (x % 90)))
        line = "".join(chars)
        handled = s.handle(line)
        if handled is not None:
            reply, quit_ = handled
            assert reply.startswith(("=", "?"))
            assert reply.endswith("\n\n")
            assert not quit_ or line.strip().split()[0].lower() == "quit"
    # the session is still functional afterwards
    assert ask(s, "protocol_version") == "= 2\n\n"
