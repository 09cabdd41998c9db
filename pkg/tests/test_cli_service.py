import json
import threading
import urllib.error
import urllib.request

import pytest

from glc.cli import main
from glc.dot import to_dot
from glc.encoding import encode
from glc.glcformat import parse_glc, print_glc
from glc.graph import build
from glc.iso import canonical_key, is_isomorphic
from glc.service import make_server
from glc.terms import parse


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_encode_decode_round_trip(tmp_path, capsys):
    out = tmp_path / "id.glc"
    code, _, _ = run_cli(capsys, "encode", "\\x.x", "-o", str(out))
    assert code == 0
    code, stdout, _ = run_cli(capsys, "decode", str(out))
    assert code == 0
    assert stdout.strip() == "\\v0.v0"


def test_reduce_term_and_file_agree(tmp_path, capsys):
    f = tmp_path / "g.glc"
    f.write_text(print_glc(encode(parse("(\\x.x) y"))))
    code, via_file, _ = run_cli(capsys, "reduce", str(f), "--fuel", "50")
    assert code == 0
    code, via_term, _ = run_cli(capsys, "reduce", "(\\x.x) y", "--fuel", "50")
    assert code == 0
    assert via_file == via_term
    assert is_isomorphic(parse_glc(via_file), encode(parse("y")), match_leaf_names=True)


def test_reduce_matches_library_bit_for_bit(tmp_path, capsys):
    from glc.encoding import graph_normalize

    for text in ["(\\x.x) y", "(\\x.\\y.x) a b", "(\\f.\\x.f (f x)) (\\u.u) w"]:
        want = print_glc(graph_normalize(encode(parse(text)), fuel=200))
        code, got, _ = run_cli(capsys, "reduce", text, "--fuel", "200")
        assert code == 0
        assert got == want, text


def test_reduce_timeout_exit_code(capsys):
    code, _, err = run_cli(capsys, "reduce", "(\\x.x x)(\\x.x x)", "--fuel", "20")
    assert code == 1
    assert "TIMEOUT" in err


def test_moves_lists_unique_beta(tmp_path, capsys):
    f = tmp_path / "g.glc"
    f.write_text(print_glc(encode(parse("(\\x.x) y"))))
    code, out, _ = run_cli(capsys, "moves", str(f), "--move", "beta", "--forward-only")
    assert code == 0
    descs = json.loads(out)
    assert len(descs) == 1
    assert descs[0]["move"] == "beta" and descs[0]["direction"] == "forward"


def test_apply_by_descriptor_and_by_index(tmp_path, capsys):
    f = tmp_path / "g.glc"
    f.write_text(print_glc(encode(parse("(\\x.x) y"))))
    code, out, _ = run_cli(capsys, "moves", str(f), "--move", "beta", "--forward-only")
    desc = json.loads(out)[0]
    code, by_desc, _ = run_cli(capsys, "apply", str(f), "--site", json.dumps(desc))
    assert code == 0
    code, by_index, _ = run_cli(capsys, "apply", str(f), "--move", "beta", "--site", "0")
    assert code == 0
    assert by_desc == by_index
    assert is_isomorphic(parse_glc(by_desc), encode(parse("y")))


def test_apply_stale_site_exit_code(tmp_path, capsys):
    f = tmp_path / "g.glc"
    f.write_text(print_glc(encode(parse("(\\x.x) y"))))
    stale = {
        "move": "beta",
        "direction": "forward",
        "anchor": ["e99"],
        "fingerprint": "0" * 16,
    }
    code, _, err = run_cli(capsys, "apply", str(f), "--site", json.dumps(stale))
    assert code == 1
    assert "SITE_STALE" in err


def test_iso_command(tmp_path, capsys):
    a = tmp_path / "a.glc"
    b = tmp_path / "b.glc"
    a.write_text(print_glc(encode(parse("\\x.x"))))
    b.write_text(print_glc(encode(parse("\\y.y y"))))
    code, out, _ = run_cli(capsys, "iso", str(a), str(a))
    assert code == 0 and out.strip() == "isomorphic"
    code, out, _ = run_cli(capsys, "iso", str(a), str(b))
    assert code == 1 and out.strip() == "not isomorphic"


def test_scenario_all(capsys):
    code, out, _ = run_cli(capsys, "scenario", "--all")
    assert code == 0
    lines = [l for l in out.splitlines() if l.strip()]
    assert len(lines) == 12
    assert all(": pass" in l for l in lines)


def test_scenario_unknown(capsys):
    code, _, err = run_cli(capsys, "scenario", "nonexistent")
    assert code == 1
    assert "UNKNOWN_SCENARIO" in err


def test_dot_command(tmp_path, capsys):
    f = tmp_path / "g.glc"
    f.write_text("loop 1")
    code, out, _ = run_cli(capsys, "dot", str(f))
    assert code == 0
    assert out.startswith("digraph glc {") and "->" in out


def test_dot_deterministic():
    g = encode(parse("(\\x.x x) y"))
    assert to_dot(g) == to_dot(parse_glc(print_glc(g)))


def test_dot_empty_graph_is_header_and_footer_only():
    lines = [l for l in to_dot(build()).splitlines() if l.strip()]
    assert lines[0] == "digraph glc {"
    assert lines[-1] == "}"
    assert not any("->" in l for l in lines)


# -- service ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def server_url():
    server = make_server(port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}"
    server.shutdown()


def _request(method, url, body=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(url, data=data, method=method)
    if data:
        req.add_header("Content-Type", "application/json")
    try:
        with urllib.request.urlopen(req) as resp:
            raw = resp.read()
            ctype = resp.headers.get("Content-Type", "")
            if raw and "json" in ctype:
                return resp.status, json.loads(raw)
            return resp.status, raw.decode()
    except urllib.error.HTTPError as exc:
        raw = exc.read()
        try:
            return exc.code, json.loads(raw)
        except json.JSONDecodeError:
            return exc.code, raw.decode()


def test_session_lifecycle(server_url):
    status, state = _request("POST", f"{server_url}/sessions", {"term": "(\\x.x) y"})
    assert status == 201
    sid = state["id"]
    beta_sites = [m for m in state["moves"] if m["move"] == "beta" and m["direction"] == "forward"]
    assert len(beta_sites) == 1

    status, moves = _request("GET", f"{server_url}/sessions/{sid}/moves")
    assert status == 200 and moves["moves"] == state["moves"]

    status, after = _request(
        "POST", f"{server_url}/sessions/{sid}/apply", {"site": beta_sites[0]}
    )
    assert status == 200
    assert after["historyLength"] == 1
    assert after["graph"]["nodes"] == []
    expected = encode(parse("y"))
    assert after["graph"]["canonicalKey"] == canonical_key(expected).hex()

    status, dot_text = _request("GET", f"{server_url}/sessions/{sid}/dot")
    assert status == 200 and dot_text.startswith("digraph glc {")

    # replaying the same (now stale) site must 409
    status, err = _request(
        "POST", f"{server_url}/sessions/{sid}/apply", {"site": beta_sites[0]}
    )
    assert status == 409 and err["error"] == "SITE_STALE"

    status, undone = _request("POST", f"{server_url}/sessions/{sid}/undo")
    assert status == 200
    assert undone["historyLength"] == 0
    assert undone["graph"]["canonicalKey"] == state["graph"]["canonicalKey"]

    status, _ = _request("DELETE", f"{server_url}/sessions/{sid}")
    assert status == 204
    status, err = _request("GET", f"{server_url}/sessions/{sid}")
    assert status == 404 and err["error"] == "UNKNOWN_SESSION"


def test_session_from_glc_and_errors(server_url):
    status, state = _request("POST", f"{server_url}/sessions", {"glc": "loop 1"})
    assert status == 201
    assert state["graph"]["loops"] == ["l0"]

    status, err = _request("POST", f"{server_url}/sessions", {"term": "\\x."})
    assert status == 400 and err["error"] == "SYNTAX_ERROR"

    status, err = _request("POST", f"{server_url}/sessions", {})
    assert status == 400

    status, err = _request("POST", f"{server_url}/sessions/{state['id']}/undo")
    assert status == 409 and err["error"] == "EMPTY_HISTORY"


def test_apply_undo_matches_library_fold(server_url):
    status, state = _request(
        "POST", f"{server_url}/sessions", {"term": "(\\x.\\y.x) a b"}
    )
    sid = state["id"]
    g = encode(parse("(\\x.\\y.x) a b"))
    from glc.moves import FORWARD, apply_move, beta, enumerate_matches

    for _ in range(2):
        status, moves = _request("GET", f"{server_url}/sessions/{sid}/moves")
        desc = next(
            m for m in moves["moves"] if m["move"] == "beta" and m["direction"] == "forward"
        )
        status, state = _request(
            "POST", f"{server_url}/sessions/{sid}/apply", {"site": desc}
        )
        assert status == 200
        sites = enumerate_matches(g, beta(), FORWARD)
        g, _ = apply_move(g, sites[0])
    assert state["graph"]["canonicalKey"] == canonical_key(g).hex()
    for _ in range(2):
        status, state = _request("POST", f"{server_url}/sessions/{sid}/undo")
        assert status == 200
    assert state["graph"]["canonicalKey"] == canonical_key(
        encode(parse("(\\x.\\y.x) a b"))
    ).hex()
