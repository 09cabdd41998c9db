"""Command-line interface.

Exit codes: 0 success, 1 domain error (stable error code on stderr),
2 usage error. ``iso`` exits 1 when the graphs differ, like cmp/diff.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .coeff import Coefficient
from .descriptors import (
    applicable_moves,
    descriptor_json,
    dumps,
    graph_json,
    move_from_descriptor,
    resolve_descriptor,
    site_descriptor,
)
from .dot import to_dot
from .emergent import CHECKABLE, check_move_soundness
from .encoding import decode, encode, graph_normalize
from .glcformat import parse_glc, print_glc
from .graph import Graph, GraphError
from .iso import is_isomorphic
from .moves import FORWARD, REVERSE, MoveKind, Site, apply_move, check_site
from .scenarios import UnknownScenario, run_all, run_scenario, scenario_names
from .terms import TIMEOUT, TermSyntaxError, parse, show


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _read_graph(path: str) -> Graph:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_glc(text)


def _read_graph_or_term(spec: str) -> Graph:
    if spec == "-" or Path(spec).exists():
        return _read_graph(spec)
    return encode(parse(spec))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_params(text: str | None) -> dict:
    params = {}
    for item in (text or "").split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise CliError("USAGE", f"bad --params entry {item!r}, expected k=v")
        k, v = item.split("=", 1)
        params[k.strip()] = v.strip()
    return params


def cmd_encode(args) -> int:
    g = encode(parse(args.term))
    _emit(print_glc(g), args.output)
    return 0


def cmd_decode(args) -> int:
    term = decode(_read_graph(args.file))
    print(show(term))
    return 0


def cmd_reduce(args) -> int:
    if args.strategy != "normal":
        raise CliError("USAGE", f"unknown strategy {args.strategy!r}")
    g = _read_graph_or_term(args.input)
    result = graph_normalize(g, fuel=args.fuel)
    if result is TIMEOUT:
        raise CliError("TIMEOUT", f"no fixpoint within fuel {args.fuel}")
    _emit(print_glc(result), args.output)
    return 0


def cmd_moves(args) -> int:
    g = _read_graph(args.file)
    sites = applicable_moves(g, include_reverse=not args.forward_only, cap=args.limit)
    if args.move:
        sites = [s for s in sites if s.move.name == args.move]
    print(dumps(descriptor_json(g, sites)))
    return 0


def cmd_apply(args) -> int:
    g = _read_graph(args.file)
    direction = REVERSE if args.reverse else FORWARD
    site_arg = args.site
    if site_arg is not None and site_arg.lstrip().startswith("{"):
        desc = json.loads(site_arg)
        site = resolve_descriptor(g, desc)
    else:
        if not args.move:
            raise CliError("USAGE", "--move is required unless --site is a descriptor")
        params = _parse_params(args.params)
        kwargs = {}
        if "coef" in params:
            kwargs["coef"] = Coefficient.parse(params["coef"])
        if "coef2" in params:
            kwargs["coef2"] = Coefficient.parse(params["coef2"])
        if "bound" in params:
            kwargs["bound"] = int(params["bound"])
        move = MoveKind(args.move, **kwargs)
        from .moves import enumerate_matches

        sites = enumerate_matches(g, move, direction)
        index = int(site_arg) if site_arg is not None else 0
        if not 0 <= index < len(sites):
            raise CliError(
                "SITE_STALE", f"site index {index} out of range ({len(sites)} sites)"
            )
        site = sites[index]
    h, _ = apply_move(g, site)
    _emit(print_glc(h), args.output)
    return 0


def cmd_iso(args) -> int:
    g1, g2 = _read_graph(args.first), _read_graph(args.second)
    same = is_isomorphic(g1, g2, match_leaf_names=args.names)
    print("isomorphic" if same else "not isomorphic")
    return 0 if same else 1


def cmd_scenario(args) -> int:
    if args.all:
        verdicts = run_all()
    elif args.name:
        verdicts = [run_scenario(args.name)]
    else:
        for name in scenario_names():
            print(name)
        return 0
    worst = 0
    for v in verdicts:
        print(f"{v.name}: {v.status}")
        if v.records and args.verbose:
            for k, val in sorted(v.records.items()):
                print(f"  {k} = {val}")
        if v.status == "fail":
            worst = 1
            if args.verbose:
                print(v.message)
    return worst


def cmd_soundness(args) -> int:
    failed = False
    for name in CHECKABLE + ("beta_star",):
        report = check_move_soundness(name)
        status = "sound" if report.preserving else "not decoration-preserving"
        expected_break = name == "beta_star"
        marker = " (expected)" if expected_break and not report.preserving else ""
        print(f"{name}: {status} ({report.sites_checked} sites){marker}")
        if report.preserving == expected_break:
            failed = True
    return 1 if failed else 0


def cmd_dot(args) -> int:
    print(to_dot(_read_graph(args.file)), end="")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="glc",
        description="graphic lambda calculus workbench",
    )
    sub = p.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode a lambda term as a graph")
    enc.add_argument("term")
    enc.add_argument("-o", "--output")
    enc.set_defaults(fn=cmd_encode)

    dec = sub.add_parser("decode", help="decode a lambda-sector graph to a term")
    dec.add_argument("file")
    dec.set_defaults(fn=cmd_decode)

    red = sub.add_parser("reduce", help="normalize a graph or term")
    red.add_argument("input", help="a .glc file, '-' for stdin, or a term")
    red.add_argument("--fuel", type=int, default=200)
    red.add_argument("--strategy", default="normal")
    red.add_argument("-o", "--output")
    red.set_defaults(fn=cmd_reduce)

    mv = sub.add_parser("moves", help="list applicable moves/sites as JSON")
    mv.add_argument("file")
    mv.add_argument("--move", help="restrict to one move name")
    mv.add_argument("--forward-only", action="store_true")
    mv.add_argument("--limit", type=int, default=200)
    mv.set_defaults(fn=cmd_moves)

    ap = sub.add_parser("apply", help="apply one move at a site")
    ap.add_argument("file")
    ap.add_argument("--move", help="move name (with --site as an index)")
    ap.add_argument("--site", help="site index or JSON descriptor from 'moves'")
    ap.add_argument("--params", help="coef=...,coef2=...,bound=...")
    ap.add_argument("--reverse", action="store_true")
    ap.add_argument("-o", "--output")
    ap.set_defaults(fn=cmd_apply)

    iso = sub.add_parser("iso", help="compare two graphs up to isomorphism")
    iso.add_argument("first")
    iso.add_argument("second")
    iso.add_argument("--names", action="store_true", help="match leaf names too")
    iso.set_defaults(fn=cmd_iso)

    sc = sub.add_parser("scenario", help="replay checked derivations")
    sc.add_argument("name", nargs="?")
    sc.add_argument("--all", action="store_true")
    sc.add_argument("-v", "--verbose", action="store_true")
    sc.set_defaults(fn=cmd_scenario)

    snd = sub.add_parser("soundness", help="decoration soundness of the move catalog")
    snd.set_defaults(fn=cmd_soundness)

    dot = sub.add_parser("dot", help="render a graph as DOT")
    dot.add_argument("file")
    dot.set_defaults(fn=cmd_dot)

    srv = sub.add_parser("serve", help="run the HTTP session service")
    srv.add_argument("--port", type=int, default=8137)
    srv.add_argument("--host", default="127.0.0.1")
    srv.set_defaults(fn=cmd_serve)

    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error {exc.code}: {exc}", file=sys.stderr)
        return 2 if exc.code == "USAGE" else 1
    except TermSyntaxError as exc:
        print(f"error SYNTAX_ERROR: {exc}", file=sys.stderr)
        return 1
    except UnknownScenario as exc:
        print(f"error UNKNOWN_SCENARIO: {exc}", file=sys.stderr)
        return 1
    except GraphError as exc:
        print(f"error {exc.code}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error NO_SUCH_FILE: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error BAD_JSON: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
