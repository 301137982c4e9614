"""Command line entry points: serve, replay, dump.

Exit codes are fixed for scripting: 0 success, 1 usage, 2 config/input,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from farmchat.config import load_app_config
from farmchat.errors import BadRange, FarmchatError, ParseError, ValidationError
from farmchat.protocol import dumps_canonical
from farmchat.service import Service, config_from_script, load_replay_script, run_replay, write_transcript
from farmchat.store import Store, Stream

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="farmchat", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP gateway and wall-clock tick loop")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--data", required=True, help="data directory for the append-only logs")
    serve.add_argument("--config", help="farm config file (JSON)")
    serve.add_argument("--seed", type=int, help="override the simulation seed")
    serve.add_argument(
        "--tick-interval",
        type=float,
        help="wall seconds between ticks (default: one simulated tick per tick_seconds)",
    )
    serve.add_argument("--ui-dir", help="serve static UI files from this directory")

    replay = sub.add_parser("replay", help="run a deterministic scripted session")
    replay.add_argument("script", help="replay script file")
    replay.add_argument("--data", required=True)
    replay.add_argument("--config", help="base farm config; script header overrides it")
    replay.add_argument("--out", help="write the outbound transcript here (default stdout)")

    dump = sub.add_parser("dump", help="print a stream's records as frames")
    dump.add_argument("stream", choices=[s.value for s in Stream])
    dump.add_argument("--data", required=True)
    dump.add_argument("--from", dest="from_ts", type=int, default=0)
    dump.add_argument("--to", dest="to_ts", type=int, default=2**62)
    return parser


def cmd_serve(args) -> int:
    from farmchat.server import GatewayServer

    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    try:
        config = load_app_config(args.config, overrides=overrides)
    except FileNotFoundError as exc:
        print(f"error: config file not found: {exc.filename}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, ValidationError, FarmchatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    service = Service(config, args.data)
    server = GatewayServer(
        service,
        host=args.host,
        port=args.port,
        tick_interval=args.tick_interval,
        ui_dir=args.ui_dir,
    )
    print(f"farmchat listening on {args.host}:{server.port} (data: {args.data})", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        script = load_replay_script(args.script)
        config_from_script(script, args.config)  # fail fast before touching the data dir
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, ValidationError, FarmchatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        frames = run_replay(script, args.data, base_config=args.config)
    except FarmchatError as exc:
        print(f"error: replay failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    if args.out:
        write_transcript(frames, args.out)
    else:
        for frame in frames:
            print(dumps_canonical(frame))
    return EXIT_OK


def cmd_dump(args) -> int:
    data_dir = Path(args.data)
    if not data_dir.is_dir():
        print(f"error: data directory not found: {data_dir}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        store = Store(data_dir, durable=False)
        records = store.query(Stream(args.stream), args.from_ts, args.to_ts)
    except BadRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FarmchatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for record in records:
        print(dumps_canonical(record.body))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    handlers = {"serve": cmd_serve, "replay": cmd_replay, "dump": cmd_dump}
    try:
        return handlers[args.command](args)
    except FarmchatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
