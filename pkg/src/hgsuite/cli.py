"""Command line front door.

Subcommands mirror the install workflow:

- ``extract``: app source to rule file (no home state involved);
- ``analyze``: one install session against a home file, report printed
  and held pending so a later ``decide`` can commit or discard it;
- ``decide``: resolve a pending decision id;
- ``session serve``: the same pipeline behind HTTP.

Exit codes: 0 clean, 2 findings (or chains) present, 1 any error.  The
catalog defaults to the packaged one; override with ``--catalog`` or the
``HG_CATALOG`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .catalog import Catalog, load_catalog
from .errors import HgError
from .hgl import parse, validate
from .rules import serialize_ruleset
from .service import HomeService
from .symex import extract_rules


def _load_cli_catalog(arg: str | None) -> Catalog:
    path = arg or os.environ.get("HG_CATALOG")
    return load_catalog(path)


def _read_source(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def cmd_extract(args: argparse.Namespace) -> int:
    catalog = _load_cli_catalog(args.catalog)
    source = _read_source(args.app)
    unit = parse(source)
    diagnostics = validate(unit, catalog)
    if diagnostics:
        for d in diagnostics:
            print(f"{args.app}:{d}", file=sys.stderr)
        return 1
    text = serialize_ruleset(extract_rules(unit, catalog))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _config_argument(raw: str):
    """--config accepts the companion URI directly or a file holding it."""
    from .session import parse_config_uri

    if "://" in raw:
        return parse_config_uri(raw)
    return parse_config_uri(Path(raw).read_text(encoding="utf-8").strip())


def _service(args: argparse.Namespace) -> HomeService:
    return HomeService(
        args.home,
        _load_cli_catalog(args.catalog),
        cache_dir=args.cache_dir,
        max_chain_len=args.max_chain_len,
        env_unification=not args.no_env_unification,
    )


def cmd_analyze(args: argparse.Namespace) -> int:
    service = _service(args)
    config = _config_argument(args.config)
    report = service.install(_read_source(args.app), config=config)
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if report["errors"]:
        return 1
    if report["findings"] or report["chains"]:
        return 2
    return 0


def cmd_decide(args: argparse.Namespace) -> int:
    service = _service(args)
    ack = service.decide(args.decision_id, args.choice)
    print(json.dumps(ack, indent=2, ensure_ascii=False))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.listen.rpartition(":")
    app = create_app(_service(args))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hgsuite",
        description="Detect cross-app interference in home automation rules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--catalog", help="effects catalog file (default: packaged, or HG_CATALOG)")

    def add_home(p: argparse.ArgumentParser) -> None:
        add_common(p)
        p.add_argument("--home", required=True, help="home state file (hgstate/1 JSON)")
        p.add_argument("--cache-dir", help="directory for extracted-rule cache files")
        p.add_argument("--max-chain-len", type=int, default=4, help="longest reported chain (default 4)")
        p.add_argument(
            "--no-env-unification",
            action="store_true",
            help="treat equally named environment features of different sensors as unrelated",
        )

    p = sub.add_parser("extract", help="extract rules from an app source file")
    add_common(p)
    p.add_argument("app", help="HGL source file")
    p.add_argument("-o", "--output", help="write the rule file here instead of stdout")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="run one install session against a home")
    add_home(p)
    p.add_argument("app", help="HGL source file")
    p.add_argument("--config", required=True, help="configuration URI, or a file containing one")
    p.add_argument("--report", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("decide", help="resolve a pending install decision")
    add_home(p)
    p.add_argument("decision_id", help="decision id from an analyze report")
    p.add_argument("choice", choices=("keep", "reject"))
    p.set_defaults(func=cmd_decide)

    session = sub.add_parser("session", help="long-running service commands")
    session_sub = session.add_subparsers(dest="session_command", required=True)
    p = session_sub.add_parser("serve", help="serve the install API over HTTP")
    add_home(p)
    p.add_argument("--listen", default="127.0.0.1:8060", help="host:port to bind (default 127.0.0.1:8060)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
