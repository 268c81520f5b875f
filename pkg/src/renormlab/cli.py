"""Command line interface: ``renormlab {analyze,tower,qa-scan,tree-export}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import report as rep
from .backends import PRESETS
from .config import FORMATS, parse_config
from .errors import ConfigInvalid, RenormlabError


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--preset", choices=PRESETS, help="backend preset (overrides the config's backend)")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="backend parameter; VALUE is parsed as JSON when possible")
    p.add_argument("--chain", choices=["renormalization", "vertex_stabilizer"])
    p.add_argument("--depth", type=int, help="maximum tower level")
    p.add_argument("--window", type=int, help="stable-image window for the verdict")
    p.add_argument("--word-bound", type=int, help="word length bound for searches")
    p.add_argument("--max-index", type=int)
    p.add_argument("--cache-dir", type=Path)
    p.add_argument("--out", type=Path, help="write output here instead of stdout")
    p.add_argument("--format", choices=FORMATS, default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="renormlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze", help="tower table, discriminant verdict and probes")
    _add_common(p)
    p.add_argument("--qa", action="store_true", help="run the quasi-analyticity scan")
    p.add_argument("--kernel", action="store_true", help="run the kernel probe")
    p.add_argument("--contracting", action="store_true", help="run the contracting probe on the generators")
    p.add_argument("--self-replicating", action="store_true", help="run the self-replication probe")
    p = sub.add_parser("tower", help="per-level table (uses the cache)")
    _add_common(p)
    p = sub.add_parser("qa-scan", help="search for a quasi-analyticity witness")
    _add_common(p)
    p.add_argument("--level", type=int)
    p.add_argument("--cylinder-depth", type=int, default=1)
    p = sub.add_parser("tree-export", help="DOT export of the coset tree")
    _add_common(p)
    return parser


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def config_from_args(args: argparse.Namespace):
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text())
        except OSError as exc:
            raise ConfigInvalid(f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config {args.config} is not valid JSON: {exc}") from None
    elif args.preset is not None:
        data = {"backend": args.preset}
    else:
        raise ConfigInvalid("give --config or --preset")
    if args.preset is not None and args.config is not None and data.get("backend") != args.preset:
        data = {"backend": args.preset}
    params = dict(data.get("params") or {})
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigInvalid(f"--param expects KEY=VALUE, got {item!r}")
        params[key] = _parse_value(value)
    if params:
        data["params"] = params
    for flag, key in (("chain", "chain"), ("depth", "max_level"), ("window", "window"), ("max_index", "max_index")):
        if getattr(args, flag) is not None:
            data[key] = getattr(args, flag)
    if args.cache_dir is not None:
        data["cache_dir"] = str(args.cache_dir)
    cmd = args.command
    if cmd == "analyze":
        for flag, key in (("qa", "qa"), ("kernel", "kernel"), ("contracting", "contracting"),
                          ("self_replicating", "self_replicating")):
            if getattr(args, flag):
                data.setdefault(key, {})
    if cmd == "qa-scan":
        qa = dict(data.get("qa") or {})
        if args.level is not None:
            qa["level"] = args.level
        qa["cylinder_depth"] = args.cylinder_depth if args.cylinder_depth is not None else qa.get("cylinder_depth", 1)
        data["qa"] = qa
    if args.word_bound is not None:
        for key in ("qa", "kernel", "self_replicating"):
            if key in data:
                data[key] = {**data[key], "word_bound": args.word_bound}
    return parse_config(data)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "tree-export":
            text = rep.run_tree_export(cfg)
        else:
            runner = {"analyze": rep.run_analyze, "tower": rep.run_tower, "qa-scan": rep.run_qa_scan}[args.command]
            try:
                text = rep.render(runner(cfg), args.format)
            except ValueError as exc:
                raise ConfigInvalid(str(exc)) from None
    except RenormlabError as exc:
        print(f"renormlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
