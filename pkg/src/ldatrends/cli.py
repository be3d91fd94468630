"""``ldatrends`` command line: one subcommand per pipeline stage, plus ``all``."""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import LdaTrendsError
from .pipeline import STAGES, load_config, run, sample_config_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldatrends",
        description="Run topic-trend pipeline stages. Stages read earlier stages' outputs from --out.",
    )
    parser.add_argument("command", choices=STAGES + ("all",))
    parser.add_argument("--config", help="TOML config file (default: bundled synthetic sample)")
    parser.add_argument("--out", help="output directory (overrides paths.output)")
    parser.add_argument("--seed", type=int, help="master seed (overrides the config)")
    parser.add_argument("--force", action="store_true", help="rerun stages even if up to date")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config or sample_config_path())
        cfg = cfg.with_overrides(seed=args.seed, output=args.out)
        run(args.command, cfg, force=args.force)
    except (LdaTrendsError, ValueError, OSError) as exc:
        print(f"ldatrends {args.command}: error: {exc}", file=sys.stderr)
        return 1
    print(f"ldatrends {args.command}: done ({cfg.paths.output})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
