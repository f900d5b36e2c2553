"""Command-line entry point: ``sidlab run|check|sweep|export``.

Configuration is resolved from built-in model defaults, then ``--config``,
then ``SIDLAB_*`` environment variables, then ``--seed``/``--out``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io
from .config import STAGES, load_config
from .errors import SidlabError
from .pipeline import EXPORT_FORMATS, run_checks, run_pipeline, run_sweep


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sidlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="verb", required=True)
    for verb, help_ in (("run", "full pipeline, writes report.json and data files"),
                        ("check", "fast invariant suite, exit status 1 on failure"),
                        ("sweep", "hbar-sequence study (sharpening, scaling, positivity)"),
                        ("export", "run the pipeline and write only the chosen formats"),
                        ("config", "print the resolved configuration as YAML")):
        p = sub.add_parser(verb, help=help_)
        p.add_argument("--config", type=Path, help="YAML configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--model", help="model id when no config file names one")
        if verb in ("run", "export"):
            p.add_argument("--stage", choices=STAGES, help="stop after this stage")
        if verb == "export":
            p.add_argument("--format", action="append", choices=EXPORT_FORMATS, dest="formats",
                           help="repeatable; default all formats")
    return ap


def _summary(report) -> dict:
    return {"out": report.config["out"], "files": report.files, **report.residuals()}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    overrides = {"model": {"name": args.model}} if args.model else None
    try:
        cfg = load_config(args.config, overrides=overrides, seed=args.seed, out=args.out)
        if args.verb == "config":
            import yaml

            sys.stdout.write(yaml.safe_dump(cfg.to_dict(), sort_keys=True))
            return 0
        if args.verb == "check":
            checks = run_checks(cfg)
            for c in checks:
                print(c.line())
            return 0 if all(c.passed for c in checks) else 1
        if args.verb == "sweep":
            result = run_sweep(cfg)
            path = io.write_json(result, Path(cfg["out"]) / "sweep.json")
            print(f"wrote {path}")
            return 0
        formats = args.formats if args.verb == "export" and args.formats else EXPORT_FORMATS
        report = run_pipeline(cfg, stage=args.stage, formats=formats)
        print(json.dumps(io.to_jsonable(_summary(report)), indent=2, sort_keys=True))
        return 0
    except SidlabError as exc:
        print(f"sidlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
