"""Command line entry point: ``pointerbasis {run,selfcheck,schema}``.

Exit codes: 0 success, 1 I/O failure, 2 invalid config, 3 numerical
contract violated.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .config import ConfigError, canonical_json, full_schema, load_config
from .experiments import DRIVERS, ContractViolation, atomic_write
from .qcore import DomainError, InvariantError
from .selfcheck import run_selfcheck

OUTPUT_ROOT_ENV = "POINTERBASIS_OUTPUT_ROOT"

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_CONTRACT = 0, 1, 2, 3


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def resolve_output_dir(config_path: Path, output_dir: str | None) -> Path:
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "."))
    target = Path(output_dir) if output_dir else Path("runs") / config_path.stem
    return target if target.is_absolute() else root / target


def run(config_path: str | Path, workers: int = 1, output_dir: str | Path | None = None) -> int:
    config_path = Path(config_path)
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    out = Path(output_dir) if output_dir else resolve_output_dir(config_path, cfg.output_dir)
    start = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = DRIVERS[cfg.experiment](cfg, out, workers)
        manifest = {
            "toolkit": "pointerbasis",
            "version": __version__,
            "experiment": cfg.experiment,
            "seed": cfg.seed,
            "config_sha256": hashlib.sha256(canonical_json(cfg.source)).hexdigest(),
            "workers": workers,
            "wall_time_s": time.perf_counter() - start,
            "files": [{"name": f, "sha256": _sha256(out / f)} for f in files],
        }
        with atomic_write(out / "manifest.json") as tmp:
            tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except (ConfigError, InvariantError, DomainError) as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractViolation as exc:
        print(f"numerical contract violated: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {', '.join(files)} and manifest.json to {out}")
    return EXIT_OK


def selfcheck() -> int:
    return EXIT_OK if run_selfcheck() else EXIT_CONTRACT


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="pointerbasis", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment described by a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--output-dir", default=None, help="override the config's output_dir")
    sub.add_parser("selfcheck", help="run the fast invariant suite")
    sub.add_parser("schema", help="print the config JSON schema")
    args = parser.parse_args(argv)

    if args.command == "run":
        if args.workers < 1:
            parser.error("--workers must be >= 1")
        return run(args.config, workers=args.workers, output_dir=args.output_dir)
    if args.command == "selfcheck":
        return selfcheck()
    print(json.dumps(full_schema(), indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
