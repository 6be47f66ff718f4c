"""Command-line entry point: ``pexrep create | validate | metrics``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from pexrep.backend import parse_manifest
from pexrep.errors import (
    BackendError,
    BackendFailure,
    IoFailure,
    ManifestError,
    PackageCorrupt,
    TestPassed,
    UnknownTest,
)
from pexrep.pipeline import create_report
from pexrep.reconstruct import EXPECTED_NAME, Options
from pexrep.report import compute_metrics, validate_report

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_BACKEND, EXIT_PASSED = 0, 1, 2, 3, 4


def _err(msg: str) -> None:
    print(f"pexrep: {msg}", file=sys.stderr)


def options_from_args(args: argparse.Namespace) -> Options:
    opts = Options.bare() if args.bare else Options()
    return replace(
        opts,
        dynamic=not args.no_dynamic,
        config_slice=opts.config_slice and not args.no_config_slice,
        resources=opts.resources and not args.no_resources,
        gencode=opts.gencode and not args.no_gencode,
    )


def cmd_create(args: argparse.Namespace) -> int:
    project = Path(args.project)
    if not project.is_dir():
        _err(f"project directory {project} does not exist")
        return EXIT_USAGE
    try:
        result = create_report(project, args.test, Path(args.out), options_from_args(args))
    except (UnknownTest, IoFailure) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except TestPassed as exc:
        _err(str(exc))
        return EXIT_PASSED
    except (BackendFailure, BackendError, ManifestError) as exc:
        _err(f"build failure: {exc}")
        return EXIT_BACKEND
    v, m = result.validation, result.metrics
    _err(
        f"{'VALID' if v.valid else 'INVALID'} {args.test}: "
        f"{v.original.failure_type}: {v.original.message!r} -> {v.reproduced.failure_type}; "
        f"source+internal reduction {m.source_plus_internal.percent_reduction:.2%}; package {args.out}"
    )
    return EXIT_OK if v.valid else EXIT_INVALID


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        result = validate_report(Path(args.package))
    except PackageCorrupt as exc:
        _err(f"corrupt package: {exc}")
        return EXIT_BACKEND
    _err(
        f"{'VALID' if result.valid else 'INVALID'}: expected {result.original.failure_type} "
        f"{result.original.message!r}, got {result.reproduced.failure_type} {result.reproduced.message!r}"
    )
    return EXIT_OK if result.valid else EXIT_INVALID


def cmd_metrics(args: argparse.Namespace) -> int:
    project_dir, package_dir = Path(args.project), Path(args.package)
    if not project_dir.is_dir() or not package_dir.is_dir():
        _err("both --project and --package must be directories")
        return EXIT_USAGE
    try:
        project = parse_manifest(project_dir)
        valid = False
        if (package_dir / EXPECTED_NAME).is_file():
            valid = validate_report(package_dir).valid
        metrics = compute_metrics(project, package_dir, valid)
    except (ManifestError, PackageCorrupt) as exc:
        _err(str(exc))
        return EXIT_BACKEND
    print(json.dumps({"valid": valid, **metrics.to_dict()}, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pexrep", description="Pruned executable failure reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    create = sub.add_parser("create", help="create and validate a reproduction package")
    create.add_argument("--project", required=True)
    create.add_argument("--test", required=True)
    create.add_argument("--out", required=True)
    create.add_argument("--no-dynamic", action="store_true", help="static tracing only")
    create.add_argument("--no-config-slice", action="store_true", help="use a default build configuration")
    create.add_argument("--no-resources", action="store_true", help="package no resource files")
    create.add_argument("--no-gencode", action="store_true", help="package no generated code")
    create.add_argument("--bare", action="store_true", help="sources and dependencies only")
    create.set_defaults(func=cmd_create)

    validate = sub.add_parser("validate", help="re-run validation of a package")
    validate.add_argument("package")
    validate.set_defaults(func=cmd_validate)

    metrics = sub.add_parser("metrics", help="print reduction metrics as JSON")
    metrics.add_argument("--project", required=True)
    metrics.add_argument("--package", required=True)
    metrics.set_defaults(func=cmd_metrics)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
