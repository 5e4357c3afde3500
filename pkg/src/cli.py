#!/usr/bin/env python3
"""Command-line interface for the quasimap mirror engine."""

import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler

from src.errors import (
    ConfigurationError,
    InsufficientTruncationError,
    InternalInconsistencyError,
    MalformedRingError,
    NoDivisorLiftError,
    NonNilpotentExponentError,
    NotInvertibleError,
    OracleMismatchError,
    QMirrorError,
    SaturatedTruncationError,
    TargetValidationError,
)
from src.models import InvariantQuery, RunConfig
from src.cli_ui import CLIRenderer
from src.pipeline import MirrorPipeline
from src.series_cache import SeriesCache
from src.verification import SUITES, VerificationRunner

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_INCONSISTENT = 3
EXIT_TRUNCATION = 4
EXIT_ORACLE = 5

DEFAULT_CACHE_DIR = ".qmirror-cache"
CACHE_ENV_VAR = "QMIRROR_CACHE_DIR"

_EXIT_CODES = [
    ((TargetValidationError, MalformedRingError, NoDivisorLiftError), EXIT_VALIDATION),
    ((InternalInconsistencyError, NotInvertibleError, NonNilpotentExponentError), EXIT_INCONSISTENT),
    ((InsufficientTruncationError, SaturatedTruncationError), EXIT_TRUNCATION),
    ((OracleMismatchError,), EXIT_ORACLE),
]

_SUGGESTIONS = {
    EXIT_TRUNCATION: ["Raise -D or -T", "Check the query degree against the truncation window"],
    EXIT_VALIDATION: ["Check the charge matrix and theta of the target spec", "See samples/target.schema.json"],
    EXIT_USAGE: ["Run with --help for the available options"],
}


def exit_code_for(error: QMirrorError) -> int:
    """Maps an engine error to the public exit-code contract."""
    for classes, code in _EXIT_CODES:
        if isinstance(error, classes):
            return code
    return EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    """Argument errors are usage errors (exit 1), keeping 2 for failed validation."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--target", help="Path to a target-spec JSON file (see samples/)")
    common.add_argument("-D", type=int, default=2, dest="max_degree", help="Bound on beta(L_theta) (default: 2)")
    common.add_argument("-T", type=int, default=2, dest="max_insertions", help="Bound on the insertion degree (default: 2)")
    common.add_argument("--insertions", help="Comma-separated basis labels carried as insertion variables (default: all)")
    common.add_argument("--cache", help=f"Cache directory (default: ${CACHE_ENV_VAR} or {DEFAULT_CACHE_DIR})")
    common.add_argument("--no-cache", action="store_true", help="Disable the on-disk series cache")
    common.add_argument("--format", choices=["json", "text"], default="text", help="Output format (default: text)")
    common.add_argument("--verbose", "-v", action="store_true", help="Log every elimination step")

    parser = _Parser(
        prog="qmirror",
        description="QMirror - exact quasimap I-functions, Birkhoff factorization and Gromov-Witten invariants",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Check condition star for a target
  python -m src.cli validate --target samples/p2.json

  # Small I-function of P^2 through degree 2
  python -m src.cli ifun --small -D 2 --target samples/p2.json --format json

  # Mirror map and J-function of the quintic
  python -m src.cli mirror --target samples/p4_quintic.json -D 2 -T 0 --insertions ""

  # Lines through two points in P^2
  python -m src.cli invariants --target samples/p2.json -D 1 -T 2 --beta 1 --insert H^2 --last H^2

  # Compare against the oracles
  python -m src.cli verify --suite all --format json
""",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common], help="Check condition star and report the chamber")

    ifun = sub.add_parser("ifun", parents=[common], help="Compute the small or big I-function")
    kind = ifun.add_mutually_exclusive_group()
    kind.add_argument("--small", dest="kind", action="store_const", const="small", help="Small I-function (default)")
    kind.add_argument("--big", dest="kind", action="store_const", const="big", help="Big I-function, checked by both constructions")
    ifun.set_defaults(kind="small")

    sub.add_parser("mirror", parents=[common], help="Birkhoff-factorize the big I-function")

    inv = sub.add_parser("invariants", parents=[common], help="Read a genus-0 invariant from the J-function")
    inv.add_argument("--beta", required=True, help="Curve class, comma-separated (e.g. 1 or 1,0)")
    inv.add_argument("--insert", action="append", default=[], help="Insertion label; repeat for several")
    inv.add_argument("--last", required=True, help="Class at the descendant point: a label or a divisor polynomial")
    inv.add_argument("--psi", type=int, default=0, help="Power of psi at the last point (default: 0)")

    verify = sub.add_parser("verify", parents=[common], help="Run the oracle comparison suites")
    verify.add_argument("--suite", choices=list(SUITES), default="all", help="Suite to run (default: all)")
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """Builds a RunConfig; the cache directory falls back to the environment."""
    load_dotenv()
    cache_dir = args.cache or os.environ.get(CACHE_ENV_VAR) or DEFAULT_CACHE_DIR
    insertions = None
    if args.insertions is not None:
        insertions = [label.strip() for label in args.insertions.split(",") if label.strip()]
    beta = None
    if getattr(args, "beta", None) is not None:
        try:
            beta = [int(b) for b in args.beta.split(",")]
        except ValueError:
            raise ValueError(f"--beta must be comma-separated integers, got {args.beta!r}")
    return RunConfig(
        command=args.command,
        target_path=args.target,
        max_degree=args.max_degree,
        max_insertions=args.max_insertions,
        insertions=insertions,
        cache_dir=cache_dir,
        use_cache=not args.no_cache,
        output_format=args.format,
        verbose=args.verbose,
        kind=getattr(args, "kind", "small"),
        suite=getattr(args, "suite", "all"),
        query_beta=beta,
        query_insert=list(getattr(args, "insert", []) or []),
        query_last=getattr(args, "last", None),
        query_psi=getattr(args, "psi", 0),
    )


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


class CommandRunner:
    """Executes one subcommand; returns the exit code."""

    def __init__(self, config: RunConfig, renderer: CLIRenderer, output: CLIRenderer):
        self.config = config
        self.renderer = renderer
        self.output = output
        cache = SeriesCache(config.cache_dir) if config.use_cache and config.cache_dir else None
        self.pipeline = MirrorPipeline(cache=cache)

    def _emit(self, text: str) -> None:
        print(text)

    def _target(self):
        if not self.config.target_path:
            raise ConfigurationError(f"{self.config.command} needs --target")
        self.renderer.start_processing("Loading target")
        target = self.pipeline.load_target(self.config.target_path)
        self.renderer.complete_processing(f"Loaded {target.name}")
        return target

    def _slice(self, target):
        return self.pipeline.resolve_insertions(target, self.config.insertions)

    def run(self) -> int:
        handler = getattr(self, f"cmd_{self.config.command}")
        return handler()

    def cmd_validate(self) -> int:
        if not self.config.target_path:
            raise ConfigurationError("validate needs --target")
        name, report = self.pipeline.validate(self.config.target_path)
        if self.config.output_format == "json":
            self._emit(self.pipeline.serializer.dumps(self.pipeline.serializer.chamber_to_document(name, report)))
        else:
            self.output.show_chamber(name, report)
        return EXIT_OK if report.is_valid else EXIT_VALIDATION

    def cmd_ifun(self) -> int:
        cfg = self.config
        target = self._target()
        self.renderer.start_processing(f"Computing {cfg.kind} I-function")
        text = self.pipeline.ifun(target, cfg.kind, cfg.max_degree, cfg.max_insertions, self._slice(target))
        self.renderer.complete_processing(f"{cfg.kind.capitalize()} I-function computed")
        if cfg.output_format == "json":
            self._emit(text)
        else:
            self.output.show_series(self.pipeline.serializer.loads(text), f"{cfg.kind} I-function of {target.name}")
        return EXIT_OK

    def cmd_mirror(self) -> int:
        cfg = self.config
        target = self._target()
        self.renderer.start_processing("Birkhoff factorization")
        text = self.pipeline.mirror_text(target, cfg.max_degree, cfg.max_insertions, self._slice(target))
        self.renderer.complete_processing("Mirror map and J-function computed")
        if cfg.output_format == "json":
            self._emit(text)
        else:
            self.output.show_mirror(self.pipeline.serializer.loads(text))
        return EXIT_OK

    def cmd_invariants(self) -> int:
        cfg = self.config
        target = self._target()
        ring = target.ring
        query = InvariantQuery(
            beta=tuple(cfg.query_beta),
            insertions=tuple(ring.index_of(label) for label in cfg.query_insert),
            last_class=self.pipeline.resolve_class(target, cfg.query_last),
            psi_power=cfg.query_psi,
        )
        insertions = self._slice(target) if cfg.insertions is not None else None
        self.renderer.start_processing("Extracting invariant")
        results = self.pipeline.invariants(target, cfg.max_degree, cfg.max_insertions, [query], insertions)
        self.renderer.complete_processing("Invariant extracted")
        if cfg.output_format == "json":
            document = self.pipeline.serializer.invariants_to_document(target, results)
            self._emit(self.pipeline.serializer.dumps(document))
        else:
            self.output.show_invariants(results)
        return EXIT_OK

    def cmd_verify(self) -> int:
        cfg = self.config
        self.renderer.start_processing(f"Running suite {cfg.suite}")
        report = VerificationRunner().run(cfg.suite)
        self.renderer.complete_processing(f"Suite {cfg.suite} finished")
        if cfg.output_format == "json":
            self._emit(report.to_json())
        else:
            self.output.show_verification(report)
        return EXIT_OK if report.passed else EXIT_ORACLE


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the CLI."""
    console = Console(stderr=True)
    renderer = CLIRenderer(console)
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = build_config(args)
    except ValueError as e:
        renderer.show_error("invalid-options", str(e), _SUGGESTIONS[EXIT_USAGE])
        return EXIT_USAGE

    configure_logging(config.verbose)
    if config.output_format == "text":
        renderer.show_banner()

    runner = CommandRunner(config, renderer, CLIRenderer(Console()))
    try:
        return runner.run()
    except QMirrorError as e:
        code = exit_code_for(e)
        renderer.fail_processing(config.command, e.kind)
        renderer.show_error(e.kind, e.message, _SUGGESTIONS.get(code))
        return code


if __name__ == "__main__":
    sys.exit(main())
