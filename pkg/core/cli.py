"""The agm command line: one subcommand per workbench capability.

Reports go to stdout, diagnostics and logging to stderr. Exit status is 0
on success, 1 when a report fails its gate and 2 for usage, input and
configuration errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

from core.dispatch import dispatch

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2


def _budget_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-steps", type=int, help="Statement budget per test")
    parser.add_argument("--max-depth", type=int, help="Call depth budget per test")


def _suite_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("model", help="Model file (.agm)")
    parser.add_argument("tests", nargs="+", help="Test files (.agt)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agm", description="Executable model workbench.")
    parser.add_argument("--config", help="Path to agm.yaml (default: $AGM_CONFIG or ./agm.yaml)")
    parser.add_argument("--verbose", action="store_true", help="Debug logging on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="Parse and validate models")
    check.add_argument("models", nargs="+")

    test = commands.add_parser("test", help="Run tests against a model")
    _suite_flags(test)
    test.add_argument("--category", choices=["unit", "integration", "acceptance"])
    test.add_argument("--filter", dest="name_filter", help="Run tests whose name contains this")
    test.add_argument("--jobs", type=int)
    test.add_argument("--report", choices=["text", "json"], default="text")
    test.add_argument("--ignore-unexpected-events", action="store_true", default=None)
    test.add_argument("--dump-space", action="store_true")
    _budget_flags(test)

    lint = commands.add_parser("lint", help="Check acceptance tests")
    _suite_flags(lint)
    lint.add_argument("--report", choices=["text", "json"], default="text")
    lint.add_argument("--threshold", type=float, help="L1 over-specification threshold")

    refactor = commands.add_parser("refactor", help="Apply a refactoring script")
    _suite_flags(refactor)
    refactor.add_argument("--script", required=True)
    refactor.add_argument("--out", required=True)

    verify = commands.add_parser("verify", help="Compare test observations before and after a change")
    _suite_flags(verify)
    change = verify.add_mutually_exclusive_group(required=True)
    change.add_argument("--script")
    change.add_argument("--after", help="An already-transformed model")
    verify.add_argument("--jobs", type=int)
    verify.add_argument("--report", choices=["text", "json"], default="text")
    verify.add_argument("--timestamps", action="store_true")
    verify.add_argument("--ignore-unexpected-events", action="store_true", default=None)
    _budget_flags(verify)

    fmt = commands.add_parser("fmt", help="Format model, test and script files")
    fmt.add_argument("files", nargs="+")
    mode = fmt.add_mutually_exclusive_group(required=True)
    mode.add_argument("--write", dest="mode", action="store_const", const="write")
    mode.add_argument("--check", dest="mode", action="store_const", const="check")

    derive = commands.add_parser("derive", help="Derive tests from a statechart")
    derive.add_argument("model")
    derive.add_argument("--class", dest="class_name", required=True)
    derive.add_argument("--criterion", choices=["states", "transitions", "paths"], required=True)
    derive.add_argument("--k", type=int)
    derive.add_argument("--out", required=True)
    return parser


def _payload(args: argparse.Namespace) -> Tuple[str, Dict[str, Any]]:
    """Capability id and its input, built from the parsed flags."""
    if args.command == "check":
        return "model.check", {"models": args.models}
    if args.command == "fmt":
        return "source.format", {"files": args.files, "mode": args.mode}
    if args.command == "derive":
        return "suite.derive", {
            "model": args.model,
            "class_name": args.class_name,
            "criterion": args.criterion,
            "k": args.k,
            "out": args.out,
        }

    payload: Dict[str, Any] = {"model": args.model, "tests": args.tests}
    if args.command == "refactor":
        payload.update(script=args.script, out=args.out)
        return "model.refactor", payload

    payload["config"] = args.config
    if args.command == "lint":
        payload["threshold"] = args.threshold
        return "suite.lint", payload

    payload.update(
        jobs=args.jobs,
        ignore_unexpected_events=args.ignore_unexpected_events,
        max_steps=args.max_steps,
        max_depth=args.max_depth,
    )
    if args.command == "test":
        payload.update(category=args.category, name_filter=args.name_filter, dump_space=args.dump_space)
        return "suite.run", payload
    payload.update(script=args.script, after=args.after, timestamps=args.timestamps)
    return "model.verify", payload


_SUCCEEDED: Dict[str, Callable[[Dict[str, Any]], bool]] = {
    "model.check": lambda r: r["clean"],
    "suite.run": lambda r: r["passed"],
    "suite.lint": lambda r: r["clean"],
    "model.refactor": lambda r: r["applied"],
    "model.verify": lambda r: r["gate"] == "pass",
    "source.format": lambda r: r["canonical"],
    "suite.derive": lambda r: True,
}


def _report_error(error: Dict[str, Any]) -> None:
    sys.stderr.write(f"agm: {error['type']}: {error['message']}\n")
    details = error.get("details") or []
    if not isinstance(details, list):
        details = [details]
    for detail in details:
        text = detail if isinstance(detail, str) else json.dumps(detail, sort_keys=True)
        sys.stderr.write(f"{text}\n")


def _render(result: Dict[str, Any], report: str) -> str:
    if report == "json":
        data = {k: v for k, v in result.items() if k != "text"}
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    return result["text"]


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    capability_id, payload = _payload(args)
    response = dispatch(capability_id, payload)
    if not response["ok"]:
        _report_error(response["error"])
        return EXIT_ERROR

    result = response["result"]
    sys.stdout.write(_render(result, getattr(args, "report", "text")))
    sys.stdout.flush()
    return EXIT_OK if _SUCCEEDED[capability_id](result) else EXIT_FAILED


if __name__ == "__main__":
    raise SystemExit(main())
