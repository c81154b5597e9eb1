"""Command-line driver: `sl check`, `sl run`, `sl explain`.

Exit codes: 0 on success (warnings allowed), 1 when any error diagnostic is
produced, 2 on usage errors. With `--json` every output is canonically
ordered and byte-stable across runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .coherence import CoherencePolicy
from .corekit import core_check, core_to_json, elaborate
from .diagnostics import Diagnostic, Span
from .evaluator import DEFAULT_FUEL, run_program
from .linker import CheckResult, check_sources
from .resolver import DEFAULT_DEPTH

USAGE_EXIT = 2


def _color_enabled() -> bool:
    return os.environ.get("SL_COLOR", "0") == "1"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sl",
        description="A small generic-programming language with pluggable "
        "coherence policies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_files=True):
        if with_files:
            p.add_argument("files", nargs="*", help="SL source files (.sl)")
        p.add_argument(
            "--policy",
            choices=["use-site", "def-site-strict", "def-site-disjoint", "scoped"],
            default="use-site",
            help="coherence policy (default: use-site)",
        )
        p.add_argument(
            "--prioritize-specific",
            action="store_true",
            help="use-site only: prefer a strictly more specific candidate",
        )
        p.add_argument(
            "--incoherent-ok",
            action="store_true",
            help="use-site only: on ambiguity pick the first candidate in "
            "declaration order and warn",
        )
        p.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="resolution depth limit")
        p.add_argument("--fuel", type=int, default=DEFAULT_FUEL, help="evaluation step budget")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--manifest", help="file listing source paths, one per line")

    p_check = sub.add_parser("check", help="parse, type check, and link a program")
    common(p_check)
    p_run = sub.add_parser("run", help="check, elaborate, and evaluate a program")
    common(p_run)
    p_run.add_argument(
        "--emit-core",
        action="store_true",
        help="print the elaborated core program as JSON instead of evaluating",
    )
    p_explain = sub.add_parser(
        "explain", help="show the resolution trace for a goal at file:line:col"
    )
    p_explain.add_argument("locator", help="goal site, as file:line:col")
    common(p_explain)
    return parser


def gather_sources(args) -> list[tuple[str, bytes]]:
    paths = list(args.files)
    if args.manifest:
        base = Path(args.manifest).parent
        with open(args.manifest, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line and not line.startswith("#"):
                    paths.append(str((base / line)))
    if not paths:
        raise SystemExit2("no input files (pass paths or --manifest)")
    sources = []
    for path in paths:
        try:
            with open(path, "rb") as handle:
                sources.append((path, handle.read()))
        except OSError as exc:
            raise SystemExit2(f"cannot read {path}: {exc.strerror}")
    return sources


class SystemExit2(Exception):
    def __init__(self, msg: str):
        self.msg = msg
        super().__init__(msg)


def make_policy(args) -> CoherencePolicy:
    if (args.prioritize_specific or args.incoherent_ok) and args.policy != "use-site":
        raise SystemExit2(
            "--prioritize-specific/--incoherent-ok apply to the use-site policy only"
        )
    return CoherencePolicy(
        args.policy,
        prioritize_specific=args.prioritize_specific,
        incoherent_ok=args.incoherent_ok,
    )


def emit_diagnostics(diags: list[Diagnostic], as_json: bool, stream=None):
    stream = stream or sys.stdout
    if as_json:
        payload = [d.to_json() for d in diags]
        stream.write(json.dumps(payload, indent=2) + "\n")
    else:
        color = _color_enabled()
        for d in diags:
            stream.write(d.render(color) + "\n")


def cmd_check(args) -> int:
    sources = gather_sources(args)
    result = check_sources(sources, make_policy(args), args.depth)
    emit_diagnostics(result.diagnostics, args.json)
    return 0 if result.ok else 1


def cmd_run(args) -> int:
    sources = gather_sources(args)
    result = check_sources(sources, make_policy(args), args.depth)
    if not result.ok:
        emit_diagnostics(result.diagnostics, args.json, stream=sys.stderr)
        return 1
    emit_diagnostics(result.diagnostics, False, stream=sys.stderr)  # warnings
    core = elaborate(result.program)
    core_diags = core_check(core)
    if core_diags:
        emit_diagnostics(core_diags, args.json, stream=sys.stderr)
        return 1
    if args.emit_core:
        sys.stdout.write(json.dumps(core_to_json(core), indent=2) + "\n")
        return 0
    outcome = run_program(core, args.fuel)
    if isinstance(outcome, Diagnostic):
        emit_diagnostics([outcome], args.json, stream=sys.stderr)
        return 1
    _, transcript = outcome
    if args.json:
        sys.stdout.write(json.dumps(transcript, indent=2) + "\n")
    else:
        for line in transcript:
            sys.stdout.write(line + "\n")
    return 0


def parse_locator(text: str) -> tuple[str, int, int]:
    parts = text.rsplit(":", 2)
    if len(parts) != 3:
        raise SystemExit2("locator must be file:line:col")
    try:
        return parts[0], int(parts[1]), int(parts[2])
    except ValueError:
        raise SystemExit2("locator must be file:line:col") from None


def _same_file(a: str, b: str) -> bool:
    try:
        return Path(a).resolve() == Path(b).resolve()
    except OSError:
        return a == b


def find_goal(result: CheckResult, file: str, line: int, col: int):
    best = None
    for module in result.modules.values():
        for record in module.goal_log:
            span = record.site
            if not _same_file(span.file, file):
                continue
            if not span.covers(line, col):
                continue
            if best is None or (
                best.site.start <= span.start and span.end <= best.site.end
            ):
                best = record
    return best


def render_trace(node, depth=0) -> list[str]:
    pad = "  " * depth
    lines = [f"{pad}goal {node.goal}"]
    for cand in node.candidates:
        inst = ", ".join(cand["instantiation"])
        suffix = f" via [{inst}]" if inst else ""
        lines.append(f"{pad}  candidate {cand['model']} (head {cand['head']}){suffix}")
    if node.outcome == "committed":
        lines.append(f"{pad}  committed: {node.picked}")
    elif node.outcome == "given":
        lines.append(f"{pad}  from the context: {node.given}")
    elif node.outcome == "equality":
        lines.append(f"{pad}  proved by normalization")
    else:
        lines.append(f"{pad}  outcome: {node.outcome}")
    if node.note:
        lines.append(f"{pad}  note: {node.note}")
    for child in node.children:
        lines.extend(render_trace(child, depth + 1))
    return lines


def cmd_explain(args) -> int:
    file, line, col = parse_locator(args.locator)
    sources = gather_sources(args)
    result = check_sources(sources, make_policy(args), args.depth)
    record = find_goal(result, file, line, col)
    if record is None:
        where = (max(line, 1), max(col, 1))
        diag = Diagnostic(
            "E-NO-GOAL",
            f"no constraint is discharged at {args.locator}",
            Span(file, where, where),
        )
        emit_diagnostics([diag], args.json, stream=sys.stderr)
        return 1
    if args.json:
        payload = {
            "site": record.site.to_json(),
            "trace": record.trace.to_json(),
        }
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        sys.stdout.write(f"resolution at {record.site}\n")
        sys.stdout.write("\n".join(render_trace(record.trace)) + "\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already
        return int(exc.code or 0)
    try:
        if args.command == "check":
            return cmd_check(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "explain":
            return cmd_explain(args)
    except SystemExit2 as exc:
        sys.stderr.write(f"error: {exc.msg}\n")
        return USAGE_EXIT
    return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
