"""Command-line front end.

    mitmlab list
    mitmlab run --scenario 2 --seed 7 [--strategy NAME] [--format json|jsonl|text]
                [--out PATH] [--figure PATH] [--expect-secure]
    mitmlab analyze --config hash,enc --strategies modify_message,... [--seed S]
                    [--format json|text] [--out PATH] [--figure PATH]
    mitmlab replay --in session.json [--format json|jsonl|text]
    mitmlab serve [--host H] [--port P]

Exit codes: 0 on success; 1 when --expect-secure met a forged execution;
2 for unusable input (unknown scenario, bad file, bad flags).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analyzer import EmptyStrategySet, PropertyReport, analyze
from .channel import canonical_json
from .engine import CorruptSessionFile, load_session, run_scenario_with_injection
from .scenarios import (
    Outcome,
    ProtectionConfig,
    ScenarioError,
    get_scenario,
    list_scenarios,
    load_scenario_file,
)
from .strategies import CORE_STRATEGY_NAMES, UnknownStrategy

_USAGE_ERRORS = (ScenarioError, CorruptSessionFile, UnknownStrategy, EmptyStrategySet)


def _part_text(part: dict) -> str:
    kind = part["kind"]
    if kind == "plain":
        return f'text "{part["text"]}"'
    if kind == "digest":
        return f"digest {part['value'][:12]}…"
    if kind == "cipher":
        return f"sealed[{part['key_id']}] {len(part['body']) // 2} bytes"
    if kind == "key_request":
        return f"key request claiming {part['claimed_identity']}"
    if kind == "key_grant":
        return f"key grant [{part['key_id']}]"
    return kind


def _envelope_text(env: dict) -> str:
    parts = " + ".join(_part_text(p) for p in env["parts"])
    return f"#{env['seq']} {env['sender']} -> {env['recipient']}: {parts}"


def format_transcript_text(document: dict) -> str:
    """Human-readable rendering of a transcript document."""
    lines = [f"scenario {document['scenario_id']}  seed {document['seed']}"]
    if document.get("strategy_override"):
        lines.append(f"injected strategy: {document['strategy_override']}")
    for event in document["events"]:
        etype = event["type"]
        if etype == "Sent":
            lines.append(f"  sent         {_envelope_text(event['envelope'])}")
        elif etype == "Intercepted":
            changed = event["before"] != event["after"]
            verb = "tampered" if changed else "read"
            lines.append(f"  intercepted  [{event['strategy_name']}] {verb} #{event['seq']}")
            if changed:
                lines.append(f"               now: {_envelope_text(event['after'])}")
        elif etype == "Delivered":
            lines.append(f"  delivered    {_envelope_text(event['envelope'])}")
        elif etype == "Verified":
            lines.append(f"  verified     #{event['seq']} {event['detail']}")
        elif etype == "Rejected":
            lines.append(f"  REJECTED     #{event['seq']} {event['reason']}")
        elif etype == "Executed":
            lines.append(f"  executed     #{event['seq']} \"{event['transaction_text']}\"")
        elif etype == "KeyIssued":
            where = f" (#{event['seq']})" if "seq" in event else ""
            lines.append(f"  key issued   {event['key_id']} -> {event['to']}{where}")
        elif etype == "IdentityCheckFailed":
            lines.append(
                f"  ID CHECK     claimed {event['claimed']}, actually {event['actual']}: refused"
            )
    lines.append(f"outcome: {document.get('outcome') or 'in progress'}")
    return "\n".join(lines)


def format_report_text(report: PropertyReport) -> str:
    lines = [f"defenses: {report.config.label()}  seed {report.seed}"]
    lines.append(f"strategies: {', '.join(report.strategies)}")
    for name in ("confidentiality", "integrity", "authentication"):
        verdict = report.verdicts[name]
        witness = report.witnesses[name]
        suffix = f"  (witness: {witness.strategy})" if witness else ""
        lines.append(f"  {name:16s} {verdict}{suffix}")
    return "\n".join(lines)


def _emit(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)


def _render_transcript(document: dict, fmt: str) -> str:
    if fmt == "json":
        return canonical_json(document)
    if fmt == "jsonl":
        return "\n".join(canonical_json(e) for e in document["events"])
    return format_transcript_text(document)


def _cmd_list(args: argparse.Namespace) -> int:
    print(canonical_json({"scenarios": list_scenarios()}))
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    if (args.scenario is None) == (args.scenario_file is None):
        raise ScenarioError("give exactly one of --scenario or --scenario-file")
    spec = (
        load_scenario_file(args.scenario_file)
        if args.scenario_file
        else get_scenario(args.scenario)
    )
    transcript, outcome = run_scenario_with_injection(spec, args.seed, args.strategy)
    document = transcript.to_document()
    _emit(_render_transcript(document, args.format), args.out)
    if args.figure:
        from .figures import save_transcript_figure

        save_transcript_figure(document, args.figure)
    if args.expect_secure and outcome is Outcome.EXECUTED_FORGED:
        print(f"expected a secure run, got {outcome.value}", file=sys.stderr)
        return 1
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    config = ProtectionConfig.from_label(args.config)
    names = [s.strip() for s in args.strategies.split(",") if s.strip()]
    report = analyze(config, names, args.seed)
    payload = (
        canonical_json(report.to_dict()) if args.format == "json" else format_report_text(report)
    )
    _emit(payload, args.out)
    if args.figure:
        from .figures import save_report_figure

        save_report_figure(report.to_dict(), args.figure)
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    session = load_session(args.infile)
    while not session.run.finished:
        session.step()
    _emit(_render_transcript(session.transcript_document(), args.format), args.out)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    serve(host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mitmlab",
        description="scripted man-in-the-middle drills for bank transactions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="print the built-in scenarios").set_defaults(fn=_cmd_list)

    run = sub.add_parser("run", help="run one scenario to completion")
    run.add_argument("--scenario", type=int, help="built-in scenario id (1..6)")
    run.add_argument("--scenario-file", help="path to a scenario JSON file (id >= 7)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--strategy", help="inject this attacker strategy at the interception point")
    run.add_argument("--format", choices=("json", "jsonl", "text"), default="text")
    run.add_argument("--out", help="write the transcript here instead of stdout")
    run.add_argument("--figure", help="also render the transcript as a figure (png/svg/pdf)")
    run.add_argument(
        "--expect-secure",
        action="store_true",
        help="exit 1 if a forged transaction executes",
    )
    run.set_defaults(fn=_cmd_run)

    an = sub.add_parser("analyze", help="verdicts for a defense set against strategies")
    an.add_argument("--config", required=True, help="defenses: e.g. none, hash, hash,enc, hash,enc,ca")
    an.add_argument(
        "--strategies",
        default=",".join(CORE_STRATEGY_NAMES),
        help="comma-separated strategy names (default: all five core strategies)",
    )
    an.add_argument("--seed", type=int, default=0)
    an.add_argument("--format", choices=("json", "text"), default="text")
    an.add_argument("--out", help="write the report here instead of stdout")
    an.add_argument("--figure", help="also render the report as a figure (png/svg/pdf)")
    an.set_defaults(fn=_cmd_analyze)

    rp = sub.add_parser("replay", help="resume a saved session and run it to the end")
    rp.add_argument("--in", dest="infile", required=True, help="saved session file")
    rp.add_argument("--format", choices=("json", "jsonl", "text"), default="json")
    rp.add_argument("--out", help="write the transcript here instead of stdout")
    rp.set_defaults(fn=_cmd_replay)

    sv = sub.add_parser("serve", help="run the localhost HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    sv.set_defaults(fn=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
