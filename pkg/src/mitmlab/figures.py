"""Matplotlib renderings of transcripts and property reports.

These exist so a run can leave a picture next to its JSON: a swimlane of
who sent what past whom, and a three-light panel for the analyzer.  Both
render from the serialized documents, never from live objects, so a saved
transcript draws the same picture later.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import FancyArrowPatch

_LANES = {"User": 3.0, "CertificateAuthority": 2.0, "Attacker": 1.0, "Bank": 0.0}
_LANE_LABELS = {"CertificateAuthority": "CA"}

_OUTCOME_COLORS = {
    "ExecutedGenuine": "#2e7d32",
    "AttackBlocked": "#2e7d32",
    "RejectedTampering": "#ef6c00",
    "ExecutedForged": "#c62828",
    None: "#616161",
}


def _part_blurb(part: dict) -> str:
    kind = part.get("kind")
    if kind == "plain":
        text = part["text"]
        return f'"{text[:24]}…"' if len(text) > 24 else f'"{text}"'
    if kind == "digest":
        return f"digest {part['value'][:8]}…"
    if kind == "cipher":
        return f"sealed[{part['key_id']}]"
    if kind == "key_request":
        return f"key request as {part['claimed_identity']}"
    if kind == "key_grant":
        return f"key grant [{part['key_id']}]"
    return kind or "?"


def save_transcript_figure(document: dict, path: str | Path) -> Path:
    """Draw a run as a swimlane timeline and write it to `path`."""
    events = document.get("events", [])
    outcome = document.get("outcome")
    width = max(8.0, 1.5 + 0.9 * len(events))
    fig, ax = plt.subplots(figsize=(width, 5.0))

    for name, y in _LANES.items():
        ax.axhline(y, color="#cfd8dc", linewidth=1, zorder=1)
        ax.text(
            -0.8, y, _LANE_LABELS.get(name, name),
            ha="right", va="center", fontsize=10, fontweight="bold",
        )

    for i, event in enumerate(events):
        etype = event["type"]
        if etype == "Sent":
            env = event["envelope"]
            y0, y1 = _LANES[env["sender"]], _LANES[env["recipient"]]
            arrow = FancyArrowPatch(
                (i, y0), (i + 0.6, y1),
                arrowstyle="-|>", mutation_scale=14, color="#1565c0", zorder=3,
            )
            ax.add_patch(arrow)
            blurb = ", ".join(_part_blurb(p) for p in env["parts"])
            ax.annotate(
                f"#{env['seq']} {blurb}", (i, y0), textcoords="offset points",
                xytext=(0, 10), fontsize=7, rotation=20,
            )
        elif etype == "Intercepted":
            tampered = event["before"] != event["after"]
            color = "#c62828" if tampered else "#f9a825"
            ax.plot([i], [_LANES["Attacker"]], marker="v", color=color, markersize=9, zorder=4)
            note = "tampered" if tampered else "read"
            ax.annotate(
                f"{event['strategy_name']} ({note})",
                (i, _LANES["Attacker"]), textcoords="offset points",
                xytext=(0, -16), fontsize=7, ha="center", color=color,
            )
        elif etype == "Delivered":
            env = event["envelope"]
            ax.plot([i], [_LANES[env["recipient"]]], marker="o", color="#1565c0", markersize=5, zorder=4)
        elif etype == "Verified":
            ax.plot([i], [_LANES["Bank"]], marker="P", color="#2e7d32", markersize=8, zorder=4)
        elif etype == "Rejected":
            ax.plot([i], [_LANES["Bank"]], marker="X", color="#c62828", markersize=9, zorder=4)
            ax.annotate(
                "rejected", (i, _LANES["Bank"]), textcoords="offset points",
                xytext=(0, -16), fontsize=7, ha="center", color="#c62828",
            )
        elif etype == "Executed":
            ax.plot([i], [_LANES["Bank"]], marker="s", color="#2e7d32", markersize=8, zorder=4)
            ax.annotate(
                f'"{event["transaction_text"]}"', (i, _LANES["Bank"]),
                textcoords="offset points", xytext=(0, 10), fontsize=7, ha="center", rotation=20,
            )
        elif etype == "KeyIssued":
            ax.plot([i], [_LANES[event["to"]]], marker="D", color="#6a1b9a", markersize=7, zorder=4)
            ax.annotate(
                f"key {event['key_id']} -> {_LANE_LABELS.get(event['to'], event['to'])}",
                (i, _LANES[event["to"]]), textcoords="offset points",
                xytext=(0, 10), fontsize=7, ha="center", color="#6a1b9a", rotation=20,
            )
        elif etype == "IdentityCheckFailed":
            ax.plot(
                [i], [_LANES["CertificateAuthority"]],
                marker="X", color="#c62828", markersize=9, zorder=4,
            )
            ax.annotate(
                f"identity check failed ({event['claimed']} != {event['actual']})",
                (i, _LANES["CertificateAuthority"]), textcoords="offset points",
                xytext=(0, -16), fontsize=7, ha="center", color="#c62828",
            )

    title = f"scenario {document.get('scenario_id')} seed {document.get('seed')}"
    ax.set_title(f"{title}\noutcome: {outcome or 'in progress'}",
                 color=_OUTCOME_COLORS.get(outcome, "#616161"))
    ax.set_xlim(-1.2, max(4.0, len(events)))
    ax.set_ylim(-1.0, 4.0)
    ax.set_yticks([])
    ax.set_xlabel("transcript step")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_report_figure(report: dict, path: str | Path) -> Path:
    """Draw a property report as a three-light panel and write it to `path`."""
    properties = report.get("properties", {})
    names = list(properties)
    fig, ax = plt.subplots(figsize=(7.5, 0.9 * max(3, len(names)) + 1.2))
    for row, name in enumerate(names):
        entry = properties[name]
        violated = entry.get("verdict") == "violated"
        color = "#c62828" if violated else "#2e7d32"
        y = len(names) - 1 - row
        ax.barh(y, 1.0, height=0.62, color=color, alpha=0.85)
        label = entry.get("verdict", "?")
        witness = entry.get("witness")
        if witness:
            label += f"  (witness: {witness['strategy']}, seed {witness['seed']})"
        ax.text(0.02, y, f"{name}: {label}", va="center", fontsize=10, color="white")
    defenses = report.get("config", {})
    on = [k for k, v in defenses.items() if v] or ["no defenses"]
    strategies = ", ".join(report.get("strategies", []))
    ax.set_title(f"defenses: {', '.join(on)}\nstrategies: {strategies}", fontsize=10)
    ax.set_xlim(0, 1)
    ax.set_ylim(-0.6, len(names) - 0.4)
    ax.axis("off")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
