"""Scenario definitions: which defenses are on, which attack runs, what then.

The six built-ins walk the classic ladder: no protection, integrity hash,
hash forgery, symmetric encryption, key theft by impersonation, and a
certificate authority closing the impersonation hole.  User-supplied
scenario files (ids 7 and up) reuse the same shape.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

from .strategies import REGISTRY

BUNDLE_SEPARATOR = "|"  # joins message and digest hex inside a sealed bundle

DEFAULT_MESSAGE = "Send $100 to Alice"
DEFAULT_SUBSTITUTION = ("$100", "$1000")
FORGED_MESSAGE = "Send $9999 to Attacker"

USER_SCENARIO_MIN_ID = 7


class ScenarioError(Exception):
    pass


class UnknownScenario(ScenarioError):
    pass


class InvalidConfig(ScenarioError):
    """A defense combination that makes no sense (a CA with nothing to key)."""


class ParseError(ScenarioError):
    """A scenario file that could not be understood; says where and why."""


class Outcome(enum.Enum):
    EXECUTED_GENUINE = "ExecutedGenuine"
    EXECUTED_FORGED = "ExecutedForged"
    REJECTED_TAMPERING = "RejectedTampering"
    ATTACK_BLOCKED = "AttackBlocked"


@dataclass(frozen=True)
class ProtectionConfig:
    integrity_hash: bool = False
    confidentiality_encryption: bool = False
    ca_authentication: bool = False

    def __post_init__(self) -> None:
        if self.ca_authentication and not self.confidentiality_encryption:
            raise InvalidConfig(
                "ca_authentication without confidentiality_encryption: "
                "the CA exists to distribute the encryption key"
            )

    def to_dict(self) -> dict:
        return {
            "integrity_hash": self.integrity_hash,
            "confidentiality_encryption": self.confidentiality_encryption,
            "ca_authentication": self.ca_authentication,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ProtectionConfig":
        return cls(
            integrity_hash=bool(doc.get("integrity_hash", False)),
            confidentiality_encryption=bool(doc.get("confidentiality_encryption", False)),
            ca_authentication=bool(doc.get("ca_authentication", False)),
        )

    def label(self) -> str:
        names = []
        if self.integrity_hash:
            names.append("hash")
        if self.confidentiality_encryption:
            names.append("enc")
        if self.ca_authentication:
            names.append("ca")
        return "+".join(names) if names else "none"

    @classmethod
    def from_label(cls, label: str) -> "ProtectionConfig":
        """Parse the CLI form: comma- or plus-separated defense names, or 'none'."""
        cleaned = label.strip().lower()
        if cleaned in ("", "none"):
            return cls()
        flags = {"hash": False, "enc": False, "ca": False}
        for token in cleaned.replace("+", ",").split(","):
            token = token.strip()
            if token not in flags:
                raise InvalidConfig(f"unknown defense {token!r}; expected hash, enc, ca, or none")
            flags[token] = True
        return cls(
            integrity_hash=flags["hash"],
            confidentiality_encryption=flags["enc"],
            ca_authentication=flags["ca"],
        )


def valid_configs() -> list[ProtectionConfig]:
    """Every defense combination the invariant allows, weakest first."""
    out = []
    for h in (False, True):
        for e in (False, True):
            for c in (False, True):
                if c and not e:
                    continue
                out.append(
                    ProtectionConfig(
                        integrity_hash=h, confidentiality_encryption=e, ca_authentication=c
                    )
                )
    return out


@dataclass(frozen=True)
class Scenario:
    id: int
    title: str
    config: ProtectionConfig
    strategy: str
    message_text: str = DEFAULT_MESSAGE
    substitution: tuple[str, str] = DEFAULT_SUBSTITUTION
    expected_outcome: Outcome | None = None

    def __post_init__(self) -> None:
        if BUNDLE_SEPARATOR in self.message_text:
            raise ScenarioError(
                f"message text may not contain {BUNDLE_SEPARATOR!r}; "
                "it separates message and digest inside sealed bundles"
            )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "config": self.config.to_dict(),
            "strategy": self.strategy,
            "message_text": self.message_text,
            "substitution": list(self.substitution),
            "expected_outcome": self.expected_outcome.value if self.expected_outcome else None,
        }


def _scenario(
    id: int, title: str, config: ProtectionConfig, strategy: str, expected: Outcome
) -> Scenario:
    return Scenario(id=id, title=title, config=config, strategy=strategy, expected_outcome=expected)


BUILTIN_SCENARIOS: dict[int, Scenario] = {
    s.id: s
    for s in (
        _scenario(
            1,
            "Unprotected transaction",
            ProtectionConfig(),
            "modify_message",
            Outcome.EXECUTED_FORGED,
        ),
        _scenario(
            2,
            "Integrity hash",
            ProtectionConfig(integrity_hash=True),
            "modify_message",
            Outcome.REJECTED_TAMPERING,
        ),
        _scenario(
            3,
            "Hash forgery",
            ProtectionConfig(integrity_hash=True),
            "modify_message_and_hash",
            Outcome.EXECUTED_FORGED,
        ),
        _scenario(
            4,
            "Symmetric encryption",
            ProtectionConfig(integrity_hash=True, confidentiality_encryption=True),
            "modify_message",
            Outcome.EXECUTED_GENUINE,
        ),
        _scenario(
            5,
            "Key theft by impersonation",
            ProtectionConfig(integrity_hash=True, confidentiality_encryption=True),
            "impersonate_steal_key",
            Outcome.EXECUTED_FORGED,
        ),
        _scenario(
            6,
            "CA-authenticated key exchange",
            ProtectionConfig(
                integrity_hash=True, confidentiality_encryption=True, ca_authentication=True
            ),
            "impersonate_vs_ca",
            Outcome.ATTACK_BLOCKED,
        ),
    )
}


def get_scenario(scenario_id: int) -> Scenario:
    try:
        return BUILTIN_SCENARIOS[scenario_id]
    except KeyError:
        raise UnknownScenario(
            f"no built-in scenario {scenario_id}; built-ins are 1..6"
        ) from None


def list_scenarios() -> list[dict]:
    return [BUILTIN_SCENARIOS[i].to_dict() for i in sorted(BUILTIN_SCENARIOS)]


# --- scenario files ---------------------------------------------------------
#
# A scenario file is a JSON object with exactly the fields of Scenario:
#
#   {
#     "id": 7,
#     "title": "my drill",
#     "config": {"integrity_hash": true,
#                "confidentiality_encryption": false,
#                "ca_authentication": false},
#     "strategy": "modify_message",
#     "message_text": "Send $100 to Alice",
#     "substitution": ["$100", "$1000"],
#     "expected_outcome": "RejectedTampering"
#   }


def _field(doc: dict, name: str, kind: type, *, where: str):
    if name not in doc:
        raise ParseError(f"{where}: missing required field {name!r}")
    value = doc[name]
    if kind is int and isinstance(value, bool):
        raise ParseError(f"{where}: field {name!r} must be an integer")
    if not isinstance(value, kind):
        raise ParseError(f"{where}: field {name!r} must be {kind.__name__}, got {type(value).__name__}")
    return value


def scenario_from_dict(doc: dict, *, where: str = "scenario", allow_builtin_id: bool = False) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected a JSON object at the top level")
    sid = _field(doc, "id", int, where=where)
    if not allow_builtin_id and sid < USER_SCENARIO_MIN_ID:
        raise ParseError(
            f"{where}: field 'id' must be >= {USER_SCENARIO_MIN_ID}; "
            "ids 1..6 are reserved for the built-ins"
        )
    title = _field(doc, "title", str, where=where)
    config_doc = _field(doc, "config", dict, where=where)
    try:
        config = ProtectionConfig.from_dict(config_doc)
    except InvalidConfig as exc:
        raise ParseError(f"{where}: field 'config' is invalid: {exc}") from None
    strategy = _field(doc, "strategy", str, where=where)
    if strategy not in REGISTRY:
        raise ParseError(
            f"{where}: field 'strategy' names {strategy!r}, which is not registered; "
            f"known: {', '.join(sorted(REGISTRY))}"
        )
    message_text = _field(doc, "message_text", str, where=where)
    substitution = _field(doc, "substitution", list, where=where)
    if len(substitution) != 2 or not all(isinstance(s, str) for s in substitution):
        raise ParseError(f"{where}: field 'substitution' must be a pair of strings")
    raw_expected = doc.get("expected_outcome")
    expected: Outcome | None = None
    if raw_expected is not None:
        try:
            expected = Outcome(raw_expected)
        except ValueError:
            raise ParseError(
                f"{where}: field 'expected_outcome' must be one of "
                f"{', '.join(o.value for o in Outcome)}"
            ) from None
    try:
        return Scenario(
            id=sid,
            title=title,
            config=config,
            strategy=strategy,
            message_text=message_text,
            substitution=(substitution[0], substitution[1]),
            expected_outcome=expected,
        )
    except ScenarioError as exc:
        raise ParseError(f"{where}: {exc}") from None


def load_scenario_file(path: str | Path) -> Scenario:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(doc, where=str(path))
