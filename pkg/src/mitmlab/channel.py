"""Principals, message envelopes, the tappable channel, and the transcript.

The cast is fixed: a user, a bank, an attacker sitting on the wire, and a
certificate authority off to the side.  Every observable action in a run
becomes one TranscriptEvent; the ordered event list is the contract that
the CLI, the analyzer, and the UI all consume, so its serialized form is
kept canonical (sorted keys, no whitespace).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Callable, Union

from .crypto import Ciphertext, Digest, SymmetricKey, decrypt


class ChannelError(Exception):
    """Base for misuse of the channel layer."""


class UnknownPrincipal(ChannelError):
    pass


class InterceptorAlreadyInstalled(ChannelError):
    pass


class Identity(enum.Enum):
    USER = "User"
    BANK = "Bank"
    ATTACKER = "Attacker"
    CA = "CertificateAuthority"


@dataclass
class Principal:
    identity: Identity
    credential: str | None = None
    key_store: dict[str, SymmetricKey] = field(default_factory=dict)


# --- message parts ----------------------------------------------------------


@dataclass(frozen=True)
class Plain:
    text: str


@dataclass(frozen=True)
class DigestPart:
    digest: Digest


@dataclass(frozen=True)
class Cipher:
    ciphertext: Ciphertext


@dataclass(frozen=True)
class KeyRequest:
    claimed_identity: Identity


@dataclass(frozen=True)
class KeyGrant:
    key: SymmetricKey


Part = Union[Plain, DigestPart, Cipher, KeyRequest, KeyGrant]


def part_to_dict(part: Part) -> dict:
    if isinstance(part, Plain):
        return {"kind": "plain", "text": part.text}
    if isinstance(part, DigestPart):
        return {"kind": "digest", "value": part.digest.hex}
    if isinstance(part, Cipher):
        return {"kind": "cipher", **part.ciphertext.to_dict()}
    if isinstance(part, KeyRequest):
        return {"kind": "key_request", "claimed_identity": part.claimed_identity.value}
    if isinstance(part, KeyGrant):
        return {"kind": "key_grant", **part.key.to_dict()}
    raise TypeError(f"not a message part: {part!r}")


def part_from_dict(doc: dict) -> Part:
    kind = doc.get("kind")
    if kind == "plain":
        return Plain(text=doc["text"])
    if kind == "digest":
        return DigestPart(digest=Digest.from_hex(doc["value"]))
    if kind == "cipher":
        return Cipher(ciphertext=Ciphertext.from_dict(doc))
    if kind == "key_request":
        return KeyRequest(claimed_identity=Identity(doc["claimed_identity"]))
    if kind == "key_grant":
        return KeyGrant(key=SymmetricKey.from_dict(doc))
    raise ValueError(f"unknown part kind: {kind!r}")


@dataclass(frozen=True)
class Envelope:
    seq: int
    sender: Identity
    recipient: Identity
    parts: tuple[Part, ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise ChannelError("envelope needs at least one part")

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "sender": self.sender.value,
            "recipient": self.recipient.value,
            "parts": [part_to_dict(p) for p in self.parts],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Envelope":
        return cls(
            seq=doc["seq"],
            sender=Identity(doc["sender"]),
            recipient=Identity(doc["recipient"]),
            parts=tuple(part_from_dict(p) for p in doc["parts"]),
        )


# --- transcript events ------------------------------------------------------


@dataclass(frozen=True)
class Sent:
    envelope: Envelope


@dataclass(frozen=True)
class Intercepted:
    before: Envelope
    after: Envelope
    strategy_name: str


@dataclass(frozen=True)
class Delivered:
    envelope: Envelope


@dataclass(frozen=True)
class Verified:
    detail: str
    seq: int


@dataclass(frozen=True)
class Rejected:
    reason: str
    seq: int


@dataclass(frozen=True)
class Executed:
    transaction_text: str
    seq: int


@dataclass(frozen=True)
class KeyIssued:
    to: Identity
    key_id: str
    seq: int | None = None


@dataclass(frozen=True)
class IdentityCheckFailed:
    claimed: Identity
    actual: Identity
    seq: int | None = None


TranscriptEvent = Union[
    Sent, Intercepted, Delivered, Verified, Rejected, Executed, KeyIssued, IdentityCheckFailed
]


def event_to_dict(event: TranscriptEvent) -> dict:
    if isinstance(event, Sent):
        return {"type": "Sent", "seq": event.envelope.seq, "envelope": event.envelope.to_dict()}
    if isinstance(event, Intercepted):
        return {
            "type": "Intercepted",
            "seq": event.before.seq,
            "strategy_name": event.strategy_name,
            "before": event.before.to_dict(),
            "after": event.after.to_dict(),
        }
    if isinstance(event, Delivered):
        return {
            "type": "Delivered",
            "seq": event.envelope.seq,
            "envelope": event.envelope.to_dict(),
        }
    if isinstance(event, Verified):
        return {"type": "Verified", "seq": event.seq, "detail": event.detail}
    if isinstance(event, Rejected):
        return {"type": "Rejected", "seq": event.seq, "reason": event.reason}
    if isinstance(event, Executed):
        return {"type": "Executed", "seq": event.seq, "transaction_text": event.transaction_text}
    if isinstance(event, KeyIssued):
        doc = {"type": "KeyIssued", "to": event.to.value, "key_id": event.key_id}
        if event.seq is not None:
            doc["seq"] = event.seq
        return doc
    if isinstance(event, IdentityCheckFailed):
        doc = {
            "type": "IdentityCheckFailed",
            "claimed": event.claimed.value,
            "actual": event.actual.value,
        }
        if event.seq is not None:
            doc["seq"] = event.seq
        return doc
    raise TypeError(f"not a transcript event: {event!r}")


def event_from_dict(doc: dict) -> TranscriptEvent:
    kind = doc.get("type")
    if kind == "Sent":
        return Sent(envelope=Envelope.from_dict(doc["envelope"]))
    if kind == "Intercepted":
        return Intercepted(
            before=Envelope.from_dict(doc["before"]),
            after=Envelope.from_dict(doc["after"]),
            strategy_name=doc["strategy_name"],
        )
    if kind == "Delivered":
        return Delivered(envelope=Envelope.from_dict(doc["envelope"]))
    if kind == "Verified":
        return Verified(detail=doc["detail"], seq=doc["seq"])
    if kind == "Rejected":
        return Rejected(reason=doc["reason"], seq=doc["seq"])
    if kind == "Executed":
        return Executed(transaction_text=doc["transaction_text"], seq=doc["seq"])
    if kind == "KeyIssued":
        return KeyIssued(to=Identity(doc["to"]), key_id=doc["key_id"], seq=doc.get("seq"))
    if kind == "IdentityCheckFailed":
        return IdentityCheckFailed(
            claimed=Identity(doc["claimed"]),
            actual=Identity(doc["actual"]),
            seq=doc.get("seq"),
        )
    raise ValueError(f"unknown event type: {kind!r}")


def canonical_json(doc) -> str:
    """The one true JSON form; byte-identical output is part of the contract."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


TRANSCRIPT_FORMAT = "bank-channel-transcript/1"


@dataclass
class Transcript:
    scenario_id: int
    seed: int
    events: list[TranscriptEvent] = field(default_factory=list)
    outcome: str | None = None
    strategy_override: str | None = None

    def to_document(self) -> dict:
        return {
            "format": TRANSCRIPT_FORMAT,
            "scenario_id": self.scenario_id,
            "seed": self.seed,
            "strategy_override": self.strategy_override,
            "events": [event_to_dict(e) for e in self.events],
            "outcome": self.outcome,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_document())

    def to_jsonl(self) -> str:
        return "\n".join(canonical_json(event_to_dict(e)) for e in self.events) + "\n"


# --- the wire ---------------------------------------------------------------


class Interceptor:
    """A live wiretap: a transform plus the name shown in the transcript."""

    def __init__(self, name_of: Callable[[], str], transform: Callable[[Envelope], Envelope]):
        self.name_of = name_of
        self.transform = transform


class Channel:
    """Transport between principals, with at most one wiretap installed.

    The channel only moves envelopes and logs what it saw; who verifies
    what is the caller's business.  `secure=True` models the CA's side
    channel: the interceptor never sees those sends.  Envelopes whose
    physical origin is the attacker also skip the tap, since the attacker
    does not intercept itself.
    """

    def __init__(self, principals: dict[Identity, Principal], emit: Callable[[TranscriptEvent], None]):
        self._principals = principals
        self._emit = emit
        self._interceptor: Interceptor | None = None
        self._next_seq = 1

    def install_interceptor(self, interceptor: Interceptor) -> None:
        if self._interceptor is not None:
            raise InterceptorAlreadyInstalled("the channel already has a wiretap")
        self._interceptor = interceptor

    def open_send(
        self,
        sender: Identity,
        recipient: Identity,
        parts: tuple[Part, ...],
        *,
        origin: Identity | None = None,
    ) -> Envelope:
        """Stamp an envelope and log Sent; transmission happens separately."""
        for who in (sender, recipient, origin):
            if who is not None and who not in self._principals:
                raise UnknownPrincipal(f"no such principal: {who}")
        envelope = Envelope(seq=self._next_seq, sender=sender, recipient=recipient, parts=tuple(parts))
        self._next_seq += 1
        self._emit(Sent(envelope=envelope))
        return envelope

    def transmit(
        self,
        envelope: Envelope,
        *,
        secure: bool = False,
        origin: Identity | None = None,
        destination: Identity | None = None,
    ) -> Envelope:
        """Move an opened envelope to whoever physically receives it.

        `destination` is where the bytes actually land when that differs
        from the named recipient (a reply to an impersonator).  The tap only
        sits between honest principals: the attacker does not intercept its
        own sends, nor traffic already addressed to it.
        """
        physical_to = destination if destination is not None else envelope.recipient
        tapped = (
            self._interceptor is not None
            and not secure
            and origin is not Identity.ATTACKER
            and physical_to is not Identity.ATTACKER
        )
        delivered = envelope
        if tapped:
            after = self._interceptor.transform(envelope)
            self._emit(Intercepted(before=envelope, after=after, strategy_name=self._interceptor.name_of()))
            delivered = after
        self._emit(Delivered(envelope=delivered))
        return delivered

    def send(
        self,
        sender: Identity,
        recipient: Identity,
        parts: tuple[Part, ...],
        *,
        secure: bool = False,
        origin: Identity | None = None,
        destination: Identity | None = None,
    ) -> Envelope:
        """Sent -> (Intercepted) -> Delivered, in order, in one call."""
        envelope = self.open_send(sender, recipient, parts, origin=origin)
        return self.transmit(envelope, secure=secure, origin=origin, destination=destination)


# --- what the attacker saw --------------------------------------------------


@dataclass(frozen=True)
class ObservationEntry:
    kind: str  # "part" | "recovered" | "skipped"
    seq: int | None
    part: Part | None = None
    text: str | None = None
    note: str | None = None


class AttackerObservations:
    """Everything the attacker read off the wire, frozen at observation time.

    Recovery is attempted exactly once, when a ciphertext is observed: only
    keys sitting in the attacker's key_store at that moment count.  Keys
    granted later never retroactively unlock old observations.
    """

    def __init__(self, attacker: Principal):
        self._attacker = attacker
        self.entries: list[ObservationEntry] = []

    def record_envelope(self, envelope: Envelope) -> None:
        for part in envelope.parts:
            self.entries.append(ObservationEntry(kind="part", seq=envelope.seq, part=part))
            if isinstance(part, KeyGrant):
                # Eavesdropped key material is as good as a granted key.
                self._attacker.key_store[part.key.key_id] = part.key
            if isinstance(part, Cipher):
                held = self._attacker.key_store.get(part.ciphertext.key_id)
                if held is not None:
                    text = decrypt(part.ciphertext, held).decode("utf-8", errors="replace")
                    self.entries.append(
                        ObservationEntry(
                            kind="recovered", seq=envelope.seq, text=text, note=held.key_id
                        )
                    )

    def note_skipped(self, seq: int, reason: str) -> None:
        self.entries.append(ObservationEntry(kind="skipped", seq=seq, note=reason))

    def view(self) -> list[Part]:
        """Observed parts plus any plaintext recovered with held keys."""
        out: list[Part] = []
        for entry in self.entries:
            if entry.kind == "part" and entry.part is not None:
                out.append(entry.part)
            elif entry.kind == "recovered" and entry.text is not None:
                out.append(Plain(text=entry.text))
        return out


def attacker_view(run) -> list[Part]:
    """The attacker's view of a run; see AttackerObservations.view."""
    return run.attacker_observations.view()


def view_as_text(parts: list[Part]) -> str:
    """Flatten a view for leak checks: every readable string the attacker has."""
    lines = []
    for part in parts:
        if isinstance(part, Plain):
            lines.append(part.text)
        elif isinstance(part, DigestPart):
            lines.append(f"digest:{part.digest.hex}")
        elif isinstance(part, Cipher):
            ct = part.ciphertext
            lines.append(f"cipher[{ct.key_id}]:{ct.nonce.hex()}:{ct.body.hex()}")
        elif isinstance(part, KeyRequest):
            lines.append(f"key_request:{part.claimed_identity.value}")
        elif isinstance(part, KeyGrant):
            lines.append(f"key_grant[{part.key.key_id}]:{part.key.material.hex()}")
    return "\n".join(lines)
