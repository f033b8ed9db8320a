"""The attacker's playbook.

Each strategy is a pure transform on an in-flight envelope, plus an
optional out-of-band move (talking the bank or the CA into handing over a
key) that runs before the envelope ever reaches the tap.  Strategy names
are stable identifiers used by the CLI, the service, scenario files, and
the UI; rename them and you break saved sessions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace as dc_replace
from typing import Callable, Optional

from .channel import Cipher, DigestPart, Envelope, Plain
from .crypto import Ciphertext, hash_text


class UnknownStrategy(Exception):
    pass


@dataclass(frozen=True)
class AttackerStrategy:
    name: str
    summary: str
    transform: Callable[[Envelope, "object"], Envelope]
    out_of_band: Optional[Callable[["object"], None]] = None


def _rewrite_plain(envelope: Envelope, run) -> tuple[Envelope, str | None]:
    """Apply the scenario's substitution to Plain parts.

    Returns the rewritten envelope and the text of the first rewritten
    Plain part, or (unchanged, None) when there is nothing readable to
    rewrite -- in which case a Skipped entry lands in the observation log.
    """
    old, new = run.substitution
    if not any(isinstance(p, Plain) for p in envelope.parts):
        run.attacker_observations.note_skipped(
            envelope.seq, "no readable text to tamper with; forwarded unchanged"
        )
        return envelope, None
    rewritten: list = []
    first_text: str | None = None
    for part in envelope.parts:
        if isinstance(part, Plain):
            part = Plain(text=part.text.replace(old, new))
            if first_text is None:
                first_text = part.text
        rewritten.append(part)
    return dc_replace(envelope, parts=tuple(rewritten)), first_text


def _passive_transform(envelope: Envelope, run) -> Envelope:
    return envelope


def _modify_message(envelope: Envelope, run) -> Envelope:
    out, _ = _rewrite_plain(envelope, run)
    return out


def _modify_message_and_hash(envelope: Envelope, run) -> Envelope:
    if not any(isinstance(p, DigestPart) for p in envelope.parts):
        # Nothing to forge; behave like the plain tamperer.
        return _modify_message(envelope, run)
    out, new_text = _rewrite_plain(envelope, run)
    if new_text is None:
        return out
    forged = hash_text(new_text)
    parts = tuple(DigestPart(digest=forged) if isinstance(p, DigestPart) else p for p in out.parts)
    return dc_replace(out, parts=parts)


def _flip_ciphertext(envelope: Envelope, run) -> Envelope:
    """Blind bit-flip: corrupt the first ciphertext byte without reading it."""
    if not any(isinstance(p, Cipher) for p in envelope.parts):
        run.attacker_observations.note_skipped(
            envelope.seq, "no ciphertext to corrupt; forwarded unchanged"
        )
        return envelope
    flipped: list = []
    done = False
    for part in envelope.parts:
        if isinstance(part, Cipher) and not done and part.ciphertext.body:
            ct = part.ciphertext
            body = bytes([ct.body[0] ^ 0x01]) + ct.body[1:]
            part = Cipher(ciphertext=Ciphertext(nonce=ct.nonce, body=body, key_id=ct.key_id))
            done = True
        flipped.append(part)
    return dc_replace(envelope, parts=tuple(flipped))


def _steal_key_oob(run) -> None:
    run.impersonation_attack(via_ca=False)


def _defeated_by_ca_oob(run) -> None:
    run.impersonation_attack(via_ca=True)


PASSIVE_READ = AttackerStrategy(
    name="passive_read",
    summary="read everything off the wire, change nothing",
    transform=_passive_transform,
)

MODIFY_MESSAGE = AttackerStrategy(
    name="modify_message",
    summary="rewrite the transaction text, leave any digest alone",
    transform=_modify_message,
)

MODIFY_MESSAGE_AND_HASH = AttackerStrategy(
    name="modify_message_and_hash",
    summary="rewrite the text and recompute the digest to match",
    transform=_modify_message_and_hash,
)

IMPERSONATE_STEAL_KEY = AttackerStrategy(
    name="impersonate_steal_key",
    summary="claim to be the user, get the key handed over, forge a transaction",
    transform=_modify_message,
    out_of_band=_steal_key_oob,
)

IMPERSONATE_VS_CA = AttackerStrategy(
    name="impersonate_vs_ca",
    summary="try the same impersonation against a certificate authority",
    transform=_modify_message,
    out_of_band=_defeated_by_ca_oob,
)

FLIP_CIPHERTEXT = AttackerStrategy(
    name="flip_ciphertext",
    summary="corrupt one ciphertext byte without reading it",
    transform=_flip_ciphertext,
)

# The canonical five drive the scenario scripts and the analyzer sweep;
# flip_ciphertext is an extra probe for the malleability demo.
CORE_STRATEGIES = (
    PASSIVE_READ,
    MODIFY_MESSAGE,
    MODIFY_MESSAGE_AND_HASH,
    IMPERSONATE_STEAL_KEY,
    IMPERSONATE_VS_CA,
)

REGISTRY: dict[str, AttackerStrategy] = {
    s.name: s for s in (*CORE_STRATEGIES, FLIP_CIPHERTEXT)
}

CORE_STRATEGY_NAMES = tuple(s.name for s in CORE_STRATEGIES)


def get_strategy(name: str) -> AttackerStrategy:
    try:
        return REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise UnknownStrategy(f"unknown strategy {name!r}; known: {known}") from None
