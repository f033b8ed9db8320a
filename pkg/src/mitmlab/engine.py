"""The run machine: one scenario, one seed, one deterministic transcript.

A run walks fixed phases: key setup, the scripted attacker's out-of-band
move, the user's send, transmission through the tap, bank verification.
Events queue up inside a phase and are handed out one per step, so the
same machine serves batch runs, the interactive service, and saved
sessions; all three produce byte-identical transcripts for a given
(scenario, seed, choices).

Between the user's Sent event and transmission the machine pauses at the
interception point, where a different attacker strategy may be injected.
If the injected strategy has an out-of-band move it happens right there,
mid-run; events already emitted are history and stay put.
"""

from __future__ import annotations

import json
import struct
import uuid
from collections import deque
from pathlib import Path

from . import crypto
from .channel import (
    AttackerObservations,
    Channel,
    Cipher,
    DigestPart,
    Envelope,
    Executed,
    Identity,
    IdentityCheckFailed,
    Intercepted,
    Interceptor,
    KeyGrant,
    KeyIssued,
    KeyRequest,
    Part,
    Plain,
    Principal,
    Rejected,
    Sent,
    Transcript,
    TranscriptEvent,
    Verified,
    canonical_json,
    event_to_dict,
)
from .scenarios import (
    BUNDLE_SEPARATOR,
    FORGED_MESSAGE,
    Outcome,
    ProtectionConfig,
    Scenario,
    ScenarioError,
    get_scenario,
    scenario_from_dict,
)
from .strategies import AttackerStrategy, get_strategy

TRANSACTION_KEY_ID = "K"
CA_KEY_ID = "K_UB"
ATTACKER_KEY_ID = "K_ATT"

SESSION_FORMAT = "bank-channel-session/1"


class EngineError(Exception):
    pass


class MissingKey(EngineError):
    pass


class SessionFinished(EngineError):
    pass


class NotAtInterceptionPoint(EngineError):
    pass


class CorruptSessionFile(EngineError):
    pass


def build_transaction_parts(
    config: ProtectionConfig,
    text: str,
    *,
    key: crypto.SymmetricKey | None = None,
    seal=None,
) -> tuple[Part, ...]:
    """Envelope body for a transaction under a given defense set.

    No defenses: just the text.  Hash: text plus its digest, in the clear.
    Encryption: one sealed part; with the hash also on, the sealed bytes
    are "text|digesthex" so the bank can check integrity after opening.
    """
    if config.confidentiality_encryption:
        if key is None:
            raise MissingKey("this defense set seals the transaction, but no key is shared")
        if config.integrity_hash:
            bundle = f"{text}{BUNDLE_SEPARATOR}{crypto.hash_text(text).hex}"
        else:
            bundle = text
        return (Cipher(ciphertext=seal(bundle.encode("utf-8"), key)),)
    if config.integrity_hash:
        return (Plain(text=text), DigestPart(digest=crypto.hash_text(text)))
    return (Plain(text=text),)


def _credential(seed: int, identity: Identity) -> str:
    token = crypto.hash_bytes(
        struct.pack(">Q", seed) + b"/credential/" + identity.value.encode("utf-8")
    )
    return token.hex[:16]


class ScenarioRun:
    """One deterministic execution, steppable one transcript event at a time."""

    _PHASES = ("setup", "oob", "send", "transmit", "verify")

    def __init__(self, scenario: Scenario, seed: int):
        self.scenario = scenario
        self.seed = seed
        self.ledger = crypto.CipherLedger()
        self.keyring: dict[str, crypto.SymmetricKey] = {}
        self._nonce_counter = 0
        self.principals = {
            Identity.USER: Principal(Identity.USER, credential=_credential(seed, Identity.USER)),
            Identity.BANK: Principal(Identity.BANK, credential=_credential(seed, Identity.BANK)),
            Identity.ATTACKER: Principal(Identity.ATTACKER, credential=None),
            Identity.CA: Principal(Identity.CA),
        }
        self.attacker_observations = AttackerObservations(self.principals[Identity.ATTACKER])
        self.transcript = Transcript(scenario_id=scenario.id, seed=seed)
        self._pending: deque[TranscriptEvent] = deque()
        self._all_events: list[TranscriptEvent] = []
        self.channel = Channel(self.principals, emit=self._emit)
        self._phases = deque(self._PHASES)
        self.strategy_override: str | None = None
        self._override_oob_done = False
        self._in_transit: Envelope | None = None
        self._delivered: Envelope | None = None
        self._outcome: Outcome | None = None

    # --- stepping ---------------------------------------------------------

    @property
    def cursor(self) -> int:
        return len(self.transcript.events)

    @property
    def finished(self) -> bool:
        return not self._phases and not self._pending

    @property
    def at_interception_point(self) -> bool:
        return not self._pending and bool(self._phases) and self._phases[0] == "transmit"

    @property
    def outcome(self) -> Outcome | None:
        return self._outcome if self.finished else None

    @property
    def substitution(self) -> tuple[str, str]:
        return self.scenario.substitution

    @property
    def active_strategy(self) -> AttackerStrategy:
        return get_strategy(self.strategy_override or self.scenario.strategy)

    def _emit(self, event: TranscriptEvent) -> None:
        self._pending.append(event)
        self._all_events.append(event)

    def next_event(self) -> TranscriptEvent:
        if self.finished:
            raise SessionFinished("the run has no more events")
        while not self._pending and self._phases:
            phase = self._phases.popleft()
            getattr(self, f"_phase_{phase}")()
        if not self._pending:  # the verify phase always emits, so this is a bug trap
            raise EngineError("run ended without a verdict event")
        event = self._pending.popleft()
        self.transcript.events.append(event)
        if self.finished and self._outcome is not None:
            self.transcript.outcome = self._outcome.value
        return event

    def inject(self, strategy_name: str) -> None:
        """Swap the attacker's plan at the pause between Sent and delivery."""
        strategy = get_strategy(strategy_name)
        if not self.at_interception_point:
            raise NotAtInterceptionPoint(
                "a different strategy can only be chosen while the envelope is in flight"
            )
        self.strategy_override = strategy.name
        self.transcript.strategy_override = strategy.name

    def run_to_completion(self) -> tuple[Transcript, Outcome]:
        while not self.finished:
            self.next_event()
        assert self._outcome is not None
        return self.transcript, self._outcome

    def attacker_view(self) -> list[Part]:
        return self.attacker_observations.view()

    @property
    def main_seq(self) -> int | None:
        return self._in_transit.seq if self._in_transit is not None else None

    # --- crypto plumbing ----------------------------------------------------

    def fresh_nonce(self) -> bytes:
        nonce = crypto.derive_nonce(self.seed, self._nonce_counter)
        self._nonce_counter += 1
        return nonce

    def seal(self, data: bytes, key: crypto.SymmetricKey) -> crypto.Ciphertext:
        return crypto.encrypt(data, key, self.fresh_nonce(), self.ledger)

    def _register_key(self, key: crypto.SymmetricKey) -> None:
        existing = self.keyring.get(key.key_id)
        if existing is not None and existing != key:
            raise EngineError(f"key id {key.key_id!r} already registered with other material")
        self.keyring[key.key_id] = key

    def _transaction_key_id(self) -> str:
        return CA_KEY_ID if self.scenario.config.ca_authentication else TRANSACTION_KEY_ID

    def _user_key(self) -> crypto.SymmetricKey | None:
        if not self.scenario.config.confidentiality_encryption:
            return None
        return self.keyring.get(self._transaction_key_id())

    def _bank_key(self) -> crypto.SymmetricKey:
        key = self.principals[Identity.BANK].key_store.get(self._transaction_key_id())
        if key is None:
            raise MissingKey("the bank holds no key for this defense set")
        return key

    # --- phases -------------------------------------------------------------

    def _phase_setup(self) -> None:
        config = self.scenario.config
        if not config.confidentiality_encryption:
            return
        if config.ca_authentication:
            key = crypto.derive_key(self.seed, CA_KEY_ID)
            self._register_key(key)
            for identity in (Identity.USER, Identity.BANK):
                self._ca_enroll(identity, key)
        else:
            key = crypto.derive_key(self.seed, TRANSACTION_KEY_ID)
            self._register_key(key)
            for identity in (Identity.USER, Identity.BANK):
                self.principals[identity].key_store[key.key_id] = key
                self._emit(KeyIssued(to=identity, key_id=key.key_id))

    def _ca_check(self, claimed: Identity, requester: Identity) -> bool:
        presented = self.principals[requester].credential
        expected = self.principals[claimed].credential
        return presented is not None and presented == expected

    def _ca_enroll(self, identity: Identity, key: crypto.SymmetricKey) -> None:
        request = self.channel.send(
            identity, Identity.CA, (KeyRequest(claimed_identity=identity),), secure=True
        )
        assert self._ca_check(identity, identity)
        self._emit(
            Verified(
                detail=f"certificate authority confirmed the credential of {identity.value}",
                seq=request.seq,
            )
        )
        grant = self.channel.send(
            Identity.CA, identity, (KeyGrant(key=key),), secure=True
        )
        self.principals[identity].key_store[key.key_id] = key
        self._emit(KeyIssued(to=identity, key_id=key.key_id, seq=grant.seq))

    def _phase_oob(self) -> None:
        scripted = get_strategy(self.scenario.strategy)
        if scripted.out_of_band is not None:
            scripted.out_of_band(self)

    def _phase_send(self) -> None:
        self.channel.install_interceptor(
            Interceptor(name_of=lambda: self.active_strategy.name, transform=self._intercept)
        )
        parts = build_transaction_parts(
            self.scenario.config,
            self.scenario.message_text,
            key=self._user_key(),
            seal=self.seal,
        )
        self._in_transit = self.channel.open_send(Identity.USER, Identity.BANK, parts)

    def _phase_transmit(self) -> None:
        if self.strategy_override is not None:
            injected = get_strategy(self.strategy_override)
            if injected.out_of_band is not None and not self._override_oob_done:
                self._override_oob_done = True
                injected.out_of_band(self)
        assert self._in_transit is not None
        self._delivered = self.channel.transmit(self._in_transit, origin=Identity.USER)

    def _phase_verify(self) -> None:
        assert self._delivered is not None
        self.bank_verify(self._delivered)
        self._finalize_outcome()

    def _intercept(self, envelope: Envelope) -> Envelope:
        self.attacker_observations.record_envelope(envelope)
        return self.active_strategy.transform(envelope, self)

    # --- the attacker's out-of-band move -------------------------------------

    def impersonation_attack(self, *, via_ca: bool) -> None:
        """Claim to be the user, try to get a key, then forge a transaction.

        Who gets petitioned depends on the run: a CA-verified run routes all
        key requests through the CA (which checks credentials and turns the
        attacker away); otherwise the bank is the key authority and, when
        asked while encryption is in play, hands the key to anyone.  The
        forgery is then shaped like a genuine envelope for this defense set,
        sealed with the stolen key if the theft worked, or a made-up one.
        """
        config = self.scenario.config
        attacker = self.principals[Identity.ATTACKER]
        stolen: crypto.SymmetricKey | None = None
        if config.confidentiality_encryption:
            target = Identity.CA if (via_ca or config.ca_authentication) else Identity.BANK
            request = self.channel.send(
                Identity.USER,
                target,
                (KeyRequest(claimed_identity=Identity.USER),),
                origin=Identity.ATTACKER,
                secure=target is Identity.CA,
            )
            if target is Identity.CA or config.ca_authentication:
                self._emit(
                    IdentityCheckFailed(
                        claimed=Identity.USER, actual=Identity.ATTACKER, seq=request.seq
                    )
                )
            else:
                key = self._bank_key()
                grant = self.channel.send(
                    Identity.BANK,
                    Identity.USER,
                    (KeyGrant(key=key),),
                    origin=Identity.BANK,
                    destination=Identity.ATTACKER,
                )
                attacker.key_store[key.key_id] = key
                self._emit(KeyIssued(to=Identity.ATTACKER, key_id=key.key_id, seq=grant.seq))
                stolen = key
        forgery_key: crypto.SymmetricKey | None = None
        if config.confidentiality_encryption:
            forgery_key = stolen or crypto.derive_key(self.seed, ATTACKER_KEY_ID)
        parts = build_transaction_parts(config, FORGED_MESSAGE, key=forgery_key, seal=self.seal)
        forged = self.channel.send(
            Identity.USER, Identity.BANK, parts, origin=Identity.ATTACKER
        )
        self.bank_verify(forged)

    # --- bank verification ----------------------------------------------------

    def bank_verify(self, envelope: Envelope) -> None:
        """Apply the defense set to a delivered envelope and emit the verdict."""
        config = self.scenario.config
        seq = envelope.seq
        parts = envelope.parts
        if config.confidentiality_encryption:
            if len(parts) != 1 or not isinstance(parts[0], Cipher):
                self._emit(
                    Rejected(reason="malformed envelope: expected exactly one sealed part", seq=seq)
                )
                return
            raw = crypto.decrypt(parts[0].ciphertext, self._bank_key(), self.ledger)
            text = raw.decode("utf-8", errors="replace")
            if not config.integrity_hash:
                self._emit(Executed(transaction_text=text, seq=seq))
                return
            if BUNDLE_SEPARATOR not in text:
                self._emit(
                    Rejected(
                        reason="sealed bundle did not open to message|digest form", seq=seq
                    )
                )
                return
            message, digest_hex = text.rsplit(BUNDLE_SEPARATOR, 1)
            recomputed = crypto.hash_text(message)
            if recomputed.hex != digest_hex:
                self._emit(
                    Rejected(
                        reason=(
                            f"hash mismatch: recomputed {recomputed.hex}, "
                            f"bundle carried {digest_hex}"
                        ),
                        seq=seq,
                    )
                )
                return
            self._emit(Verified(detail="recomputed hash matches the sealed digest", seq=seq))
            self._emit(Executed(transaction_text=message, seq=seq))
            return
        if config.integrity_hash:
            if (
                len(parts) != 2
                or not isinstance(parts[0], Plain)
                or not isinstance(parts[1], DigestPart)
            ):
                self._emit(
                    Rejected(reason="malformed envelope: expected text plus digest", seq=seq)
                )
                return
            recomputed = crypto.hash_text(parts[0].text)
            if recomputed != parts[1].digest:
                self._emit(
                    Rejected(
                        reason=(
                            f"hash mismatch: recomputed {recomputed.hex}, "
                            f"envelope carried {parts[1].digest.hex}"
                        ),
                        seq=seq,
                    )
                )
                return
            self._emit(Verified(detail="recomputed hash matches the attached digest", seq=seq))
            self._emit(Executed(transaction_text=parts[0].text, seq=seq))
            return
        if len(parts) != 1 or not isinstance(parts[0], Plain):
            self._emit(Rejected(reason="malformed envelope: expected a single text part", seq=seq))
            return
        self._emit(Executed(transaction_text=parts[0].text, seq=seq))

    # --- outcome ---------------------------------------------------------------

    def _finalize_outcome(self) -> None:
        genuine = self.scenario.message_text
        events = self._all_events
        main_seq = self.main_seq
        forged_executed = any(
            isinstance(e, Executed) and e.transaction_text != genuine for e in events
        )
        main_rejected = any(isinstance(e, Rejected) and e.seq == main_seq for e in events)
        attack_failed = any(isinstance(e, (IdentityCheckFailed, Rejected)) for e in events)
        if forged_executed:
            self._outcome = Outcome.EXECUTED_FORGED
        elif main_rejected:
            self._outcome = Outcome.REJECTED_TAMPERING
        elif attack_failed:
            self._outcome = Outcome.ATTACK_BLOCKED
        else:
            self._outcome = Outcome.EXECUTED_GENUINE


def run_scenario(scenario: int | Scenario, seed: int) -> tuple[Transcript, Outcome]:
    """Run a built-in (by id) or loaded scenario to completion in one call."""
    spec = get_scenario(scenario) if isinstance(scenario, int) else scenario
    return ScenarioRun(spec, seed).run_to_completion()


def run_scenario_with_injection(
    scenario: int | Scenario, seed: int, strategy_name: str | None
) -> tuple[Transcript, Outcome]:
    """Batch equivalent of an interactive run that picks `strategy_name`.

    The override is injected at the interception point, exactly where a
    live session would do it, so the transcript matches a stepped session
    byte for byte.
    """
    spec = get_scenario(scenario) if isinstance(scenario, int) else scenario
    run = ScenarioRun(spec, seed)
    if strategy_name is None:
        return run.run_to_completion()
    while not run.at_interception_point:
        run.next_event()
    run.inject(strategy_name)
    return run.run_to_completion()


# --- sessions ---------------------------------------------------------------


class Session:
    """A steppable run with an id, for the service and for saved files."""

    def __init__(self, scenario: Scenario, seed: int, session_id: str | None = None):
        self.session_id = session_id or uuid.uuid4().hex[:12]
        self.run = ScenarioRun(scenario, seed)

    def step(self) -> TranscriptEvent:
        return self.run.next_event()

    def inject(self, strategy_name: str) -> None:
        self.run.inject(strategy_name)

    def state(self) -> dict:
        return {
            "session_id": self.session_id,
            "scenario_id": self.run.scenario.id,
            "seed": self.run.seed,
            "cursor": self.run.cursor,
            "pending_choice": self.run.at_interception_point,
            "finished": self.run.finished,
            "strategy_override": self.run.strategy_override,
            "outcome": self.run.outcome.value if self.run.finished else None,
        }

    def transcript_document(self) -> dict:
        return self.run.transcript.to_document()


def save_session(session: Session, path: str | Path) -> None:
    run = session.run
    doc = {
        "format": SESSION_FORMAT,
        "session_id": session.session_id,
        "scenario": run.scenario.to_dict(),
        "seed": run.seed,
        "strategy_override": run.strategy_override,
        "cursor": run.cursor,
        "events": [event_to_dict(e) for e in run.transcript.events],
    }
    Path(path).write_text(canonical_json(doc) + "\n", encoding="utf-8")


def load_session(path: str | Path) -> Session:
    """Rebuild a saved session by replaying it up to its cursor.

    The stored event prefix is checked against the replay; any divergence
    (truncation, editing, version skew) comes back as CorruptSessionFile.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError, OSError) as exc:
        raise CorruptSessionFile(f"{path}: not a readable session file: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != SESSION_FORMAT:
        raise CorruptSessionFile(f"{path}: expected a {SESSION_FORMAT} document")
    try:
        scenario = scenario_from_dict(doc["scenario"], where=str(path), allow_builtin_id=True)
        seed = doc["seed"]
        cursor = doc["cursor"]
        events = doc["events"]
        override = doc.get("strategy_override")
        session_id = doc["session_id"]
    except (KeyError, ScenarioError) as exc:
        raise CorruptSessionFile(f"{path}: {exc}") from None
    if not isinstance(cursor, int) or not isinstance(events, list) or cursor != len(events):
        raise CorruptSessionFile(f"{path}: cursor and stored events disagree")
    session = Session(scenario, seed, session_id=session_id)
    for i, saved in enumerate(events):
        if (
            override is not None
            and session.run.strategy_override is None
            and session.run.at_interception_point
        ):
            session.run.inject(override)
        try:
            replayed = session.step()
        except SessionFinished:
            raise CorruptSessionFile(f"{path}: stores more events than the run produces") from None
        if event_to_dict(replayed) != saved:
            raise CorruptSessionFile(f"{path}: event {i} does not replay to the saved transcript")
    if override is not None and session.run.strategy_override is None:
        if not session.run.at_interception_point:
            raise CorruptSessionFile(f"{path}: saved strategy override cannot be applied")
        session.run.inject(override)
    return session
