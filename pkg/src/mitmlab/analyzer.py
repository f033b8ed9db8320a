"""Security-property verdicts over defense sets and attacker strategies.

The three properties get operational definitions over run artifacts:

* confidentiality is violated when the attacker's view contains the
  genuine transaction text (read directly or recovered with a held key);
* integrity is violated when a transaction that executed was altered
  in flight (its envelope's Intercepted event shows before != after);
* authentication is violated when a forged transaction executed without
  in-flight alteration, i.e. the attacker fabricated it outright.

`analyze` classifies from typed run objects.  `brute_force_oracle`
re-derives the same verdicts from nothing but the serialized transcript
and view documents; the two must agree everywhere, which the test suite
checks across every valid defense set and strategy subset.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .channel import (
    AttackerObservations,
    Channel,
    Cipher,
    Executed,
    Identity,
    Intercepted,
    Interceptor,
    KeyGrant,
    Principal,
    Rejected,
    part_to_dict,
    view_as_text,
)
from .crypto import CipherLedger, decrypt, derive_key, derive_nonce, encrypt, hash_text
from .engine import ScenarioRun
from .scenarios import (
    BUNDLE_SEPARATOR,
    DEFAULT_MESSAGE,
    FORGED_MESSAGE,
    ProtectionConfig,
    Scenario,
    valid_configs,
)
from .strategies import CORE_STRATEGY_NAMES, get_strategy

PROPERTIES = ("confidentiality", "integrity", "authentication")
HOLDS = "holds"
VIOLATED = "violated"

# Witness label for the key-sharing classifier; not an interception strategy.
INSECURE_KEY_SHARING = "insecure_key_sharing"


class EmptyStrategySet(ValueError):
    """Both analyze() and the oracle refuse an empty strategy set."""


@dataclass(frozen=True)
class Witness:
    """Enough to replay a violation: which run showed it."""

    config: ProtectionConfig
    strategy: str
    seed: int

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "strategy": self.strategy, "seed": self.seed}


@dataclass
class PropertyReport:
    config: ProtectionConfig
    seed: int
    strategies: tuple[str, ...]
    verdicts: dict[str, str]
    witnesses: dict[str, Witness | None]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "seed": self.seed,
            "strategies": list(self.strategies),
            "properties": {
                name: {
                    "verdict": self.verdicts[name],
                    "witness": w.to_dict() if (w := self.witnesses[name]) is not None else None,
                }
                for name in PROPERTIES
            },
        }


def _probe_run(config: ProtectionConfig, strategy: str, seed: int) -> ScenarioRun:
    probe = Scenario(id=0, title="analysis probe", config=config, strategy=strategy)
    run = ScenarioRun(probe, seed)
    run.run_to_completion()
    return run


def _violations_from_run(run: ScenarioRun) -> dict[str, bool]:
    genuine = run.scenario.message_text
    events = run.transcript.events
    altered = {e.before.seq for e in events if isinstance(e, Intercepted) and e.before != e.after}
    forged = [
        (e.seq, e.transaction_text)
        for e in events
        if isinstance(e, Executed) and e.transaction_text != genuine
    ]
    return {
        "confidentiality": genuine in view_as_text(run.attacker_view()),
        "integrity": any(seq in altered for seq, _ in forged),
        "authentication": any(seq not in altered for seq, _ in forged),
    }


_analysis_cache: dict[tuple[ProtectionConfig, str, int], dict[str, bool]] = {}


def analyze(
    config: ProtectionConfig, strategies: Sequence[str], seed: int = 0
) -> PropertyReport:
    """Run each strategy against the defense set and aggregate verdicts.

    A property is violated if any strategy in the set violates it; the
    witness names the first offender in the given order.
    """
    names = list(strategies)
    if not names:
        raise EmptyStrategySet("analyze needs at least one strategy")
    for name in names:
        get_strategy(name)
    verdicts = {name: HOLDS for name in PROPERTIES}
    witnesses: dict[str, Witness | None] = {name: None for name in PROPERTIES}
    for name in names:
        cache_key = (config, name, seed)
        if cache_key not in _analysis_cache:
            _analysis_cache[cache_key] = _violations_from_run(_probe_run(config, name, seed))
        found = _analysis_cache[cache_key]
        for prop in PROPERTIES:
            if found[prop] and witnesses[prop] is None:
                verdicts[prop] = VIOLATED
                witnesses[prop] = Witness(config=config, strategy=name, seed=seed)
    return PropertyReport(
        config=config, seed=seed, strategies=tuple(names), verdicts=verdicts, witnesses=witnesses
    )


# --- the independent checker -------------------------------------------------


def _oracle_violations(config: ProtectionConfig, strategy: str, seed: int) -> dict[str, bool]:
    """Verdicts for one run, derived only from its serialized artifacts."""
    run = _probe_run(config, strategy, seed)
    transcript = run.transcript.to_document()
    view = [part_to_dict(p) for p in run.attacker_view()]
    message = run.scenario.message_text

    leaked = any(p["kind"] == "plain" and message in p["text"] for p in view)
    events = transcript["events"]
    altered_seqs = set()
    for e in events:
        if e["type"] == "Intercepted" and e["before"] != e["after"]:
            altered_seqs.add(e["seq"])
    forged_altered = False
    forged_fabricated = False
    for e in events:
        if e["type"] == "Executed" and e["transaction_text"] != message:
            if e["seq"] in altered_seqs:
                forged_altered = True
            else:
                forged_fabricated = True
    return {
        "confidentiality": leaked,
        "integrity": forged_altered,
        "authentication": forged_fabricated,
    }


_oracle_cache: dict[tuple[ProtectionConfig, str, int], dict[str, bool]] = {}


def brute_force_oracle(
    config: ProtectionConfig, strategies: Sequence[str], seed: int = 0
) -> dict:
    """Same report shape as analyze().to_dict(), derived from raw transcripts."""
    names = list(strategies)
    if not names:
        raise EmptyStrategySet("the oracle needs at least one strategy")
    for name in names:
        get_strategy(name)
    properties: dict[str, dict] = {
        name: {"verdict": HOLDS, "witness": None} for name in PROPERTIES
    }
    for name in names:
        cache_key = (config, name, seed)
        if cache_key not in _oracle_cache:
            _oracle_cache[cache_key] = _oracle_violations(config, name, seed)
        found = _oracle_cache[cache_key]
        for prop in PROPERTIES:
            if found[prop] and properties[prop]["witness"] is None:
                properties[prop]["verdict"] = VIOLATED
                properties[prop]["witness"] = {
                    "config": config.to_dict(),
                    "strategy": name,
                    "seed": seed,
                }
    return {
        "config": config.to_dict(),
        "seed": seed,
        "strategies": names,
        "properties": properties,
    }


def replay_witness(witness: Witness, property_name: str) -> bool:
    """True when re-running the witness reproduces the violation."""
    if property_name not in PROPERTIES:
        raise ValueError(f"unknown property {property_name!r}")
    if witness.strategy == INSECURE_KEY_SHARING:
        report = classify_insecure_key_sharing(witness.seed)
        return report.verdicts[property_name] == VIOLATED
    found = _violations_from_run(_probe_run(witness.config, witness.strategy, witness.seed))
    return found[property_name]


# --- sweep helpers ------------------------------------------------------------


def strategy_subsets() -> list[tuple[str, ...]]:
    """All 31 nonempty subsets of the five core strategies, in a fixed order."""
    out: list[tuple[str, ...]] = []
    for size in range(1, len(CORE_STRATEGY_NAMES) + 1):
        out.extend(combinations(CORE_STRATEGY_NAMES, size))
    return out


def defense_edges() -> list[tuple[ProtectionConfig, ProtectionConfig]]:
    """Pairs (weaker, stronger) differing by exactly one added defense."""
    configs = valid_configs()
    edges = []
    for weaker in configs:
        for stronger in configs:
            gained = [
                (not getattr(weaker, f)) and getattr(stronger, f)
                for f in ("integrity_hash", "confidentiality_encryption", "ca_authentication")
            ]
            lost = [
                getattr(weaker, f) and (not getattr(stronger, f))
                for f in ("integrity_hash", "confidentiality_encryption", "ca_authentication")
            ]
            if sum(gained) == 1 and not any(lost):
                edges.append((weaker, stronger))
    return edges


def check_monotonicity(
    seed: int = 0, subsets: Iterable[tuple[str, ...]] | None = None
) -> list[dict]:
    """Adding a defense must never flip a verdict from holds to violated.

    Returns the offending cases; an empty list means the ladder is sane.
    """
    violations = []
    for subset in subsets if subsets is not None else strategy_subsets():
        for weaker, stronger in defense_edges():
            before = analyze(weaker, subset, seed).verdicts
            after = analyze(stronger, subset, seed).verdicts
            for prop in PROPERTIES:
                if before[prop] == HOLDS and after[prop] == VIOLATED:
                    violations.append(
                        {
                            "property": prop,
                            "strategies": list(subset),
                            "weaker": weaker.to_dict(),
                            "stronger": stronger.to_dict(),
                        }
                    )
    return violations


# --- the key-sharing antipattern ----------------------------------------------


def _simulate_key_sharing(seed: int, secure_issuance: bool) -> tuple[Principal, bool, bool]:
    """Play out the key-distribution flow; see classify_insecure_key_sharing."""
    principals = {
        Identity.USER: Principal(Identity.USER),
        Identity.BANK: Principal(Identity.BANK),
        Identity.ATTACKER: Principal(Identity.ATTACKER),
        Identity.CA: Principal(Identity.CA),
    }
    attacker = principals[Identity.ATTACKER]
    events: list = []
    channel = Channel(principals, emit=events.append)
    observations = AttackerObservations(attacker)

    def _tap(envelope):
        observations.record_envelope(envelope)
        return envelope

    channel.install_interceptor(Interceptor(name_of=lambda: "passive_read", transform=_tap))

    ledger = CipherLedger()
    key = derive_key(seed, "K")
    principals[Identity.BANK].key_store[key.key_id] = key
    principals[Identity.USER].key_store[key.key_id] = key
    message = DEFAULT_MESSAGE
    bundle = f"{message}{BUNDLE_SEPARATOR}{hash_text(message).hex}"
    sealed = Cipher(
        ciphertext=encrypt(bundle.encode("utf-8"), key, derive_nonce(seed, 0), ledger)
    )

    if secure_issuance:
        channel.send(Identity.CA, Identity.USER, (KeyGrant(key=key),), secure=True)
        channel.send(Identity.BANK, Identity.USER, (sealed,))
    else:
        channel.send(Identity.BANK, Identity.USER, (KeyGrant(key=key), sealed))

    # With whatever key it now holds, the attacker tries a forgery.
    forgery_key = attacker.key_store.get(key.key_id) or derive_key(seed, "K_ATT")
    forged_bundle = f"{FORGED_MESSAGE}{BUNDLE_SEPARATOR}{hash_text(FORGED_MESSAGE).hex}"
    forged = Cipher(
        ciphertext=encrypt(forged_bundle.encode("utf-8"), forgery_key, derive_nonce(seed, 1), ledger)
    )
    envelope = channel.send(
        Identity.USER, Identity.BANK, (forged,), origin=Identity.ATTACKER
    )
    opened = decrypt(forged.ciphertext, key, ledger).decode("utf-8", errors="replace")
    accepted = False
    if BUNDLE_SEPARATOR in opened:
        text, digest_hex = opened.rsplit(BUNDLE_SEPARATOR, 1)
        accepted = hash_text(text).hex == digest_hex
    if accepted:
        events.append(Executed(transaction_text=opened.rsplit(BUNDLE_SEPARATOR, 1)[0], seq=envelope.seq))
    else:
        events.append(Rejected(reason="hash mismatch on opened bundle", seq=envelope.seq))

    leaked = message in view_as_text(observations.view())
    return attacker, leaked, accepted


def classify_insecure_key_sharing(seed: int, *, secure_issuance: bool = False) -> PropertyReport:
    """Judge the "key and ciphertext down the same wire" pattern.

    Insecure variant: the bank pushes KeyGrant and a sealed transaction in
    one tappable envelope.  The attacker lifts the key at observation time,
    reads the plaintext, and can then forge sealed transactions of its own:
    confidentiality and authentication both go.  With the grant moved onto
    the CA's secure side channel the same traffic leaks nothing and the
    forgery (now under a made-up key) bounces off the hash check.
    """
    _, leaked, accepted = _simulate_key_sharing(seed, secure_issuance)
    config = ProtectionConfig(
        integrity_hash=True, confidentiality_encryption=True, ca_authentication=secure_issuance
    )
    verdicts = {
        "confidentiality": VIOLATED if leaked else HOLDS,
        "integrity": HOLDS,
        "authentication": VIOLATED if accepted else HOLDS,
    }
    witness = Witness(config=config, strategy=INSECURE_KEY_SHARING, seed=seed)
    witnesses = {
        name: (witness if verdicts[name] == VIOLATED else None) for name in PROPERTIES
    }
    return PropertyReport(
        config=config,
        seed=seed,
        strategies=(INSECURE_KEY_SHARING,),
        verdicts=verdicts,
        witnesses=witnesses,
    )
