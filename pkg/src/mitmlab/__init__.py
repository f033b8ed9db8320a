"""Scripted man-in-the-middle drills over a toy banking channel.

Six built-in scenarios walk the ladder from an unprotected wire to
CA-authenticated key exchange; an analyzer sweeps defense configs against
attacker strategies and grades confidentiality, integrity, authentication.
"""

from __future__ import annotations

from .analyzer import (
    PROPERTIES,
    PropertyReport,
    Witness,
    analyze,
    brute_force_oracle,
    check_monotonicity,
    classify_insecure_key_sharing,
    replay_witness,
    strategy_subsets,
)
from .channel import (
    AttackerObservations,
    Channel,
    Cipher,
    DigestPart,
    Envelope,
    Identity,
    KeyGrant,
    KeyRequest,
    Plain,
    Transcript,
    attacker_view,
    canonical_json,
    view_as_text,
)
from .crypto import (
    Ciphertext,
    CipherLedger,
    Digest,
    NonceReuse,
    SymmetricKey,
    decrypt,
    derive_key,
    derive_nonce,
    encrypt,
    hash_bytes,
    hash_text,
)
from .engine import (
    ScenarioRun,
    Session,
    load_session,
    run_scenario,
    run_scenario_with_injection,
    save_session,
)
from .scenarios import (
    BUILTIN_SCENARIOS,
    Outcome,
    ProtectionConfig,
    Scenario,
    get_scenario,
    list_scenarios,
    load_scenario_file,
    valid_configs,
)
from .strategies import CORE_STRATEGY_NAMES, REGISTRY, AttackerStrategy, get_strategy

__version__ = "0.1.0"

__all__ = [
    "AttackerObservations",
    "AttackerStrategy",
    "BUILTIN_SCENARIOS",
    "CORE_STRATEGY_NAMES",
    "Channel",
    "Cipher",
    "CipherLedger",
    "Ciphertext",
    "Digest",
    "DigestPart",
    "Envelope",
    "Identity",
    "KeyGrant",
    "KeyRequest",
    "NonceReuse",
    "Outcome",
    "PROPERTIES",
    "Plain",
    "PropertyReport",
    "ProtectionConfig",
    "REGISTRY",
    "Scenario",
    "ScenarioRun",
    "Session",
    "SymmetricKey",
    "Transcript",
    "Witness",
    "analyze",
    "attacker_view",
    "brute_force_oracle",
    "canonical_json",
    "check_monotonicity",
    "classify_insecure_key_sharing",
    "decrypt",
    "derive_key",
    "derive_nonce",
    "encrypt",
    "get_scenario",
    "get_strategy",
    "hash_bytes",
    "hash_text",
    "list_scenarios",
    "load_scenario_file",
    "load_session",
    "replay_witness",
    "run_scenario",
    "run_scenario_with_injection",
    "save_session",
    "valid_configs",
    "view_as_text",
]
