"""Hashing, symmetric sealing, and key derivation for the channel lab.

Everything here is deterministic: keys and nonces are derived from a run
seed, never sampled from the OS, so a whole run can be replayed
byte-for-byte.  AES-128 in CTR mode keeps ciphertext the same length as
the plaintext, which makes the "attacker flips a byte" probes honest.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

from cryptography.hazmat.primitives.ciphers import Cipher as _AES
from cryptography.hazmat.primitives.ciphers import algorithms, modes

DIGEST_LEN = 32
KEY_LEN = 16
NONCE_LEN = 16


class CryptoError(Exception):
    """Base for misuse of the crypto layer."""


class NonceReuse(CryptoError):
    """A (key, nonce) pair was fed to encrypt twice in one run."""


class EmptyLabel(CryptoError):
    """derive_key needs a nonempty label; the label doubles as the key id."""


# --- value types -----------------------------------------------------------


@dataclass(frozen=True)
class Digest:
    value: bytes

    def __post_init__(self) -> None:
        if len(self.value) != DIGEST_LEN:
            raise CryptoError(f"digest must be {DIGEST_LEN} bytes, got {len(self.value)}")

    @property
    def hex(self) -> str:
        return self.value.hex()

    @classmethod
    def from_hex(cls, text: str) -> "Digest":
        return cls(bytes.fromhex(text))


@dataclass(frozen=True)
class SymmetricKey:
    key_id: str
    material: bytes

    def __post_init__(self) -> None:
        if len(self.material) != KEY_LEN:
            raise CryptoError(f"key material must be {KEY_LEN} bytes, got {len(self.material)}")

    def to_dict(self) -> dict:
        return {"key_id": self.key_id, "material": self.material.hex()}

    @classmethod
    def from_dict(cls, doc: dict) -> "SymmetricKey":
        return cls(key_id=doc["key_id"], material=bytes.fromhex(doc["material"]))


@dataclass(frozen=True)
class Ciphertext:
    nonce: bytes
    body: bytes
    key_id: str  # advisory label of the key used; never trusted for decryption

    def __post_init__(self) -> None:
        if len(self.nonce) != NONCE_LEN:
            raise CryptoError(f"nonce must be {NONCE_LEN} bytes, got {len(self.nonce)}")

    def to_dict(self) -> dict:
        return {"nonce": self.nonce.hex(), "body": self.body.hex(), "key_id": self.key_id}

    @classmethod
    def from_dict(cls, doc: dict) -> "Ciphertext":
        return cls(
            nonce=bytes.fromhex(doc["nonce"]),
            body=bytes.fromhex(doc["body"]),
            key_id=doc["key_id"],
        )


@dataclass
class CryptoWarning:
    kind: str
    detail: str


@dataclass
class CipherLedger:
    """Run-scoped bookkeeping: nonce uniqueness plus non-fatal warnings.

    One ledger per run.  Sharing a ledger across runs would make unrelated
    runs interfere through the nonce registry, so don't.
    """

    _used: set[tuple[str, bytes]] = field(default_factory=set)
    warnings: list[CryptoWarning] = field(default_factory=list)

    def register_nonce(self, key_id: str, nonce: bytes) -> None:
        pair = (key_id, nonce)
        if pair in self._used:
            raise NonceReuse(f"nonce {nonce.hex()} already used with key {key_id!r}")
        self._used.add(pair)

    def warn(self, kind: str, detail: str) -> None:
        self.warnings.append(CryptoWarning(kind, detail))


# --- operations ------------------------------------------------------------


def hash_bytes(data: bytes) -> Digest:
    """SHA-256 of the raw bytes."""
    return Digest(hashlib.sha256(data).digest())


def hash_text(text: str) -> Digest:
    return hash_bytes(text.encode("utf-8"))


def derive_key(seed: int, label: str) -> SymmetricKey:
    """Deterministic 128-bit key: first 16 bytes of SHA-256(seed || label).

    The seed is packed as an unsigned 64-bit big-endian integer; the label
    becomes the key id.
    """
    if not label:
        raise EmptyLabel("key label must be nonempty")
    material = hash_bytes(struct.pack(">Q", seed) + label.encode("utf-8")).value[:KEY_LEN]
    return SymmetricKey(key_id=label, material=material)


def derive_nonce(seed: int, counter: int) -> bytes:
    """Nonce stream for a run: distinct per counter, reproducible per seed."""
    return hash_bytes(struct.pack(">Q", seed) + b"/nonce/" + struct.pack(">I", counter)).value[
        :NONCE_LEN
    ]


def _keystream_xor(key: SymmetricKey, nonce: bytes, data: bytes) -> bytes:
    # CTR with the nonce as the full initial counter block (SP 800-38A layout).
    ctx = _AES(algorithms.AES(key.material), modes.CTR(nonce)).encryptor()
    return ctx.update(data) + ctx.finalize()


def encrypt(plaintext: bytes, key: SymmetricKey, nonce: bytes, ledger: CipherLedger) -> Ciphertext:
    """Seal `plaintext` under AES-128-CTR.  Refuses a reused (key, nonce)."""
    ledger.register_nonce(key.key_id, nonce)
    return Ciphertext(nonce=nonce, body=_keystream_xor(key, nonce, plaintext), key_id=key.key_id)


def decrypt(ciphertext: Ciphertext, key: SymmetricKey, ledger: CipherLedger | None = None) -> bytes:
    """Unseal with whatever key the caller holds.

    A wrong key is not an error here: CTR decryption always "succeeds" and
    yields garbage, exactly like the real primitive.  Tampering is for the
    hash check to catch.  A key-id mismatch is recorded on the ledger as a
    warning so transcripts can show the bank shrugging at mislabeled
    ciphertext, but decryption proceeds with the caller's key.
    """
    if ledger is not None and ciphertext.key_id != key.key_id:
        ledger.warn(
            "KeyIdMismatch",
            f"ciphertext labeled {ciphertext.key_id!r}, decrypting with {key.key_id!r}",
        )
    return _keystream_xor(key, ciphertext.nonce, ciphertext.body)
