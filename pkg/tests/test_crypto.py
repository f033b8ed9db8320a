"""Hashing, key derivation, and the CTR cipher.

Digest and cipher outputs are checked against frozen reference vectors and
against independent pure-Python reimplementations (sha256_oracle, aes_oracle)
so a library regression can't hide behind itself.
"""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mitmlab.crypto import (
    CipherLedger,
    Ciphertext,
    CryptoError,
    Digest,
    EmptyLabel,
    NonceReuse,
    SymmetricKey,
    decrypt,
    derive_key,
    derive_nonce,
    encrypt,
    hash_bytes,
    hash_text,
)

from aes_oracle import aes128_ctr_reference
from sha256_oracle import sha256_reference

# frozen: FIPS 180-4 test vectors
SHA256_EMPTY = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
SHA256_ABC = "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"

# frozen: NIST SP 800-38A F.5.1 CTR-AES128.Encrypt, first block
NIST_KEY = bytes.fromhex("2b7e151628aed2a6abf7158809cf4f3c")
NIST_COUNTER = bytes.fromhex("f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff")
NIST_PLAIN = bytes.fromhex("6bc1bee22e409f96e93d7e117393172a")
NIST_CIPHER = bytes.fromhex("874d6191b620e3261bef6864990db6ce")


# --- hashing ---


def test_hash_known_vectors() -> None:
    assert hash_bytes(b"").hex == SHA256_EMPTY
    assert hash_bytes(b"abc").hex == SHA256_ABC
    assert hash_text("abc").hex == SHA256_ABC


def test_hash_matches_independent_oracle_on_corpus() -> None:
    rng = random.Random(0xC0FFEE)
    for _ in range(1000):
        data = rng.randbytes(rng.randrange(0, 300))
        assert hash_bytes(data).value == sha256_reference(data)


def test_hash_text_is_utf8() -> None:
    assert hash_text("héllo").value == sha256_reference("héllo".encode("utf-8"))


def test_one_byte_change_moves_the_digest() -> None:
    rng = random.Random(404)
    for _ in range(100):
        data = bytearray(rng.randbytes(rng.randrange(1, 200)))
        original = hash_bytes(bytes(data))
        position = rng.randrange(len(data))
        data[position] ^= rng.randrange(1, 256)
        assert hash_bytes(bytes(data)) != original


def test_digest_hex_round_trip() -> None:
    d = hash_bytes(b"round trip")
    assert Digest.from_hex(d.hex) == d
    with pytest.raises(CryptoError):
        Digest(value=b"short")


# --- key and nonce derivation ---


def test_derive_key_is_deterministic_and_labelled() -> None:
    k1 = derive_key(42, "K")
    k2 = derive_key(42, "K")
    assert k1 == k2
    assert k1.key_id == "K"
    assert len(k1.material) == 16
    assert derive_key(43, "K").material != k1.material
    assert derive_key(42, "K_ATT").material != k1.material


def test_derive_key_matches_hash_construction() -> None:
    # material is the truncated digest of the packed seed plus the label
    import struct

    k = derive_key(7, "K_UB")
    assert k.material == sha256_reference(struct.pack(">Q", 7) + b"K_UB")[:16]


def test_derive_key_rejects_empty_label() -> None:
    with pytest.raises(EmptyLabel):
        derive_key(0, "")


def test_derive_nonce_distinct_per_counter() -> None:
    seen = {derive_nonce(5, i) for i in range(50)}
    assert len(seen) == 50
    assert all(len(n) == 16 for n in seen)


# --- cipher ---


def test_ctr_known_vector() -> None:
    key = SymmetricKey(key_id="K", material=NIST_KEY)
    ledger = CipherLedger()
    ct = encrypt(NIST_PLAIN, key, NIST_COUNTER, ledger)
    assert ct.body == NIST_CIPHER
    assert ct.nonce == NIST_COUNTER
    assert decrypt(ct, key) == NIST_PLAIN


def test_ctr_matches_independent_oracle() -> None:
    rng = random.Random(31337)
    for _ in range(60):
        key = SymmetricKey(key_id="K", material=rng.randbytes(16))
        nonce = rng.randbytes(16)
        data = rng.randbytes(rng.randrange(0, 200))
        ct = encrypt(data, key, nonce, CipherLedger())
        assert ct.body == aes128_ctr_reference(key.material, nonce, data)


@settings(max_examples=200, deadline=None)
@given(data=st.binary(max_size=4096), seed=st.integers(min_value=0, max_value=2**32))
def test_ctr_round_trip_preserves_length(data: bytes, seed: int) -> None:
    key = derive_key(seed, "K")
    nonce = derive_nonce(seed, 0)
    ct = encrypt(data, key, nonce, CipherLedger())
    assert len(ct.body) == len(data)
    assert decrypt(ct, key) == data


def test_empty_plaintext_seals_to_an_empty_body() -> None:
    key = derive_key(0, "K")
    ct = encrypt(b"", key, derive_nonce(0, 0), CipherLedger())
    assert ct.body == b""
    assert decrypt(ct, key) == b""


def test_wrong_key_yields_garbage_not_error() -> None:
    # detection is the hash's job, not the cipher's
    rng = random.Random(100)
    plaintext = b"Send $100 to Alice"
    for _ in range(100):
        key = derive_key(rng.randrange(2**63), "K")
        other = derive_key(rng.randrange(2**63), "K_ATT")
        ct = encrypt(plaintext, key, derive_nonce(0, 0), CipherLedger())
        assert decrypt(ct, other) != plaintext


def test_nonce_reuse_rejected_within_ledger() -> None:
    key = derive_key(0, "K")
    nonce = derive_nonce(0, 0)
    ledger = CipherLedger()
    encrypt(b"one", key, nonce, ledger)
    with pytest.raises(NonceReuse):
        encrypt(b"two", key, nonce, ledger)
    # a different key id may reuse the nonce; a fresh ledger forgets
    encrypt(b"three", derive_key(0, "K_ATT"), nonce, ledger)
    encrypt(b"four", key, nonce, CipherLedger())


def test_key_id_mismatch_is_a_warning_not_an_error() -> None:
    key = derive_key(3, "K")
    ct = encrypt(b"payload", key, derive_nonce(3, 0), CipherLedger())
    relabeled = Ciphertext(nonce=ct.nonce, body=ct.body, key_id="K_ATT")
    ledger = CipherLedger()
    assert decrypt(relabeled, key, ledger) == b"payload"
    assert any(w.kind == "KeyIdMismatch" for w in ledger.warnings)


def test_serialization_round_trips() -> None:
    key = derive_key(11, "K_UB")
    assert SymmetricKey.from_dict(key.to_dict()) == key
    ct = encrypt(b"wire", key, derive_nonce(11, 4), CipherLedger())
    assert Ciphertext.from_dict(ct.to_dict()) == ct
    assert ct.to_dict()["key_id"] == "K_UB"
